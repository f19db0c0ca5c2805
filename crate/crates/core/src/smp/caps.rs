// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proof::SearchLimits;

/// Environment variable holding default caps, e.g.
/// `model=5,depth=12,nodes=200000`.
pub const CAPS_ENV: &str = "IFOG_DEFAULT_CAPS";

/// Search caps shared by the deciders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest model size `|C| + |⋃A|` enumerated.
    pub max_model: usize,
    /// Proof depth bound.
    pub max_depth: usize,
    /// Proof-search nodes per attempt, at most.
    pub max_nodes: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_model: 5,
            max_depth: 12,
            max_nodes: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CapsError {
    #[error("malformed cap `{0}`, expected key=value")]
    Malformed(String),
    #[error("unknown cap `{0}`")]
    UnknownKey(String),
    #[error("cap `{0}` must be a positive integer")]
    BadValue(String),
}

impl Caps {
    pub fn limits(&self) -> SearchLimits {
        SearchLimits {
            max_depth: self.max_depth,
            max_nodes: self.max_nodes,
        }
    }

    /// Defaults, overridden by [`CAPS_ENV`] when it is set.
    pub fn from_env() -> Result<Caps, CapsError> {
        match std::env::var(CAPS_ENV) {
            Ok(s) if !s.trim().is_empty() => s.parse(),
            _ => Ok(Caps::default()),
        }
    }
}

impl FromStr for Caps {
    type Err = CapsError;

    /// Comma-separated `key=value` pairs over `model`, `depth`, `nodes`;
    /// missing keys keep their defaults.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut caps = Caps::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| CapsError::Malformed(part.to_owned()))?;
            let n: u64 = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| CapsError::BadValue(k.trim().to_owned()))?;
            match k.trim() {
                "model" => caps.max_model = n as usize,
                "depth" => caps.max_depth = n as usize,
                "nodes" => caps.max_nodes = n,
                other => return Err(CapsError::UnknownKey(other.to_owned())),
            }
        }
        Ok(caps)
    }
}

impl fmt::Display for Caps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "model={},depth={},nodes={}",
            self.max_model, self.max_depth, self.max_nodes
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let c: Caps = "model=3, nodes=1000".parse().unwrap();
        assert_eq!(c.max_model, 3);
        assert_eq!(c.max_depth, 12);
        assert_eq!(c.to_string(), "model=3,depth=12,nodes=1000");
        assert_eq!(c.to_string().parse::<Caps>().unwrap(), c);
        assert_eq!(
            "x=1".parse::<Caps>(),
            Err(CapsError::UnknownKey("x".into()))
        );
        assert_eq!(
            "model=0".parse::<Caps>(),
            Err(CapsError::BadValue("model".into()))
        );
        assert_eq!(
            "model".parse::<Caps>(),
            Err(CapsError::Malformed("model".into()))
        );
    }
}
