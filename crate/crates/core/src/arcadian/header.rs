// SPDX-License-Identifier: Apache-2.0

//! Optional header records in front of a trace file.
//!
//! ```text
//! @automaton <opaque text>
//! @id q=3 kappa=7 V=v0,v1 w=<opaque> w'=<opaque> S=<opaque>
//! ```
//!
//! Headers are checked for shape only: `q` and `kappa` are naturals and
//! `V` is a comma-separated list of variable names (`-` when empty).

use thiserror::Error;

use crate::formula::Var;
use crate::game::TraceError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstantaneousDescription {
    pub q: u64,
    pub kappa: u64,
    pub v: Vec<Var>,
    pub w: String,
    pub w_prime: String,
    pub store: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RunFile {
    pub automaton: Option<String>,
    pub ids: Vec<InstantaneousDescription>,
    /// The trace records, header lines removed.
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeaderError {
    #[error("line {line}: {msg}")]
    Header { line: usize, msg: String },
    #[error(transparent)]
    Trace(TraceError),
}

fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn parse_id(rest: &str, line: usize) -> Result<InstantaneousDescription, HeaderError> {
    let err = |msg: String| HeaderError::Header { line, msg };
    let mut fields: [Option<String>; 6] = Default::default();
    const KEYS: [&str; 6] = ["q", "kappa", "V", "w", "w'", "S"];
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, found `{tok}`")))?;
        let idx = KEYS
            .iter()
            .position(|key| *key == k)
            .ok_or_else(|| err(format!("unknown field `{k}`")))?;
        if fields[idx].replace(v.to_owned()).is_some() {
            return Err(err(format!("duplicate field `{k}`")));
        }
    }
    let mut take = |i: usize| {
        fields[i]
            .take()
            .ok_or_else(|| err(format!("missing field `{}`", KEYS[i])))
    };
    let nat = |s: String, k: &str| {
        s.parse::<u64>()
            .map_err(|_| err(format!("`{k}` must be a natural, found `{s}`")))
    };
    let q = nat(take(0)?, "q")?;
    let kappa = nat(take(1)?, "kappa")?;
    let vs = take(2)?;
    let v = if vs == "-" {
        Vec::new()
    } else {
        vs.split(',')
            .map(|n| {
                if is_var_name(n) {
                    Ok(Var::new(n))
                } else {
                    Err(err(format!("bad variable `{n}` in V")))
                }
            })
            .collect::<Result<_, _>>()?
    };
    Ok(InstantaneousDescription {
        q,
        kappa,
        v,
        w: take(3)?,
        w_prime: take(4)?,
        store: take(5)?,
    })
}

/// Splits header records from the trace body.
pub fn parse_run_file(text: &str) -> Result<RunFile, HeaderError> {
    let mut file = RunFile::default();
    let mut body = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("@automaton") {
            if file.automaton.is_some() {
                return Err(HeaderError::Header {
                    line: n + 1,
                    msg: "duplicate @automaton".into(),
                });
            }
            file.automaton = Some(rest.trim().to_owned());
            body.push("");
        } else if let Some(rest) = line.strip_prefix("@id") {
            file.ids.push(parse_id(rest, n + 1)?);
            body.push("");
        } else if line.starts_with('@') {
            return Err(HeaderError::Header {
                line: n + 1,
                msg: format!("unknown header `{line}`"),
            });
        } else {
            body.push(raw);
        }
    }
    file.body = body.join("\n");
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers() {
        let text = "@automaton tree=3 states=2\n@id q=1 kappa=0 V=v0,v1 w=. w'=. S=[]\n0 | start | - | - | - | A\n";
        let f = parse_run_file(text).unwrap();
        assert_eq!(f.automaton.as_deref(), Some("tree=3 states=2"));
        assert_eq!(f.ids.len(), 1);
        assert_eq!(f.ids[0].v, vec![Var::new("v0"), Var::new("v1")]);
        assert_eq!(f.ids[0].store, "[]");
        assert!(f.body.contains("0 | start"));
    }

    #[test]
    fn malformed_headers() {
        for bad in [
            "@id q=x kappa=0 V=- w=. w'=. S=.",
            "@id q=1 kappa=0 V=- w=.",
            "@id q=1 kappa=0 V=9a w=. w'=. S=.",
            "@id q=1 q=2 kappa=0 V=- w=. w'=. S=.",
            "@bogus",
        ] {
            assert!(
                matches!(
                    parse_run_file(bad),
                    Err(HeaderError::Header { line: 1, .. })
                ),
                "{bad}"
            );
        }
    }
}
