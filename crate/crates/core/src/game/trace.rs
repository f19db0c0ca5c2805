// SPDX-License-Identifier: Apache-2.0

//! Play traces. Text form, one record per line:
//!
//! ```text
//! turn | rule | alpha | choice | Γ | τ
//! ```
//!
//! The first record is `0 | start | - | - | Γ | τ`. `choice` is `left` or
//! `right` for the starred rules, the variable for a4, a5, b4 and b5, and
//! `-` otherwise. Γ is `-` when empty, otherwise its formulas joined by
//! ` ; `. Lines starting with `#` are skipped by the parser.

use std::fmt;

use thiserror::Error;

use super::{apply_move, Branch, GameError, Move, Position, Rule};
use crate::formula::{parse, Formula, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub turn: usize,
    /// `None` for the start record.
    pub rule: Option<Rule>,
    pub selected: Option<Formula>,
    pub branch: Option<Branch>,
    pub var: Option<Var>,
    pub position: Position,
}

impl TraceEntry {
    pub fn to_move(&self) -> Option<Move> {
        Some(Move::new(
            self.rule?,
            self.selected.clone()?,
            self.var.clone(),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("record {index}: {source}")]
    Replay { index: usize, source: GameError },
    #[error("record {index}: successor differs from the recorded position")]
    Mismatch { index: usize },
    #[error("empty trace")]
    Empty,
}

impl Trace {
    pub fn new(start: Position) -> Self {
        Trace {
            entries: vec![TraceEntry {
                turn: 0,
                rule: None,
                selected: None,
                branch: None,
                var: None,
                position: start,
            }],
        }
    }

    pub fn push(&mut self, turn: usize, mv: &Move, branch: Option<Branch>, position: Position) {
        self.entries.push(TraceEntry {
            turn,
            rule: Some(mv.rule),
            selected: Some(mv.selected.clone()),
            branch,
            var: mv.var.clone(),
            position,
        });
    }

    pub fn pop(&mut self) -> Option<TraceEntry> {
        if self.entries.len() > 1 {
            self.entries.pop()
        } else {
            None
        }
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn positions(&self) -> Vec<&Position> {
        self.entries.iter().map(|e| &e.position).collect()
    }

    pub fn start(&self) -> &Position {
        &self.entries[0].position
    }

    pub fn last(&self) -> &Position {
        &self.entries[self.entries.len() - 1].position
    }

    /// Number of records, the start record included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Replays every recorded move from the start position.
    pub fn verify(&self) -> Result<(), TraceError> {
        for (i, w) in self.entries.windows(2).enumerate() {
            let index = i + 1;
            let mv = w[1].to_move().ok_or(TraceError::Mismatch { index })?;
            let next = apply_move(&w[0].position, &mv, w[1].branch)
                .map_err(|source| TraceError::Replay { index, source })?;
            if next != w[1].position {
                return Err(TraceError::Mismatch { index });
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            entries.push(parse_record(trimmed, line_no)?);
        }
        if entries.is_empty() {
            return Err(TraceError::Empty);
        }
        if entries[0].rule.is_some() {
            return Err(TraceError::Syntax {
                line: 1,
                msg: "first record must be the start record".into(),
            });
        }
        Ok(Trace { entries })
    }
}

fn parse_record(line: &str, line_no: usize) -> Result<TraceEntry, TraceError> {
    let err = |msg: String| TraceError::Syntax { line: line_no, msg };
    let fields: Vec<&str> = line.split('|').map(str::trim).collect();
    if fields.len() != 6 {
        return Err(err(format!("expected 6 fields, found {}", fields.len())));
    }
    let formula = |s: &str| parse(s).map_err(|e| err(format!("`{s}`: {e}")));
    let turn: usize = fields[0]
        .parse()
        .map_err(|_| err(format!("bad turn `{}`", fields[0])))?;
    let rule = match fields[1] {
        "start" => None,
        r => Some(r.parse::<Rule>().map_err(|e| err(e.to_string()))?),
    };
    let selected = match fields[2] {
        "-" => None,
        s => Some(formula(s)?),
    };
    let (branch, var) = match (fields[3], rule) {
        ("-", _) => (None, None),
        (c, Some(r)) if r.is_starred() => (
            Some(c.parse::<Branch>().map_err(|e| err(e.to_string()))?),
            None,
        ),
        (c, _) => (None, Some(Var::new(c))),
    };
    let gamma: Vec<Formula> = match fields[4] {
        "-" | "" => Vec::new(),
        g => g
            .split(';')
            .map(|s| formula(s.trim()))
            .collect::<Result<_, _>>()?,
    };
    let target = formula(fields[5])?;
    if rule.is_some() != selected.is_some() {
        return Err(err("rule and selected formula must both be present".into()));
    }
    Ok(TraceEntry {
        turn,
        rule,
        selected,
        branch,
        var,
        position: Position::new(gamma, target),
    })
}

fn dash<T: fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".to_owned(), |v| v.to_string())
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rule = self
            .rule
            .map_or_else(|| "start".to_owned(), |r| r.to_string());
        let choice = match (&self.branch, &self.var) {
            (Some(b), _) => b.to_string(),
            (None, v) => dash(v),
        };
        let gamma = if self.position.assumptions().is_empty() {
            "-".to_owned()
        } else {
            self.position
                .assumptions()
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(" ; ")
        };
        write!(
            f,
            "{} | {} | {} | {} | {} | {}",
            self.turn,
            rule,
            dash(&self.selected),
            choice,
            gamma,
            self.position.target()
        )
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play, LeftAfrodite, RandomEros};

    #[test]
    fn golden_text() {
        let p = Position::start(parse("forall X. P(X) \\/ (P(X) -> false)").unwrap());
        let mut t = Trace::new(p.clone());
        let mv = Move::new(Rule::B4, p.target().clone(), Some(Var::new("v0")));
        let next = apply_move(&p, &mv, None).unwrap();
        t.push(1, &mv, None, next.clone());
        let mv2 = Move::new(Rule::B1, parse("P(v0) -> false").unwrap(), None);
        let next2 = apply_move(&next, &mv2, None).unwrap();
        t.push(2, &mv2, None, next2);
        assert_eq!(
            t.to_text(),
            "0 | start | - | - | - | forall X. P(X) \\/ (P(X) -> false)\n\
             1 | b4 | forall X. P(X) \\/ (P(X) -> false) | v0 | - | P(v0) \\/ (P(v0) -> false)\n\
             2 | b1 | P(v0) -> false | - | P(v0) | false\n"
        );
        assert_eq!(Trace::parse(&t.to_text()).unwrap(), t);
        t.verify().unwrap();
    }

    #[test]
    fn round_trip_random_plays() {
        let p = Position::start(parse("((A -> B) -> A) -> (A \\/ (B /\\ C))").unwrap());
        for seed in 0..20 {
            let out = play(&p, &mut RandomEros::new(seed), &mut LeftAfrodite, 15).unwrap();
            let text = out.trace().to_text();
            let back = Trace::parse(&text).unwrap();
            assert_eq!(&back, out.trace());
            back.verify().unwrap();
        }
    }

    #[test]
    fn verify_rejects_tampering() {
        let text = "0 | start | - | - | - | A -> B\n1 | b1 | A -> B | - | A | A\n";
        let t = Trace::parse(text).unwrap();
        assert_eq!(t.verify(), Err(TraceError::Mismatch { index: 1 }));
        assert!(matches!(
            Trace::parse("1 | b1 | x"),
            Err(TraceError::Syntax { .. })
        ));
        assert_eq!(Trace::parse("# header only\n"), Err(TraceError::Empty));
    }
}
