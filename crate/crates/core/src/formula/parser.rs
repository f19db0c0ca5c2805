// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the concrete formula syntax:
//!
//! ```text
//! formula := quant | impl
//! quant   := ("forall" | "exists") VAR "." formula
//! impl    := disj [ "->" formula ]
//! disj    := conj { "\/" conj }
//! conj    := atomf { "/\" atomf }
//! atomf   := "false" | PRED [ "(" VAR { "," VAR } ")" ] | "(" formula ")"
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Formula, Var};

/// Declared predicate arities.
pub type Signature = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(
        "arity mismatch at offset {pos}: {pred} expects {expected} argument(s), found {found}"
    )]
    ArityMismatch {
        pos: usize,
        pred: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Forall,
    Exists,
    False,
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    Or,
    And,
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of input".into(),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(Tok::Forall) => "`forall`".into(),
        Some(Tok::Exists) => "`exists`".into(),
        Some(Tok::False) => "`false`".into(),
        Some(Tok::LParen) => "`(`".into(),
        Some(Tok::RParen) => "`)`".into(),
        Some(Tok::Comma) => "`,`".into(),
        Some(Tok::Dot) => "`.`".into(),
        Some(Tok::Arrow) => "`->`".into(),
        Some(Tok::Or) => "`\\/`".into(),
        Some(Tok::And) => "`/\\`".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = bytes.get(i..i + 2);
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'-' if two == Some(b"->") => {
                i += 1;
                Tok::Arrow
            }
            b'\\' if two == Some(b"\\/") => {
                i += 1;
                Tok::Or
            }
            b'/' if two == Some(b"/\\") => {
                i += 1;
                Tok::And
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                match &text[start..=i] {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    "false" => Tok::False,
                    word => Tok::Ident(word.to_owned()),
                }
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    declared: Option<&'a Signature>,
    seen: Signature,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(&describe(Some(&t)))
        }
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let v = Var::new(name.clone());
                self.at += 1;
                Ok(v)
            }
            _ => self.error("a variable"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Forall) | Some(Tok::Exists) => {
                let universal = self.peek() == Some(&Tok::Forall);
                self.at += 1;
                let x = self.var()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall(x, body)
                } else {
                    Formula::exists(x, body)
                })
            }
            _ => {
                let lhs = self.disj()?;
                if self.eat(&Tok::Arrow) {
                    let rhs = self.formula()?;
                    Ok(Formula::implies(lhs, rhs))
                } else {
                    Ok(lhs)
                }
            }
        }
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conj()?];
        while self.eat(&Tok::Or) {
            parts.push(self.conj()?);
        }
        Ok(fold_right(parts, Formula::or))
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.atomf()?];
        while self.eat(&Tok::And) {
            parts.push(self.atomf()?);
        }
        Ok(fold_right(parts, Formula::and))
    }

    fn atomf(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::False) => {
                self.at += 1;
                Ok(Formula::Falsum)
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                let pos = self.pos();
                self.at += 1;
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    args.push(self.var()?);
                    while self.eat(&Tok::Comma) {
                        args.push(self.var()?);
                    }
                    self.expect(Tok::RParen)?;
                }
                self.check_arity(&name, args.len(), pos)?;
                Ok(Formula::Atom(name, args))
            }
            _ => self.error("a formula"),
        }
    }

    fn check_arity(&mut self, pred: &str, found: usize, pos: usize) -> Result<(), ParseError> {
        let expected = self
            .declared
            .and_then(|d| d.get(pred))
            .or_else(|| self.seen.get(pred))
            .copied();
        match expected {
            Some(expected) if expected != found => Err(ParseError::ArityMismatch {
                pos,
                pred: pred.to_owned(),
                expected,
                found,
            }),
            _ => {
                self.seen.insert(pred.to_owned(), found);
                Ok(())
            }
        }
    }
}

fn fold_right(mut parts: Vec<Formula>, op: fn(Formula, Formula) -> Formula) -> Formula {
    let mut acc = parts.pop().expect("at least one operand");
    while let Some(prev) = parts.pop() {
        acc = op(prev, acc);
    }
    acc
}

fn run(text: &str, declared: Option<&Signature>) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
        declared,
        seen: Signature::new(),
    };
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.error("end of input");
    }
    Ok(f)
}

/// Parses a formula, requiring each predicate to be used with one arity.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    run(text, None)
}

/// Parses a formula against declared predicate arities.
pub fn parse_with_signature(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    run(text, Some(sig))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom() {
        assert_eq!(parse("P(X)").unwrap(), Formula::atom("P", &["X"]));
    }

    #[test]
    fn precedence() {
        let f = parse("forall X. P(X) \\/ (P(X) -> false)").unwrap();
        let px = Formula::atom("P", &["X"]);
        assert_eq!(
            f,
            Formula::forall(
                "X",
                Formula::or(px.clone(), Formula::implies(px, Formula::Falsum))
            )
        );
        assert_eq!(
            parse("A /\\ B \\/ C -> D").unwrap(),
            Formula::implies(
                Formula::or(
                    Formula::and(Formula::atom("A", &[]), Formula::atom("B", &[])),
                    Formula::atom("C", &[])
                ),
                Formula::atom("D", &[])
            )
        );
    }

    #[test]
    fn arity_mismatch_against_declaration() {
        let mut sig = Signature::new();
        sig.insert("P".into(), 1);
        let err = parse_with_signature("P(X,Y)", &sig).unwrap_err();
        assert!(matches!(
            err,
            ParseError::ArityMismatch {
                expected: 1,
                found: 2,
                ..
            }
        ));
    }

    #[test]
    fn arity_mismatch_within_formula() {
        assert!(matches!(
            parse("P(X) /\\ P"),
            Err(ParseError::ArityMismatch { pos: 8, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            parse("P(X) ->"),
            Err(ParseError::Syntax {
                pos: 7,
                msg: "expected a formula, found end of input".into()
            })
        );
        assert!(matches!(
            parse("P(X) & Q"),
            Err(ParseError::Syntax { pos: 5, .. })
        ));
        assert!(matches!(
            parse("forall . P"),
            Err(ParseError::Syntax { pos: 7, .. })
        ));
        assert!(matches!(
            parse("(P"),
            Err(ParseError::Syntax { pos: 2, .. })
        ));
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(
            parse("  forall X .P( X ,Y)->false ").unwrap(),
            parse("forall X. P(X,Y) -> false").unwrap()
        );
    }
}
