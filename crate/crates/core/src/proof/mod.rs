// SPDX-License-Identifier: Apache-2.0

//! Proof terms for natural deduction, the type checker, bounded proof
//! search and variable replacement in proofs.
//!
//! Text form (one constructor per parenthesized head, formulas in brackets):
//!
//! ```text
//! x                         variable
//! (pair M N)                <M, N>
//! (fst M) (snd M)           projections
//! (lam x [A] M)             λx:A. M
//! (app M N)                 M N
//! (tlam X M)                λX M
//! (tapp M Y)                M Y
//! (inl [A \/ B] M)          left injection, annotated with the disjunction
//! (inr [A \/ B] M)
//! (case M x [A] N y [B] P)  case M of x:A => N | y:B => P
//! (pack M Y [exists X. A])  ∃-introduction with witness Y
//! (unpack x X [A] M N)      let x:A be M : exists X. A in N
//! (abort [A] M)             ⊥-elimination into A
//! ```

mod check;
mod replace;
mod search;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formula::{parse, Formula, Var};

pub use check::{check, infer};
pub use replace::{maximalize_proof, replace_var_in_proof, ReplaceError};
pub use search::{
    search_proof, search_sequent, ProofOutcome, ProofSearch, ProofStatus, SearchLimits, Step,
};

/// A proof-term variable, disjoint from first-order variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TermVar(String);

impl TermVar {
    pub fn new(name: impl Into<String>) -> Self {
        TermVar(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TermVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TermVar {
    fn from(s: &str) -> Self {
        TermVar(s.to_owned())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ProofTerm {
    Var(TermVar),
    Pair(Box<ProofTerm>, Box<ProofTerm>),
    Fst(Box<ProofTerm>),
    Snd(Box<ProofTerm>),
    Lam(TermVar, Formula, Box<ProofTerm>),
    App(Box<ProofTerm>, Box<ProofTerm>),
    TLam(Var, Box<ProofTerm>),
    TApp(Box<ProofTerm>, Var),
    Inl(Formula, Box<ProofTerm>),
    Inr(Formula, Box<ProofTerm>),
    Case {
        scrutinee: Box<ProofTerm>,
        left: (TermVar, Formula, Box<ProofTerm>),
        right: (TermVar, Formula, Box<ProofTerm>),
    },
    Pack(Box<ProofTerm>, Var, Formula),
    Unpack {
        hyp: TermVar,
        eigen: Var,
        hyp_ty: Formula,
        scrutinee: Box<ProofTerm>,
        body: Box<ProofTerm>,
    },
    Abort(Formula, Box<ProofTerm>),
}

impl ProofTerm {
    pub fn var(name: &str) -> ProofTerm {
        ProofTerm::Var(TermVar::from(name))
    }

    /// Term variables occurring free.
    pub fn free_term_vars(&self) -> BTreeSet<TermVar> {
        let mut out = BTreeSet::new();
        self.collect_term_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_term_vars<'a>(&'a self, bound: &mut Vec<&'a TermVar>, out: &mut BTreeSet<TermVar>) {
        match self {
            ProofTerm::Var(x) => {
                if !bound.contains(&x) {
                    out.insert(x.clone());
                }
            }
            ProofTerm::Pair(a, b) | ProofTerm::App(a, b) => {
                a.collect_term_vars(bound, out);
                b.collect_term_vars(bound, out);
            }
            ProofTerm::Fst(m)
            | ProofTerm::Snd(m)
            | ProofTerm::TLam(_, m)
            | ProofTerm::TApp(m, _)
            | ProofTerm::Inl(_, m)
            | ProofTerm::Inr(_, m)
            | ProofTerm::Pack(m, _, _)
            | ProofTerm::Abort(_, m) => m.collect_term_vars(bound, out),
            ProofTerm::Lam(x, _, m) => {
                bound.push(x);
                m.collect_term_vars(bound, out);
                bound.pop();
            }
            ProofTerm::Case {
                scrutinee,
                left,
                right,
            } => {
                scrutinee.collect_term_vars(bound, out);
                for (x, _, m) in [left, right] {
                    bound.push(x);
                    m.collect_term_vars(bound, out);
                    bound.pop();
                }
            }
            ProofTerm::Unpack {
                hyp,
                scrutinee,
                body,
                ..
            } => {
                scrutinee.collect_term_vars(bound, out);
                bound.push(hyp);
                body.collect_term_vars(bound, out);
                bound.pop();
            }
        }
    }

    /// Every first-order variable mentioned anywhere in the term, including
    /// annotations and binders.
    pub fn first_order_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_fo(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    fn visit_fo(&self, f: &mut impl FnMut(&Var)) {
        let formula = |phi: &Formula, f: &mut dyn FnMut(&Var)| {
            for v in phi.all_vars() {
                f(&v);
            }
        };
        match self {
            ProofTerm::Var(_) => {}
            ProofTerm::Pair(a, b) | ProofTerm::App(a, b) => {
                a.visit_fo(f);
                b.visit_fo(f);
            }
            ProofTerm::Fst(m) | ProofTerm::Snd(m) => m.visit_fo(f),
            ProofTerm::Lam(_, a, m) | ProofTerm::Inl(a, m) | ProofTerm::Inr(a, m) => {
                formula(a, f);
                m.visit_fo(f);
            }
            ProofTerm::Abort(a, m) => {
                formula(a, f);
                m.visit_fo(f);
            }
            ProofTerm::TLam(x, m) | ProofTerm::TApp(m, x) => {
                f(x);
                m.visit_fo(f);
            }
            ProofTerm::Pack(m, y, a) => {
                f(y);
                formula(a, f);
                m.visit_fo(f);
            }
            ProofTerm::Case {
                scrutinee,
                left,
                right,
            } => {
                scrutinee.visit_fo(f);
                for (_, a, m) in [left, right] {
                    formula(a, f);
                    m.visit_fo(f);
                }
            }
            ProofTerm::Unpack {
                eigen,
                hyp_ty,
                scrutinee,
                body,
                ..
            } => {
                f(eigen);
                formula(hyp_ty, f);
                scrutinee.visit_fo(f);
                body.visit_fo(f);
            }
        }
    }

    /// Formulas annotating the term (λ, injection, case, pack, unpack and
    /// ⊥-elimination annotations).
    pub fn annotations(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_annotations(&mut out);
        out
    }

    fn collect_annotations<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            ProofTerm::Var(_) => {}
            ProofTerm::Pair(a, b) | ProofTerm::App(a, b) => {
                a.collect_annotations(out);
                b.collect_annotations(out);
            }
            ProofTerm::Fst(m)
            | ProofTerm::Snd(m)
            | ProofTerm::TLam(_, m)
            | ProofTerm::TApp(m, _) => m.collect_annotations(out),
            ProofTerm::Lam(_, a, m)
            | ProofTerm::Inl(a, m)
            | ProofTerm::Inr(a, m)
            | ProofTerm::Abort(a, m)
            | ProofTerm::Pack(m, _, a) => {
                out.push(a);
                m.collect_annotations(out);
            }
            ProofTerm::Case {
                scrutinee,
                left,
                right,
            } => {
                scrutinee.collect_annotations(out);
                for (_, a, m) in [left, right] {
                    out.push(a);
                    m.collect_annotations(out);
                }
            }
            ProofTerm::Unpack {
                hyp_ty,
                scrutinee,
                body,
                ..
            } => {
                out.push(hyp_ty);
                scrutinee.collect_annotations(out);
                body.collect_annotations(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            ProofTerm::Var(_) => 1,
            ProofTerm::Pair(a, b) | ProofTerm::App(a, b) => 1 + a.size() + b.size(),
            ProofTerm::Fst(m)
            | ProofTerm::Snd(m)
            | ProofTerm::Lam(_, _, m)
            | ProofTerm::TLam(_, m)
            | ProofTerm::TApp(m, _)
            | ProofTerm::Inl(_, m)
            | ProofTerm::Inr(_, m)
            | ProofTerm::Pack(m, _, _)
            | ProofTerm::Abort(_, m) => 1 + m.size(),
            ProofTerm::Case {
                scrutinee,
                left,
                right,
            } => 1 + scrutinee.size() + left.2.size() + right.2.size(),
            ProofTerm::Unpack {
                scrutinee, body, ..
            } => 1 + scrutinee.size() + body.size(),
        }
    }
}

impl fmt::Display for ProofTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofTerm::Var(x) => write!(f, "{x}"),
            ProofTerm::Pair(a, b) => write!(f, "(pair {a} {b})"),
            ProofTerm::Fst(m) => write!(f, "(fst {m})"),
            ProofTerm::Snd(m) => write!(f, "(snd {m})"),
            ProofTerm::Lam(x, a, m) => write!(f, "(lam {x} [{a}] {m})"),
            ProofTerm::App(a, b) => write!(f, "(app {a} {b})"),
            ProofTerm::TLam(x, m) => write!(f, "(tlam {x} {m})"),
            ProofTerm::TApp(m, y) => write!(f, "(tapp {m} {y})"),
            ProofTerm::Inl(a, m) => write!(f, "(inl [{a}] {m})"),
            ProofTerm::Inr(a, m) => write!(f, "(inr [{a}] {m})"),
            ProofTerm::Case {
                scrutinee,
                left,
                right,
            } => write!(
                f,
                "(case {scrutinee} {} [{}] {} {} [{}] {})",
                left.0, left.1, left.2, right.0, right.1, right.2
            ),
            ProofTerm::Pack(m, y, a) => write!(f, "(pack {m} {y} [{a}])"),
            ProofTerm::Unpack {
                hyp,
                eigen,
                hyp_ty,
                scrutinee,
                body,
            } => write!(f, "(unpack {hyp} {eigen} [{hyp_ty}] {scrutinee} {body})"),
            ProofTerm::Abort(a, m) => write!(f, "(abort [{a}] {m})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("proof term syntax error at offset {pos}: {msg}")]
pub struct TermParseError {
    pub pos: usize,
    pub msg: String,
}

struct TermParser<'a> {
    text: &'a str,
    at: usize,
}

impl TermParser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TermParseError> {
        Err(TermParseError {
            pos: self.at,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.text[self.at..].starts_with(|c: char| c.is_ascii_whitespace()) {
            self.at += 1;
        }
    }

    fn ident(&mut self) -> Result<String, TermParseError> {
        self.skip_ws();
        let rest = &self.text[self.at..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 {
            return self.err("expected an identifier");
        }
        self.at += len;
        Ok(rest[..len].to_owned())
    }

    fn formula(&mut self) -> Result<Formula, TermParseError> {
        self.skip_ws();
        if !self.text[self.at..].starts_with('[') {
            return self.err("expected `[`");
        }
        let start = self.at + 1;
        let Some(len) = self.text[start..].find(']') else {
            return self.err("unterminated formula annotation");
        };
        let f = parse(&self.text[start..start + len]).map_err(|e| TermParseError {
            pos: start,
            msg: e.to_string(),
        })?;
        self.at = start + len + 1;
        Ok(f)
    }

    fn term(&mut self) -> Result<ProofTerm, TermParseError> {
        self.skip_ws();
        if !self.text[self.at..].starts_with('(') {
            return Ok(ProofTerm::Var(TermVar(self.ident()?)));
        }
        self.at += 1;
        let head = self.ident()?;
        let b = Box::new;
        let t = match head.as_str() {
            "pair" => ProofTerm::Pair(b(self.term()?), b(self.term()?)),
            "fst" => ProofTerm::Fst(b(self.term()?)),
            "snd" => ProofTerm::Snd(b(self.term()?)),
            "lam" => {
                let x = TermVar(self.ident()?);
                let a = self.formula()?;
                ProofTerm::Lam(x, a, b(self.term()?))
            }
            "app" => ProofTerm::App(b(self.term()?), b(self.term()?)),
            "tlam" => {
                let x = Var::new(self.ident()?);
                ProofTerm::TLam(x, b(self.term()?))
            }
            "tapp" => {
                let m = self.term()?;
                ProofTerm::TApp(b(m), Var::new(self.ident()?))
            }
            "inl" => {
                let a = self.formula()?;
                ProofTerm::Inl(a, b(self.term()?))
            }
            "inr" => {
                let a = self.formula()?;
                ProofTerm::Inr(a, b(self.term()?))
            }
            "case" => {
                let scrutinee = b(self.term()?);
                let x = TermVar(self.ident()?);
                let a = self.formula()?;
                let n = b(self.term()?);
                let y = TermVar(self.ident()?);
                let c = self.formula()?;
                let p = b(self.term()?);
                ProofTerm::Case {
                    scrutinee,
                    left: (x, a, n),
                    right: (y, c, p),
                }
            }
            "pack" => {
                let m = b(self.term()?);
                let y = Var::new(self.ident()?);
                ProofTerm::Pack(m, y, self.formula()?)
            }
            "unpack" => {
                let hyp = TermVar(self.ident()?);
                let eigen = Var::new(self.ident()?);
                let hyp_ty = self.formula()?;
                let scrutinee = b(self.term()?);
                let body = b(self.term()?);
                ProofTerm::Unpack {
                    hyp,
                    eigen,
                    hyp_ty,
                    scrutinee,
                    body,
                }
            }
            "abort" => {
                let a = self.formula()?;
                ProofTerm::Abort(a, b(self.term()?))
            }
            other => return self.err(format!("unknown constructor `{other}`")),
        };
        self.skip_ws();
        if !self.text[self.at..].starts_with(')') {
            return self.err("expected `)`");
        }
        self.at += 1;
        Ok(t)
    }
}

impl std::str::FromStr for ProofTerm {
    type Err = TermParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut p = TermParser { text, at: 0 };
        let t = p.term()?;
        p.skip_ws();
        if p.at != text.len() {
            return p.err("trailing input");
        }
        Ok(t)
    }
}

impl Serialize for ProofTerm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProofTerm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// An ordered list of hypotheses `x : A`. Later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context(Vec<(TermVar, Formula)>);

impl Context {
    pub fn new() -> Self {
        Context(Vec::new())
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, Formula)>,
        S: Into<String>,
    {
        Context(
            pairs
                .into_iter()
                .map(|(x, f)| (TermVar::new(x), f))
                .collect(),
        )
    }

    /// Hypotheses `h0 : f0, h1 : f1, ...`.
    pub fn numbered<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        Context(
            formulas
                .into_iter()
                .enumerate()
                .map(|(i, f)| (TermVar::new(format!("h{i}")), f.clone()))
                .collect(),
        )
    }

    pub fn push(&mut self, x: TermVar, f: Formula) {
        self.0.push((x, f));
    }

    pub fn extended(&self, x: TermVar, f: Formula) -> Self {
        let mut out = self.clone();
        out.push(x, f);
        out
    }

    pub fn lookup(&self, x: &TermVar) -> Option<&Formula> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, f)| f)
    }

    pub fn entries(&self) -> &[(TermVar, Formula)] {
        &self.0
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.0.iter().map(|(_, f)| f)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        crate::formula::free_vars_of(self.formulas())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}
