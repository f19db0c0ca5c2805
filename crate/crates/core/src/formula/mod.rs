// SPDX-License-Identifier: Apache-2.0

//! Formulas of intuitionistic first-order logic without function symbols or
//! constants: syntax tree, free variables, capture-avoiding substitution,
//! subformulas and disjuncts.

mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use parser::{parse, parse_with_signature, ParseError, Signature};

/// A first-order variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    /// The `k`-th canonical fresh name, `v{k}`.
    pub fn canonical(k: usize) -> Self {
        Var(format!("v{k}"))
    }

    /// The first canonical name `v0, v1, ...` not contained in `avoid`.
    pub fn fresh_avoiding(avoid: &BTreeSet<Var>) -> Self {
        (0..)
            .map(Var::canonical)
            .find(|v| !avoid.contains(v))
            .expect("unbounded namespace")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_owned())
    }
}

/// A predicate symbol with its arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredSymbol {
    pub name: String,
    pub arity: usize,
}

impl PredSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredSymbol {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for PredSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// `P(X1, ..., Xn)`; the arity is the argument count.
    Atom(String, Vec<Var>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    Falsum,
}

impl Formula {
    pub fn atom(pred: &str, args: &[&str]) -> Formula {
        Formula::Atom(
            pred.to_owned(),
            args.iter().map(|a| Var::from(*a)).collect(),
        )
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::implies(a, Formula::Falsum)
    }

    pub fn forall(x: impl Into<Var>, body: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: impl Into<Var>, body: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(body))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom(..) | Formula::Falsum)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a Var>, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Atom(_, args) => {
                for a in args {
                    if !bound.contains(&a) {
                        out.insert(a.clone());
                    }
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                bound.push(x);
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::Falsum => {}
        }
    }

    pub fn has_free(&self, v: &Var) -> bool {
        match self {
            Formula::Atom(_, args) => args.contains(v),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_free(v) || b.has_free(v)
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => x != v && body.has_free(v),
            Formula::Falsum => false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable occurring in the formula, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(_, args) => out.extend(args.iter().cloned()),
            Formula::Forall(x, _) | Formula::Exists(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal over every node of the tree.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.visit(f),
            Formula::Atom(..) | Formula::Falsum => {}
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// All subtrees, deduplicated syntactically, in pre-order of first
    /// occurrence. The length is the subformula count `f(φ)`.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if seen.insert(f) {
                out.push(f.clone());
            }
        });
        out
    }

    /// `[α, β]` for `α ∨ β`, otherwise the formula itself. Nested
    /// disjunctions are read right-nested, so `α ∨ (β ∨ γ)` has the two
    /// disjuncts `α` and `β ∨ γ`.
    pub fn disjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::Or(a, b) => vec![a, b],
            other => vec![other],
        }
    }

    pub fn predicates(&self) -> BTreeSet<PredSymbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p, args) = f {
                out.insert(PredSymbol::new(p.clone(), args.len()));
            }
        });
        out
    }

    /// `self[from/to]`: free occurrences of `from` become `to`. A binder
    /// that would capture `to` is first renamed to a canonical fresh name.
    pub fn substitute(&self, from: &Var, to: &Var) -> Formula {
        if from == to {
            return self.clone();
        }
        let mut map = BTreeMap::new();
        map.insert(from.clone(), to.clone());
        self.substitute_all(&map)
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn substitute_all(&self, map: &BTreeMap<Var, Var>) -> Formula {
        let map: BTreeMap<Var, Var> = map
            .iter()
            .filter(|(k, v)| k != v)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if map.is_empty() {
            return self.clone();
        }
        self.subst_rec(&map)
    }

    fn subst_rec(&self, map: &BTreeMap<Var, Var>) -> Formula {
        match self {
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter()
                    .map(|a| map.get(a).unwrap_or(a).clone())
                    .collect(),
            ),
            Formula::And(a, b) => Formula::and(a.subst_rec(map), b.subst_rec(map)),
            Formula::Or(a, b) => Formula::or(a.subst_rec(map), b.subst_rec(map)),
            Formula::Implies(a, b) => Formula::implies(a.subst_rec(map), b.subst_rec(map)),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let inner: BTreeMap<Var, Var> = map
                    .iter()
                    .filter(|(k, _)| *k != x && body.has_free(k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                if inner.is_empty() {
                    return self.clone();
                }
                let (binder, body) = if inner.values().any(|v| v == x) {
                    let mut avoid = body.all_vars();
                    avoid.insert(x.clone());
                    avoid.extend(inner.keys().cloned());
                    avoid.extend(inner.values().cloned());
                    let fresh = Var::fresh_avoiding(&avoid);
                    let renamed = body.substitute(x, &fresh);
                    (fresh, renamed)
                } else {
                    (x.clone(), (**body).clone())
                };
                let body = Box::new(body.subst_rec(&inner));
                match self {
                    Formula::Forall(..) => Formula::Forall(binder, body),
                    _ => Formula::Exists(binder, body),
                }
            }
            Formula::Falsum => Formula::Falsum,
        }
    }

    /// Canonical representative of the α-equivalence class: each binder is
    /// renamed to `#k`, `k` its nesting depth. `#` never occurs in parsed
    /// names, so free variables are unaffected.
    pub fn alpha_key(&self) -> Formula {
        self.alpha_rec(&mut Vec::new())
    }

    fn alpha_rec(&self, scope: &mut Vec<(Var, Var)>) -> Formula {
        match self {
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter()
                    .map(|a| {
                        scope
                            .iter()
                            .rev()
                            .find(|(orig, _)| orig == a)
                            .map(|(_, c)| c.clone())
                            .unwrap_or_else(|| a.clone())
                    })
                    .collect(),
            ),
            Formula::And(a, b) => Formula::and(a.alpha_rec(scope), b.alpha_rec(scope)),
            Formula::Or(a, b) => Formula::or(a.alpha_rec(scope), b.alpha_rec(scope)),
            Formula::Implies(a, b) => Formula::implies(a.alpha_rec(scope), b.alpha_rec(scope)),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let c = Var(format!("#{}", scope.len()));
                scope.push((x.clone(), c.clone()));
                let body = Box::new(body.alpha_rec(scope));
                scope.pop();
                match self {
                    Formula::Forall(..) => Formula::Forall(c, body),
                    _ => Formula::Exists(c, body),
                }
            }
            Formula::Falsum => Formula::Falsum,
        }
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self == other || self.alpha_key() == other.alpha_key()
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        // Levels: 0 quantifier/implication, 1 disjunction, 2 conjunction, 3 atomic.
        let level = match self {
            Formula::Forall(..) | Formula::Exists(..) | Formula::Implies(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Atom(..) | Formula::Falsum => 3,
        };
        let paren = level < ctx;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::Atom(p, args) => {
                f.write_str(p)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        f.write_str(a.as_str())?;
                    }
                    f.write_str(")")?;
                }
            }
            Formula::Falsum => f.write_str("false")?,
            Formula::And(a, b) => {
                a.fmt_prec(f, 3)?;
                f.write_str(" /\\ ")?;
                b.fmt_prec(f, 2)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" \\/ ")?;
                b.fmt_prec(f, 1)?;
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, 0)?;
            }
            Formula::Forall(x, body) => {
                write!(f, "forall {x}. ")?;
                body.fmt_prec(f, 0)?;
            }
            Formula::Exists(x, body) => {
                write!(f, "exists {x}. ")?;
                body.fmt_prec(f, 0)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Var {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(Var)
    }
}

/// Free variables of a collection of formulas.
pub fn free_vars_of<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for f in fs {
        out.extend(f.free_vars());
    }
    out
}
