// SPDX-License-Identifier: Apache-2.0

//! Finite Kripke models for intuitionistic first-order logic.
//!
//! Elements are global ids; every state carries a subset of them as its
//! domain, so domain monotonicity is plain subset inclusion along the order.

mod countermodel;
mod enumerate;
mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Var};

pub use countermodel::{find_countermodel, for_each_point_satisfying, Point};
pub use enumerate::{naturally_labeled_posets, ModelEnumerator};
pub use json::ModelFile;

pub type Element = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Assignment of elements to first-order variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(BTreeMap<Var, Element>);

impl Valuation {
    pub fn new() -> Self {
        Valuation(BTreeMap::new())
    }

    pub fn get(&self, v: &Var) -> Option<Element> {
        self.0.get(v).copied()
    }

    pub fn set(&mut self, v: Var, e: Element) {
        self.0.insert(v, e);
    }

    pub fn with(&self, v: Var, e: Element) -> Self {
        let mut out = self.clone();
        out.set(v, e);
        out
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains_key(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, Element)> {
        self.0.iter().map(|(v, e)| (v, *e))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restriction to `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Var>) -> Self {
        Valuation(
            self.0
                .iter()
                .filter(|(v, _)| keep.contains(*v))
                .map(|(v, e)| (v.clone(), *e))
                .collect(),
        )
    }
}

impl FromIterator<(Var, Element)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (Var, Element)>>(iter: I) -> Self {
        Valuation(iter.into_iter().collect())
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}:={e}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("valuation does not assign free variable {0}")]
    ValuationIncomplete(Var),
    #[error("valuation maps {var} to {elem}, which is outside the domain of {state}")]
    ValuationOutOfDomain {
        var: Var,
        elem: Element,
        state: StateId,
    },
    #[error("state {0} does not exist")]
    NoSuchState(StateId),
    #[error("axiom `{0}` has free variables")]
    OpenFormula(Formula),
    #[error("model is invalid: {0}")]
    Invalid(String),
}

/// One broken model invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoStates,
    OrderOutOfRange(usize, usize),
    NotReflexive(StateId),
    NotAntisymmetric(StateId, StateId),
    NotTransitive(StateId, StateId, StateId),
    DomainNotMonotone(StateId, StateId),
    ExtensionNotMonotone {
        pred: String,
        lower: StateId,
        upper: StateId,
    },
    TupleOutsideDomain {
        pred: String,
        state: StateId,
    },
    ArityInconsistent(String),
    WrongStateCount {
        what: &'static str,
        found: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "model has no states"),
            Violation::OrderOutOfRange(a, b) => write!(f, "order pair ({a},{b}) out of range"),
            Violation::NotReflexive(c) => write!(f, "not reflexive at {c}"),
            Violation::NotAntisymmetric(a, b) => write!(f, "not antisymmetric: {a} and {b}"),
            Violation::NotTransitive(a, b, c) => {
                write!(f, "not transitive: {a} <= {b} <= {c} but not {a} <= {c}")
            }
            Violation::DomainNotMonotone(a, b) => {
                write!(f, "domain not monotone: {a} <= {b}")
            }
            Violation::ExtensionNotMonotone { pred, lower, upper } => {
                write!(f, "extension of {pred} not monotone: {lower} <= {upper}")
            }
            Violation::TupleOutsideDomain { pred, state } => {
                write!(
                    f,
                    "tuple of {pred} at {state} uses elements outside the domain"
                )
            }
            Violation::ArityInconsistent(p) => write!(f, "tuples of {p} have differing lengths"),
            Violation::WrongStateCount { what, found } => {
                write!(f, "{what} lists {found} states")
            }
        }
    }
}

/// A finite Kripke model `<C, <=, {A_c}>`.
///
/// `order` holds the full relation (reflexive pairs included); `extensions`
/// maps each predicate to its per-state set of tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    num_states: usize,
    order: BTreeSet<(usize, usize)>,
    domains: Vec<BTreeSet<Element>>,
    extensions: BTreeMap<String, Vec<BTreeSet<Vec<Element>>>>,
    up: Vec<Vec<usize>>,
}

impl KripkeModel {
    /// Builds a model without checking its invariants; see [`validate`](Self::validate).
    /// Extension vectors shorter than `num_states` are padded with empty sets.
    pub fn new(
        num_states: usize,
        order: BTreeSet<(usize, usize)>,
        domains: Vec<BTreeSet<Element>>,
        mut extensions: BTreeMap<String, Vec<BTreeSet<Vec<Element>>>>,
    ) -> Self {
        for ext in extensions.values_mut() {
            ext.resize(num_states.max(ext.len()), BTreeSet::new());
        }
        let mut up = vec![Vec::new(); num_states];
        for &(a, b) in &order {
            if a < num_states && b < num_states {
                up[a].push(b);
            }
        }
        KripkeModel {
            num_states,
            order,
            domains,
            extensions,
            up,
        }
    }

    /// A single-state model.
    pub fn classical(
        domain: BTreeSet<Element>,
        extensions: BTreeMap<String, BTreeSet<Vec<Element>>>,
    ) -> Self {
        let ext = extensions.into_iter().map(|(p, s)| (p, vec![s])).collect();
        let order = [(0, 0)].into_iter().collect();
        KripkeModel::new(1, order, vec![domain], ext)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states).map(StateId)
    }

    pub fn order(&self) -> &BTreeSet<(usize, usize)> {
        &self.order
    }

    pub fn leq(&self, a: StateId, b: StateId) -> bool {
        self.order.contains(&(a.0, b.0))
    }

    /// States `c' >= c`, in index order.
    pub fn successors(&self, c: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.up[c.0].iter().map(|&i| StateId(i))
    }

    pub fn domain(&self, c: StateId) -> &BTreeSet<Element> {
        &self.domains[c.0]
    }

    pub fn domains(&self) -> &[BTreeSet<Element>] {
        &self.domains
    }

    pub fn extensions(&self) -> &BTreeMap<String, Vec<BTreeSet<Vec<Element>>>> {
        &self.extensions
    }

    pub fn holds_atom(&self, c: StateId, pred: &str, args: &[Element]) -> bool {
        self.extensions
            .get(pred)
            .and_then(|e| e.get(c.0))
            .is_some_and(|set| set.contains(args))
    }

    /// `|C| + |⋃ A_c|`.
    pub fn size(&self) -> usize {
        let union: BTreeSet<Element> = self.domains.iter().flatten().copied().collect();
        self.num_states + union.len()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let n = self.num_states;
        let mut out = Vec::new();
        if n == 0 {
            out.push(Violation::NoStates);
            return out;
        }
        if self.domains.len() != n {
            out.push(Violation::WrongStateCount {
                what: "domains",
                found: self.domains.len(),
            });
            return out;
        }
        for &(a, b) in &self.order {
            if a >= n || b >= n {
                out.push(Violation::OrderOutOfRange(a, b));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for c in 0..n {
            if !self.order.contains(&(c, c)) {
                out.push(Violation::NotReflexive(StateId(c)));
            }
        }
        for &(a, b) in &self.order {
            if a < b && self.order.contains(&(b, a)) {
                out.push(Violation::NotAntisymmetric(StateId(a), StateId(b)));
            }
        }
        for &(a, b) in &self.order {
            for &(b2, c) in &self.order {
                if b == b2 && !self.order.contains(&(a, c)) {
                    out.push(Violation::NotTransitive(StateId(a), StateId(b), StateId(c)));
                }
            }
        }
        for &(a, b) in &self.order {
            if a != b && !self.domains[a].is_subset(&self.domains[b]) {
                out.push(Violation::DomainNotMonotone(StateId(a), StateId(b)));
            }
        }
        for (pred, ext) in &self.extensions {
            if ext.len() != n {
                out.push(Violation::WrongStateCount {
                    what: "extensions",
                    found: ext.len(),
                });
                continue;
            }
            let lens: BTreeSet<usize> = ext.iter().flatten().map(Vec::len).collect();
            if lens.len() > 1 {
                out.push(Violation::ArityInconsistent(pred.clone()));
            }
            for (c, tuples) in ext.iter().enumerate() {
                if tuples
                    .iter()
                    .any(|t| t.iter().any(|e| !self.domains[c].contains(e)))
                {
                    out.push(Violation::TupleOutsideDomain {
                        pred: pred.clone(),
                        state: StateId(c),
                    });
                }
            }
            for &(a, b) in &self.order {
                if a != b && !ext[a].is_subset(&ext[b]) {
                    out.push(Violation::ExtensionNotMonotone {
                        pred: pred.clone(),
                        lower: StateId(a),
                        upper: StateId(b),
                    });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `c, ρ ⊨ f`.
    pub fn satisfies(&self, c: StateId, rho: &Valuation, f: &Formula) -> Result<bool, ModelError> {
        if c.0 >= self.num_states {
            return Err(ModelError::NoSuchState(c));
        }
        for v in f.free_vars() {
            match rho.get(&v) {
                None => return Err(ModelError::ValuationIncomplete(v)),
                Some(e) if !self.domains[c.0].contains(&e) => {
                    return Err(ModelError::ValuationOutOfDomain {
                        var: v,
                        elem: e,
                        state: c,
                    })
                }
                Some(_) => {}
            }
        }
        let mut env: Vec<(&Var, Element)> = rho.iter().collect();
        Ok(self.eval(c.0, f, &mut env))
    }

    /// Satisfaction of every formula in `gamma`.
    pub fn satisfies_all<'a>(
        &self,
        c: StateId,
        rho: &Valuation,
        gamma: impl IntoIterator<Item = &'a Formula>,
    ) -> Result<bool, ModelError> {
        for g in gamma {
            if !self.satisfies(c, rho, g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn lookup(env: &[(&Var, Element)], v: &Var) -> Element {
        env.iter()
            .rev()
            .find(|(name, _)| *name == v)
            .map(|(_, e)| *e)
            .expect("valuation checked to cover free variables")
    }

    fn eval<'a>(&self, c: usize, f: &'a Formula, env: &mut Vec<(&'a Var, Element)>) -> bool {
        match f {
            Formula::Atom(p, args) => {
                let Some(ext) = self.extensions.get(p) else {
                    return false;
                };
                let tuple: Vec<Element> = args.iter().map(|a| Self::lookup(env, a)).collect();
                ext[c].contains(&tuple)
            }
            Formula::Falsum => false,
            Formula::And(a, b) => self.eval(c, a, env) && self.eval(c, b, env),
            Formula::Or(a, b) => self.eval(c, a, env) || self.eval(c, b, env),
            Formula::Implies(a, b) => self.up[c]
                .iter()
                .all(|&d| !self.eval(d, a, env) || self.eval(d, b, env)),
            Formula::Forall(x, body) => self.up[c].iter().all(|&d| {
                self.domains[d].iter().all(|&e| {
                    env.push((x, e));
                    let r = self.eval(d, body, env);
                    env.pop();
                    r
                })
            }),
            Formula::Exists(x, body) => self.domains[c].iter().any(|&e| {
                env.push((x, e));
                let r = self.eval(c, body, env);
                env.pop();
                r
            }),
        }
    }

    /// Every axiom holds at every state under the empty valuation.
    pub fn is_model_of_class(&self, axioms: &[Formula]) -> Result<bool, ModelError> {
        if let Some(open) = axioms.iter().find(|a| !a.is_closed()) {
            return Err(ModelError::OpenFormula(open.clone()));
        }
        let empty = Valuation::new();
        for c in self.states() {
            for a in axioms {
                if !self.satisfies(c, &empty, a)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Lazy form of [`valuations`](Self::valuations), in the same order.
    pub fn valuation_iter(&self, c: StateId, vars: &BTreeSet<Var>) -> ValuationIter {
        ValuationIter {
            vars: vars.iter().cloned().collect(),
            dom: self.domains[c.0].iter().copied().collect(),
            digits: vec![0; vars.len()],
            done: !vars.is_empty() && self.domains[c.0].is_empty(),
        }
    }

    /// All valuations `vars -> A_c`, in lexicographic order of element ids.
    pub fn valuations(&self, c: StateId, vars: &BTreeSet<Var>) -> Vec<Valuation> {
        let dom: Vec<Element> = self.domains[c.0].iter().copied().collect();
        let mut out = vec![Valuation::new()];
        for v in vars {
            let mut next = Vec::with_capacity(out.len() * dom.len());
            for rho in &out {
                for &e in &dom {
                    next.push(rho.with(v.clone(), e));
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&ModelFile::from_model(self).to_canonical_json())
    }
}

/// Odometer over assignments of a variable list into a domain.
#[derive(Clone, Debug)]
pub struct ValuationIter {
    vars: Vec<Var>,
    dom: Vec<Element>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for ValuationIter {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        if self.done {
            return None;
        }
        let out: Valuation = self
            .vars
            .iter()
            .zip(&self.digits)
            .map(|(v, &d)| (v.clone(), self.dom[d]))
            .collect();
        // Last variable varies fastest, matching `valuations`.
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.dom.len() {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn set<T: Ord + Clone>(xs: &[T]) -> BTreeSet<T> {
        xs.iter().cloned().collect()
    }

    /// c0 <= c1, A = {0} at both, P empty at c0 and {0} at c1.
    pub(crate) fn lem_countermodel() -> KripkeModel {
        let mut ext = BTreeMap::new();
        ext.insert("P".to_string(), vec![set(&[]), set(&[vec![0]])]);
        KripkeModel::new(
            2,
            set(&[(0, 0), (0, 1), (1, 1)]),
            vec![set(&[0]), set(&[0])],
            ext,
        )
    }

    #[test]
    fn validate_accepts_single_state() {
        let mut ext = BTreeMap::new();
        ext.insert("P".to_string(), set(&[vec![0]]));
        let m = KripkeModel::classical(set(&[0]), ext);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn validate_reports_domain_not_monotone() {
        let m = KripkeModel::new(
            2,
            set(&[(0, 0), (0, 1), (1, 1)]),
            vec![set(&[0]), set(&[])],
            BTreeMap::new(),
        );
        let v = m.validate();
        assert_eq!(
            v,
            vec![Violation::DomainNotMonotone(StateId(0), StateId(1))]
        );
        assert!(v[0].to_string().contains("domain not monotone"));
    }

    #[test]
    fn validate_reports_antisymmetry() {
        let m = KripkeModel::new(
            2,
            set(&[(0, 0), (0, 1), (1, 0), (1, 1)]),
            vec![set(&[]), set(&[])],
            BTreeMap::new(),
        );
        let v = m.validate();
        assert!(v.contains(&Violation::NotAntisymmetric(StateId(0), StateId(1))));
        assert!(v
            .iter()
            .any(|x| x.to_string().contains("not antisymmetric")));
    }

    #[test]
    fn validate_reports_extension_problems() {
        let mut ext = BTreeMap::new();
        ext.insert("P".to_string(), vec![set(&[vec![0]]), set(&[])]);
        ext.insert("Q".to_string(), vec![set(&[vec![5]]), set(&[vec![0, 0]])]);
        let m = KripkeModel::new(
            2,
            set(&[(0, 0), (0, 1), (1, 1)]),
            vec![set(&[0]), set(&[0])],
            ext,
        );
        let v = m.validate();
        assert!(v.contains(&Violation::ExtensionNotMonotone {
            pred: "P".into(),
            lower: StateId(0),
            upper: StateId(1)
        }));
        assert!(v.contains(&Violation::ArityInconsistent("Q".into())));
        assert!(v.contains(&Violation::TupleOutsideDomain {
            pred: "Q".into(),
            state: StateId(0)
        }));
    }

    #[test]
    fn satisfaction_basics() {
        let mut ext = BTreeMap::new();
        ext.insert("P".to_string(), set(&[vec![0]]));
        let m = KripkeModel::classical(set(&[0]), ext);
        let rho: Valuation = [(Var::from("x"), 0)].into_iter().collect();
        assert!(m
            .satisfies(StateId(0), &rho, &parse("P(x)").unwrap())
            .unwrap());
        assert!(!m.satisfies(StateId(0), &rho, &Formula::Falsum).unwrap());
        assert_eq!(
            m.satisfies(StateId(0), &Valuation::new(), &parse("P(x)").unwrap()),
            Err(ModelError::ValuationIncomplete("x".into()))
        );
    }

    #[test]
    fn lem_countermodel_refutes_excluded_middle() {
        let m = lem_countermodel();
        assert!(m.is_valid());
        let f2 = parse("forall X. P(X) \\/ (P(X) -> false)").unwrap();
        assert!(!m.satisfies(StateId(0), &Valuation::new(), &f2).unwrap());
        assert!(m.satisfies(StateId(1), &Valuation::new(), &f2).unwrap());
        assert_eq!(m.size(), 3);
    }

    #[test]
    fn sizes() {
        let one = KripkeModel::classical(set(&[0]), BTreeMap::new());
        assert_eq!(one.size(), 2);
        let two = KripkeModel::new(
            2,
            set(&[(0, 0), (0, 1), (1, 1)]),
            vec![set(&[0]), set(&[0, 1])],
            BTreeMap::new(),
        );
        assert_eq!(two.size(), 4);
    }

    #[test]
    fn class_membership() {
        let m = lem_countermodel();
        assert!(m.is_model_of_class(&[]).unwrap());
        let empty_p = KripkeModel::classical(set(&[0]), BTreeMap::new());
        assert!(!empty_p
            .is_model_of_class(&[parse("exists X. P(X)").unwrap()])
            .unwrap());
        assert!(!m
            .is_model_of_class(&[parse("forall X. P(X)").unwrap()])
            .unwrap());
        assert!(matches!(
            m.is_model_of_class(&[parse("P(X)").unwrap()]),
            Err(ModelError::OpenFormula(_))
        ));
    }

    #[test]
    fn empty_domain_quantifiers() {
        let m = KripkeModel::classical(BTreeSet::new(), BTreeMap::new());
        let e = Valuation::new();
        assert!(!m
            .satisfies(StateId(0), &e, &parse("exists X. P(X)").unwrap())
            .unwrap());
        assert!(m
            .satisfies(StateId(0), &e, &parse("forall X. P(X)").unwrap())
            .unwrap());
    }
}
