// SPDX-License-Identifier: Apache-2.0

//! The variable quasiorder `x₁ ⪯_Γ x₂`: every consequence of Γ stays a
//! consequence after renaming `x₁` to `x₂`.
//!
//! Decided at atomic granularity. When Γ consists of atoms the answer is
//! exact (derivable atoms are members of Γ). Otherwise atoms over the
//! predicates of Γ are checked with bounded proof search, and refuted with
//! small countermodels; a query neither proved nor refuted gives
//! [`Relation::Unknown`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::formula::{free_vars_of, Formula, PredSymbol, Var};
use crate::kripke::{Element, KripkeModel, ModelEnumerator, StateId, Valuation};
use crate::proof::{Context, ProofSearch, SearchLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Holds,
    Fails,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMode {
    ExactAtomic,
    BoundedProver,
}

/// Default proof-search depth for bounded-prover queries.
pub const DEFAULT_BUDGET: usize = 6;

const POINT_MODEL_SIZE: usize = 3;
const MAX_POINTS: usize = 64;
const POINT_EVALS: usize = 512;
const QUERY_NODES: u64 = 4_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Derivable {
    Yes,
    No,
    Unknown,
}

struct Oracle<'a> {
    gamma: &'a [Formula],
    keys: &'a BTreeSet<Formula>,
    budget: usize,
    points: Option<Vec<(KripkeModel, StateId, Valuation)>>,
    cache: BTreeMap<Formula, Derivable>,
}

impl<'a> Oracle<'a> {
    fn new(gamma: &'a [Formula], keys: &'a BTreeSet<Formula>, budget: usize) -> Self {
        Oracle {
            gamma,
            keys,
            budget,
            points: None,
            cache: BTreeMap::new(),
        }
    }

    /// Up to `MAX_POINTS` points of small models satisfying Γ, examining
    /// at most `POINT_EVALS` valuations.
    fn points(&mut self) -> &[(KripkeModel, StateId, Valuation)] {
        if self.points.is_none() {
            let sig: Vec<PredSymbol> = self
                .gamma
                .iter()
                .flat_map(|f| f.predicates())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let vars = free_vars_of(self.gamma);
            let mut pts = Vec::new();
            let mut evals = 0usize;
            'models: for m in ModelEnumerator::new(&sig, POINT_MODEL_SIZE) {
                for c in m.states() {
                    if m.domain(c).is_empty() {
                        continue;
                    }
                    for rho in m.valuation_iter(c, &vars) {
                        evals += 1;
                        if evals > POINT_EVALS || pts.len() >= MAX_POINTS {
                            break 'models;
                        }
                        if m.satisfies_all(c, &rho, self.gamma).unwrap_or(false) {
                            pts.push((m.clone(), c, rho));
                        }
                    }
                }
            }
            self.points = Some(pts);
        }
        self.points.as_deref().unwrap_or(&[])
    }

    fn refuted(&mut self, atom: &Formula) -> bool {
        let vars: Vec<Var> = atom.free_vars().into_iter().collect();
        self.points().iter().any(|(m, c, rho)| {
            let missing: Vec<&Var> = vars.iter().filter(|v| !rho.contains(v)).collect();
            let dom: Vec<Element> = m.domain(*c).iter().copied().collect();
            let mut ext = vec![rho.clone()];
            for v in missing {
                ext = ext
                    .iter()
                    .flat_map(|r| dom.iter().map(move |&e| r.with(v.clone(), e)))
                    .collect();
            }
            ext.iter()
                .any(|r| !m.satisfies(*c, r, atom).unwrap_or(true))
        })
    }

    fn derivable(&mut self, atom: &Formula) -> Derivable {
        let key = atom.alpha_key();
        if self.keys.contains(&key) {
            return Derivable::Yes;
        }
        if let Some(d) = self.cache.get(&key) {
            return *d;
        }
        let limits = SearchLimits {
            max_depth: self.budget,
            max_nodes: QUERY_NODES,
        };
        // Refutation is cheap once the points are built, so it goes first.
        let d = if self.refuted(atom) {
            Derivable::No
        } else if ProofSearch::new(Context::numbered(self.gamma), atom.clone(), limits)
            .run_to_end()
            .is_proved()
        {
            Derivable::Yes
        } else {
            Derivable::Unknown
        };
        self.cache.insert(key, d);
        d
    }
}

fn atoms_over(preds: &BTreeSet<PredSymbol>, vars: &[Var]) -> Vec<Formula> {
    let mut out = Vec::new();
    for p in preds {
        let mut tuples: Vec<Vec<Var>> = vec![Vec::new()];
        for _ in 0..p.arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    vars.iter().map(move |v| {
                        let mut t = t.clone();
                        t.push(v.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|t| Formula::Atom(p.name.clone(), t)));
    }
    out
}

/// ⪯_Γ decided for every pair of free variables of Γ.
#[derive(Clone, Debug)]
pub struct QuasiOrderRel {
    context: Vec<Formula>,
    keys: BTreeSet<Formula>,
    vars: BTreeSet<Var>,
    mode: OrderMode,
    budget: usize,
    pairs: BTreeMap<(Var, Var), Relation>,
}

impl QuasiOrderRel {
    pub fn new(gamma: &[Formula]) -> Self {
        Self::with_budget(gamma, DEFAULT_BUDGET)
    }

    pub fn with_budget(gamma: &[Formula], budget: usize) -> Self {
        let keys: BTreeSet<Formula> = gamma.iter().map(|f| f.alpha_key()).collect();
        let mode = if gamma
            .iter()
            .all(|f| matches!(f, Formula::Atom(..) | Formula::Falsum))
        {
            OrderMode::ExactAtomic
        } else {
            OrderMode::BoundedProver
        };
        let vars = free_vars_of(gamma);
        let mut rel = QuasiOrderRel {
            context: gamma.to_vec(),
            keys,
            vars,
            mode,
            budget,
            pairs: BTreeMap::new(),
        };
        let mut oracle = Oracle::new(&rel.context, &rel.keys, budget);
        let mut pairs = BTreeMap::new();
        for a in &rel.vars {
            for b in &rel.vars {
                pairs.insert((a.clone(), b.clone()), rel.decide(&mut oracle, a, b));
            }
        }
        drop(oracle);
        rel.pairs = pairs;
        rel
    }

    fn renaming_preserves_context(&self, x1: &Var, x2: &Var) -> bool {
        self.context
            .iter()
            .all(|f| self.keys.contains(&f.substitute(x1, x2).alpha_key()))
    }

    fn decide(&self, oracle: &mut Oracle<'_>, x1: &Var, x2: &Var) -> Relation {
        if x1 == x2
            || !self.vars.contains(x1)
            || self.keys.contains(&Formula::Falsum)
            || self.renaming_preserves_context(x1, x2)
        {
            return Relation::Holds;
        }
        if self.mode == OrderMode::ExactAtomic {
            return Relation::Fails;
        }
        let preds: BTreeSet<PredSymbol> =
            self.context.iter().flat_map(|f| f.predicates()).collect();
        let vars: Vec<Var> = self.vars.iter().cloned().collect();
        let mut unknown = false;
        for atom in atoms_over(&preds, &vars) {
            if !atom.has_free(x1) {
                continue;
            }
            match oracle.derivable(&atom) {
                Derivable::No => continue,
                Derivable::Unknown => unknown = true,
                Derivable::Yes => match oracle.derivable(&atom.substitute(x1, x2)) {
                    Derivable::Yes => {}
                    Derivable::No => return Relation::Fails,
                    Derivable::Unknown => unknown = true,
                },
            }
        }
        if unknown {
            Relation::Unknown
        } else {
            Relation::Holds
        }
    }

    pub fn context(&self) -> &[Formula] {
        &self.context
    }

    pub fn mode(&self) -> OrderMode {
        self.mode
    }

    /// Free variables of Γ, over which the relation is tabulated.
    pub fn vars(&self) -> &BTreeSet<Var> {
        &self.vars
    }

    pub fn get(&self, x1: &Var, x2: &Var) -> Relation {
        match self.pairs.get(&(x1.clone(), x2.clone())) {
            Some(r) => *r,
            None => {
                let mut oracle = Oracle::new(&self.context, &self.keys, self.budget);
                self.decide(&mut oracle, x1, x2)
            }
        }
    }

    pub fn holds(&self, x1: &Var, x2: &Var) -> bool {
        self.get(x1, x2) == Relation::Holds
    }

    /// `x₁ ∼ x₂`.
    pub fn equivalent(&self, x1: &Var, x2: &Var) -> bool {
        self.holds(x1, x2) && self.holds(x2, x1)
    }

    /// `x₁ ≺ x₂`; unknown entries count as not holding.
    pub fn strictly_below(&self, x1: &Var, x2: &Var) -> bool {
        self.holds(x1, x2) && !self.holds(x2, x1)
    }

    /// Variables of Γ with nothing strictly above them.
    pub fn maximal_vars(&self) -> BTreeSet<Var> {
        self.vars
            .iter()
            .filter(|x| !self.vars.iter().any(|y| self.strictly_below(x, y)))
            .cloned()
            .collect()
    }

    /// Partition of `vars` into classes of `∼`. The relation need not be
    /// transitive over arbitrary signatures, so classes are the connected
    /// components of `∼`.
    pub fn equivalence_classes(&self, vars: &BTreeSet<Var>) -> Vec<BTreeSet<Var>> {
        let mut classes: Vec<BTreeSet<Var>> = Vec::new();
        for v in vars {
            let touching: Vec<usize> = classes
                .iter()
                .enumerate()
                .filter(|(_, c)| c.iter().any(|w| self.equivalent(v, w)))
                .map(|(i, _)| i)
                .collect();
            let mut merged: BTreeSet<Var> = [v.clone()].into_iter().collect();
            for &i in touching.iter().rev() {
                merged.extend(classes.remove(i));
            }
            classes.push(merged);
        }
        classes.sort();
        classes
    }

    /// A maximal variable above `x`: `x` itself when maximal, otherwise the
    /// least-named maximal `y` with `x ⪯ y`, falling back to following `≺`
    /// upwards. `None` for variables outside Γ or when no maximal variable
    /// is reachable.
    pub fn maximal_rep(&self, x: &Var) -> Option<Var> {
        if !self.vars.contains(x) {
            return None;
        }
        let maximal = self.maximal_vars();
        if maximal.contains(x) {
            return Some(x.clone());
        }
        if let Some(y) = maximal.iter().find(|y| self.holds(x, y)) {
            return Some(y.clone());
        }
        let mut seen = BTreeSet::new();
        let mut cur = x.clone();
        while seen.insert(cur.clone()) {
            if maximal.contains(&cur) {
                return Some(cur);
            }
            cur = self
                .vars
                .iter()
                .find(|y| self.strictly_below(&cur, y))?
                .clone();
        }
        None
    }

    /// Γ̌: the members of Γ whose free variables are all maximal.
    pub fn checked_context(&self) -> Vec<Formula> {
        let maximal = self.maximal_vars();
        self.context
            .iter()
            .filter(|f| f.free_vars().is_subset(&maximal))
            .cloned()
            .collect()
    }

    /// Every decided entry, in variable order.
    pub fn entries(&self) -> impl Iterator<Item = (&Var, &Var, Relation)> {
        self.pairs.iter().map(|((a, b), r)| (a, b, *r))
    }
}

/// Shared memo of decided relations keyed by Γ up to order and bound
/// renaming. Safe to share between threads.
#[derive(Debug, Default)]
pub struct OrderCache {
    map: Mutex<HashMap<Vec<String>, Arc<QuasiOrderRel>>>,
}

impl OrderCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, gamma: &[Formula]) -> Arc<QuasiOrderRel> {
        let mut key: Vec<String> = gamma.iter().map(|f| f.alpha_key().to_string()).collect();
        key.sort();
        key.dedup();
        if let Some(r) = self.lock().get(&key) {
            return r.clone();
        }
        // Decided outside the lock; a racing duplicate is harmless.
        let rel = Arc::new(QuasiOrderRel::new(gamma));
        self.lock().entry(key).or_insert(rel).clone()
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<Vec<String>, Arc<QuasiOrderRel>>> {
        self.map.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub fn preceq(gamma: &[Formula], x1: &Var, x2: &Var, budget: usize) -> Relation {
    let rel = QuasiOrderRel {
        context: gamma.to_vec(),
        keys: gamma.iter().map(|f| f.alpha_key()).collect(),
        vars: free_vars_of(gamma),
        mode: if gamma
            .iter()
            .all(|f| matches!(f, Formula::Atom(..) | Formula::Falsum))
        {
            OrderMode::ExactAtomic
        } else {
            OrderMode::BoundedProver
        },
        budget,
        pairs: BTreeMap::new(),
    };
    rel.get(x1, x2)
}

pub fn maximal_vars(gamma: &[Formula]) -> BTreeSet<Var> {
    QuasiOrderRel::new(gamma).maximal_vars()
}

pub fn equivalence_classes(gamma: &[Formula], vars: &BTreeSet<Var>) -> Vec<BTreeSet<Var>> {
    QuasiOrderRel::new(gamma).equivalence_classes(vars)
}
