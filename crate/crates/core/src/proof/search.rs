// SPDX-License-Identifier: Apache-2.0

//! Bounded backward proof search.
//!
//! Sequents carry each hypothesis together with a proof term for it, so that
//! left rules which only add facts (∧, ∀, →) need no binder: `π₁ h`, `h y`,
//! `h N`. Invertible rules are applied eagerly and never backtracked.
//! Instantiations of ∀ hypotheses and ∃ goals range over the free variables
//! of the sequent plus one canonical fresh variable.

use std::collections::{BTreeSet, HashSet};

use super::{check, Context, ProofTerm, TermVar};
use crate::formula::{free_vars_of, Formula, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximal derivation depth (rule applications on one branch).
    pub max_depth: usize,
    /// Maximal number of sequents expanded over the whole search.
    pub max_nodes: u64,
}

impl SearchLimits {
    pub fn depth(max_depth: usize) -> Self {
        SearchLimits {
            max_depth,
            max_nodes: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofStatus {
    Proved(ProofTerm),
    NotFoundWithinBudget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofOutcome {
    pub status: ProofStatus,
    /// Sequents expanded, summed over all attempts.
    pub budget_spent: u64,
}

impl ProofOutcome {
    pub fn proof(&self) -> Option<&ProofTerm> {
        match &self.status {
            ProofStatus::Proved(m) => Some(m),
            ProofStatus::NotFoundWithinBudget => None,
        }
    }

    pub fn is_proved(&self) -> bool {
        self.proof().is_some()
    }
}

/// The last rule of a derivation, read bottom-up. Hypotheses are named by
/// their formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Axiom,
    BotL,
    ImpR,
    AndR,
    ForallR,
    AndL(Formula),
    OrL(Formula),
    ExistsL(Formula),
    OrR { left: bool },
    ExistsR(Var),
    ImpL(Formula),
    ForallL(Formula, Var),
}

#[derive(Clone, Debug)]
struct Hyp {
    term: ProofTerm,
    ty: Formula,
    key: Formula,
    used: bool,
}

#[derive(Clone, Debug, Default)]
struct Hyps(Vec<Hyp>);

impl Hyps {
    fn find(&self, f: &Formula) -> Option<&Hyp> {
        let key = f.alpha_key();
        self.0.iter().find(|h| h.key == key)
    }

    fn has(&self, f: &Formula) -> bool {
        self.find(f).is_some()
    }

    fn push(&mut self, term: ProofTerm, ty: Formula) {
        if !self.has(&ty) {
            let key = ty.alpha_key();
            self.0.push(Hyp {
                term,
                ty,
                key,
                used: false,
            });
        }
    }

    fn with(&self, term: ProofTerm, ty: Formula) -> Hyps {
        let mut out = self.clone();
        out.push(term, ty);
        out
    }

    fn free_vars(&self) -> BTreeSet<Var> {
        free_vars_of(self.0.iter().map(|h| &h.ty))
    }

    /// Some `A[X:=y]` is already a hypothesis; unpacking `∃X.A` again
    /// would add nothing stronger.
    fn has_instance(&self, x: &Var, a: &Formula) -> bool {
        self.free_vars()
            .iter()
            .any(|y| self.has(&a.substitute(x, y)))
    }
}

type SequentKey = (Vec<Formula>, Formula);

fn sequent_key(hs: &Hyps, goal: &Formula) -> SequentKey {
    let mut keys: Vec<Formula> = hs.0.iter().map(|h| h.key.clone()).collect();
    keys.sort_by_cached_key(|k| k.to_string());
    (keys, goal.alpha_key())
}

struct Searcher {
    nodes: u64,
    node_cap: u64,
    hit_depth: bool,
    hit_nodes: bool,
    taken: HashSet<String>,
    counter: usize,
    ancestors: Vec<SequentKey>,
}

impl Searcher {
    fn new(node_cap: u64, taken: HashSet<String>) -> Self {
        Searcher {
            nodes: 0,
            node_cap,
            hit_depth: false,
            hit_nodes: false,
            taken,
            counter: 0,
            ancestors: Vec::new(),
        }
    }

    fn fresh_term_var(&mut self) -> TermVar {
        loop {
            let name = format!("u{}", self.counter);
            self.counter += 1;
            if !self.taken.contains(&name) {
                return TermVar::new(name);
            }
        }
    }

    fn prove(&mut self, hs: &Hyps, goal: &Formula, depth: usize) -> Option<(ProofTerm, Step)> {
        if self.hit_nodes {
            return None;
        }
        self.nodes += 1;
        if self.nodes > self.node_cap {
            self.hit_nodes = true;
            return None;
        }
        if let Some(h) = hs.find(goal) {
            return Some((h.term.clone(), Step::Axiom));
        }
        if let Some(h) = hs.find(&Formula::Falsum) {
            return Some((
                ProofTerm::Abort(goal.clone(), Box::new(h.term.clone())),
                Step::BotL,
            ));
        }
        if depth == 0 {
            self.hit_depth = true;
            return None;
        }
        let key = sequent_key(hs, goal);
        if self.ancestors.contains(&key) {
            return None;
        }
        self.ancestors.push(key);
        let found = self.expand(hs, goal, depth - 1);
        self.ancestors.pop();
        found
    }

    fn expand(&mut self, hs: &Hyps, goal: &Formula, d: usize) -> Option<(ProofTerm, Step)> {
        let b = Box::new;
        // Invertible right rules.
        match goal {
            Formula::Implies(a, c) => {
                let x = self.fresh_term_var();
                let hs2 = hs.with(ProofTerm::Var(x.clone()), (**a).clone());
                let (m, _) = self.prove(&hs2, c, d)?;
                return Some((ProofTerm::Lam(x, (**a).clone(), b(m)), Step::ImpR));
            }
            Formula::And(a, c) => {
                let (m, _) = self.prove(hs, a, d)?;
                let (n, _) = self.prove(hs, c, d)?;
                return Some((ProofTerm::Pair(b(m), b(n)), Step::AndR));
            }
            Formula::Forall(x, a) => {
                let fv = hs.free_vars();
                let eigen = if fv.contains(x) {
                    let mut avoid = fv;
                    avoid.extend(goal.free_vars());
                    Var::fresh_avoiding(&avoid)
                } else {
                    x.clone()
                };
                let (m, _) = self.prove(hs, &a.substitute(x, &eigen), d)?;
                return Some((ProofTerm::TLam(eigen, b(m)), Step::ForallR));
            }
            _ => {}
        }
        // Invertible left rules.
        for (i, h) in hs.0.iter().enumerate() {
            if h.used {
                continue;
            }
            match &h.ty {
                Formula::And(a, c) if !(hs.has(a) && hs.has(c)) => {
                    let mut hs2 = hs.clone();
                    hs2.0[i].used = true;
                    hs2.push(ProofTerm::Fst(b(h.term.clone())), (**a).clone());
                    hs2.push(ProofTerm::Snd(b(h.term.clone())), (**c).clone());
                    let (m, _) = self.prove(&hs2, goal, d)?;
                    return Some((m, Step::AndL(h.ty.clone())));
                }
                Formula::Exists(x, a) if !hs.has_instance(x, a) => {
                    let mut avoid = hs.free_vars();
                    avoid.extend(goal.free_vars());
                    let z = Var::fresh_avoiding(&avoid);
                    let body_ty = a.substitute(x, &z);
                    let u = self.fresh_term_var();
                    let mut hs2 = hs.clone();
                    hs2.0[i].used = true;
                    hs2.push(ProofTerm::Var(u.clone()), body_ty.clone());
                    let (m, _) = self.prove(&hs2, goal, d)?;
                    return Some((
                        ProofTerm::Unpack {
                            hyp: u,
                            eigen: z,
                            hyp_ty: body_ty,
                            scrutinee: b(h.term.clone()),
                            body: b(m),
                        },
                        Step::ExistsL(h.ty.clone()),
                    ));
                }
                Formula::Or(a, c) if !(hs.has(a) || hs.has(c)) => {
                    let mut base = hs.clone();
                    base.0[i].used = true;
                    let (u, w) = (self.fresh_term_var(), self.fresh_term_var());
                    let (m, _) = self.prove(
                        &base.with(ProofTerm::Var(u.clone()), (**a).clone()),
                        goal,
                        d,
                    )?;
                    let (n, _) = self.prove(
                        &base.with(ProofTerm::Var(w.clone()), (**c).clone()),
                        goal,
                        d,
                    )?;
                    return Some((
                        ProofTerm::Case {
                            scrutinee: b(h.term.clone()),
                            left: (u, (**a).clone(), b(m)),
                            right: (w, (**c).clone(), b(n)),
                        },
                        Step::OrL(h.ty.clone()),
                    ));
                }
                _ => {}
            }
        }
        // Choices.
        let mut candidates: Vec<Var> = {
            let mut fv = hs.free_vars();
            fv.extend(goal.free_vars());
            let fresh = Var::fresh_avoiding(&fv);
            let mut v: Vec<Var> = fv.into_iter().collect();
            v.push(fresh);
            v
        };
        candidates.dedup();
        match goal {
            Formula::Or(a, c) => {
                if let Some((m, _)) = self.prove(hs, a, d) {
                    return Some((ProofTerm::Inl(goal.clone(), b(m)), Step::OrR { left: true }));
                }
                if let Some((m, _)) = self.prove(hs, c, d) {
                    return Some((
                        ProofTerm::Inr(goal.clone(), b(m)),
                        Step::OrR { left: false },
                    ));
                }
            }
            Formula::Exists(x, a) => {
                for y in &candidates {
                    if let Some((m, _)) = self.prove(hs, &a.substitute(x, y), d) {
                        return Some((
                            ProofTerm::Pack(b(m), y.clone(), goal.clone()),
                            Step::ExistsR(y.clone()),
                        ));
                    }
                }
            }
            _ => {}
        }
        for h in &hs.0 {
            if let Formula::Implies(a, c) = &h.ty {
                if hs.has(c) {
                    continue;
                }
                let Some((n, _)) = self.prove(hs, a, d) else {
                    continue;
                };
                let hs2 = hs.with(ProofTerm::App(b(h.term.clone()), b(n)), (**c).clone());
                if let Some((m, _)) = self.prove(&hs2, goal, d) {
                    return Some((m, Step::ImpL(h.ty.clone())));
                }
            }
        }
        for h in &hs.0 {
            if let Formula::Forall(x, a) = &h.ty {
                for y in &candidates {
                    let inst = a.substitute(x, y);
                    if hs.has(&inst) {
                        continue;
                    }
                    let hs2 = hs.with(ProofTerm::TApp(b(h.term.clone()), y.clone()), inst);
                    if let Some((m, _)) = self.prove(&hs2, goal, d) {
                        return Some((m, Step::ForallL(h.ty.clone(), y.clone())));
                    }
                }
            }
        }
        None
    }
}

enum Attempt {
    Found(ProofTerm, Step),
    /// The whole space under the depth cap was explored.
    Exhausted,
    /// Stopped by the node cap.
    OutOfNodes,
}

fn initial_hyps(ctx: &Context) -> Hyps {
    let mut hs = Hyps::default();
    for (x, f) in ctx.entries() {
        hs.push(ProofTerm::Var(x.clone()), f.clone());
    }
    hs
}

/// Iterative deepening up to `max_depth` under one node cap.
fn attempt(ctx: &Context, goal: &Formula, max_depth: usize, node_cap: u64) -> (Attempt, u64) {
    let taken: HashSet<String> = ctx.entries().iter().map(|(x, _)| x.to_string()).collect();
    let hs = initial_hyps(ctx);
    let mut s = Searcher::new(node_cap, taken);
    for depth in 1..=max_depth.max(1) {
        s.hit_depth = false;
        s.counter = 0;
        if let Some((m, step)) = s.prove(&hs, goal, depth) {
            return (Attempt::Found(m, step), s.nodes);
        }
        if s.hit_nodes {
            return (Attempt::OutOfNodes, s.nodes.min(node_cap));
        }
        if !s.hit_depth {
            break;
        }
    }
    (Attempt::Exhausted, s.nodes)
}

/// Resumable search: [`ProofSearch::step`] spends a slice of node budget.
/// Internally each attempt restarts the deepening with a doubled node cap,
/// so the total work is within a constant factor of the final attempt.
#[derive(Clone, Debug)]
pub struct ProofSearch {
    ctx: Context,
    goal: Formula,
    limits: SearchLimits,
    credit: u64,
    next_cap: u64,
    spent: u64,
    outcome: Option<ProofOutcome>,
    step: Option<Step>,
}

impl ProofSearch {
    pub fn new(ctx: Context, goal: Formula, limits: SearchLimits) -> Self {
        ProofSearch {
            ctx,
            goal,
            limits,
            credit: 0,
            next_cap: 256.min(limits.max_nodes.max(1)),
            spent: 0,
            outcome: None,
            step: None,
        }
    }

    /// Adds `nodes` to the budget and runs attempts that the accumulated
    /// budget pays for. Returns the outcome once the search has finished.
    pub fn step(&mut self, nodes: u64) -> Option<&ProofOutcome> {
        if self.outcome.is_some() {
            return self.outcome.as_ref();
        }
        self.credit += nodes;
        while self.outcome.is_none() && self.credit >= self.next_cap {
            let cap = self.next_cap;
            self.credit -= cap;
            let (res, used) = attempt(&self.ctx, &self.goal, self.limits.max_depth, cap);
            self.spent += used;
            match res {
                Attempt::Found(m, step) => {
                    let status = if check(&self.ctx, &m, &self.goal) {
                        self.step = Some(step);
                        ProofStatus::Proved(m)
                    } else {
                        debug_assert!(false, "search produced an ill-typed term {m}");
                        ProofStatus::NotFoundWithinBudget
                    };
                    self.finish(status);
                }
                Attempt::Exhausted => self.finish(ProofStatus::NotFoundWithinBudget),
                Attempt::OutOfNodes if cap >= self.limits.max_nodes => {
                    self.finish(ProofStatus::NotFoundWithinBudget)
                }
                Attempt::OutOfNodes => {
                    self.next_cap = (cap * 2).min(self.limits.max_nodes);
                }
            }
        }
        self.outcome.as_ref()
    }

    fn finish(&mut self, status: ProofStatus) {
        self.outcome = Some(ProofOutcome {
            status,
            budget_spent: self.spent,
        });
    }

    pub fn run_to_end(&mut self) -> &ProofOutcome {
        while self.outcome.is_none() {
            let need = self.next_cap.saturating_sub(self.credit);
            self.step(need.max(1));
        }
        self.outcome.as_ref().expect("finished")
    }

    pub fn outcome(&self) -> Option<&ProofOutcome> {
        self.outcome.as_ref()
    }

    /// Nodes expanded so far.
    pub fn spent(&self) -> u64 {
        self.spent
    }

    /// The bottom rule of the proof found, if any.
    pub fn root_step(&self) -> Option<&Step> {
        self.step.as_ref()
    }
}

/// Searches `Γ ⊢ ? : τ` up to derivation depth `depth_budget`.
pub fn search_proof(ctx: &Context, tau: &Formula, depth_budget: usize) -> ProofOutcome {
    ProofSearch::new(ctx.clone(), tau.clone(), SearchLimits::depth(depth_budget))
        .run_to_end()
        .clone()
}

/// Searches a sequent given as bare formulas (hypotheses named `h0, h1, ...`)
/// and reports the bottom rule alongside the term.
pub fn search_sequent(
    hyps: &[Formula],
    goal: &Formula,
    limits: SearchLimits,
) -> Option<(ProofTerm, Step)> {
    let mut s = ProofSearch::new(Context::numbered(hyps), goal.clone(), limits);
    let m = s.run_to_end().proof()?.clone();
    Some((m, s.step.clone().expect("step recorded with proof")))
}
