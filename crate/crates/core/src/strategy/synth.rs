// SPDX-License-Identifier: Apache-2.0

//! Afrodite strategies read off a countermodel.
//!
//! A node carries the position, a model state `s` and a valuation `ρ` of
//! the free variables of the position with `ρ,s ⊨ Γ` and `ρ,s ⊭ τ`.
//! Afrodite's answers keep that pointwise witness alive; the state moves
//! only at b1 and b4. Nodes are created on demand and shared between
//! parents that reach the same `(position, s, ρ)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex, MutexGuard};

use thiserror::Error;

use crate::formula::{free_vars_of, Formula, Var};
use crate::game::{
    legal_moves, AfroditePolicy, Branch, GameError, LegalMove, Move, Position, Rule,
};
use crate::kripke::{Element, KripkeModel, ModelError, StateId, Valuation};

use super::{OrderCache, QuasiOrderRel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("model is invalid: {0}")]
    InvalidModel(String),
    #[error("state {0} does not refute the target")]
    NoRefutingState(StateId),
    #[error("state {0} has an empty domain")]
    EmptyDomain(StateId),
    #[error("invariant could not be restored at node {node} after {mv}")]
    InvariantRestoration { node: usize, mv: String },
    #[error("no node {0}")]
    NoSuchNode(usize),
    #[error("move {0} is not available at this node")]
    UnknownMove(String),
    #[error("precondition violated at node {node}: {from} is not below {to}")]
    PreconditionViolated { node: usize, from: Var, to: Var },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// An Eros move at a node and where Afrodite takes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChildEdge {
    pub mv: Move,
    pub branch: Option<Branch>,
    pub child: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyNode {
    pub id: usize,
    pub position: Position,
    pub state: StateId,
    pub rho: Valuation,
    /// Depth of first discovery.
    pub depth: usize,
    pub parent: Option<usize>,
    /// Afrodite's branch on the edge that first reached this node.
    pub choice: Option<Branch>,
    /// `None` until expanded.
    pub children: Option<Vec<ChildEdge>>,
    /// An ancestor with the same `(Γ̌, τ, s)`.
    pub repeat_link: Option<usize>,
}

type NodeKey = (Vec<String>, String, usize, Valuation);
type LoopKey = (Vec<String>, String, usize);

struct Inner {
    nodes: Vec<StrategyNode>,
    loop_keys: Vec<LoopKey>,
    index: HashMap<NodeKey, usize>,
    orders: Arc<OrderCache>,
}

/// A lazily expanded Afrodite strategy. Expansion is serialised by one
/// lock; accessors hand out clones of finished nodes.
pub struct Strategy {
    model: KripkeModel,
    root_target: Formula,
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Strategy")
            .field("target", &self.root_target)
            .field("nodes", &self.len())
            .finish()
    }
}

fn least(set: &BTreeSet<Element>) -> Option<Element> {
    set.iter().next().copied()
}

fn loop_key(p: &Position, s: StateId, ord: &QuasiOrderRel) -> LoopKey {
    let mut checked: Vec<String> = ord
        .checked_context()
        .iter()
        .map(|f| f.alpha_key().to_string())
        .collect();
    checked.sort();
    (checked, p.target().alpha_key().to_string(), s.0)
}

/// Enumerates every assignment of `vars` into `domain`, extending `base`.
fn for_each_assignment(
    vars: &[Var],
    domain: &BTreeSet<Element>,
    base: &Valuation,
    f: &mut impl FnMut(&Valuation) -> bool,
) -> bool {
    match vars.split_first() {
        None => f(base),
        Some((v, rest)) => {
            for &e in domain {
                if !for_each_assignment(rest, domain, &base.with(v.clone(), e), f) {
                    return false;
                }
            }
            true
        }
    }
}

/// The invariant as literally stated: some valuation of FV(Γ) into `A_s`
/// satisfies Γ, and every such valuation satisfying Γ refutes τ. Free
/// variables of τ outside Γ take their value from `rho`.
pub fn invariant_holds(
    model: &KripkeModel,
    p: &Position,
    s: StateId,
    rho: &Valuation,
) -> Result<bool, ModelError> {
    let gamma_vars: BTreeSet<Var> = free_vars_of(p.assumptions());
    let outside: BTreeSet<Var> = p
        .target()
        .free_vars()
        .difference(&gamma_vars)
        .cloned()
        .collect();
    let base = rho.restrict(&outside);
    let vars: Vec<Var> = gamma_vars.into_iter().collect();
    let mut some_model = false;
    let mut all_refute = true;
    let mut err = None;
    for_each_assignment(&vars, model.domain(s), &base, &mut |r| {
        let outcome = model
            .satisfies_all(s, r, p.assumptions())
            .and_then(|g| g.then(|| model.satisfies(s, r, p.target())).transpose());
        match outcome {
            Err(e) => err = Some(e),
            Ok(None) => {}
            Ok(Some(t)) => {
                some_model = true;
                all_refute &= !t;
            }
        }
        err.is_none() && all_refute
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(some_model && all_refute)
}

/// `ρ,s ⊨ Γ` and `ρ,s ⊭ τ` for the node's own valuation.
pub fn pointwise_holds(
    model: &KripkeModel,
    p: &Position,
    s: StateId,
    rho: &Valuation,
) -> Result<bool, ModelError> {
    Ok(model.satisfies_all(s, rho, p.assumptions())? && !model.satisfies(s, rho, p.target())?)
}

pub fn check_invariant(node: &StrategyNode, model: &KripkeModel) -> bool {
    invariant_holds(model, &node.position, node.state, &node.rho).unwrap_or(false)
}

impl Strategy {
    /// Strategy for `∅ ⊢ τ` with τ closed, refuted at `s0`.
    pub fn synthesize(
        model: KripkeModel,
        s0: StateId,
        tau: Formula,
    ) -> Result<Strategy, StrategyError> {
        Self::synthesize_from(model, s0, Position::start(tau), Valuation::new())
    }

    /// Strategy from an arbitrary position whose pointwise invariant holds
    /// under `rho`.
    pub fn synthesize_from(
        model: KripkeModel,
        s0: StateId,
        start: Position,
        rho: Valuation,
    ) -> Result<Strategy, StrategyError> {
        Self::synthesize_cached(model, s0, start, rho, Arc::new(OrderCache::new()))
    }

    /// As [`synthesize_from`](Self::synthesize_from), sharing quasiorders
    /// with other strategies through `orders`.
    pub fn synthesize_cached(
        model: KripkeModel,
        s0: StateId,
        start: Position,
        rho: Valuation,
        orders: Arc<OrderCache>,
    ) -> Result<Strategy, StrategyError> {
        let violations = model.validate();
        if !violations.is_empty() {
            let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(StrategyError::InvalidModel(text.join("; ")));
        }
        if s0.0 >= model.num_states() {
            return Err(ModelError::NoSuchState(s0).into());
        }
        if model.domain(s0).is_empty() {
            return Err(StrategyError::EmptyDomain(s0));
        }
        let rho = rho.restrict(&start.free_vars());
        if !pointwise_holds(&model, &start, s0, &rho)? {
            return Err(StrategyError::NoRefutingState(s0));
        }
        let root_target = start.target().clone();
        let mut inner = Inner {
            nodes: Vec::new(),
            loop_keys: Vec::new(),
            index: HashMap::new(),
            orders,
        };
        inner.intern(start, s0, rho, None, None);
        Ok(Strategy {
            model,
            root_target,
            inner: Mutex::new(inner),
        })
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn target(&self) -> &Formula {
        &self.root_target
    }

    pub fn root(&self) -> usize {
        0
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Nodes materialised so far.
    pub fn len(&self) -> usize {
        self.lock().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, id: usize) -> Result<StrategyNode, StrategyError> {
        self.lock()
            .nodes
            .get(id)
            .cloned()
            .ok_or(StrategyError::NoSuchNode(id))
    }

    /// Children of `id`, one per legal Eros move, expanding on first use.
    pub fn children(&self, id: usize) -> Result<Vec<ChildEdge>, StrategyError> {
        let mut inner = self.lock();
        let node = inner.nodes.get(id).ok_or(StrategyError::NoSuchNode(id))?;
        if let Some(c) = &node.children {
            return Ok(c.clone());
        }
        let (p, s, rho) = (node.position.clone(), node.state, node.rho.clone());
        let mut edges = Vec::new();
        for legal in legal_moves(&p) {
            let (branch, next, s2, rho2) = self.answer(s, &rho, &legal)?.ok_or_else(|| {
                StrategyError::InvariantRestoration {
                    node: id,
                    mv: legal.mv.to_string(),
                }
            })?;
            let rho2 = rho2.restrict(&next.free_vars());
            if !pointwise_holds(&self.model, &next, s2, &rho2)? {
                return Err(StrategyError::InvariantRestoration {
                    node: id,
                    mv: legal.mv.to_string(),
                });
            }
            let child = inner.intern(next, s2, rho2, Some(id), branch);
            edges.push(ChildEdge {
                mv: legal.mv.clone(),
                branch,
                child,
            });
        }
        inner.nodes[id].children = Some(edges.clone());
        Ok(edges)
    }

    /// Afrodite's answer to `mv` at `id`: the branch and the node reached.
    pub fn respond(&self, id: usize, mv: &Move) -> Result<(Option<Branch>, usize), StrategyError> {
        self.children(id)?
            .into_iter()
            .find(|e| e.mv.matches(mv))
            .map(|e| (e.branch, e.child))
            .ok_or_else(|| StrategyError::UnknownMove(mv.to_string()))
    }

    /// Afrodite's choice for one move: branch, successor, new state and
    /// extended valuation. `None` when no admissible choice exists.
    #[allow(clippy::type_complexity)]
    fn answer(
        &self,
        s: StateId,
        rho: &Valuation,
        legal: &LegalMove,
    ) -> Result<Option<(Option<Branch>, Position, StateId, Valuation)>, ModelError> {
        let m = &self.model;
        let mv = &legal.mv;
        let pick = |b: Option<Branch>| legal.successors.pick(b).cloned().expect("shape");
        let sel = &mv.selected;
        let out = match (mv.rule, sel) {
            (Rule::A1, Formula::Implies(_, g)) => {
                let b = if m.satisfies(s, rho, g)? {
                    Branch::Left
                } else {
                    Branch::Right
                };
                Some((Some(b), pick(Some(b)), s, rho.clone()))
            }
            (Rule::A2, Formula::Or(b, _)) => {
                let br = if m.satisfies(s, rho, b)? {
                    Branch::Left
                } else {
                    Branch::Right
                };
                Some((Some(br), pick(Some(br)), s, rho.clone()))
            }
            (Rule::B2, Formula::And(b, _)) => {
                let br = if m.satisfies(s, rho, b)? {
                    Branch::Right
                } else {
                    Branch::Left
                };
                Some((Some(br), pick(Some(br)), s, rho.clone()))
            }
            (Rule::A3, _) | (Rule::B3, _) => Some((None, pick(None), s, rho.clone())),
            (Rule::A4, _) | (Rule::B5, _) => {
                let y = mv.var.clone().expect("a4/b5 carry a variable");
                let mut r = rho.clone();
                if !r.contains(&y) {
                    let e = least(m.domain(s)).ok_or(ModelError::Invalid("empty domain".into()))?;
                    r.set(y, e);
                }
                Some((None, pick(None), s, r))
            }
            (Rule::A5, Formula::Exists(x, phi)) => {
                let y = mv.var.clone().expect("a5 carries a variable");
                let inst = phi.substitute(x, &y);
                let mut found = None;
                for &e in m.domain(s) {
                    let r = rho.with(y.clone(), e);
                    if m.satisfies(s, &r, &inst)? {
                        found = Some(r);
                        break;
                    }
                }
                found.map(|r| (None, pick(None), s, r))
            }
            (Rule::B1, Formula::Implies(b, g)) => {
                let mut found = None;
                for t in m.successors(s) {
                    if m.satisfies(t, rho, b)? && !m.satisfies(t, rho, g)? {
                        found = Some(t);
                        break;
                    }
                }
                found.map(|t| (None, pick(None), t, rho.clone()))
            }
            (Rule::B4, Formula::Forall(x, phi)) => {
                let y = mv.var.clone().expect("b4 carries a variable");
                let inst = phi.substitute(x, &y);
                let mut found = None;
                'outer: for t in m.successors(s) {
                    for &e in m.domain(t) {
                        let r = rho.with(y.clone(), e);
                        if !m.satisfies(t, &r, &inst)? {
                            found = Some((t, r));
                            break 'outer;
                        }
                    }
                }
                found.map(|(t, r)| (None, pick(None), t, r))
            }
            _ => None,
        };
        Ok(out)
    }

    /// Breadth-first expansion to `depth` Eros moves, skipping nodes with
    /// a repeat link. Expansion stops once `node_cap` nodes are reached.
    pub fn explore(&self, depth: usize, node_cap: usize) -> Result<Exploration, StrategyError> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([(self.root(), 0usize)]);
        let mut truncated = false;
        seen.insert(self.root());
        while let Some((id, d)) = queue.pop_front() {
            order.push(id);
            let node = self.node(id)?;
            if d >= depth || node.repeat_link.is_some() {
                continue;
            }
            if seen.len() >= node_cap {
                truncated = true;
                continue;
            }
            for e in self.children(id)? {
                if seen.insert(e.child) {
                    queue.push_back((e.child, d + 1));
                }
            }
        }
        Ok(Exploration {
            nodes: order,
            depth,
            truncated,
        })
    }

    /// Node-list text, one line per node of `ids`:
    /// `node_id | Γ | τ | s | choice | child_ids | repeat_link`.
    pub fn export(&self, ids: &[usize]) -> Result<String, StrategyError> {
        let mut out = String::new();
        for &id in ids {
            let n = self.node(id)?;
            let gamma = if n.position.assumptions().is_empty() {
                "-".to_owned()
            } else {
                n.position
                    .assumptions()
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join(" ; ")
            };
            let choice = n.choice.map_or("-".to_owned(), |b| b.to_string());
            let children = match &n.children {
                None => "?".to_owned(),
                Some(c) if c.is_empty() => "-".to_owned(),
                Some(c) => c
                    .iter()
                    .map(|e| e.child.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            };
            let link = n.repeat_link.map_or("-".to_owned(), |l| l.to_string());
            out.push_str(&format!(
                "{} | {} | {} | {} | {} | {} | {}\n",
                id,
                gamma,
                n.position.target(),
                n.state,
                choice,
                children,
                link
            ));
        }
        Ok(out)
    }

    /// Number of ≃-classes of maximal variables at a node.
    pub fn class_count(&self, id: usize) -> Result<usize, StrategyError> {
        let node = self.node(id)?;
        let orders = self.lock().orders.clone();
        let ord = orders.get(node.position.assumptions());
        Ok(ord.equivalence_classes(&ord.maximal_vars()).len())
    }
}

impl Inner {
    fn intern(
        &mut self,
        position: Position,
        state: StateId,
        rho: Valuation,
        parent: Option<usize>,
        choice: Option<Branch>,
    ) -> usize {
        let (g, t) = position.key();
        let key = (g, t, state.0, rho.clone());
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let ord = self.orders.get(position.assumptions());
        let lk = loop_key(&position, state, &ord);
        let mut repeat_link = None;
        let mut cur = parent;
        while let Some(a) = cur {
            if self.loop_keys[a] == lk {
                repeat_link = Some(a);
                break;
            }
            cur = self.nodes[a].parent;
        }
        let id = self.nodes.len();
        let depth = parent.map_or(0, |p| self.nodes[p].depth + 1);
        self.nodes.push(StrategyNode {
            id,
            position,
            state,
            rho,
            depth,
            parent,
            choice,
            children: None,
            repeat_link,
        });
        self.loop_keys.push(lk);
        self.index.insert(key, id);
        id
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exploration {
    /// Reached node ids, breadth-first.
    pub nodes: Vec<usize>,
    pub depth: usize,
    /// Set when the node cap stopped expansion early.
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SmallStrategyReport {
    pub class_count: usize,
    pub bound: usize,
    pub is_small: bool,
    pub depth: usize,
    pub nodes: usize,
    pub truncated: bool,
}

/// Largest ≃-class count over the prefix explored to `depth`.
pub fn smallness_report(
    strategy: &Strategy,
    depth: usize,
    bound: usize,
    node_cap: usize,
) -> Result<SmallStrategyReport, StrategyError> {
    let ex = strategy.explore(depth, node_cap)?;
    let mut class_count = 0;
    for &id in &ex.nodes {
        class_count = class_count.max(strategy.class_count(id)?);
    }
    Ok(SmallStrategyReport {
        class_count,
        bound,
        is_small: class_count <= bound,
        depth,
        nodes: ex.nodes.len(),
        truncated: ex.truncated,
    })
}

/// A finite, explicitly stored strategy fragment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub position: Position,
    pub state: StateId,
    pub rho: Valuation,
    pub children: Vec<usize>,
}

impl StrategyTree {
    /// Distinct free variables over all positions.
    pub fn distinct_vars(&self) -> BTreeSet<Var> {
        self.nodes
            .iter()
            .flat_map(|n| n.position.free_vars())
            .collect()
    }

    pub fn check_invariant(&self, model: &KripkeModel) -> bool {
        self.nodes
            .iter()
            .all(|n| invariant_holds(model, &n.position, n.state, &n.rho).unwrap_or(false))
    }

    pub fn final_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.position.is_final()).count()
    }
}

/// The subtree below `node` (to `depth` moves) with every `from` renamed to
/// its `to`. Each pair must satisfy `from ⪯ to` in the context of every
/// node visited; `ρ(to)` is kept, or taken from `ρ(from)` when `to` was
/// not yet valued.
pub fn substitute_in_strategy(
    strategy: &Strategy,
    node: usize,
    mapping: &[(Var, Var)],
    depth: usize,
) -> Result<StrategyTree, StrategyError> {
    let map: BTreeMap<Var, Var> = mapping.iter().cloned().collect();
    let mut ids = vec![node];
    let mut slot: HashMap<usize, usize> = HashMap::from([(node, 0)]);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    let mut depths = vec![0usize];
    while i < ids.len() {
        let id = ids[i];
        let n = strategy.node(id)?;
        let mut out = Vec::new();
        if depths[i] < depth && n.repeat_link.is_none() {
            for e in strategy.children(id)? {
                let k = *slot.entry(e.child).or_insert_with(|| {
                    ids.push(e.child);
                    depths.push(depths[i] + 1);
                    ids.len() - 1
                });
                out.push(k);
            }
        }
        edges.push(out);
        i += 1;
    }
    let mut tree = StrategyTree { nodes: Vec::new() };
    for (id, children) in ids.into_iter().zip(edges) {
        let n = strategy.node(id)?;
        let ord = QuasiOrderRel::new(n.position.assumptions());
        for (from, to) in mapping {
            if ord.vars().contains(from) && !ord.holds(from, to) {
                return Err(StrategyError::PreconditionViolated {
                    node: id,
                    from: from.clone(),
                    to: to.clone(),
                });
            }
        }
        let position = Position::new(
            n.position
                .assumptions()
                .iter()
                .map(|f| f.substitute_all(&map)),
            n.position.target().substitute_all(&map),
        );
        let mut rho = Valuation::new();
        for (v, e) in n.rho.iter() {
            match map.get(v) {
                Some(to) if !n.rho.contains(to) => rho.set(to.clone(), e),
                Some(_) => {}
                None => rho.set(v.clone(), e),
            }
        }
        let rho = rho.restrict(&position.free_vars());
        tree.nodes.push(TreeNode {
            position,
            state: n.state,
            rho,
            children,
        });
    }
    Ok(tree)
}

/// Afrodite following a synthesized strategy.
#[derive(Clone, Debug)]
pub struct StrategyAfrodite {
    strategy: Arc<Strategy>,
    node: usize,
}

impl StrategyAfrodite {
    pub fn new(strategy: Arc<Strategy>) -> Self {
        let node = strategy.root();
        StrategyAfrodite { strategy, node }
    }

    pub fn current(&self) -> usize {
        self.node
    }

    pub fn strategy(&self) -> &Arc<Strategy> {
        &self.strategy
    }
}

impl AfroditePolicy for StrategyAfrodite {
    fn respond(
        &mut self,
        precedent: &Position,
        mv: &LegalMove,
    ) -> Result<Option<Branch>, GameError> {
        let here = self
            .strategy
            .node(self.node)
            .map_err(|e| GameError::Policy(e.to_string()))?;
        if &here.position != precedent {
            return Err(GameError::Policy(format!(
                "strategy is at {} but the game is at {precedent}",
                here.position
            )));
        }
        let (branch, child) = self
            .strategy
            .respond(self.node, &mv.mv)
            .map_err(|e| GameError::Policy(e.to_string()))?;
        self.node = child;
        Ok(branch)
    }
}
