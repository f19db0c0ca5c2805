// SPDX-License-Identifier: Apache-2.0

//! Run fragments and their compaction.
//!
//! A run is a sequence of positions together with the set `V` of
//! eigenvariables it introduced. Two positions are equivalent when their
//! checked contexts and targets agree; the stretch between equivalent
//! positions can be cut out, after renaming variables of the suffix to
//! maximal representatives.

mod header;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::formula::{Formula, Var};
use crate::game::{Position, Trace, TraceError};
use crate::strategy::QuasiOrderRel;

pub use header::{parse_run_file, HeaderError, InstantaneousDescription, RunFile};

/// Γ together with Γ̌, the members whose free variables are all maximal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckedContext {
    pub source: Vec<Formula>,
    pub checked: Vec<Formula>,
}

impl CheckedContext {
    /// Order-independent identity of Γ̌.
    pub fn key(&self) -> BTreeSet<Formula> {
        self.checked.iter().map(|f| f.alpha_key()).collect()
    }
}

pub fn check_gamma(gamma: &[Formula], ord: &QuasiOrderRel) -> CheckedContext {
    let maximal = ord.maximal_vars();
    CheckedContext {
        source: gamma.to_vec(),
        checked: gamma
            .iter()
            .filter(|f| f.free_vars().is_subset(&maximal))
            .cloned()
            .collect(),
    }
}

/// Equal Γ̌ and targets equal up to bound renaming.
pub fn positions_equivalent_with(
    p1: &Position,
    ord1: &QuasiOrderRel,
    p2: &Position,
    ord2: &QuasiOrderRel,
) -> bool {
    p1.target().alpha_eq(p2.target())
        && check_gamma(p1.assumptions(), ord1).key() == check_gamma(p2.assumptions(), ord2).key()
}

pub fn positions_equivalent(p1: &Position, p2: &Position) -> bool {
    positions_equivalent_with(
        p1,
        &QuasiOrderRel::new(p1.assumptions()),
        p2,
        &QuasiOrderRel::new(p2.assumptions()),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractRun {
    pub positions: Vec<Position>,
    pub eigenvariables: BTreeSet<Var>,
    pub origin: Vec<InstantaneousDescription>,
}

impl AbstractRun {
    pub fn new(positions: Vec<Position>, eigenvariables: BTreeSet<Var>) -> Self {
        AbstractRun {
            positions,
            eigenvariables,
            origin: Vec::new(),
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), BTreeSet::new())
    }

    /// Positions of a game trace; `V` is every variable free somewhere in
    /// the run but not in its first position.
    pub fn from_trace(trace: &Trace) -> Self {
        let positions: Vec<Position> = trace.positions().into_iter().cloned().collect();
        let eigenvariables = introduced_vars(&positions);
        Self::new(positions, eigenvariables)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Each position's Γ contains the previous one's.
    pub fn assumptions_monotone(&self) -> bool {
        self.positions
            .windows(2)
            .all(|w| w[0].assumptions_within(&w[1]))
    }
}

fn introduced_vars(positions: &[Position]) -> BTreeSet<Var> {
    let Some(first) = positions.first() else {
        return BTreeSet::new();
    };
    let initial = first.free_vars();
    positions
        .iter()
        .flat_map(|p| p.free_vars())
        .filter(|v| !initial.contains(v))
        .collect()
}

/// Equivalence class of a position: its target and Γ̌, up to bound renaming.
type PositionKey = (Formula, BTreeSet<Formula>);

/// Positions with their quasiorders and keys, computed on first use.
struct Scan {
    positions: Vec<Position>,
    seen: Vec<Option<(QuasiOrderRel, PositionKey)>>,
}

impl Scan {
    fn new(positions: Vec<Position>) -> Self {
        let seen = positions.iter().map(|_| None).collect();
        Scan { positions, seen }
    }

    fn entry(&mut self, k: usize) -> &(QuasiOrderRel, PositionKey) {
        let p = &self.positions[k];
        self.seen[k].get_or_insert_with(|| {
            let ord = QuasiOrderRel::new(p.assumptions());
            let key = (
                p.target().alpha_key(),
                check_gamma(p.assumptions(), &ord).key(),
            );
            (ord, key)
        })
    }

    /// First pair `i < j` with `j >= from` (by `j`, then `i`) of equivalent
    /// positions whose removal keeps the finality of the last position.
    fn removable_pair(&mut self, from: usize) -> Option<(usize, usize)> {
        let last = self.positions.len().checked_sub(1)?;
        for j in from.max(1)..self.positions.len() {
            let kj = self.entry(j).1.clone();
            for i in 0..j {
                if self.entry(i).1 != kj {
                    continue;
                }
                if j == last && self.positions[i].is_final() != self.positions[j].is_final() {
                    continue;
                }
                return Some((i, j));
            }
        }
        None
    }

    fn replace_suffix(&mut self, keep: usize, suffix: Vec<Position>) {
        self.positions.truncate(keep);
        self.seen.truncate(keep);
        self.seen.extend(suffix.iter().map(|_| None));
        self.positions.extend(suffix);
    }
}

/// Renaming sending each variable of Γ to the least member of the
/// ∼-class of its maximal representative.
fn maximal_renaming(ord: &QuasiOrderRel) -> BTreeMap<Var, Var> {
    let maximal = ord.maximal_vars();
    let classes = ord.equivalence_classes(&maximal);
    let class_rep = |y: &Var| -> Var {
        classes
            .iter()
            .find(|c| c.contains(y))
            .and_then(|c| c.iter().next())
            .cloned()
            .unwrap_or_else(|| y.clone())
    };
    let mut map = BTreeMap::new();
    for x in ord.vars() {
        if let Some(y) = ord.maximal_rep(x) {
            let rep = class_rep(&y);
            if &rep != x {
                map.insert(x.clone(), rep);
            }
        }
    }
    map
}

/// Cuts fragments between equivalent positions until none remain.
///
/// For the first equivalent pair `i < j`, positions `i+1..=j` are removed
/// and each later position `Γₖ ⊢ τₖ` becomes `Γᵢ ∪ Γₖσ ⊢ τₖσ`, where σ is
/// the maximal renaming computed at position `j`. A pair whose removal
/// would change whether the run ends in a final position is left alone.
/// `V` shrinks to the eigenvariables still free in some position.
pub fn compact(run: &AbstractRun) -> AbstractRun {
    let mut scan = Scan::new(run.positions.clone());
    // Positions up to a cut are untouched, so no later pair ends before it.
    let mut from = 1;
    while let Some((i, j)) = scan.removable_pair(from) {
        let sigma = maximal_renaming(&scan.entry(j).0);
        let keep = scan.positions[i].assumptions().to_vec();
        let suffix: Vec<Position> = scan.positions[j + 1..]
            .iter()
            .map(|p| {
                Position::new(
                    keep.iter()
                        .cloned()
                        .chain(p.assumptions().iter().map(|f| f.substitute_all(&sigma))),
                    p.target().substitute_all(&sigma),
                )
            })
            .collect();
        scan.replace_suffix(i + 1, suffix);
        from = i + 1;
    }
    let positions = scan.positions;
    let free: BTreeSet<Var> = positions.iter().flat_map(|p| p.free_vars()).collect();
    AbstractRun {
        eigenvariables: run
            .eigenvariables
            .iter()
            .filter(|v| free.contains(*v))
            .cloned()
            .collect(),
        positions,
        origin: run.origin.clone(),
    }
}

/// `μ = f · s^v` with `f` the number of distinct subformulas of φ and `v`
/// the number of distinct variables in it, bound or free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnvBound {
    pub f_count: usize,
    pub v_count: usize,
    pub s_value: usize,
    pub mu: u128,
}

pub fn mu_bound(phi: &Formula, s_value: usize) -> EnvBound {
    let f_count = phi.subformulas().len();
    let v_count = phi.all_vars().len();
    let mu = (f_count as u128).saturating_mul((s_value as u128).saturating_pow(v_count as u32));
    EnvBound {
        f_count,
        v_count,
        s_value,
        mu,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EigenCheck {
    pub within: bool,
    pub v_size: usize,
    pub limit: u128,
}

pub fn check_eigenvariable_bound(run: &AbstractRun, bound: &EnvBound) -> EigenCheck {
    let limit = bound.mu.saturating_mul(bound.mu);
    let v_size = run.eigenvariables.len();
    EigenCheck {
        within: (v_size as u128) <= limit,
        v_size,
        limit,
    }
}

/// One CSV row of compaction statistics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompactionRow {
    pub trace_id: String,
    pub len_before: usize,
    pub len_after: usize,
    pub v_before: usize,
    pub v_after: usize,
    pub mu: u128,
    pub within: bool,
}

impl CompactionRow {
    pub fn measure(
        trace_id: &str,
        before: &AbstractRun,
        after: &AbstractRun,
        bound: &EnvBound,
    ) -> Self {
        let check = check_eigenvariable_bound(after, bound);
        CompactionRow {
            trace_id: trace_id.to_owned(),
            len_before: before.len(),
            len_after: after.len(),
            v_before: before.eigenvariables.len(),
            v_after: check.v_size,
            mu: bound.mu,
            within: check.within,
        }
    }
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[CompactionRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Imports a trace file, header records included.
pub fn import_run(text: &str) -> Result<AbstractRun, HeaderError> {
    let file = parse_run_file(text)?;
    let trace = Trace::parse(&file.body).map_err(HeaderError::Trace)?;
    trace.verify().map_err(HeaderError::Trace)?;
    let mut run = AbstractRun::from_trace(&trace);
    for id in &file.ids {
        run.eigenvariables.extend(id.v.iter().cloned());
    }
    run.origin = file.ids;
    Ok(run)
}

impl From<TraceError> for HeaderError {
    fn from(e: TraceError) -> Self {
        HeaderError::Trace(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn pos(g: &[&str], t: &str) -> Position {
        Position::new(g.iter().map(|s| f(s)), f(t))
    }

    #[test]
    fn checked_contexts() {
        let gamma = vec![f("P(a)"), f("P(b)"), f("Q(b)")];
        let ord = QuasiOrderRel::new(&gamma);
        assert_eq!(
            check_gamma(&gamma, &ord).checked,
            vec![f("P(b)"), f("Q(b)")]
        );
        let closed = vec![f("forall X. P(X)"), f("false -> Q")];
        assert_eq!(
            check_gamma(&closed, &QuasiOrderRel::new(&closed)).checked,
            closed
        );
        assert!(check_gamma(&[], &QuasiOrderRel::new(&[]))
            .checked
            .is_empty());
    }

    #[test]
    fn equivalence() {
        let p1 = pos(&["P(a)", "P(b)", "Q(b)"], "R");
        let p2 = pos(&["P(b)", "Q(b)"], "R");
        assert!(positions_equivalent(&p1, &p2));
        assert!(!positions_equivalent(
            &p1,
            &pos(&["P(a)", "P(b)", "Q(b)"], "S")
        ));
        assert!(positions_equivalent(&p1, &p1));
    }

    #[test]
    fn compaction_cuts_fragment() {
        let a = pos(&["P(b)", "Q(b)"], "R");
        let a2 = pos(&["P(b)", "Q(b)", "P(a)"], "R");
        let b = pos(&["P(b)", "Q(b)", "P(a)", "S(a)"], "R");
        let run = AbstractRun::new(
            vec![a.clone(), a2.clone(), b],
            ["a".into()].into_iter().collect(),
        );
        assert!(positions_equivalent(&a, &a2));
        let out = compact(&run);
        assert_eq!(out.len(), 2);
        assert_eq!(out.positions[0], a);
        assert_eq!(out.positions[1], pos(&["P(b)", "Q(b)", "S(b)"], "R"));
        assert!(out.eigenvariables.is_empty());
        assert!(!positions_equivalent(&out.positions[0], &out.positions[1]));
        assert_eq!(compact(&out), out);
        assert!(compact(&AbstractRun::empty()).is_empty());
    }

    #[test]
    fn renaming_applies_to_suffix() {
        // a ≺ b at the second position, so a is renamed in the suffix.
        let p0 = pos(&["P(b)", "Q(b)"], "R");
        let p1 = pos(&["P(b)", "Q(b)", "P(a)"], "R");
        let p2 = pos(&["P(b)", "Q(b)", "P(a)"], "T(a)");
        let out = compact(&AbstractRun::new(vec![p0.clone(), p1, p2], BTreeSet::new()));
        assert_eq!(out.positions, vec![p0, pos(&["P(b)", "Q(b)"], "T(b)")]);
    }

    #[test]
    fn inequivalent_runs_unchanged() {
        let run = AbstractRun::new(vec![pos(&[], "A -> B"), pos(&["A"], "B")], BTreeSet::new());
        assert_eq!(compact(&run), run);
    }

    #[test]
    fn bounds() {
        let e = mu_bound(&f("exists X. P(X)"), 2);
        assert_eq!((e.f_count, e.v_count, e.mu), (2, 1, 4));
        let e = mu_bound(&Formula::Falsum, 1);
        assert_eq!((e.f_count, e.v_count, e.mu), (1, 0, 1));
        let e = mu_bound(&f("forall X. P(X) \\/ (P(X) -> false)"), 3);
        assert_eq!((e.f_count, e.v_count, e.mu), (5, 1, 15));
        let vars: BTreeSet<Var> = (0..226).map(Var::canonical).collect();
        let run = AbstractRun::new(Vec::new(), vars);
        let c = check_eigenvariable_bound(&run, &e);
        assert_eq!((c.within, c.v_size, c.limit), (false, 226, 225));
        let c = check_eigenvariable_bound(&AbstractRun::empty(), &e);
        assert_eq!((c.within, c.v_size), (true, 0));
    }

    #[test]
    fn csv_rows() {
        let run = AbstractRun::empty();
        let row = CompactionRow::measure("t0", &run, &run, &mu_bound(&Formula::Falsum, 1));
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "trace_id,len_before,len_after,v_before,v_after,mu,within\nt0,0,0,0,0,1,true\n"
        );
    }
}
