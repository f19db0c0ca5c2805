// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::{KripkeModel, ModelEnumerator, StateId, Valuation};
use crate::formula::{free_vars_of, Formula, PredSymbol, Var};

/// A point `(M, c, ρ)` of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub model: KripkeModel,
    pub state: StateId,
    pub valuation: Valuation,
}

impl Point {
    pub fn satisfies(&self, f: &Formula) -> bool {
        self.model
            .satisfies(self.state, &self.valuation, f)
            .unwrap_or(false)
    }
}

fn signature<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Vec<PredSymbol> {
    let mut sig = BTreeSet::new();
    for f in fs {
        sig.extend(f.predicates());
    }
    sig.into_iter().collect()
}

/// Points of models of size at most `max_size` where every formula of
/// `gamma` holds, visiting states with nonempty domains only. `visit`
/// returns false to stop.
pub fn for_each_point_satisfying(
    gamma: &[Formula],
    extra_sig: &[PredSymbol],
    max_size: usize,
    mut visit: impl FnMut(&KripkeModel, StateId, &Valuation) -> bool,
) {
    let mut sig = signature(gamma);
    sig.extend(extra_sig.iter().cloned());
    let vars: BTreeSet<Var> = free_vars_of(gamma);
    for m in ModelEnumerator::new(&sig, max_size) {
        for c in m.states() {
            if m.domain(c).is_empty() {
                continue;
            }
            for rho in m.valuation_iter(c, &vars) {
                if m.satisfies_all(c, &rho, gamma).unwrap_or(false) && !visit(&m, c, &rho) {
                    return;
                }
            }
        }
    }
}

/// A point of a model of size at most `max_size` where `gamma` holds and
/// `goal` fails; models are tried in order of size.
pub fn find_countermodel(gamma: &[Formula], goal: &Formula, max_size: usize) -> Option<Point> {
    let vars: BTreeSet<Var> = free_vars_of(gamma.iter().chain([goal]));
    let mut sig = signature(gamma);
    sig.extend(goal.predicates());
    sig.sort();
    sig.dedup();
    for m in ModelEnumerator::new(&sig, max_size) {
        for c in m.states() {
            if m.domain(c).is_empty() {
                continue;
            }
            for rho in m.valuation_iter(c, &vars) {
                if m.satisfies_all(c, &rho, gamma).unwrap_or(false)
                    && !m.satisfies(c, &rho, goal).unwrap_or(true)
                {
                    return Some(Point {
                        model: m,
                        state: c,
                        valuation: rho,
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn excluded_middle_countermodel_has_size_three() {
        let f = parse("forall X. P(X) \\/ (P(X) -> false)").unwrap();
        assert!(find_countermodel(&[], &f, 2).is_none());
        let p = find_countermodel(&[], &f, 3).unwrap();
        assert_eq!(p.model.size(), 3);
        assert!(!p.satisfies(&f));
    }

    #[test]
    fn hypotheses_respected() {
        let g = [parse("P(a)").unwrap()];
        assert!(find_countermodel(&g, &parse("P(a)").unwrap(), 3).is_none());
        assert!(find_countermodel(&g, &parse("Q(a)").unwrap(), 2).is_some());
    }
}
