// SPDX-License-Identifier: Apache-2.0

//! Dovetailed decision procedures.
//!
//! Each procedure alternates one step of model enumeration with one slice
//! of proof search and reports whichever succeeds first. Both sides give
//! up at their caps, so every answer may be inconclusive.

mod caps;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::formula::{Formula, PredSymbol, Var};
use crate::kripke::{KripkeModel, ModelEnumerator, StateId, Valuation};
use crate::proof::{Context, ProofOutcome, ProofSearch, ProofTerm};

pub use caps::{Caps, CapsError, CAPS_ENV};

/// Proof-search nodes granted per proof step.
pub const PROOF_SLICE: u64 = 64;

/// A class of formulas given by closed axioms; its finite models are the
/// models where every axiom holds at every state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaClass {
    pub name: String,
    pub axioms: Vec<Formula>,
}

impl FormulaClass {
    /// The class without axioms.
    pub fn all() -> Self {
        FormulaClass {
            name: "all".into(),
            axioms: Vec::new(),
        }
    }

    pub fn new(name: impl Into<String>, axioms: Vec<Formula>) -> Result<Self, Formula> {
        if let Some(open) = axioms.iter().find(|a| !a.is_closed()) {
            return Err(open.clone());
        }
        Ok(FormulaClass {
            name: name.into(),
            axioms,
        })
    }

    /// Axiom file: one formula per line, `#` comments.
    pub fn parse_axioms(name: &str, text: &str) -> Result<Self, String> {
        let mut axioms = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f = crate::formula::parse(line).map_err(|e| format!("line {}: {e}", n + 1))?;
            axioms.push(f);
        }
        FormulaClass::new(name, axioms).map_err(|f| format!("axiom {f} is not closed"))
    }

    pub fn contains(&self, m: &KripkeModel) -> bool {
        m.is_model_of_class(&self.axioms).unwrap_or(false)
    }
}

/// Steps taken by each side of a dovetailed run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepsSpent {
    pub model_steps: u64,
    pub proof_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatStatus {
    SatisfiableWithModel {
        model: KripkeModel,
        state: StateId,
        valuation: Valuation,
        size: usize,
    },
    NegationProved(ProofTerm),
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatResult {
    pub status: SatStatus,
    pub steps: StepsSpent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmpProvenance {
    MinimalModel,
    UnsatSentinel1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SmpValue {
    pub value: usize,
    pub provenance: SmpProvenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("both searches exhausted their caps ({steps:?})")]
pub struct BudgetExhausted {
    pub steps: StepsSpent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProvabilityStatus {
    Provable(ProofTerm),
    Refutable {
        model: KripkeModel,
        state: StateId,
        valuation: Valuation,
    },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvabilityResult {
    pub status: ProvabilityStatus,
    pub steps: StepsSpent,
}

impl ProvabilityResult {
    pub fn is_provable(&self) -> bool {
        matches!(self.status, ProvabilityStatus::Provable(_))
    }

    pub fn is_refutable(&self) -> bool {
        matches!(self.status, ProvabilityStatus::Refutable { .. })
    }
}

fn signature<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Vec<PredSymbol> {
    let sig: BTreeSet<PredSymbol> = fs.into_iter().flat_map(|f| f.predicates()).collect();
    sig.into_iter().collect()
}

type PointTest<'a> = Box<dyn FnMut(&KripkeModel, StateId, &Valuation) -> bool + 'a>;

/// One side of a dovetail: the enumeration of models, each step examining
/// every nonempty-domain state and valuation of one admitted model.
struct ModelSide<'a> {
    models: ModelEnumerator,
    vars: BTreeSet<Var>,
    admit: Box<dyn FnMut(&KripkeModel) -> bool + 'a>,
    accept: PointTest<'a>,
    done: bool,
}

impl ModelSide<'_> {
    fn step(&mut self) -> Option<(KripkeModel, StateId, Valuation)> {
        let Some(m) = self.models.next() else {
            self.done = true;
            return None;
        };
        if !(self.admit)(&m) {
            return None;
        }
        for c in m.states() {
            if m.domain(c).is_empty() {
                continue;
            }
            for rho in m.valuation_iter(c, &self.vars) {
                if (self.accept)(&m, c, &rho) {
                    return Some((m, c, rho));
                }
            }
        }
        None
    }
}

enum Found {
    Model(KripkeModel, StateId, Valuation),
    Proof(ProofTerm),
}

/// Alternates a model step and a proof slice until one side succeeds or
/// both are exhausted.
fn dovetail(
    mut models: ModelSide<'_>,
    mut proofs: ProofSearch,
    steps: &mut StepsSpent,
) -> Option<Found> {
    let mut proof_done = false;
    loop {
        if !models.done {
            steps.model_steps += 1;
            if let Some((m, c, rho)) = models.step() {
                return Some(Found::Model(m, c, rho));
            }
        }
        if !proof_done {
            steps.proof_steps += 1;
            if let Some(out) = proofs.step(PROOF_SLICE) {
                match out.proof() {
                    Some(p) => return Some(Found::Proof(p.clone())),
                    None => proof_done = true,
                }
            }
        }
        if models.done && proof_done {
            return None;
        }
    }
}

/// A model of `cls` satisfying τ at some state, or a proof of `τ → ⊥` from
/// the axioms of `cls`.
pub fn decide_satisfiability(tau: &Formula, cls: &FormulaClass, caps: &Caps) -> SatResult {
    let sig = signature(cls.axioms.iter().chain([tau]));
    let models = ModelSide {
        models: ModelEnumerator::new(&sig, caps.max_model),
        vars: tau.free_vars(),
        admit: Box::new(|m: &KripkeModel| cls.contains(m)),
        accept: Box::new(|m: &KripkeModel, c: StateId, rho: &Valuation| {
            m.satisfies(c, rho, tau).unwrap_or(false)
        }),
        done: false,
    };
    let ctx = Context::numbered(&cls.axioms);
    let proofs = ProofSearch::new(ctx, Formula::not(tau.clone()), caps.limits());
    let mut steps = StepsSpent::default();
    let status = match dovetail(models, proofs, &mut steps) {
        Some(Found::Model(model, state, valuation)) => SatStatus::SatisfiableWithModel {
            size: model.size(),
            model,
            state,
            valuation,
        },
        Some(Found::Proof(p)) => SatStatus::NegationProved(p),
        None => SatStatus::BudgetExhausted,
    };
    SatResult { status, steps }
}

/// `s_X(τ)`: the size of the first satisfying model, or 1 when `¬τ` is
/// proved.
pub fn s_of(tau: &Formula, cls: &FormulaClass, caps: &Caps) -> Result<SmpValue, BudgetExhausted> {
    let r = decide_satisfiability(tau, cls, caps);
    match r.status {
        SatStatus::SatisfiableWithModel { size, .. } => Ok(SmpValue {
            value: size,
            provenance: SmpProvenance::MinimalModel,
        }),
        SatStatus::NegationProved(_) => Ok(SmpValue {
            value: 1,
            provenance: SmpProvenance::UnsatSentinel1,
        }),
        SatStatus::BudgetExhausted => Err(BudgetExhausted { steps: r.steps }),
    }
}

/// A proof of τ from no hypotheses, or a point refuting it.
pub fn decide_provability(tau: &Formula, caps: &Caps) -> ProvabilityResult {
    let sig = signature([tau]);
    let models = ModelSide {
        models: ModelEnumerator::new(&sig, caps.max_model),
        vars: tau.free_vars(),
        admit: Box::new(|_: &KripkeModel| true),
        accept: Box::new(|m: &KripkeModel, c: StateId, rho: &Valuation| {
            !m.satisfies(c, rho, tau).unwrap_or(true)
        }),
        done: false,
    };
    let proofs = ProofSearch::new(Context::new(), tau.clone(), caps.limits());
    let mut steps = StepsSpent::default();
    let status = match dovetail(models, proofs, &mut steps) {
        Some(Found::Model(model, state, valuation)) => ProvabilityStatus::Refutable {
            model,
            state,
            valuation,
        },
        Some(Found::Proof(p)) => ProvabilityStatus::Provable(p),
        None => ProvabilityStatus::Unknown,
    };
    ProvabilityResult { status, steps }
}

/// Proof search alone, for callers that want the raw outcome.
pub fn prove(tau: &Formula, caps: &Caps) -> ProofOutcome {
    ProofSearch::new(Context::new(), tau.clone(), caps.limits())
        .run_to_end()
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::proof::check;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn caps() -> Caps {
        Caps {
            max_model: 4,
            max_depth: 10,
            max_nodes: 50_000,
        }
    }

    #[test]
    fn falsum_negation_proved() {
        let r = decide_satisfiability(&Formula::Falsum, &FormulaClass::all(), &caps());
        match r.status {
            SatStatus::NegationProved(p) => {
                assert!(check(&Context::new(), &p, &Formula::not(Formula::Falsum)));
                assert_eq!(p.to_string(), "(lam u0 [false] u0)");
            }
            other => panic!("{other:?}"),
        }
        let v = s_of(&Formula::Falsum, &FormulaClass::all(), &caps()).unwrap();
        assert_eq!(v.value, 1);
        assert_eq!(v.provenance, SmpProvenance::UnsatSentinel1);
    }

    #[test]
    fn exists_p_has_size_two() {
        let r = decide_satisfiability(&f("exists X. P(X)"), &FormulaClass::all(), &caps());
        match r.status {
            SatStatus::SatisfiableWithModel { model, size, .. } => {
                assert_eq!(size, 2);
                assert_eq!(model.num_states(), 1);
            }
            other => panic!("{other:?}"),
        }
        let f2 = f("forall X. P(X) \\/ (P(X) -> false)");
        assert_eq!(s_of(&f2, &FormulaClass::all(), &caps()).unwrap().value, 2);
    }

    #[test]
    fn class_axioms_restrict_models() {
        let cls = FormulaClass::new("no-p", vec![f("forall X. P(X) -> false")]).unwrap();
        let r = decide_satisfiability(&f("exists X. P(X)"), &cls, &caps());
        assert!(matches!(r.status, SatStatus::NegationProved(_)), "{r:?}");
        let q = decide_satisfiability(&f("exists X. Q(X)"), &cls, &caps());
        assert!(matches!(
            q.status,
            SatStatus::SatisfiableWithModel { size: 2, .. }
        ));
        assert!(FormulaClass::new("open", vec![f("P(x)")]).is_err());
        let parsed = FormulaClass::parse_axioms("c", "# none\nforall X. P(X)\n").unwrap();
        assert_eq!(parsed.axioms.len(), 1);
    }

    #[test]
    fn provability_classifications() {
        let f3 = f("forall X. (P(X) /\\ Q(X)) -> P(X)");
        let r = decide_provability(&f3, &caps());
        match &r.status {
            ProvabilityStatus::Provable(p) => assert!(check(&Context::new(), p, &f3)),
            other => panic!("{other:?}"),
        }
        let f2 = f("forall X. P(X) \\/ (P(X) -> false)");
        match decide_provability(&f2, &caps()).status {
            ProvabilityStatus::Refutable { model, state, .. } => {
                assert_eq!(model.size(), 3);
                assert!(!model.satisfies(state, &Valuation::new(), &f2).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exhaustion_is_reported() {
        let tiny = Caps {
            max_model: 1,
            max_depth: 2,
            max_nodes: 64,
        };
        let r = decide_provability(&f("forall X. P(X) \\/ (P(X) -> false)"), &tiny);
        assert_eq!(r.status, ProvabilityStatus::Unknown);
        assert!(r.steps.model_steps >= 1 && r.steps.proof_steps >= 1);
        assert!(s_of(&f("exists X. P(X)"), &FormulaClass::all(), &tiny).is_err());
    }
}
