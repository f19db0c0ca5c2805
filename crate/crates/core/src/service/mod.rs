// SPDX-License-Identifier: Apache-2.0

//! Request and response types shared by the CLI and the HTTP server, and
//! the operations behind them. Every type here is part of the documented
//! JSON API (see `docs/api.md`).

pub mod http;
mod session;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{parse, Formula};
use crate::game::{LegalMove, Move, Position};
use crate::kripke::{ModelFile, StateId, Valuation};
use crate::proof::{check, Context, ProofTerm};
use crate::smp::{
    decide_provability, decide_satisfiability, Caps, FormulaClass, ProvabilityStatus, SatStatus,
    StepsSpent,
};

pub use session::{
    GameSession, HintView, HistoryEntry, MoveRequest, ReplyHint, ReplyView, SessionManager,
    SessionMode, SessionStatus, SessionView,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("not decided within caps")]
    Undecided,
    #[error("no session {0}")]
    UnknownSession(String),
    #[error("illegal move: {msg}")]
    IllegalMove { msg: String, legal: Vec<MoveView> },
    #[error("stale session: expected version {expected}, session is at {actual}")]
    StaleSession { expected: u64, actual: u64 },
    #[error("game is over")]
    GameOver,
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    /// Stable machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::Parse(_) => "parse_error",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Undecided => "undecided",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::IllegalMove { .. } => "illegal_move",
            ServiceError::StaleSession { .. } => "stale_session",
            ServiceError::GameOver => "game_over",
            ServiceError::Internal(_) => "internal",
        }
    }
}

#[derive(Serialize)]
pub struct ErrorBody {
    pub error: String,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub legal_moves: Option<Vec<MoveView>>,
}

impl From<&ServiceError> for ErrorBody {
    fn from(e: &ServiceError) -> Self {
        ErrorBody {
            error: e.to_string(),
            kind: e.kind(),
            legal_moves: match e {
                ServiceError::IllegalMove { legal, .. } => Some(legal.clone()),
                _ => None,
            },
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ServiceError> {
    parse(text).map_err(|e| ServiceError::Parse(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionView {
    pub assumptions: Vec<String>,
    pub target: String,
}

impl From<&Position> for PositionView {
    fn from(p: &Position) -> Self {
        PositionView {
            assumptions: p.assumptions().iter().map(|f| f.to_string()).collect(),
            target: p.target().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveView {
    pub rule: String,
    pub selected: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    pub starred: bool,
}

impl From<&Move> for MoveView {
    fn from(m: &Move) -> Self {
        MoveView {
            rule: m.rule.to_string(),
            selected: m.selected.to_string(),
            var: m.var.as_ref().map(|v| v.to_string()),
            starred: m.rule.is_starred(),
        }
    }
}

impl From<&LegalMove> for MoveView {
    fn from(l: &LegalMove) -> Self {
        MoveView::from(&l.mv)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub formula: String,
    /// Class axioms, one closed formula each; empty for all models.
    #[serde(default)]
    pub axioms: Vec<String>,
    #[serde(default)]
    pub caps: Option<Caps>,
}

/// Outcome of `decide`: `sat` with the model size, `neg_proved` with the
/// sentinel value 1, or `budget_exhausted`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecisionResponse {
    Sat {
        size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<ModelFile>,
    },
    NegProved {
        s: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        proof: Option<String>,
    },
    BudgetExhausted {
        model_steps: u64,
        proof_steps: u64,
    },
}

/// Outcome of `prove`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProveResponse {
    Provable {
        proof: String,
    },
    Refutable {
        size: usize,
        state: String,
        model: ModelFile,
    },
    Unknown {
        model_steps: u64,
        proof_steps: u64,
    },
}

fn state_name(s: StateId) -> String {
    s.to_string()
}

pub fn parse_state(text: &str) -> Result<StateId, ServiceError> {
    text.strip_prefix('c')
        .and_then(|n| n.parse().ok())
        .map(StateId)
        .ok_or_else(|| ServiceError::Parse(format!("bad state `{text}`, expected c<N>")))
}

fn class_of(axioms: &[String]) -> Result<FormulaClass, ServiceError> {
    let fs = axioms
        .iter()
        .map(|a| parse_formula(a))
        .collect::<Result<Vec<_>, _>>()?;
    FormulaClass::new("request", fs)
        .map_err(|f| ServiceError::BadRequest(format!("axiom {f} is not closed")))
}

fn steps_fields(s: StepsSpent) -> (u64, u64) {
    (s.model_steps, s.proof_steps)
}

/// Runs the satisfiability decider; witnesses are attached when asked.
pub fn decide(req: &DecisionRequest, witness: bool) -> Result<DecisionResponse, ServiceError> {
    let tau = parse_formula(&req.formula)?;
    let cls = class_of(&req.axioms)?;
    let caps = req.caps.unwrap_or_default();
    let r = decide_satisfiability(&tau, &cls, &caps);
    Ok(match r.status {
        SatStatus::SatisfiableWithModel {
            model, state, size, ..
        } => DecisionResponse::Sat {
            size,
            state: witness.then(|| state_name(state)),
            model: witness.then(|| ModelFile::from_model(&model)),
        },
        SatStatus::NegationProved(p) => DecisionResponse::NegProved {
            s: 1,
            proof: witness.then(|| p.to_string()),
        },
        SatStatus::BudgetExhausted => {
            let (model_steps, proof_steps) = steps_fields(r.steps);
            DecisionResponse::BudgetExhausted {
                model_steps,
                proof_steps,
            }
        }
    })
}

/// Runs the provability decider.
pub fn prove(req: &DecisionRequest) -> Result<ProveResponse, ServiceError> {
    let tau = parse_formula(&req.formula)?;
    if !req.axioms.is_empty() {
        return Err(ServiceError::BadRequest("prove takes no axioms".into()));
    }
    let caps = req.caps.unwrap_or_default();
    let r = decide_provability(&tau, &caps);
    Ok(match r.status {
        ProvabilityStatus::Provable(p) => ProveResponse::Provable {
            proof: p.to_string(),
        },
        ProvabilityStatus::Refutable { model, state, .. } => ProveResponse::Refutable {
            size: model.size(),
            state: state_name(state),
            model: ModelFile::from_model(&model),
        },
        ProvabilityStatus::Unknown => {
            let (model_steps, proof_steps) = steps_fields(r.steps);
            ProveResponse::Unknown {
                model_steps,
                proof_steps,
            }
        }
    })
}

impl DecisionResponse {
    pub fn is_decided(&self) -> bool {
        !matches!(self, DecisionResponse::BudgetExhausted { .. })
    }

    /// Re-checks the attached witness against the request: the model is
    /// valid, in the class and satisfies τ at the named state; the proof
    /// type-checks as `τ → ⊥` from the axioms. Responses without a
    /// witness are accepted as they are.
    pub fn revalidate(&self, req: &DecisionRequest) -> Result<bool, ServiceError> {
        let tau = parse_formula(&req.formula)?;
        let cls = class_of(&req.axioms)?;
        Ok(match self {
            DecisionResponse::Sat {
                size,
                state: Some(s),
                model: Some(mf),
            } => {
                let Ok(m) = mf.clone().into_model() else {
                    return Ok(false);
                };
                let s = parse_state(s)?;
                let vals = if s.0 < m.num_states() {
                    m.valuations(s, &tau.free_vars())
                } else {
                    Vec::new()
                };
                m.size() == *size
                    && cls.contains(&m)
                    && vals
                        .iter()
                        .any(|rho| m.satisfies(s, rho, &tau).unwrap_or(false))
            }
            DecisionResponse::NegProved { proof: Some(p), .. } => {
                let Ok(term) = p.parse::<ProofTerm>() else {
                    return Ok(false);
                };
                check(&Context::numbered(&cls.axioms), &term, &Formula::not(tau))
            }
            _ => true,
        })
    }
}

impl ProveResponse {
    pub fn is_decided(&self) -> bool {
        !matches!(self, ProveResponse::Unknown { .. })
    }

    /// The proof checks, or the model is valid and refutes τ at the state.
    pub fn revalidate(&self, formula: &str) -> Result<bool, ServiceError> {
        let tau = parse_formula(formula)?;
        Ok(match self {
            ProveResponse::Provable { proof } => match proof.parse::<ProofTerm>() {
                Ok(term) => check(&Context::new(), &term, &tau),
                Err(_) => false,
            },
            ProveResponse::Refutable { size, state, model } => {
                let Ok(m) = model.clone().into_model() else {
                    return Ok(false);
                };
                let s = parse_state(state)?;
                s.0 < m.num_states()
                    && m.size() == *size
                    && m.valuations(s, &tau.free_vars())
                        .iter()
                        .any(|rho: &Valuation| !m.satisfies(s, rho, &tau).unwrap_or(true))
            }
            ProveResponse::Unknown { .. } => true,
        })
    }
}
