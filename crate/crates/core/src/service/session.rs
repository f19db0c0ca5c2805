// SPDX-License-Identifier: Apache-2.0

//! In-memory game sessions. Each session sits behind its own mutex so
//! requests to one game serialize while different games run in parallel.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{parse_formula, MoveView, PositionView, ServiceError};
use crate::formula::{Formula, Var};
use crate::game::{
    find_move, is_final, legal_moves, Branch, LegalMove, Move, Position, ProofGuidedEros, Rule,
    Trace,
};
use crate::kripke::{KripkeModel, ModelFile, StateId, Valuation};
use crate::proof::search_sequent;
use crate::smp::{decide_provability, Caps, ProvabilityStatus};
use crate::strategy::{OrderCache, Strategy};

/// Engine-driven Eros moves applied per request before giving the turn
/// back; guards against a proof search that stops making progress.
const AUTO_MOVES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    /// The human plays Eros against a synthesized Afrodite.
    HumanEros,
    /// The engine plays Eros from a proof; the human answers starred moves.
    HumanAfrodite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Ongoing,
    ErosWon,
}

/// Body of `POST /games/{id}/moves`. In `human_afrodite` mode only
/// `branch` is read.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRequest {
    #[serde(default)]
    pub rule: Option<String>,
    #[serde(default)]
    pub selected: Option<String>,
    #[serde(default)]
    pub var: Option<String>,
    #[serde(default)]
    pub branch: Option<Branch>,
    /// Version the client last saw; a mismatch is rejected.
    #[serde(default)]
    pub version: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyView {
    pub branch: Branch,
    pub state: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// `human` or `engine`: who picked the Eros move.
    pub mover: String,
    pub rule: String,
    pub selected: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    pub position: PositionView,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub formula: String,
    pub mode: SessionMode,
    pub status: SessionStatus,
    pub version: u64,
    pub position: PositionView,
    pub aims: Vec<String>,
    pub legal_moves: Vec<MoveView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub afrodite_reply: Option<ReplyView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_eros_move: Option<MoveView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_classes: Option<usize>,
    pub history: Vec<HistoryEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyHint {
    #[serde(rename = "move")]
    pub mv: MoveView,
    pub branch: Branch,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintView {
    /// Proof-guided Eros move, when the position is provable within limits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eros_move: Option<MoveView>,
    /// Afrodite's branch for each starred legal move (human Eros), or for
    /// the pending engine move (human Afrodite).
    pub afrodite_replies: Vec<ReplyHint>,
}

#[derive(Debug)]
pub struct GameSession {
    id: String,
    formula: Formula,
    mode: SessionMode,
    strategy: Option<Arc<Strategy>>,
    node: usize,
    trace: Trace,
    movers: Vec<&'static str>,
    status: SessionStatus,
    version: u64,
    pending: Option<LegalMove>,
    last_reply: Option<ReplyView>,
    eros: ProofGuidedEros,
}

fn holds(m: &KripkeModel, s: StateId, rho: &Valuation, f: &Formula) -> bool {
    m.satisfies(s, rho, f).unwrap_or(false)
}

/// Which forcing condition decides Afrodite's branch for a starred move.
fn reason(m: &KripkeModel, s: StateId, rho: &Valuation, mv: &Move) -> String {
    let (cond, verb_left) = match (&mv.rule, &mv.selected) {
        (Rule::A1, Formula::Implies(_, g)) => (g.as_ref(), true),
        (Rule::A2, Formula::Or(b, _)) => (b.as_ref(), true),
        (Rule::B2, Formula::And(b, _)) => (b.as_ref(), false),
        _ => return String::new(),
    };
    let sat = holds(m, s, rho, cond);
    let mark = if sat { "|=" } else { "|/=" };
    let env = if rho.is_empty() {
        String::new()
    } else {
        format!(", {rho}")
    };
    let side = if sat == verb_left { "left" } else { "right" };
    format!("{s}{env} {mark} {cond}, so {side}")
}

impl GameSession {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mode(&self) -> SessionMode {
        self.mode
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn current(&self) -> &Position {
        self.trace.last()
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn strategy(&self) -> Option<&Arc<Strategy>> {
        self.strategy.as_ref()
    }

    /// True when the recorded history replays to the current position.
    pub fn replay_ok(&self) -> bool {
        self.trace.verify().is_ok()
    }

    fn record(&mut self, mover: &'static str, mv: &Move, branch: Option<Branch>, next: Position) {
        let turn = self.trace.len() + 1;
        self.trace.push(turn, mv, branch, next);
        self.movers.push(mover);
        if is_final(self.current()) {
            self.status = SessionStatus::ErosWon;
        }
    }

    fn check_version(&self, req: &MoveRequest) -> Result<(), ServiceError> {
        match req.version {
            Some(v) if v != self.version => Err(ServiceError::StaleSession {
                expected: v,
                actual: self.version,
            }),
            _ => Ok(()),
        }
    }

    fn legal_views(&self) -> Vec<MoveView> {
        if self.mode == SessionMode::HumanAfrodite || self.status == SessionStatus::ErosWon {
            return Vec::new();
        }
        legal_moves(self.current())
            .iter()
            .map(MoveView::from)
            .collect()
    }

    fn parse_move(&self, req: &MoveRequest) -> Result<LegalMove, ServiceError> {
        let illegal = |msg: String| ServiceError::IllegalMove {
            msg,
            legal: self.legal_views(),
        };
        let rule: Rule = req
            .rule
            .as_deref()
            .ok_or_else(|| ServiceError::BadRequest("missing rule".into()))?
            .parse()
            .map_err(|e: crate::game::GameError| ServiceError::BadRequest(e.to_string()))?;
        let selected = parse_formula(
            req.selected
                .as_deref()
                .ok_or_else(|| ServiceError::BadRequest("missing selected formula".into()))?,
        )?;
        let mv = Move::new(rule, selected, req.var.as_deref().map(Var::new));
        find_move(self.current(), &mv).map_err(|e| illegal(e.to_string()))
    }

    /// Applies a human move and the engine's answer.
    pub fn apply(&mut self, req: &MoveRequest) -> Result<(), ServiceError> {
        self.check_version(req)?;
        if self.status == SessionStatus::ErosWon {
            return Err(ServiceError::GameOver);
        }
        match self.mode {
            SessionMode::HumanEros => self.apply_eros(req)?,
            SessionMode::HumanAfrodite => self.apply_afrodite(req)?,
        }
        self.version += 1;
        Ok(())
    }

    fn apply_eros(&mut self, req: &MoveRequest) -> Result<(), ServiceError> {
        let legal = self.parse_move(req)?;
        if req.branch.is_some() {
            return Err(ServiceError::BadRequest("Afrodite picks the branch".into()));
        }
        let strategy = self.strategy.clone().expect("human_eros has a strategy");
        let here = strategy.node(self.node).map_err(internal)?;
        let (branch, child) = strategy.respond(self.node, &legal.mv).map_err(internal)?;
        let next = legal
            .successors
            .pick(branch)
            .cloned()
            .ok_or_else(|| ServiceError::Internal("strategy branch shape".into()))?;
        let reached = strategy.node(child).map_err(internal)?;
        self.last_reply = branch.map(|b| ReplyView {
            branch: b,
            state: reached.state.to_string(),
            reason: reason(strategy.model(), here.state, &here.rho, &legal.mv),
        });
        self.node = child;
        self.record("human", &legal.mv, branch, next);
        Ok(())
    }

    fn apply_afrodite(&mut self, req: &MoveRequest) -> Result<(), ServiceError> {
        let Some(pending) = self.pending.take() else {
            return Err(ServiceError::Internal("no pending Eros move".into()));
        };
        let Some(branch) = req.branch else {
            self.pending = Some(pending);
            return Err(ServiceError::BadRequest("missing branch".into()));
        };
        let next = pending
            .successors
            .pick(Some(branch))
            .cloned()
            .expect("starred");
        self.record("engine", &pending.mv, Some(branch), next);
        self.engine_moves();
        Ok(())
    }

    /// Lets the engine play Eros until a starred move needs an answer or
    /// the game ends.
    fn engine_moves(&mut self) {
        for _ in 0..AUTO_MOVES {
            if self.status == SessionStatus::ErosWon {
                return;
            }
            let cur = self.current().clone();
            let moves = legal_moves(&cur);
            let choice = self
                .eros
                .suggest(&cur, &moves)
                .or_else(|| moves.first().map(|l| l.mv.clone()));
            let Some(mv) = choice else { return };
            let legal = moves
                .into_iter()
                .find(|l| l.mv == mv)
                .expect("suggested move is legal");
            if legal.mv.rule.is_starred() {
                self.pending = Some(legal);
                return;
            }
            let next = legal.successors.pick(None).cloned().expect("unstarred");
            self.record("engine", &legal.mv, None, next);
        }
    }

    pub fn view(&self) -> Result<SessionView, ServiceError> {
        let cur = self.current();
        let (model_state, classes, max_classes, model) = match &self.strategy {
            Some(s) => {
                let n = s.node(self.node).map_err(internal)?;
                (
                    Some(n.state.to_string()),
                    Some(s.class_count(self.node).map_err(internal)?),
                    Some(s.model().size()),
                    Some(ModelFile::from_model(s.model())),
                )
            }
            None => (None, None, None, None),
        };
        let history = self
            .trace
            .entries()
            .iter()
            .skip(1)
            .zip(&self.movers)
            .map(|(e, who)| HistoryEntry {
                mover: who.to_string(),
                rule: e.rule.map(|r| r.to_string()).unwrap_or_default(),
                selected: e
                    .selected
                    .as_ref()
                    .map(|f| f.to_string())
                    .unwrap_or_default(),
                var: e.var.as_ref().map(|v| v.to_string()),
                branch: e.branch,
                position: PositionView::from(&e.position),
            })
            .collect();
        Ok(SessionView {
            id: self.id.clone(),
            formula: self.formula.to_string(),
            mode: self.mode,
            status: self.status,
            version: self.version,
            position: PositionView::from(cur),
            aims: cur.aims().iter().map(|f| f.to_string()).collect(),
            legal_moves: self.legal_views(),
            afrodite_reply: self.last_reply.clone(),
            pending_eros_move: self.pending.as_ref().map(MoveView::from),
            model_state,
            classes,
            max_classes,
            history,
            model,
        })
    }

    pub fn hint(&self) -> Result<HintView, ServiceError> {
        let cur = self.current();
        let mut out = HintView {
            eros_move: None,
            afrodite_replies: Vec::new(),
        };
        if self.status == SessionStatus::ErosWon {
            return Ok(out);
        }
        match self.mode {
            SessionMode::HumanEros => {
                let moves = legal_moves(cur);
                out.eros_move = self.eros.suggest(cur, &moves).as_ref().map(MoveView::from);
                let strategy = self.strategy.as_ref().expect("human_eros has a strategy");
                let here = strategy.node(self.node).map_err(internal)?;
                for l in moves.iter().filter(|l| l.mv.rule.is_starred()) {
                    let (branch, _) = strategy.respond(self.node, &l.mv).map_err(internal)?;
                    out.afrodite_replies.push(ReplyHint {
                        mv: MoveView::from(l),
                        branch: branch.expect("starred"),
                        reason: reason(strategy.model(), here.state, &here.rho, &l.mv),
                    });
                }
            }
            SessionMode::HumanAfrodite => {
                if let Some(p) = &self.pending {
                    // Prefer the side the prover cannot close.
                    let open = |b| {
                        let s = p.successors.pick(Some(b)).expect("starred");
                        search_sequent(s.assumptions(), s.target(), self.eros.limits).is_none()
                    };
                    let branch = if open(Branch::Right) && !open(Branch::Left) {
                        Branch::Right
                    } else {
                        Branch::Left
                    };
                    let reason = if open(branch) {
                        format!("{branch} is not provable within limits")
                    } else {
                        "both sides are provable".to_string()
                    };
                    out.afrodite_replies.push(ReplyHint {
                        mv: MoveView::from(p),
                        branch,
                        reason,
                    });
                }
            }
        }
        Ok(out)
    }
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

#[derive(Debug, Default)]
pub struct SessionManager {
    sessions: RwLock<HashMap<String, Arc<Mutex<GameSession>>>>,
    next: AtomicU64,
    orders: Arc<OrderCache>,
}

impl SessionManager {
    pub fn new() -> Self {
        Self::default()
    }

    /// Decides τ and opens a session: refutable formulas get a synthesized
    /// Afrodite, provable ones an engine Eros.
    pub fn create(&self, formula: &str, caps: &Caps) -> Result<SessionView, ServiceError> {
        let tau = parse_formula(formula)?;
        if !tau.is_closed() {
            return Err(ServiceError::BadRequest(format!(
                "{tau} has free variables"
            )));
        }
        let r = decide_provability(&tau, caps);
        let id = format!("g{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        let start = Position::start(tau.clone());
        let mut session = GameSession {
            id: id.clone(),
            formula: tau.clone(),
            mode: SessionMode::HumanEros,
            strategy: None,
            node: 0,
            status: if is_final(&start) {
                SessionStatus::ErosWon
            } else {
                SessionStatus::Ongoing
            },
            trace: Trace::new(start.clone()),
            movers: Vec::new(),
            version: 0,
            pending: None,
            last_reply: None,
            eros: ProofGuidedEros::default(),
        };
        match r.status {
            ProvabilityStatus::Refutable { model, state, .. } => {
                let s = Strategy::synthesize_cached(
                    model,
                    state,
                    start,
                    Valuation::new(),
                    self.orders.clone(),
                )
                .map_err(internal)?;
                session.node = s.root();
                session.strategy = Some(Arc::new(s));
            }
            ProvabilityStatus::Provable(_) => {
                session.mode = SessionMode::HumanAfrodite;
                session.engine_moves();
            }
            ProvabilityStatus::Unknown => return Err(ServiceError::Undecided),
        }
        let view = session.view()?;
        self.sessions
            .write()
            .expect("session map")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<GameSession>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Runs `f` with the session locked.
    pub fn with<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut GameSession) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let s = self.get(id)?;
        let mut g = s
            .lock()
            .map_err(|_| ServiceError::Internal("poisoned session".into()))?;
        f(&mut g)
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ServiceError> {
        self.with(id, |s| s.view())
    }

    pub fn play(&self, id: &str, req: &MoveRequest) -> Result<SessionView, ServiceError> {
        self.with(id, |s| {
            s.apply(req)?;
            s.view()
        })
    }

    pub fn hint(&self, id: &str) -> Result<HintView, ServiceError> {
        self.with(id, |s| s.hint())
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the session view as JSON, for keeping a game around.
    pub fn snapshot(&self, id: &str, path: &Path) -> Result<(), ServiceError> {
        let v = self.view(id)?;
        let text = serde_json::to_string_pretty(&v).map_err(internal)?;
        std::fs::write(path, text).map_err(internal)
    }
}
