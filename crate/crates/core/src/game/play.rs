// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_final, legal_moves, Branch, GameError, LegalMove, Move, Position, Rule, Trace};
use crate::formula::Formula;
use crate::proof::{search_sequent, SearchLimits, Step};

pub trait ErosPolicy {
    /// Picks one of `moves` (never empty) in `p`. `history` holds the
    /// positions played so far, oldest first. `None` gives up.
    fn choose(&mut self, p: &Position, moves: &[LegalMove], history: &[Position]) -> Option<Move>;
}

pub trait AfroditePolicy {
    /// Observes every Eros move and answers with a branch for the starred
    /// rules (the answer is ignored otherwise).
    fn respond(
        &mut self,
        precedent: &Position,
        mv: &LegalMove,
    ) -> Result<Option<Branch>, GameError>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    ErosWins(Trace),
    /// No final position within the turn limit, or Eros ran out of moves.
    AfroditeSurvives(Trace),
}

impl Outcome {
    pub fn trace(&self) -> &Trace {
        match self {
            Outcome::ErosWins(t) | Outcome::AfroditeSurvives(t) => t,
        }
    }

    pub fn eros_won(&self) -> bool {
        matches!(self, Outcome::ErosWins(_))
    }
}

/// Plays from `start` until a final position or `max_turns` Eros moves.
pub fn play(
    start: &Position,
    eros: &mut dyn ErosPolicy,
    afrodite: &mut dyn AfroditePolicy,
    max_turns: usize,
) -> Result<Outcome, GameError> {
    let mut trace = Trace::new(start.clone());
    let mut history = vec![start.clone()];
    let mut cur = start.clone();
    if is_final(&cur) {
        return Ok(Outcome::ErosWins(trace));
    }
    for turn in 1..=max_turns {
        let moves = legal_moves(&cur);
        if moves.is_empty() {
            break;
        }
        let Some(mv) = eros.choose(&cur, &moves, &history) else {
            break;
        };
        let legal = moves
            .iter()
            .find(|l| l.mv.matches(&mv))
            .ok_or_else(|| GameError::Policy(format!("Eros chose an illegal move: {mv}")))?;
        let branch = afrodite.respond(&cur, legal)?;
        let branch = if legal.mv.rule.is_starred() {
            Some(branch.ok_or(GameError::MissingBranch(legal.mv.rule))?)
        } else {
            None
        };
        let next = legal
            .successors
            .pick(branch)
            .expect("branch matches rule")
            .clone();
        trace.push(turn, &legal.mv, branch, next.clone());
        history.push(next.clone());
        cur = next;
        if is_final(&cur) {
            return Ok(Outcome::ErosWins(trace));
        }
    }
    Ok(Outcome::AfroditeSurvives(trace))
}

/// Uniformly random Eros, reproducible from its seed.
#[derive(Clone, Debug)]
pub struct RandomEros {
    rng: ChaCha8Rng,
}

impl RandomEros {
    pub fn new(seed: u64) -> Self {
        RandomEros {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl ErosPolicy for RandomEros {
    fn choose(&mut self, _: &Position, moves: &[LegalMove], _: &[Position]) -> Option<Move> {
        moves.choose(&mut self.rng).map(|l| l.mv.clone())
    }
}

/// Always the first legal move.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstMoveEros;

impl ErosPolicy for FirstMoveEros {
    fn choose(&mut self, _: &Position, moves: &[LegalMove], _: &[Position]) -> Option<Move> {
        moves.first().map(|l| l.mv.clone())
    }
}

/// Eros following a proof of the current position: the bottom rule of the
/// proof found by search is played as the corresponding move. When that
/// rule has no counterpart, a move all of whose successors are provable is
/// played instead; without any proof the first legal move is played.
#[derive(Clone, Copy, Debug)]
pub struct ProofGuidedEros {
    pub limits: SearchLimits,
}

impl Default for ProofGuidedEros {
    fn default() -> Self {
        ProofGuidedEros {
            limits: SearchLimits {
                max_depth: 12,
                max_nodes: 50_000,
            },
        }
    }
}

impl ProofGuidedEros {
    fn provable(&self, p: &Position) -> bool {
        is_final(p) || search_sequent(p.assumptions(), p.target(), self.limits).is_some()
    }

    fn from_step(p: &Position, step: &Step) -> Option<Move> {
        let tau = p.target();
        let on = |rule, f: &Formula| Some(Move::new(rule, f.clone(), None));
        match step {
            Step::Axiom | Step::BotL => None,
            Step::ImpR => on(Rule::B1, tau),
            Step::AndR => on(Rule::B2, tau),
            Step::ForallR => on(Rule::B4, tau),
            Step::AndL(h) => on(Rule::A3, h),
            Step::OrL(h) => on(Rule::A2, h),
            Step::ExistsL(h) => on(Rule::A5, h),
            Step::ImpL(h) => on(Rule::A1, h),
            Step::ForallL(h, y) => Some(Move::new(Rule::A4, h.clone(), Some(y.clone()))),
            Step::ExistsR(y) => Some(Move::new(Rule::B5, tau.clone(), Some(y.clone()))),
            Step::OrR { left } => {
                let Formula::Or(a, b) = tau else { return None };
                let aim = if *left { a } else { b };
                matches!(**aim, Formula::Atom(..) | Formula::Or(..))
                    .then(|| Move::new(Rule::B3, (**aim).clone(), None))
            }
        }
    }

    /// The move this policy would play, if `p` is provable within limits.
    pub fn suggest(&self, p: &Position, moves: &[LegalMove]) -> Option<Move> {
        let (_, step) = search_sequent(p.assumptions(), p.target(), self.limits)?;
        if let Some(mv) = Self::from_step(p, &step) {
            if let Some(l) = moves.iter().find(|l| l.mv.matches(&mv)) {
                return Some(l.mv.clone());
            }
        }
        moves
            .iter()
            .find(|l| {
                l.successors
                    .positions()
                    .into_iter()
                    .all(|s| self.provable(s))
            })
            .map(|l| l.mv.clone())
    }
}

impl ErosPolicy for ProofGuidedEros {
    fn choose(&mut self, p: &Position, moves: &[LegalMove], _: &[Position]) -> Option<Move> {
        self.suggest(p, moves)
            .or_else(|| moves.first().map(|l| l.mv.clone()))
    }
}

/// Afrodite choosing uniformly at random.
#[derive(Clone, Debug)]
pub struct RandomAfrodite {
    rng: ChaCha8Rng,
}

impl RandomAfrodite {
    pub fn new(seed: u64) -> Self {
        RandomAfrodite {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl AfroditePolicy for RandomAfrodite {
    fn respond(&mut self, _: &Position, mv: &LegalMove) -> Result<Option<Branch>, GameError> {
        Ok(mv.mv.rule.is_starred().then(|| {
            if self.rng.gen_bool(0.5) {
                Branch::Left
            } else {
                Branch::Right
            }
        }))
    }
}

/// Afrodite always taking the first listed option.
#[derive(Clone, Copy, Debug, Default)]
pub struct LeftAfrodite;

impl AfroditePolicy for LeftAfrodite {
    fn respond(&mut self, _: &Position, mv: &LegalMove) -> Result<Option<Branch>, GameError> {
        Ok(mv.mv.rule.is_starred().then_some(Branch::Left))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExhaustiveReport {
    /// Positions visited, the start included.
    pub positions: u64,
    /// Plays that ended with Eros out of moves.
    pub dead_ends: u64,
    /// Plays cut at the depth limit.
    pub cut_off: u64,
    /// A play reaching a final position, if any was found.
    pub eros_win: Option<Trace>,
}

/// Tries every Eros move sequence of at most `depth` moves against
/// `afrodite`, stopping at the first final position.
pub fn exhaustive_eros<A: AfroditePolicy + Clone>(
    start: &Position,
    afrodite: &A,
    depth: usize,
) -> Result<ExhaustiveReport, GameError> {
    fn go<A: AfroditePolicy + Clone>(
        p: &Position,
        afrodite: &A,
        depth: usize,
        trace: &mut Trace,
        report: &mut ExhaustiveReport,
    ) -> Result<(), GameError> {
        report.positions += 1;
        if is_final(p) {
            report.eros_win = Some(trace.clone());
            return Ok(());
        }
        if depth == 0 {
            report.cut_off += 1;
            return Ok(());
        }
        let moves = legal_moves(p);
        if moves.is_empty() {
            report.dead_ends += 1;
        }
        for l in &moves {
            let mut a = afrodite.clone();
            let branch = a.respond(p, l)?;
            let branch = if l.mv.rule.is_starred() {
                Some(branch.ok_or(GameError::MissingBranch(l.mv.rule))?)
            } else {
                None
            };
            let next = l
                .successors
                .pick(branch)
                .expect("branch matches rule")
                .clone();
            trace.push(trace.len(), &l.mv, branch, next.clone());
            go(&next, &a, depth - 1, trace, report)?;
            trace.pop();
            if report.eros_win.is_some() {
                return Ok(());
            }
        }
        Ok(())
    }
    let mut report = ExhaustiveReport::default();
    let mut trace = Trace::new(start.clone());
    go(start, afrodite, depth, &mut trace, &mut report)?;
    Ok(report)
}
