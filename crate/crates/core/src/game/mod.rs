// SPDX-License-Identifier: Apache-2.0

//! The Eros/Afrodite game on positions `Γ ⊢ τ`.
//!
//! Eros picks an assumption or an aim (a disjunct of the target) and the
//! rule is determined by its shape. Afrodite picks the branch in a1, a2
//! and b2. Eros chooses the variable in a4 and b5 from the free variables
//! of the position plus the next canonical fresh name; a5 and b4 always
//! use the canonical fresh name.

mod play;
mod trace;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{free_vars_of, Formula, Var};

pub use play::{
    exhaustive_eros, play, AfroditePolicy, ErosPolicy, ExhaustiveReport, FirstMoveEros,
    LeftAfrodite, Outcome, ProofGuidedEros, RandomAfrodite, RandomEros,
};
pub use trace::{Trace, TraceEntry, TraceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    A1,
    A2,
    A3,
    A4,
    A5,
    B1,
    B2,
    B3,
    B4,
    B5,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::A1,
        Rule::A2,
        Rule::A3,
        Rule::A4,
        Rule::A5,
        Rule::B1,
        Rule::B2,
        Rule::B3,
        Rule::B4,
        Rule::B5,
    ];

    /// Afrodite chooses the successor.
    pub fn is_starred(self) -> bool {
        matches!(self, Rule::A1 | Rule::A2 | Rule::B2)
    }

    /// Eros chooses a variable.
    pub fn eros_picks_variable(self) -> bool {
        matches!(self, Rule::A4 | Rule::B5)
    }

    /// The variable is the canonical fresh one.
    pub fn introduces_fresh(self) -> bool {
        matches!(self, Rule::A5 | Rule::B4)
    }

    pub fn on_assumption(self) -> bool {
        matches!(self, Rule::A1 | Rule::A2 | Rule::A3 | Rule::A4 | Rule::A5)
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::A1 => "a1",
            Rule::A2 => "a2",
            Rule::A3 => "a3",
            Rule::A4 => "a4",
            Rule::A5 => "a5",
            Rule::B1 => "b1",
            Rule::B2 => "b2",
            Rule::B3 => "b3",
            Rule::B4 => "b4",
            Rule::B5 => "b5",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Rule {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| GameError::UnknownRule(s.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Left,
    Right,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Left => "left",
            Branch::Right => "right",
        })
    }
}

impl std::str::FromStr for Branch {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Branch::Left),
            "right" => Ok(Branch::Right),
            other => Err(GameError::UnknownBranch(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("illegal move {0}")]
    IllegalMove(String),
    #[error("rule {0} needs Afrodite's branch")]
    MissingBranch(Rule),
    #[error("rule {0} takes no branch")]
    UnexpectedBranch(Rule),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown branch `{0}`")]
    UnknownBranch(String),
    #[error("position is final")]
    Final,
    #[error("policy failed: {0}")]
    Policy(String),
}

/// `Γ ⊢ τ`. Assumptions keep insertion order; adding a formula already
/// present up to bound renaming is a no-op.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Position {
    assumptions: Vec<Formula>,
    target: Formula,
}

impl Position {
    pub fn new(assumptions: impl IntoIterator<Item = Formula>, target: Formula) -> Self {
        let mut p = Position {
            assumptions: Vec::new(),
            target,
        };
        for a in assumptions {
            p.add(a);
        }
        p
    }

    /// `∅ ⊢ τ`.
    pub fn start(target: Formula) -> Self {
        Position::new([], target)
    }

    pub fn assumptions(&self) -> &[Formula] {
        &self.assumptions
    }

    pub fn target(&self) -> &Formula {
        &self.target
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.assumptions.iter().any(|a| a.alpha_eq(f))
    }

    fn add(&mut self, f: Formula) {
        if !self.contains(&f) {
            self.assumptions.push(f);
        }
    }

    fn with(&self, f: Formula) -> Self {
        let mut out = self.clone();
        out.add(f);
        out
    }

    fn retarget(&self, target: Formula) -> Self {
        Position {
            assumptions: self.assumptions.clone(),
            target,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        free_vars_of(self.assumptions.iter().chain([&self.target]))
    }

    /// The next canonical name not free in the position.
    pub fn fresh_var(&self) -> Var {
        Var::fresh_avoiding(&self.free_vars())
    }

    /// Variables Eros may choose in a4 and b5.
    pub fn variable_menu(&self) -> Vec<Var> {
        let mut menu: Vec<Var> = self.free_vars().into_iter().collect();
        menu.push(self.fresh_var());
        menu
    }

    /// Aims: the disjuncts of the target.
    pub fn aims(&self) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = Vec::new();
        for d in self.target.disjuncts() {
            if !out.iter().any(|o| o.alpha_eq(d)) {
                out.push(d);
            }
        }
        out
    }

    /// Order-independent identity: sorted bound-variable-canonical keys.
    pub fn key(&self) -> (Vec<String>, String) {
        let mut a: Vec<String> = self
            .assumptions
            .iter()
            .map(|f| f.alpha_key().to_string())
            .collect();
        a.sort();
        (a, self.target.alpha_key().to_string())
    }

    /// `Γ ⊆ Γ'` up to bound renaming.
    pub fn assumptions_within(&self, other: &Position) -> bool {
        self.assumptions.iter().all(|a| other.contains(a))
    }

    pub fn is_final(&self) -> bool {
        is_final(self)
    }
}

impl PartialEq for Position {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Position {}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gamma: Vec<String> = self.assumptions.iter().map(|a| a.to_string()).collect();
        write!(f, "{} |- {}", gamma.join(", "), self.target)
    }
}

/// `τ ∈ Γ` or `⊥ ∈ Γ`.
pub fn is_final(p: &Position) -> bool {
    p.contains(&p.target) || p.contains(&Formula::Falsum)
}

/// An Eros move: the rule, the selected assumption or aim, and the
/// variable for a4, a5, b4 and b5.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub rule: Rule,
    pub selected: Formula,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<Var>,
}

impl Move {
    pub fn new(rule: Rule, selected: Formula, var: Option<Var>) -> Self {
        Move {
            rule,
            selected,
            var,
        }
    }

    /// Same move, with bound variables of the selected formula ignored.
    /// A missing variable matches the canonical fresh one in a5/b4.
    pub fn matches(&self, other: &Move) -> bool {
        self.rule == other.rule
            && self.selected.alpha_eq(&other.selected)
            && (self.var == other.var
                || (self.rule.introduces_fresh() && (self.var.is_none() || other.var.is_none())))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.rule, self.selected)?;
        if let Some(v) = &self.var {
            write!(f, " with {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Successors {
    One(Position),
    /// Afrodite's two options, in table order.
    Two {
        left: Position,
        right: Position,
    },
}

impl Successors {
    pub fn positions(&self) -> Vec<&Position> {
        match self {
            Successors::One(p) => vec![p],
            Successors::Two { left, right } => vec![left, right],
        }
    }

    pub fn pick(&self, branch: Option<Branch>) -> Option<&Position> {
        match (self, branch) {
            (Successors::One(p), None) => Some(p),
            (Successors::Two { left, .. }, Some(Branch::Left)) => Some(left),
            (Successors::Two { right, .. }, Some(Branch::Right)) => Some(right),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegalMove {
    pub mv: Move,
    pub successors: Successors,
}

/// Every move available to Eros in `p`, assumptions first (in order), then
/// aims. Moves none of whose successors differ from `p` are left out.
pub fn legal_moves(p: &Position) -> Vec<LegalMove> {
    let mut out: Vec<LegalMove> = Vec::new();
    let mut push = |mv: Move, successors: Successors| {
        if successors.positions().iter().all(|s| *s == p) {
            return;
        }
        if out.iter().any(|l| l.mv.matches(&mv)) {
            return;
        }
        out.push(LegalMove { mv, successors });
    };
    for a in p.assumptions() {
        match a {
            Formula::Implies(b, g) => push(
                Move::new(Rule::A1, a.clone(), None),
                Successors::Two {
                    left: p.with((**g).clone()),
                    right: p.retarget((**b).clone()),
                },
            ),
            Formula::Or(b, g) => push(
                Move::new(Rule::A2, a.clone(), None),
                Successors::Two {
                    left: p.with((**b).clone()),
                    right: p.with((**g).clone()),
                },
            ),
            Formula::And(b, g) => push(
                Move::new(Rule::A3, a.clone(), None),
                Successors::One(p.with((**b).clone()).with((**g).clone())),
            ),
            Formula::Forall(x, phi) => {
                for y in p.variable_menu() {
                    push(
                        Move::new(Rule::A4, a.clone(), Some(y.clone())),
                        Successors::One(p.with(phi.substitute(x, &y))),
                    );
                }
            }
            Formula::Exists(x, phi) => {
                let y = p.fresh_var();
                push(
                    Move::new(Rule::A5, a.clone(), Some(y.clone())),
                    Successors::One(p.with(phi.substitute(x, &y))),
                );
            }
            Formula::Atom(..) | Formula::Falsum => {}
        }
    }
    for aim in p.aims() {
        match aim {
            Formula::Implies(b, g) => push(
                Move::new(Rule::B1, aim.clone(), None),
                Successors::One(p.with((**b).clone()).retarget((**g).clone())),
            ),
            Formula::And(b, g) => push(
                Move::new(Rule::B2, aim.clone(), None),
                Successors::Two {
                    left: p.retarget((**b).clone()),
                    right: p.retarget((**g).clone()),
                },
            ),
            Formula::Atom(..) | Formula::Or(..) => push(
                Move::new(Rule::B3, aim.clone(), None),
                Successors::One(p.retarget(aim.clone())),
            ),
            Formula::Forall(x, phi) => {
                let y = p.fresh_var();
                push(
                    Move::new(Rule::B4, aim.clone(), Some(y.clone())),
                    Successors::One(p.retarget(phi.substitute(x, &y))),
                );
            }
            Formula::Exists(x, phi) => {
                for y in p.variable_menu() {
                    push(
                        Move::new(Rule::B5, aim.clone(), Some(y.clone())),
                        Successors::One(p.retarget(phi.substitute(x, &y))),
                    );
                }
            }
            Formula::Falsum => {}
        }
    }
    out
}

/// Looks a move up among the legal ones.
pub fn find_move(p: &Position, mv: &Move) -> Result<LegalMove, GameError> {
    legal_moves(p)
        .into_iter()
        .find(|l| l.mv.matches(mv))
        .ok_or_else(|| GameError::IllegalMove(mv.to_string()))
}

/// The successor of `p` under `mv`; `branch` is required exactly for the
/// starred rules.
pub fn apply_move(p: &Position, mv: &Move, branch: Option<Branch>) -> Result<Position, GameError> {
    let legal = find_move(p, mv)?;
    match (mv.rule.is_starred(), branch) {
        (true, None) => return Err(GameError::MissingBranch(mv.rule)),
        (false, Some(_)) => return Err(GameError::UnexpectedBranch(mv.rule)),
        _ => {}
    }
    Ok(legal
        .successors
        .pick(branch)
        .expect("branch shape checked")
        .clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn pos(gamma: &[&str], tau: &str) -> Position {
        Position::new(gamma.iter().map(|s| f(s)), f(tau))
    }

    #[test]
    fn final_positions() {
        assert!(is_final(&pos(&["P(a)"], "P(a)")));
        assert!(is_final(&pos(&["false"], "Q(a)")));
        assert!(!is_final(&pos(&["P(a)"], "Q(a)")));
        assert!(is_final(&pos(&["forall X. P(X)"], "forall Y. P(Y)")));
    }

    #[test]
    fn a3_splits_conjunction() {
        let p = pos(&["B /\\ C"], "T");
        let moves = legal_moves(&p);
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].mv.rule, Rule::A3);
        assert_eq!(
            moves[0].successors,
            Successors::One(pos(&["B /\\ C", "B", "C"], "T"))
        );
    }

    #[test]
    fn b1_on_implication() {
        let p = pos(&[], "B -> C");
        let moves = legal_moves(&p);
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].successors, Successors::One(pos(&["B"], "C")));
    }

    #[test]
    fn a4_menu() {
        let p = pos(&["forall X. P(X)", "Q(a)"], "R(b)");
        let a4: Vec<_> = legal_moves(&p)
            .into_iter()
            .filter(|l| l.mv.rule == Rule::A4)
            .collect();
        let vars: Vec<String> = a4
            .iter()
            .map(|l| l.mv.var.clone().unwrap().to_string())
            .collect();
        assert_eq!(vars, ["a", "b", "v0"]);
        assert_eq!(
            a4[2].successors,
            Successors::One(pos(&["forall X. P(X)", "Q(a)", "P(v0)"], "R(b)"))
        );
    }

    #[test]
    fn starred_branches() {
        let p = pos(&["B \\/ C"], "T");
        let m = Move::new(Rule::A2, f("B \\/ C"), None);
        assert_eq!(
            apply_move(&p, &m, Some(Branch::Left)).unwrap(),
            pos(&["B \\/ C", "B"], "T")
        );
        assert_eq!(
            apply_move(&p, &m, None),
            Err(GameError::MissingBranch(Rule::A2))
        );
        let p = pos(&[], "B /\\ C");
        let m = Move::new(Rule::B2, f("B /\\ C"), None);
        assert_eq!(
            apply_move(&p, &m, Some(Branch::Right)).unwrap(),
            pos(&[], "C")
        );
        let p = pos(&["B -> C"], "T");
        let m = Move::new(Rule::A1, f("B -> C"), None);
        assert_eq!(
            apply_move(&p, &m, Some(Branch::Left)).unwrap(),
            pos(&["B -> C", "C"], "T")
        );
        assert_eq!(
            apply_move(&p, &m, Some(Branch::Right)).unwrap(),
            pos(&["B -> C"], "B")
        );
    }

    #[test]
    fn b5_with_eros_variable() {
        let p = pos(&["Q(a)"], "exists X. P(X)");
        let m = Move::new(Rule::B5, f("exists X. P(X)"), Some(Var::new("a")));
        assert_eq!(apply_move(&p, &m, None).unwrap(), pos(&["Q(a)"], "P(a)"));
    }

    #[test]
    fn fresh_variable_moves() {
        let p = pos(&[], "forall X. P(X) \\/ (P(X) -> false)");
        let moves = legal_moves(&p);
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].mv.rule, Rule::B4);
        let next = apply_move(&p, &Move::new(Rule::B4, p.target().clone(), None), None).unwrap();
        assert_eq!(next, pos(&[], "P(v0) \\/ (P(v0) -> false)"));
        assert!(!p.free_vars().contains(&Var::new("v0")));
    }

    #[test]
    fn illegal_and_no_progress_moves() {
        let p = pos(&["Q(a)"], "P(a)");
        assert!(legal_moves(&p).is_empty());
        let m = Move::new(Rule::A4, f("Q(a)"), Some(Var::new("a")));
        assert!(matches!(
            apply_move(&p, &m, None),
            Err(GameError::IllegalMove(_))
        ));
        // b3 on the only aim would not change the position.
        let p = pos(&[], "P(a)");
        assert!(legal_moves(&p).is_empty());
        // ⊥ is never an aim for b3.
        let p = pos(&[], "P(a) \\/ false");
        let rules: Vec<Rule> = legal_moves(&p).iter().map(|l| l.mv.rule).collect();
        assert_eq!(rules, [Rule::B3]);
    }

    #[test]
    fn aims_split_one_level() {
        let p = pos(&[], "A \\/ B \\/ C");
        let aims: Vec<String> = p.aims().iter().map(|a| a.to_string()).collect();
        assert_eq!(aims, ["A", "B \\/ C"]);
    }
}
