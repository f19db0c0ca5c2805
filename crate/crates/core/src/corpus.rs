// SPDX-License-Identifier: Apache-2.0

//! The desk corpus: every closed formula over unary `P`, `Q` and the
//! variables `X`, `Y`, up to a node count, one per bound-renaming class.

use std::collections::BTreeSet;

use crate::formula::{Formula, Var};

/// Node bound of the default corpus.
pub const DESK_NODES: usize = 7;

/// All formulas with exactly `n` nodes, free variables among `X`, `Y`.
fn trees(n: usize, memo: &mut Vec<Vec<Formula>>) -> Vec<Formula> {
    if let Some(v) = memo.get(n) {
        if !v.is_empty() || n == 0 {
            return v.clone();
        }
    }
    let mut out = Vec::new();
    if n == 1 {
        for p in ["P", "Q"] {
            for x in ["X", "Y"] {
                out.push(Formula::Atom(p.into(), vec![Var::new(x)]));
            }
        }
        out.push(Formula::Falsum);
    } else if n > 1 {
        for body in trees(n - 1, memo) {
            for x in ["X", "Y"] {
                out.push(Formula::forall(x, body.clone()));
                out.push(Formula::exists(x, body.clone()));
            }
        }
        for i in 1..n - 1 {
            let left = trees(i, memo);
            let right = trees(n - 1 - i, memo);
            for a in &left {
                for b in &right {
                    out.push(Formula::and(a.clone(), b.clone()));
                    out.push(Formula::or(a.clone(), b.clone()));
                    out.push(Formula::implies(a.clone(), b.clone()));
                }
            }
        }
    }
    if memo.len() <= n {
        memo.resize(n + 1, Vec::new());
    }
    memo[n] = out.clone();
    out
}

/// Closed formulas with at most `max_nodes` nodes, smallest first, with
/// alpha-equivalent duplicates removed.
pub fn corpus(max_nodes: usize) -> Vec<Formula> {
    let mut memo = Vec::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 1..=max_nodes {
        for f in trees(n, &mut memo) {
            if f.is_closed() && seen.insert(f.alpha_key()) {
                out.push(f);
            }
        }
    }
    out
}

pub fn desk_corpus() -> Vec<Formula> {
    corpus(DESK_NODES)
}
