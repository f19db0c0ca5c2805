// SPDX-License-Identifier: Apache-2.0

//! Size-ordered enumeration of finite Kripke models over a signature.
//!
//! Posets are naturally labeled (`i <= j` implies `i` precedes `j` by
//! index) and the elements in use are exactly `0..n`; every finite model is
//! isomorphic to at least one emitted model. Isomorphic duplicates remain.

use std::collections::{BTreeMap, BTreeSet};

use super::{Element, KripkeModel};
use crate::formula::PredSymbol;

/// All partial orders on `0..k` whose strict pairs `(i, j)` satisfy `i < j`,
/// as full (reflexive) relations.
pub fn naturally_labeled_posets(k: usize) -> Vec<BTreeSet<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let strict: BTreeSet<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, p)| *p)
            .collect();
        let transitive = strict.iter().all(|&(a, b)| {
            strict
                .iter()
                .filter(|&&(b2, _)| b2 == b)
                .all(|&(_, c)| strict.contains(&(a, c)))
        });
        if transitive {
            let mut full = strict;
            full.extend((0..k).map(|i| (i, i)));
            out.push(full);
        }
    }
    out
}

#[derive(Clone, Debug)]
struct Shape {
    order: BTreeSet<(usize, usize)>,
    domains: Vec<BTreeSet<Element>>,
}

fn below(order: &BTreeSet<(usize, usize)>, j: usize) -> Vec<usize> {
    (0..j).filter(|&i| order.contains(&(i, j))).collect()
}

fn shapes(states: usize, elements: usize) -> Vec<Shape> {
    let full: u32 = if elements == 0 {
        0
    } else {
        (1u32 << elements) - 1
    };
    let mut out = Vec::new();
    for order in naturally_labeled_posets(states) {
        let preds: Vec<Vec<usize>> = (0..states).map(|j| below(&order, j)).collect();
        let mut masks = vec![0u32; states];
        fill_domains(0, &preds, full, &mut masks, &mut |ms| {
            let union = ms.iter().fold(0, |acc, m| acc | m);
            if union == full {
                out.push(Shape {
                    order: order.clone(),
                    domains: ms
                        .iter()
                        .map(|m| (0..elements as u32).filter(|e| m & (1 << e) != 0).collect())
                        .collect(),
                });
            }
        });
    }
    out
}

fn fill_domains(
    j: usize,
    preds: &[Vec<usize>],
    full: u32,
    masks: &mut Vec<u32>,
    emit: &mut impl FnMut(&[u32]),
) {
    if j == masks.len() {
        emit(masks);
        return;
    }
    let lower = preds[j].iter().fold(0, |acc, &i| acc | masks[i]);
    for m in 0..=full {
        if m & lower == lower {
            masks[j] = m;
            fill_domains(j + 1, preds, full, masks, emit);
        }
    }
}

fn tuples(domain: &BTreeSet<Element>, arity: usize) -> Vec<Vec<Element>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                domain.iter().map(move |&e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every monotone family of extensions for one predicate over a shape.
fn extension_families(shape: &Shape, arity: usize) -> Vec<Vec<BTreeSet<Vec<Element>>>> {
    let k = shape.domains.len();
    let preds: Vec<Vec<usize>> = (0..k).map(|j| below(&shape.order, j)).collect();
    let universe: Vec<Vec<Vec<Element>>> = shape.domains.iter().map(|d| tuples(d, arity)).collect();
    let mut out = Vec::new();
    let mut current: Vec<BTreeSet<Vec<Element>>> = vec![BTreeSet::new(); k];
    fn go(
        j: usize,
        preds: &[Vec<usize>],
        universe: &[Vec<Vec<Element>>],
        current: &mut Vec<BTreeSet<Vec<Element>>>,
        out: &mut Vec<Vec<BTreeSet<Vec<Element>>>>,
    ) {
        if j == current.len() {
            out.push(current.clone());
            return;
        }
        let lower: BTreeSet<Vec<Element>> = preds[j]
            .iter()
            .flat_map(|&i| current[i].iter().cloned())
            .collect();
        let optional: Vec<&Vec<Element>> =
            universe[j].iter().filter(|t| !lower.contains(*t)).collect();
        assert!(
            optional.len() < 31,
            "extension universe too large to enumerate"
        );
        for mask in 0u32..(1u32 << optional.len()) {
            let mut s = lower.clone();
            for (b, t) in optional.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    s.insert((*t).clone());
                }
            }
            current[j] = s;
            go(j + 1, preds, universe, current, out);
        }
    }
    go(0, &preds, &universe, &mut current, &mut out);
    out
}

/// Restartable, deterministic generator of models in nondecreasing size.
///
/// Order: size, then state count, then poset, domains, and extensions in
/// generation order. Each call to [`ModelEnumerator::new`] yields an
/// independent cursor.
#[derive(Clone, Debug)]
pub struct ModelEnumerator {
    sig: Vec<PredSymbol>,
    max_size: usize,
    size: usize,
    states: usize,
    shapes: Vec<Shape>,
    shape_idx: usize,
    families: Vec<Vec<Vec<BTreeSet<Vec<Element>>>>>,
    counter: Vec<usize>,
    exhausted_shape: bool,
    emitted: u64,
}

impl ModelEnumerator {
    pub fn new(sig: &[PredSymbol], max_size: usize) -> Self {
        let mut sig: Vec<PredSymbol> = sig.to_vec();
        sig.sort();
        sig.dedup();
        ModelEnumerator {
            sig,
            max_size,
            size: 1,
            states: 0,
            shapes: Vec::new(),
            shape_idx: 0,
            families: Vec::new(),
            counter: Vec::new(),
            exhausted_shape: true,
            emitted: 0,
        }
    }

    /// Number of models emitted so far.
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Moves to the next (size, state-count) block with at least one
    /// shape. Returns false when the size cap is passed.
    fn next_block(&mut self) -> bool {
        loop {
            self.states += 1;
            if self.states > self.size {
                self.size += 1;
                self.states = 1;
            }
            if self.size > self.max_size {
                return false;
            }
            self.shapes = shapes(self.states, self.size - self.states);
            self.shape_idx = 0;
            if !self.shapes.is_empty() {
                return true;
            }
        }
    }

    fn load_shape(&mut self) {
        let shape = &self.shapes[self.shape_idx];
        self.families = self
            .sig
            .iter()
            .map(|p| extension_families(shape, p.arity))
            .collect();
        self.counter = vec![0; self.sig.len()];
        self.exhausted_shape = false;
    }

    fn build(&self) -> KripkeModel {
        let shape = &self.shapes[self.shape_idx];
        let ext: BTreeMap<String, Vec<BTreeSet<Vec<Element>>>> = self
            .sig
            .iter()
            .zip(&self.families)
            .zip(&self.counter)
            .map(|((p, fams), &i)| (p.name.clone(), fams[i].clone()))
            .collect();
        KripkeModel::new(
            shape.domains.len(),
            shape.order.clone(),
            shape.domains.clone(),
            ext,
        )
    }

    fn advance_counter(&mut self) {
        for (slot, fams) in self.counter.iter_mut().zip(&self.families).rev() {
            *slot += 1;
            if *slot < fams.len() {
                return;
            }
            *slot = 0;
        }
        self.exhausted_shape = true;
    }
}

impl Iterator for ModelEnumerator {
    type Item = KripkeModel;

    fn next(&mut self) -> Option<KripkeModel> {
        if self.exhausted_shape {
            if !self.shapes.is_empty() && self.shape_idx + 1 < self.shapes.len() {
                self.shape_idx += 1;
            } else if !self.next_block() {
                return None;
            }
            self.load_shape();
        }
        let m = self.build();
        self.advance_counter();
        self.emitted += 1;
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poset_counts() {
        // Naturally labeled posets on k points: 1, 2, 7, 40.
        let counts: Vec<usize> = (1..=4).map(|k| naturally_labeled_posets(k).len()).collect();
        assert_eq!(counts, vec![1, 2, 7, 40]);
    }

    #[test]
    fn size_one_is_the_empty_single_state() {
        let ms: Vec<_> = ModelEnumerator::new(&[PredSymbol::new("P", 1)], 1).collect();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].num_states(), 1);
        assert!(ms[0].domain(crate::kripke::StateId(0)).is_empty());
    }

    #[test]
    fn size_two_over_unary_p() {
        let ms: Vec<_> = ModelEnumerator::new(&[PredSymbol::new("P", 1)], 2).collect();
        let one_elem: Vec<_> = ms
            .iter()
            .filter(|m| m.num_states() == 1 && m.size() == 2)
            .collect();
        assert_eq!(one_elem.len(), 2);
        let ps: BTreeSet<usize> = one_elem
            .iter()
            .map(|m| m.extensions()["P"][0].len())
            .collect();
        assert_eq!(ps, [0, 1].into_iter().collect());
        // 1 state empty + (1 state, 1 element) x 2 + (2 states, no elements) x 2 posets.
        assert_eq!(ms.len(), 5);
    }

    #[test]
    fn sizes_nondecreasing_and_valid() {
        let sig = [PredSymbol::new("P", 1), PredSymbol::new("Q", 0)];
        let mut last = 0;
        let mut n = 0;
        for m in ModelEnumerator::new(&sig, 4) {
            assert!(m.is_valid(), "{m}");
            assert!(m.size() >= last);
            last = m.size();
            n += 1;
        }
        assert!(n > 100);
    }

    #[test]
    fn restartable_deterministic() {
        let sig = [PredSymbol::new("P", 1)];
        let a: Vec<String> = ModelEnumerator::new(&sig, 4)
            .map(|m| m.to_string())
            .collect();
        let b: Vec<String> = ModelEnumerator::new(&sig, 4)
            .map(|m| m.to_string())
            .collect();
        assert_eq!(a, b);
    }
}
