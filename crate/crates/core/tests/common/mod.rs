// SPDX-License-Identifier: Apache-2.0

//! Test-side oracles that share nothing with the library except the
//! formula syntax tree: a brute-force Kripke enumerator with its own
//! forcing relation, and random generators for models and formulas.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use ifog_core::formula::{Formula, Var};
use ifog_core::kripke::{KripkeModel, ModelFile};

/// A finite Kripke model over unary and nullary predicates. Domains and
/// extensions are bitmasks over elements `0..elems`.
#[derive(Clone, Debug)]
pub struct Brute {
    pub states: usize,
    pub elems: usize,
    pub le: Vec<Vec<bool>>,
    pub dom: Vec<u32>,
    pub ext: HashMap<String, Vec<u32>>,
}

impl Brute {
    pub fn size(&self) -> usize {
        self.states + self.elems
    }

    fn above(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.states).filter(move |&t| self.le[s][t])
    }

    pub fn forces(&self, s: usize, env: &BTreeMap<Var, u32>, f: &Formula) -> bool {
        match f {
            Formula::Falsum => false,
            Formula::Atom(p, args) => {
                let ext = self.ext.get(p).map_or(0, |e| e[s]);
                match args.as_slice() {
                    [] => ext & 1 == 1,
                    [x] => ext >> env[x] & 1 == 1,
                    _ => panic!("oracle handles arity <= 1"),
                }
            }
            Formula::And(a, b) => self.forces(s, env, a) && self.forces(s, env, b),
            Formula::Or(a, b) => self.forces(s, env, a) || self.forces(s, env, b),
            Formula::Implies(a, b) => self
                .above(s)
                .all(|t| !self.forces(t, env, a) || self.forces(t, env, b)),
            Formula::Forall(x, body) => self.above(s).all(|t| {
                (0..self.elems as u32)
                    .filter(|e| self.dom[t] >> e & 1 == 1)
                    .all(|e| {
                        let mut env = env.clone();
                        env.insert(x.clone(), e);
                        self.forces(t, &env, body)
                    })
            }),
            Formula::Exists(x, body) => (0..self.elems as u32)
                .filter(|e| self.dom[s] >> e & 1 == 1)
                .any(|e| {
                    let mut env = env.clone();
                    env.insert(x.clone(), e);
                    self.forces(s, &env, body)
                }),
        }
    }
}

/// Reflexive, antisymmetric, transitive relations on `n` labelled points.
fn partial_orders(n: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                le[a][b] = true;
            }
        }
        let anti = (0..n).all(|a| (0..n).all(|b| a == b || !(le[a][b] && le[b][a])));
        let trans =
            (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(le[a][b] && le[b][c]) || le[a][c])));
        if anti && trans {
            out.push(le);
        }
    }
    out
}

/// Monotone assignments of a sub-mask of `within[s]` to every state.
fn monotone_families(le: &[Vec<bool>], within: &[u32]) -> Vec<Vec<u32>> {
    let n = within.len();
    let mut out = vec![Vec::new()];
    for s in 0..n {
        let mut next = Vec::new();
        for partial in &out {
            let w = within[s];
            let mut sub = w;
            loop {
                let ok = (0..s).all(|t| {
                    let v: &Vec<u32> = partial;
                    (!le[t][s] || v[t] & !sub == 0) && (!le[s][t] || sub & !v[t] == 0)
                });
                if ok {
                    let mut v = partial.clone();
                    v.push(sub);
                    next.push(v);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & w;
            }
        }
        out = next;
    }
    out
}

/// Predicates with their arity (0 or 1) occurring in `f`.
pub fn unary_signature(f: &Formula) -> Vec<(String, usize)> {
    let mut sig = BTreeSet::new();
    f.visit(&mut |g| {
        if let Formula::Atom(p, args) = g {
            assert!(args.len() <= 1, "oracle handles arity <= 1");
            sig.insert((p.clone(), args.len()));
        }
    });
    sig.into_iter().collect()
}

/// Visits every model of exactly `size` (states + elements, all domains
/// nonempty) over `sig` until `f` returns true.
pub fn any_model_of_size(
    sig: &[(String, usize)],
    size: usize,
    mut f: impl FnMut(&Brute) -> bool,
) -> bool {
    for states in 1..size {
        let elems = size - states;
        if elems > 16 {
            continue;
        }
        let full = (1u32 << elems) - 1;
        for le in partial_orders(states) {
            let all = vec![full; states];
            for dom in monotone_families(&le, &all) {
                if dom.contains(&0) || dom.iter().fold(0, |a, &d| a | d) != full {
                    continue;
                }
                let within: Vec<Vec<u32>> = sig
                    .iter()
                    .map(|(_, arity)| {
                        if *arity == 0 {
                            vec![1; states]
                        } else {
                            dom.clone()
                        }
                    })
                    .collect();
                let fams: Vec<Vec<Vec<u32>>> =
                    within.iter().map(|w| monotone_families(&le, w)).collect();
                let mut idx = vec![0usize; sig.len()];
                loop {
                    let ext = sig
                        .iter()
                        .zip(&idx)
                        .enumerate()
                        .map(|(k, ((p, _), &i))| (p.clone(), fams[k][i].clone()))
                        .collect();
                    let m = Brute {
                        states,
                        elems,
                        le: le.clone(),
                        dom: dom.clone(),
                        ext,
                    };
                    if f(&m) {
                        return true;
                    }
                    let mut k = 0;
                    while k < idx.len() {
                        idx[k] += 1;
                        if idx[k] < fams[k].len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == idx.len() {
                        break;
                    }
                }
            }
        }
    }
    false
}

/// Least size of a model with a state refuting the closed `f`.
pub fn min_countermodel_size(f: &Formula, max: usize) -> Option<usize> {
    let sig = unary_signature(f);
    (2..=max).find(|&n| {
        any_model_of_size(&sig, n, |m| {
            (0..m.states).any(|s| !m.forces(s, &BTreeMap::new(), f))
        })
    })
}

/// Least size of a model with a state forcing the closed `f`.
pub fn min_model_size(f: &Formula, max: usize) -> Option<usize> {
    let sig = unary_signature(f);
    (2..=max).find(|&n| {
        any_model_of_size(&sig, n, |m| {
            (0..m.states).any(|s| m.forces(s, &BTreeMap::new(), f))
        })
    })
}

impl Brute {
    /// A random model over unary `P`, `Q` and nullary `S`.
    pub fn random(rng: &mut impl Rng) -> Brute {
        let states = rng.gen_range(1..=3);
        let elems = rng.gen_range(1..=3);
        let mut le = vec![vec![false; states]; states];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for j in 0..states {
            for i in 0..j {
                if rng.gen_bool(0.5) {
                    for k in 0..=i {
                        if le[k][i] {
                            le[k][j] = true;
                        }
                    }
                }
            }
        }
        let below =
            |masks: &[u32], j: usize| (0..j).filter(|&i| le[i][j]).fold(0, |a, i| a | masks[i]);
        let mut dom = Vec::new();
        for j in 0..states {
            let mut d = below(&dom, j) | rng.gen_range(0..1u32 << elems);
            if d == 0 {
                d = 1;
            }
            dom.push(d);
        }
        let mut ext = HashMap::new();
        for (p, within) in [("P", None), ("Q", None), ("S", Some(1u32))] {
            let mut v = Vec::new();
            for j in 0..states {
                let cap = within.unwrap_or(dom[j]);
                v.push(below(&v, j) | (rng.gen_range(0..=cap) & cap));
            }
            ext.insert(p.to_string(), v);
        }
        Brute {
            states,
            elems,
            le,
            dom,
            ext,
        }
    }

    pub fn to_kripke(&self) -> KripkeModel {
        let order = (0..self.states)
            .flat_map(|a| (0..self.states).map(move |b| (a, b)))
            .filter(|&(a, b)| self.le[a][b])
            .collect();
        let bits = |m: u32| (0..self.elems as u32).filter(move |e| m >> e & 1 == 1);
        let domains = self.dom.iter().map(|&d| bits(d).collect()).collect();
        let extensions = self
            .ext
            .iter()
            .map(|(p, v)| {
                let per = v
                    .iter()
                    .map(|&m| {
                        if p == "S" {
                            if m & 1 == 1 {
                                BTreeSet::from([vec![]])
                            } else {
                                BTreeSet::new()
                            }
                        } else {
                            bits(m).map(|e| vec![e]).collect()
                        }
                    })
                    .collect();
                (p.clone(), per)
            })
            .collect();
        KripkeModel::new(self.states, order, domains, extensions)
    }
}

/// A random formula over unary `P`, `Q`, nullary `S` and `⊥`.
pub fn random_unary_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    let vars = ["X", "Y"];
    let var = |rng: &mut dyn rand::RngCore| Var::new(vars[rng.gen_range(0..vars.len())]);
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => Formula::Falsum,
            1 => Formula::Atom("S".into(), vec![]),
            2 => Formula::Atom("Q".into(), vec![var(rng)]),
            _ => Formula::Atom("P".into(), vec![var(rng)]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Formula::and(random_unary_formula(rng, d), random_unary_formula(rng, d)),
        1 => Formula::or(random_unary_formula(rng, d), random_unary_formula(rng, d)),
        2 => Formula::implies(random_unary_formula(rng, d), random_unary_formula(rng, d)),
        3 => Formula::Forall(var(rng), Box::new(random_unary_formula(rng, d))),
        _ => Formula::Exists(var(rng), Box::new(random_unary_formula(rng, d))),
    }
}

/// A random valid model: states in index order, edges only upward, domains
/// and extensions inherited from every predecessor.
pub fn random_model(rng: &mut impl Rng, preds: &[(&str, usize)]) -> KripkeModel {
    let n = rng.gen_range(1..=4);
    let mut le = vec![vec![false; n]; n];
    for (i, row) in le.iter_mut().enumerate() {
        row[i] = true;
    }
    for j in 0..n {
        for i in 0..j {
            if rng.gen_bool(0.5) {
                for k in 0..=i {
                    if le[k][i] {
                        le[k][j] = true;
                    }
                }
            }
        }
    }
    let mut domains: Vec<BTreeSet<u32>> = Vec::new();
    for j in 0..n {
        let mut d: BTreeSet<u32> = (0..j)
            .filter(|&i| le[i][j])
            .flat_map(|i| domains[i].clone())
            .collect();
        for e in 0..3 {
            if rng.gen_bool(0.4) {
                d.insert(e);
            }
        }
        if d.is_empty() {
            d.insert(rng.gen_range(0..3));
        }
        domains.push(d);
    }
    let mut extensions = BTreeMap::new();
    for &(p, arity) in preds {
        let mut per: Vec<BTreeSet<Vec<u32>>> = Vec::new();
        for j in 0..n {
            let mut s: BTreeSet<Vec<u32>> = (0..j)
                .filter(|&i| le[i][j])
                .flat_map(|i| per[i].clone())
                .collect();
            let tuples: Vec<Vec<u32>> = match arity {
                0 => vec![vec![]],
                1 => domains[j].iter().map(|&e| vec![e]).collect(),
                _ => domains[j]
                    .iter()
                    .flat_map(|&a| domains[j].iter().map(move |&b| vec![a, b]))
                    .collect(),
            };
            for t in tuples {
                if rng.gen_bool(0.35) {
                    s.insert(t);
                }
            }
            per.push(s);
        }
        extensions.insert(p.to_string(), per);
    }
    let order = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| le[a][b])
        .collect();
    let m = KripkeModel::new(n, order, domains, extensions);
    assert!(
        m.is_valid(),
        "generator produced {:?}",
        ModelFile::from_model(&m)
    );
    m
}

/// A random formula over `P(_)`, `Q(_)`, `R(_,_)`, `⊥` with variables
/// `X`, `Y`, `Z`; free variables are likely.
pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    let vars = ["X", "Y", "Z"];
    let var = |rng: &mut dyn rand::RngCore| Var::new(vars[rng.gen_range(0..vars.len())]);
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..6) {
            0 => Formula::Falsum,
            1 => Formula::Atom("Q".into(), vec![var(rng)]),
            2 => Formula::Atom("R".into(), vec![var(rng), var(rng)]),
            _ => Formula::Atom("P".into(), vec![var(rng)]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Formula::and(random_formula(rng, d), random_formula(rng, d)),
        1 => Formula::or(random_formula(rng, d), random_formula(rng, d)),
        2 => Formula::implies(random_formula(rng, d), random_formula(rng, d)),
        3 => Formula::Forall(var(rng), Box::new(random_formula(rng, d))),
        _ => Formula::Exists(var(rng), Box::new(random_formula(rng, d))),
    }
}

#[cfg(test)]
mod self_check {

    #[test]
    fn poset_counts() {
        // Labelled posets: 1, 3, 19, 219.
        let counts: Vec<usize> = (1..=4).map(|n| super::partial_orders(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 19, 219]);
    }
}
