// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ifog_core::arcadian::{compact, AbstractRun};
use ifog_core::formula::{parse, Formula, Var};
use ifog_core::game::{play, Position, RandomAfrodite, RandomEros};
use ifog_core::kripke::{StateId, Valuation};
use ifog_core::proof::{check, search_proof, Context};
use ifog_core::strategy::{QuasiOrderRel, Relation};

use common::Brute;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn closed(f: Formula) -> Formula {
    f.free_vars()
        .into_iter()
        .fold(f, |acc, v| Formula::Forall(v, Box::new(acc)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let f = common::random_formula(&mut rng(seed), 5);
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn forcing_matches_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = Brute::random(&mut r);
        let m = b.to_kripke();
        prop_assert!(m.is_valid());
        let f = common::random_unary_formula(&mut r, 4);
        let elems: Vec<u32> = (0..b.elems as u32).collect();
        for s in 0..b.states {
            let inside: Vec<u32> = elems.iter().copied().filter(|e| b.dom[s] >> e & 1 == 1).collect();
            let mut env = BTreeMap::new();
            let mut rho = Valuation::new();
            for v in f.free_vars() {
                let e = inside[r.gen_range(0..inside.len())];
                env.insert(v.clone(), e);
                rho.set(v, e);
            }
            prop_assert_eq!(m.satisfies(StateId(s), &rho, &f).unwrap(), b.forces(s, &env, &f), "{} at c{}", f, s);
        }
    }

    #[test]
    fn forcing_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r, &[("P", 1), ("Q", 1), ("R", 2)]);
        let f = common::random_formula(&mut r, 4);
        for &(s, t) in m.order().iter() {
            let dom: Vec<u32> = m.domain(StateId(s)).iter().copied().collect();
            let mut rho = Valuation::new();
            for v in f.free_vars() {
                rho.set(v, dom[r.gen_range(0..dom.len())]);
            }
            if m.satisfies(StateId(s), &rho, &f).unwrap() {
                prop_assert!(m.satisfies(StateId(t), &rho, &f).unwrap());
            }
        }
    }

    #[test]
    fn alpha_renaming_is_invisible(seed in any::<u64>()) {
        let f = common::random_formula(&mut rng(seed), 4);
        let g = parse(&f.to_string().replace('X', "W")).unwrap();
        if !f.free_vars().contains(&Var::new("X")) {
            prop_assert!(f.alpha_eq(&g));
        }
    }

    #[test]
    fn found_proofs_check(seed in any::<u64>()) {
        let f = closed(common::random_unary_formula(&mut rng(seed), 3));
        if let Some(p) = search_proof(&Context::new(), &f, 8).proof() {
            prop_assert!(check(&Context::new(), p, &f), "{} by {}", f, p);
        }
    }

    #[test]
    fn quasiorder_is_reflexive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gamma: Vec<Formula> = (0..r.gen_range(1..4)).map(|_| common::random_unary_formula(&mut r, 2)).collect();
        let rel = QuasiOrderRel::new(&gamma);
        for x in rel.vars() {
            prop_assert_eq!(rel.get(x, x), Relation::Holds);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compaction_is_idempotent_and_keeps_ends(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tau = closed(common::random_unary_formula(&mut r, 3));
        let start = Position::start(tau);
        let out = play(&start, &mut RandomEros::new(seed), &mut RandomAfrodite::new(seed), 20).unwrap();
        let run = AbstractRun::from_trace(out.trace());
        let c = compact(&run);
        prop_assert_eq!(&compact(&c), &c);
        prop_assert_eq!(c.positions.first(), run.positions.first());
        prop_assert_eq!(
            c.positions.last().map(|p| p.is_final()),
            run.positions.last().map(|p| p.is_final())
        );
        prop_assert!(c.len() <= run.len());
        prop_assert!(c.eigenvariables.is_subset(&run.eigenvariables));
    }
}
