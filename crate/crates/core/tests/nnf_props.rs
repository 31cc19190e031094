mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentential::*;

/// A smooth d-DNNF for a random CNF, with the CNF and random weights.
fn circuit(seed: u64, n: u32) -> (Cnf, NnfCircuit, WeightMap<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(0..=2 * n as usize);
    let cnf = random_cnf(&mut rng, n, k, 3);
    let mut mgr = SddManager::new(Vtree::random(&vars(n), rng.gen()).unwrap());
    let root = mgr.compile_cnf(&cnf, ClauseOrder::ByVtree).unwrap();
    let nnf = mgr.to_nnf(root).unwrap().smooth();
    let mut w = WeightMap::unit(n);
    for v in vars(n) {
        w.set(Lit::pos(v), rng.gen_range(0.1..1.0)).unwrap();
        w.set(Lit::neg(v), rng.gen_range(0.1..1.0)).unwrap();
    }
    (cnf, nnf, w)
}

fn weight(w: &WeightMap<f64>, n: u32, bits: u64) -> f64 {
    vars(n).iter().map(|&v| w.get(Lit::new(v, bits >> v.slot() & 1 == 1))).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginals_match_enumeration(seed in any::<u64>(), n in 1u32..=7) {
        let (cnf, nnf, w) = circuit(seed, n);
        let table = truth_table(&cnf);
        let m = nnf.all_marginals(&w, Check::Verify).unwrap();
        let total: f64 = (0..1u64 << n).filter(|&b| table[b as usize]).map(|b| weight(&w, n, b)).sum();
        prop_assert!((m.total() - total).abs() <= 1e-12);
        for v in vars(n) {
            for value in [false, true] {
                let want: f64 = (0..1u64 << n)
                    .filter(|&b| table[b as usize] && (b >> v.slot() & 1 == 1) == value)
                    .map(|b| weight(&w, n, b))
                    .sum();
                prop_assert!((m.get(Lit::new(v, value)) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn max_weight_model_is_optimal(seed in any::<u64>(), n in 1u32..=7) {
        let (cnf, nnf, w) = circuit(seed, n);
        let table = truth_table(&cnf);
        let best = (0..1u64 << n).filter(|&b| table[b as usize]).map(|b| weight(&w, n, b)).fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
        match (best, nnf.max_weight_model(&w, Check::Verify)) {
            (None, r) => prop_assert!(r.is_err()),
            (Some(want), Ok((x, got))) => {
                prop_assert!((got - want).abs() <= 1e-12);
                let bits: u64 = vars(n).iter().filter(|&&v| x.get(v) == Some(true)).map(|v| 1u64 << v.slot()).sum();
                prop_assert!(table[bits as usize]);
                prop_assert!((weight(&w, n, bits) - want).abs() <= 1e-12);
            }
            (Some(_), Err(e)) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn c2d_round_trip(seed in any::<u64>(), n in 1u32..=7) {
        let (_, nnf, _) = circuit(seed, n);
        let back = NnfCircuit::parse_c2d(&nnf.to_c2d()).unwrap();
        prop_assert_eq!(back.to_c2d(), nnf.to_c2d());
        for b in 0..1u64 << n {
            let v = values_of(n, b);
            prop_assert_eq!(back.evaluate_values(&v), nnf.evaluate_values(&v));
        }
    }

    #[test]
    fn enumeration_lists_every_model_once(seed in any::<u64>(), n in 1u32..=6) {
        let (cnf, nnf, _) = circuit(seed, n);
        let models = nnf.enumerate_models(usize::MAX).unwrap();
        prop_assert_eq!(models.len() as u64, count_models(&cnf));
        for m in &models {
            prop_assert!(cnf.evaluate_values(&m.to_values(n).unwrap()));
        }
        let mut sorted = models.clone();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), models.len());
    }

    #[test]
    fn conditioning_matches_evaluation(seed in any::<u64>(), n in 1u32..=6, pick in any::<u64>()) {
        let (cnf, nnf, _) = circuit(seed, n);
        let t = Term::from_bits(n, pick & ((1 << n) - 1));
        let c = nnf.condition(&t);
        prop_assert_eq!(c.evaluate(&t).unwrap(), cnf.evaluate_values(&t.to_values(n).unwrap()));
    }

    #[test]
    fn log_count_matches_count(seed in any::<u64>(), n in 1u32..=7) {
        let (_, nnf, w) = circuit(seed, n);
        let plain = nnf.wmc(&w, Check::Trust).unwrap();
        if plain > 0.0 {
            let log = nnf.log_wmc(&w, Check::Trust).unwrap();
            prop_assert!((log - plain.ln()).abs() <= 1e-9);
        }
    }
}

#[test]
fn non_decomposable_circuit_is_refused_when_verifying() {
    let mut b = NnfBuilder::new(1);
    let x = b.lit(Lit::pos(Var::new(1)));
    let nx = b.lit(Lit::neg(Var::new(1)));
    let root = b.and(vec![x, nx]);
    let c = b.finish(root);
    assert!(c.check_decomposability().is_err());
    assert!(c.model_count(Check::Verify).is_err());
}

#[test]
fn non_deterministic_or_is_refused_when_verifying() {
    let mut b = NnfBuilder::new(1);
    let x = b.lit(Lit::pos(Var::new(1)));
    let y = b.lit(Lit::pos(Var::new(1)));
    let root = b.or(vec![x, y]);
    let c = b.finish(root);
    assert!(c.check_determinism_exhaustive().is_err());
    assert!(c.model_count(Check::Verify).is_err());
}
