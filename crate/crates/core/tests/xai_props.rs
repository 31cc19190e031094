mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentential::*;

fn bits_of(v: &[bool]) -> u64 {
    v.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

fn function(seed: u64, n: u32) -> (Vec<bool>, DecisionFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = random_table(&mut rng, n);
    let f = DecisionFunction::from_fn(n, |v| table[bits_of(v) as usize]).unwrap();
    (table, f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn primes_match_enumeration(seed in any::<u64>(), n in 1u32..=5) {
        let (table, mut f) = function(seed, n);
        for polarity in [true, false] {
            let mut got = f.prime_implicants(polarity).unwrap();
            got.sort();
            prop_assert_eq!(got, prime_implicants(&table, n, polarity));
        }
    }

    #[test]
    fn every_prime_is_an_implicant(seed in any::<u64>(), n in 1u32..=6) {
        let (_, mut f) = function(seed, n);
        for p in f.prime_implicants(true).unwrap() {
            prop_assert!(f.is_implicant(&p, true).unwrap());
            for l in p.lits() {
                let mut shorter = p.clone();
                shorter.unbind(l.var());
                prop_assert!(!f.is_implicant(&shorter, true).unwrap());
            }
        }
    }

    #[test]
    fn reason_circuit_guarantees_the_decision(seed in any::<u64>(), n in 1u32..=7, x in any::<u64>()) {
        let (table, mut f) = function(seed, n);
        let x = x & ((1 << n) - 1);
        let r = f.complete_reason(&Term::from_bits(n, x)).unwrap();
        prop_assert_eq!(r.decision, table[x as usize]);
        for y in 0..1u64 << n {
            if r.decision_sticks(&Term::from_bits(n, y)).unwrap() {
                // Every input agreeing with y where y agrees with x gets x's decision.
                let agree = !(x ^ y) & ((1 << n) - 1);
                for z in 0..1u64 << n {
                    if z & agree == x & agree {
                        prop_assert_eq!(table[z as usize], r.decision);
                    }
                }
            }
        }
    }

    #[test]
    fn bias_matches_enumeration(seed in any::<u64>(), n in 2u32..=6, x in any::<u64>(), pick in any::<u64>()) {
        let (table, mut f) = function(seed, n);
        let x = x & ((1 << n) - 1);
        let protected_mask = (pick & ((1 << n) - 1)).max(1);
        let protected: Vec<Var> = vars(n).into_iter().filter(|v| protected_mask >> v.slot() & 1 == 1).collect();
        let d = table[x as usize];
        let flips = (0..1u64 << n).any(|z| z & !protected_mask == x & !protected_mask && table[z as usize] != d);
        prop_assert_eq!(f.decision_biased(&Term::from_bits(n, x), &protected).unwrap(), flips);
        let depends = (0..1u64 << n).any(|z| {
            protected.iter().any(|v| table[z as usize] != table[(z ^ 1 << v.slot()) as usize])
        });
        prop_assert_eq!(f.classifier_biased(&protected).unwrap(), depends);
    }

    #[test]
    fn robustness_histogram_totals(seed in any::<u64>(), n in 1u32..=8) {
        let (table, f) = function(seed, n);
        let hist = f.robustness_histogram().unwrap();
        prop_assert_eq!(hist.values().sum::<u64>(), 1u64 << n);
        let every = all_robustness(&table, n);
        for (level, count) in hist {
            let want = every.iter().filter(|r| r.map_or(Robustness::Unbounded, Robustness::Finite) == level).count();
            prop_assert_eq!(count, want as u64);
        }
    }

    #[test]
    fn forest_compiles_to_its_majority(seed in any::<u64>(), n in 1usize..=5, trees in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..n).map(|i| format!("F{i}")).collect();
        fn tree(rng: &mut ChaCha8Rng, names: &[String], depth: u32) -> TreeNode {
            if depth == 0 || rng.gen_bool(0.3) {
                return TreeNode::Leaf(rng.gen());
            }
            TreeNode::Test {
                feature: names[rng.gen_range(0..names.len())].clone(),
                low: Box::new(tree(rng, names, depth - 1)),
                high: Box::new(tree(rng, names, depth - 1)),
            }
        }
        let ts = (0..2 * trees + 1).map(|_| tree(&mut rng, &names, 4)).collect();
        let forest = DecisionForest::new(names, ts, vec![]).unwrap();
        let f = forest.compile().unwrap();
        for b in 0..1u64 << n {
            let v = values_of(n as u32, b);
            prop_assert_eq!(f.evaluate(&v), forest.decide(&v));
        }
    }

    #[test]
    fn naive_bayes_json_round_trip(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = || Rational::new(rng.gen_range(1..=9).into(), 10.into());
        let features = (0..n).map(|i| NbFeature { name: format!("F{i}"), pos: p(), neg: p() }).collect();
        let nb = NaiveBayes::new(p(), p(), features, vec!["F0".into()]).unwrap();
        let back = NaiveBayes::from_json(&nb.to_json()).unwrap();
        for b in 0..1u64 << n {
            let v = values_of(n as u32, b);
            prop_assert_eq!(back.decide(&v).unwrap(), nb.decide(&v).unwrap());
        }
        prop_assert_eq!(back.protected_vars(), nb.protected_vars());
    }
}

#[test]
fn constant_function_has_unbounded_robustness() {
    let f = DecisionFunction::from_fn(3, |_| true).unwrap();
    assert_eq!(f.decision_robustness(&Term::from_bits(3, 5)).unwrap(), Robustness::Unbounded);
    assert!(matches!(f.model_robustness(), Err(Error::ConstantFunction)));
    assert_eq!(Robustness::Unbounded.to_string(), "unbounded");
}

#[test]
fn reason_needs_an_obdd() {
    let cnf = Cnf::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
    let mut mgr = SddManager::new(Vtree::balanced(&vars(3)).unwrap());
    let root = mgr.compile_cnf(&cnf, ClauseOrder::ByVtree).unwrap();
    let mut f = DecisionFunction::new(mgr, root, vec!["A".into(), "B".into(), "C".into()]).unwrap();
    assert!(matches!(f.complete_reason(&Term::from_bits(3, 1)), Err(Error::NotObdd)));
    assert!(matches!(f.decision_robustness(&Term::from_bits(3, 1)), Err(Error::NotObdd)));
    assert_eq!(f.sufficient_reasons(&Term::from_bits(3, 1)).unwrap().len(), 1);
}
