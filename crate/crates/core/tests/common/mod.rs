#![allow(dead_code)]

//! Enumeration oracles shared by the integration tests.

use rand::Rng;
use sentential::{Cnf, Lit, Term, Var};

pub fn vars(n: u32) -> Vec<Var> {
    (1..=n).map(Var::new).collect()
}

pub fn values_of(n: u32, bits: u64) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

/// `table[bits]` is the value of `cnf` on the input encoded by `bits`.
pub fn truth_table(cnf: &Cnf) -> Vec<bool> {
    let n = cnf.var_count();
    (0..1u64 << n).map(|b| cnf.evaluate_values(&values_of(n, b))).collect()
}

pub fn count_models(cnf: &Cnf) -> u64 {
    truth_table(cnf).iter().filter(|&&b| b).count() as u64
}

pub fn random_cnf(rng: &mut impl Rng, n: u32, clauses: usize, width: usize) -> Cnf {
    let mut cnf = Cnf::new(n);
    for _ in 0..clauses {
        let k = rng.gen_range(1..=width.min(n as usize));
        let mut pool = vars(n);
        let clause = (0..k)
            .map(|_| {
                let v = pool.swap_remove(rng.gen_range(0..pool.len()));
                Lit::new(v, rng.gen())
            })
            .collect();
        cnf.add_clause(clause).unwrap();
    }
    cnf
}

/// A random non-constant truth table over `n` variables.
pub fn random_table(rng: &mut impl Rng, n: u32) -> Vec<bool> {
    let density: f64 = rng.gen_range(0.2..0.8);
    loop {
        let t: Vec<bool> = (0..1u64 << n).map(|_| rng.gen_bool(density)).collect();
        if t.iter().any(|&b| b) && t.iter().any(|&b| !b) {
            return t;
        }
    }
}

pub fn random_instance(rng: &mut impl Rng, n: u32) -> u64 {
    rng.gen_range(0..1u64 << n)
}

pub fn term_of_bits(n: u32, bits: u64) -> Term {
    Term::from_bits(n, bits)
}

/// Fewest flips away from `x` that reach an input with a different value, by
/// breadth-first search over the hypercube.
pub fn bfs_robustness(table: &[bool], n: u32, x: u64) -> Option<u32> {
    let d = table[x as usize];
    let mut seen = vec![false; table.len()];
    let mut frontier = vec![x];
    seen[x as usize] = true;
    let mut depth = 0;
    while !frontier.is_empty() {
        if frontier.iter().any(|&z| table[z as usize] != d) {
            return Some(depth);
        }
        let mut next = Vec::new();
        for z in frontier {
            for i in 0..n {
                let y = z ^ (1 << i);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    next.push(y);
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    None
}

/// `good[s]` holds when fixing the features in mask `s` to their values in
/// `x` forces the decision on `x`.
pub fn forcing_subsets(table: &[bool], n: u32, x: u64) -> Vec<bool> {
    let d = table[x as usize];
    let full = (1u64 << n) - 1;
    let mut bad = vec![false; table.len()];
    for z in 0..1u64 << n {
        if table[z as usize] != d {
            bad[(!(z ^ x) & full) as usize] = true;
        }
    }
    for i in 0..n {
        for s in (0..1u64 << n).rev() {
            if s >> i & 1 == 1 && bad[s as usize] {
                bad[(s & !(1 << i)) as usize] = true;
            }
        }
    }
    bad.into_iter().map(|b| !b).collect()
}

/// Sufficient reasons for `x` as feature masks, by minimality over `forcing_subsets`.
pub fn sufficient_reason_masks(table: &[bool], n: u32, x: u64) -> Vec<u64> {
    let good = forcing_subsets(table, n, x);
    (0..1u64 << n)
        .filter(|&s| good[s as usize] && (0..n).all(|i| s >> i & 1 == 0 || !good[(s & !(1 << i)) as usize]))
        .collect()
}

/// The term fixing the features of `mask` to their values in `x`.
pub fn mask_term(n: u32, x: u64, mask: u64) -> Term {
    let lits = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| Lit::new(Var::new(i + 1), x >> i & 1 == 1));
    Term::from_lits(lits).unwrap()
}

/// Prime implicants of `table` (or its complement) by minimality over all terms.
pub fn prime_implicants(table: &[bool], n: u32, polarity: bool) -> Vec<Term> {
    let mut primes = Vec::new();
    for mask in 0..1u64 << n {
        for vals in 0..1u64 << n {
            if vals & !mask != 0 {
                continue;
            }
            let implies = |m: u64| (0..1u64 << n).filter(|z| z & m == vals & m).all(|z| table[z as usize] == polarity);
            if implies(mask) && (0..n).all(|i| mask >> i & 1 == 0 || !implies(mask & !(1 << i))) {
                primes.push(mask_term(n, vals, mask));
            }
        }
    }
    primes.sort();
    primes
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// Robustness of every input at once: distance to the nearest input with the
/// other value, by breadth-first search from all such inputs.
pub fn all_robustness(table: &[bool], n: u32) -> Vec<Option<u32>> {
    let mut out = vec![None; table.len()];
    for value in [false, true] {
        let mut dist: Vec<Option<u32>> = table.iter().map(|&b| (b != value).then_some(0)).collect();
        let mut frontier: Vec<u64> = (0..table.len() as u64).filter(|&z| dist[z as usize].is_some()).collect();
        let mut depth = 0;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for z in frontier {
                for i in 0..n {
                    let y = z ^ (1 << i);
                    if dist[y as usize].is_none() {
                        dist[y as usize] = Some(depth);
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        for (x, d) in dist.into_iter().enumerate() {
            if table[x] == value {
                out[x] = d;
            }
        }
    }
    out
}
