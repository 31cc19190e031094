//! Linear-time queries on decomposable, deterministic and smooth circuits.
//!
//! All counts range over the variables `1..=var_count`; variables the root
//! never mentions contribute a factor `W(x) + W(¬x)` (or `max` for MPE).

use num_bigint::BigUint;
use num_traits::One;

use super::{NnfCircuit, NnfNode};
use crate::error::{Error, Result};
use crate::logic::{Lit, Term, Var, WeightMap};
use crate::scalar::Weight;

/// Whether a query verifies the tractability properties it relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Check {
    /// Caller guarantees the properties, e.g. for compiler output.
    #[default]
    Trust,
    /// Check decomposability, smoothness and (exhaustively) determinism first.
    Verify,
}

/// Per-literal weighted model counts, plus the total.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals<W> {
    pos: Vec<W>,
    neg: Vec<W>,
    total: W,
}

impl<W: Weight> Marginals<W> {
    pub fn get(&self, lit: Lit) -> W {
        let t = if lit.is_positive() { &self.pos } else { &self.neg };
        t[lit.var().slot()].clone()
    }

    pub fn total(&self) -> W {
        self.total.clone()
    }
}

impl NnfCircuit {
    fn verify(&self, check: Check) -> Result<()> {
        if check == Check::Verify {
            self.check_decomposability()?;
            self.check_smoothness()?;
            self.check_determinism_exhaustive()?;
        }
        Ok(())
    }

    fn gap_vars(&self) -> Vec<Var> {
        let root_vars = &self.var_sets()[self.root];
        (1..=self.var_count).map(Var::new).filter(|v| !root_vars.contains(*v)).collect()
    }

    /// Sum at or-nodes, product at and-nodes, with `leaf` valuing literals.
    fn upward<W: Weight, F: Fn(Lit) -> W>(&self, leaf: F) -> Vec<W> {
        let mut vals: Vec<W> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n {
                NnfNode::True => W::one(),
                NnfNode::False => W::zero(),
                NnfNode::Lit(l) => leaf(*l),
                NnfNode::And(c) => c.iter().fold(W::one(), |acc, &i| acc * vals[i].clone()),
                NnfNode::Or(c) => c.iter().fold(W::zero(), |acc, &i| acc + vals[i].clone()),
            };
            vals.push(v);
        }
        vals
    }

    pub fn model_count(&self, check: Check) -> Result<BigUint> {
        self.verify(check)?;
        let vals: Vec<BigUint> = self.upward(|_| BigUint::one());
        let gap = self.gap_vars().len();
        Ok(vals[self.root].clone() << gap)
    }

    pub fn wmc<W: Weight>(&self, w: &WeightMap<W>, check: Check) -> Result<W> {
        self.verify(check)?;
        let vals = self.upward(|l| w.get(l));
        Ok(self
            .gap_vars()
            .into_iter()
            .fold(vals[self.root].clone(), |acc, v| acc * w.var_sum(v)))
    }

    /// Natural log of the weighted model count, computed in log space.
    pub fn log_wmc(&self, w: &WeightMap<f64>, check: Check) -> Result<f64> {
        self.verify(check)?;
        let mut vals: Vec<f64> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n {
                NnfNode::True => 0.0,
                NnfNode::False => f64::NEG_INFINITY,
                NnfNode::Lit(l) => w.get(*l).ln(),
                NnfNode::And(c) => c.iter().map(|&i| vals[i]).sum(),
                NnfNode::Or(c) => log_sum_exp(c.iter().map(|&i| vals[i])),
            };
            vals.push(v);
        }
        Ok(self
            .gap_vars()
            .into_iter()
            .fold(vals[self.root], |acc, v| acc + w.var_sum(v).ln()))
    }

    /// One upward pass and one downward derivative pass.
    pub fn all_marginals<W: Weight>(&self, w: &WeightMap<W>, check: Check) -> Result<Marginals<W>> {
        self.verify(check)?;
        let vals = self.upward(|l| w.get(l));
        let n = self.var_count as usize;
        let mut deriv: Vec<W> = vec![W::zero(); self.nodes.len()];
        deriv[self.root] = W::one();
        let mut pos = vec![W::zero(); n];
        let mut neg = vec![W::zero(); n];
        for i in (0..self.nodes.len()).rev() {
            if deriv[i].is_zero() {
                continue;
            }
            let d = deriv[i].clone();
            match &self.nodes[i] {
                NnfNode::Or(c) => {
                    for &ch in c {
                        deriv[ch] = deriv[ch].clone() + d.clone();
                    }
                }
                NnfNode::And(c) => {
                    let others = products_excluding(c.iter().map(|&ch| vals[ch].clone()));
                    for (&ch, o) in c.iter().zip(others) {
                        deriv[ch] = deriv[ch].clone() + d.clone() * o;
                    }
                }
                NnfNode::Lit(l) => {
                    let slot = l.var().slot();
                    let table = if l.is_positive() { &mut pos } else { &mut neg };
                    table[slot] = table[slot].clone() + w.get(*l) * d;
                }
                _ => {}
            }
        }
        let gaps = self.gap_vars();
        let gap_sums: Vec<W> = gaps.iter().map(|&v| w.var_sum(v)).collect();
        let factor = gap_sums.iter().fold(W::one(), |acc, s| acc * s.clone());
        let root_val = vals[self.root].clone();
        for m in pos.iter_mut().chain(neg.iter_mut()) {
            *m = m.clone() * factor.clone();
        }
        for (&v, other) in gaps.iter().zip(products_excluding(gap_sums.into_iter())) {
            let base = root_val.clone() * other;
            pos[v.slot()] = w.get(Lit::pos(v)) * base.clone();
            neg[v.slot()] = w.get(Lit::neg(v)) * base;
        }
        Ok(Marginals { pos, neg, total: root_val * factor })
    }

    /// Satisfiability; linear for decomposable circuits.
    pub fn dnnf_sat(&self) -> bool {
        let mut vals = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n {
                NnfNode::True | NnfNode::Lit(_) => true,
                NnfNode::False => false,
                NnfNode::And(c) => c.iter().all(|&i| vals[i]),
                NnfNode::Or(c) => c.iter().any(|&i| vals[i]),
            };
            vals.push(v);
        }
        vals[self.root]
    }

    /// A complete satisfying assignment of maximum weight, ties going to the earliest or-input.
    pub fn max_weight_model<W: Weight>(&self, w: &WeightMap<W>, check: Check) -> Result<(Term, W)> {
        self.verify(check)?;
        let mut vals: Vec<W> = Vec::with_capacity(self.nodes.len());
        let mut choice: Vec<usize> = vec![0; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            let v = match n {
                NnfNode::True => W::one(),
                NnfNode::False => W::zero(),
                NnfNode::Lit(l) => w.get(*l),
                NnfNode::And(c) => c.iter().fold(W::one(), |acc, &j| acc * vals[j].clone()),
                NnfNode::Or(c) => {
                    let mut best = W::zero();
                    for (k, &j) in c.iter().enumerate() {
                        if k == 0 || vals[j] > best {
                            best = vals[j].clone();
                            choice[i] = k;
                        }
                    }
                    best
                }
            };
            vals.push(v);
        }
        let mut value = vals[self.root].clone();
        if value.is_zero() {
            return Err(Error::Unsatisfiable);
        }
        let mut term = Term::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            match &self.nodes[i] {
                NnfNode::Lit(l) => term.set(l.var(), l.is_positive()),
                NnfNode::And(c) => stack.extend(c.iter().copied()),
                NnfNode::Or(c) => stack.push(c[choice[i]]),
                _ => {}
            }
        }
        for v in self.gap_vars() {
            let (p, q) = (w.get(Lit::pos(v)), w.get(Lit::neg(v)));
            let positive = p >= q;
            term.set(v, positive);
            value = value * if positive { p } else { q };
        }
        if value.is_zero() {
            return Err(Error::Unsatisfiable);
        }
        Ok((term, value))
    }

    /// Satisfying complete assignments, ordered with variable 1 most significant and false first.
    pub fn enumerate_models(&self, limit: usize) -> Result<Vec<Term>> {
        const LIMIT: u32 = 24;
        let n = self.var_count;
        if n > LIMIT {
            return Err(Error::TooManyVariables { what: "model enumeration", limit: LIMIT, actual: n });
        }
        let mut out = Vec::new();
        let mut values = vec![false; n as usize];
        for k in 0..1u64 << n {
            if out.len() >= limit {
                break;
            }
            for (i, v) in values.iter_mut().enumerate() {
                *v = k >> (n as usize - 1 - i) & 1 == 1;
            }
            if self.evaluate_values(&values) {
                out.push(Term::from_values(&values));
            }
        }
        Ok(out)
    }
}

fn log_sum_exp<I: Iterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// For each position, the product of all other entries (no division, so zeros are fine).
fn products_excluding<W: Weight, I: Iterator<Item = W>>(xs: I) -> Vec<W> {
    let xs: Vec<W> = xs.collect();
    let mut prefix = Vec::with_capacity(xs.len());
    let mut acc = W::one();
    for x in &xs {
        prefix.push(acc.clone());
        acc = acc * x.clone();
    }
    let mut out = vec![W::zero(); xs.len()];
    let mut suffix = W::one();
    for i in (0..xs.len()).rev() {
        out[i] = prefix[i].clone() * suffix.clone();
        suffix = suffix * xs[i].clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnf::NnfBuilder;
    use num_traits::Zero;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    /// Or(And(A, B), And(¬A, Or(B, ¬B))) over 3 variables; C is a gap.
    fn sample() -> NnfCircuit {
        let mut b = NnfBuilder::new(3);
        let a = b.lit(Lit::pos(v(1)));
        let na = b.lit(Lit::neg(v(1)));
        let bb = b.lit(Lit::pos(v(2)));
        let nb = b.lit(Lit::neg(v(2)));
        let ab = b.and(vec![a, bb]);
        let g = b.or(vec![bb, nb]);
        let rest = b.and(vec![na, g]);
        let r = b.or(vec![ab, rest]);
        b.finish(r)
    }

    #[test]
    fn counts_with_gap() {
        let c = sample();
        assert_eq!(c.model_count(Check::Verify).unwrap(), BigUint::from(6u32));
        assert_eq!(c.wmc(&WeightMap::<f64>::unit(3), Check::Verify).unwrap(), 6.0);
        let lw = c.log_wmc(&WeightMap::unit(3), Check::Trust).unwrap();
        assert!((lw - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_false_counts_zero() {
        let c = NnfCircuit::constant(false, 5);
        assert!(c.model_count(Check::Trust).unwrap().is_zero());
        assert!(!c.dnnf_sat());
        assert!(c.enumerate_models(10).unwrap().is_empty());
        assert!(matches!(
            c.max_weight_model(&WeightMap::<f64>::unit(5), Check::Trust),
            Err(Error::Unsatisfiable)
        ));
    }

    #[test]
    fn constant_true_enumerates_all() {
        let c = NnfCircuit::constant(true, 2);
        let models = c.enumerate_models(100).unwrap();
        assert_eq!(models.len(), 4);
        assert_eq!(models[0], Term::from_values(&[false, false]));
        assert_eq!(models[1], Term::from_values(&[false, true]));
        assert_eq!(c.enumerate_models(3).unwrap().len(), 3);
    }

    #[test]
    fn verify_rejects_non_smooth() {
        let mut b = NnfBuilder::new(2);
        let a = b.lit(Lit::pos(v(1)));
        let bb = b.lit(Lit::pos(v(2)));
        let na = b.lit(Lit::neg(v(1)));
        let ab = b.and(vec![a, bb]);
        let r = b.or(vec![ab, na]);
        let c = b.finish(r);
        assert!(matches!(c.model_count(Check::Verify), Err(Error::Property(_))));
        assert_eq!(c.smooth().model_count(Check::Verify).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn marginals_partition_total() {
        let c = sample();
        let mut w = WeightMap::<f64>::unit(3);
        w.set(Lit::pos(v(1)), 0.3).unwrap();
        w.set(Lit::neg(v(1)), 0.7).unwrap();
        w.set(Lit::pos(v(3)), 2.0).unwrap();
        let m = c.all_marginals(&w, Check::Verify).unwrap();
        let total = c.wmc(&w, Check::Trust).unwrap();
        assert!((m.total() - total).abs() < 1e-12);
        for i in 1..=3 {
            let s = m.get(Lit::pos(v(i))) + m.get(Lit::neg(v(i)));
            assert!((s - total).abs() < 1e-12, "variable {i}");
        }
        // A: only And(A,B) with C free: 0.3 * 1 * (2 + 1)
        assert!((m.get(Lit::pos(v(1))) - 0.9).abs() < 1e-12);
        assert!((m.get(Lit::pos(v(3))) - 2.0 * (0.3 + 0.7 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn mpe_prefers_heavier_branch() {
        let c = sample();
        let mut w = WeightMap::<f64>::unit(3);
        w.set(Lit::neg(v(1)), 5.0).unwrap();
        w.set(Lit::neg(v(3)), 3.0).unwrap();
        let (t, val) = c.max_weight_model(&w, Check::Verify).unwrap();
        assert_eq!(val, 15.0);
        assert_eq!(t.get(v(1)), Some(false));
        assert_eq!(t.get(v(2)), Some(true));
        assert_eq!(t.get(v(3)), Some(false));
        assert!(c.evaluate(&t).unwrap());
    }

    #[test]
    fn products_excluding_handles_zero() {
        let p = products_excluding([2.0, 0.0, 3.0].into_iter());
        assert_eq!(p, vec![0.0, 6.0, 0.0]);
    }
}
