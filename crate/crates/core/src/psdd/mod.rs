//! Probabilistic SDDs: a normalized SDD whose decision nodes carry a local
//! distribution over their elements, inducing a distribution over the models
//! of the underlying SDD.

mod dataset;
mod io;

pub use dataset::Dataset;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::{Cnf, Lit, Term, Var};
use crate::scalar::Probability;
use crate::sdd::{ClauseOrder, Ix, Kind, Sdd, SddManager, FALSE, TRUE};
use crate::vtree::Vtree;

#[derive(Debug, Clone, PartialEq)]
pub enum PsddNode<F> {
    /// Only appears as the sub of a zero-probability element.
    False,
    Literal(Lit),
    /// A free variable with probability `theta` of being true.
    Top { var: Var, theta: F },
    Decision { vtree: usize, elements: Vec<Element<F>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element<F> {
    pub prime: usize,
    pub sub: usize,
    pub theta: F,
}

/// Every node is normalized for a vtree node and covers exactly its variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Psdd<F> {
    vtree: Vtree,
    /// Children before parents; the root is last.
    nodes: Vec<PsddNode<F>>,
    vtree_of: Vec<usize>,
}

impl<F: Probability> Psdd<F> {
    /// Structure of `base` with uniform local distributions.
    pub fn from_sdd(mgr: &mut SddManager, base: Sdd) -> Result<Self> {
        let root = mgr.ix(base)?;
        if root == FALSE {
            return Err(Error::Unsatisfiable);
        }
        let mut p = Psdd { vtree: mgr.vtree().clone(), nodes: Vec::new(), vtree_of: Vec::new() };
        let mut memo = HashMap::new();
        let top = p.vtree.root();
        p.normalize(mgr, root, top, &mut memo);
        p.set_uniform();
        Ok(p)
    }

    fn normalize(&mut self, mgr: &mut SddManager, x: Ix, v: usize, memo: &mut HashMap<(Ix, usize), usize>) -> usize {
        if x == FALSE {
            if let Some(&i) = memo.get(&(FALSE, usize::MAX)) {
                return i;
            }
            let i = self.push(PsddNode::False, usize::MAX);
            memo.insert((FALSE, usize::MAX), i);
            return i;
        }
        if let Some(&i) = memo.get(&(x, v)) {
            return i;
        }
        let node = if let Some(var) = self.vtree.leaf_var(v) {
            match mgr.kind(x) {
                Kind::Literal(l) => PsddNode::Literal(*l),
                _ => PsddNode::Top { var, theta: F::one() },
            }
        } else {
            let (lv, rv) = (self.vtree.left(v), self.vtree.right(v));
            let pairs: Vec<(Ix, Ix)> = if x != TRUE && mgr.vnode(x) == v {
                match mgr.kind(x) {
                    Kind::Decision(els) => els.to_vec(),
                    _ => unreachable!("internal vtree nodes hold decisions"),
                }
            } else if x != TRUE && self.vtree.is_sub(mgr.vnode(x), lv) {
                vec![(x, TRUE), (mgr.negate_ix(x), FALSE)]
            } else {
                vec![(TRUE, x)]
            };
            let elements = pairs
                .into_iter()
                .map(|(p, s)| Element {
                    prime: self.normalize(mgr, p, lv, memo),
                    sub: self.normalize(mgr, s, rv, memo),
                    theta: F::zero(),
                })
                .collect();
            PsddNode::Decision { vtree: v, elements }
        };
        let i = self.push(node, v);
        memo.insert((x, v), i);
        i
    }

    fn push(&mut self, node: PsddNode<F>, v: usize) -> usize {
        self.nodes.push(node);
        self.vtree_of.push(v);
        self.nodes.len() - 1
    }

    pub fn vtree(&self) -> &Vtree {
        &self.vtree
    }

    pub fn nodes(&self) -> &[PsddNode<F>] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Largest variable index in the vtree; queries take terms over `1..=var_count`.
    pub fn var_count(&self) -> u32 {
        self.vtree.vars().iter().map(|v| v.index()).max().unwrap_or(0)
    }

    /// Number of elements, counting a free variable as two.
    pub fn size(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                PsddNode::Decision { elements, .. } => elements.len(),
                PsddNode::Top { .. } => 2,
                _ => 0,
            })
            .sum()
    }

    fn is_possible(&self, e: &Element<F>) -> bool {
        !matches!(self.nodes[e.sub], PsddNode::False)
    }

    fn set_uniform(&mut self) {
        for i in 0..self.nodes.len() {
            self.set_local(i, &[], F::zero());
        }
    }

    /// Sets node `i`'s distribution from per-element counts plus `alpha`,
    /// falling back to uniform when nothing was counted.
    fn set_local(&mut self, i: usize, counts: &[f64], alpha: F) {
        let possible: Vec<bool> = match &self.nodes[i] {
            PsddNode::Decision { elements, .. } => elements.iter().map(|e| self.is_possible(e)).collect(),
            PsddNode::Top { .. } => vec![true, true],
            _ => return,
        };
        let k = possible.iter().filter(|&&b| b).count();
        let count = |j: usize| F::from_f64(counts.get(j).copied().unwrap_or(0.0)).expect("finite count");
        let total = (0..possible.len()).filter(|&j| possible[j]).fold(F::zero(), |acc, j| acc + count(j))
            + alpha * F::from_usize(k).expect("small");
        let share = |j: usize| {
            if !possible[j] {
                F::zero()
            } else if total > F::zero() {
                (count(j) + alpha) / total
            } else {
                F::one() / F::from_usize(k).expect("small")
            }
        };
        let thetas: Vec<F> = (0..possible.len()).map(share).collect();
        match &mut self.nodes[i] {
            PsddNode::Decision { elements, .. } => {
                for (e, t) in elements.iter_mut().zip(thetas) {
                    e.theta = t;
                }
            }
            PsddNode::Top { theta, .. } => *theta = thetas[0],
            _ => {}
        }
    }

    /// Maximum-likelihood parameters: the fraction of examples reaching a node
    /// that activate each of its elements, smoothed by `laplace`.
    pub fn learn_ml(mgr: &mut SddManager, base: Sdd, data: &Dataset, laplace: F) -> Result<Self> {
        let mut p = Psdd::from_sdd(mgr, base)?;
        p.fit(data, laplace)?;
        Ok(p)
    }

    /// Replaces all parameters by maximum-likelihood estimates from `data`.
    pub fn fit(&mut self, data: &Dataset, laplace: F) -> Result<()> {
        if !(laplace >= F::zero()) {
            return Err(Error::OutOfRange(format!("laplace {laplace:?}")));
        }
        let n = self.var_count();
        if data.var_count() < n {
            return Err(Error::InvalidModel(format!(
                "dataset has {} columns, circuit uses {n} variables",
                data.var_count()
            )));
        }
        let mut counts: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|node| match node {
                PsddNode::Decision { elements, .. } => vec![0.0; elements.len()],
                PsddNode::Top { .. } => vec![0.0; 2],
                _ => Vec::new(),
            })
            .collect();
        for (row, (values, mult)) in data.rows().iter().enumerate() {
            let sat = self.satisfied(values);
            if !sat[self.root()] {
                return Err(Error::FalsifyingRow { row: row + 1 });
            }
            let mut stack = vec![self.root()];
            while let Some(i) = stack.pop() {
                match &self.nodes[i] {
                    PsddNode::Decision { elements, .. } => {
                        let j = elements.iter().position(|e| sat[e.prime]).expect("primes are exhaustive");
                        counts[i][j] += *mult as f64;
                        stack.push(elements[j].prime);
                        stack.push(elements[j].sub);
                    }
                    PsddNode::Top { var, .. } => {
                        let j = if values[var.slot()] { 0 } else { 1 };
                        counts[i][j] += *mult as f64;
                    }
                    _ => {}
                }
            }
        }
        for (i, c) in counts.iter().enumerate() {
            self.set_local(i, c, laplace);
        }
        Ok(())
    }

    /// Which nodes' supports contain the complete assignment `values`.
    fn satisfied(&self, values: &[bool]) -> Vec<bool> {
        let mut sat = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let s = match node {
                PsddNode::False => false,
                PsddNode::Literal(l) => l.satisfied_by(values[l.var().slot()]),
                PsddNode::Top { .. } => true,
                PsddNode::Decision { elements, .. } => elements.iter().any(|e| sat[e.prime] && sat[e.sub]),
            };
            sat.push(s);
        }
        sat
    }

    /// Draws every parameter vector uniformly from its simplex.
    pub fn randomize(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..self.nodes.len() {
            let arity = match &self.nodes[i] {
                PsddNode::Decision { elements, .. } => elements.len(),
                PsddNode::Top { .. } => 2,
                _ => continue,
            };
            let draws: Vec<f64> = (0..arity).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            self.set_local(i, &draws, F::zero());
        }
    }

    /// Node values with `lit` valuing literals and `top` valuing free variables.
    fn upward(&self, lit: impl Fn(Lit) -> F, top: impl Fn(Var, F) -> F, max: bool) -> Vec<F> {
        let mut val: Vec<F> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                PsddNode::False => F::zero(),
                PsddNode::Literal(l) => lit(*l),
                PsddNode::Top { var, theta } => top(*var, *theta),
                PsddNode::Decision { elements, .. } => {
                    let terms = elements.iter().map(|e| e.theta * val[e.prime] * val[e.sub]);
                    if max {
                        terms.fold(F::zero(), |a, b| if b > a { b } else { a })
                    } else {
                        terms.fold(F::zero(), |a, b| a + b)
                    }
                }
            };
            val.push(v);
        }
        val
    }

    /// Probability of a complete assignment to the vtree's variables.
    pub fn probability(&self, x: &Term) -> Result<F> {
        for &v in self.vtree.vars() {
            if x.get(v).is_none() {
                return Err(Error::IncompleteAssignment(v));
            }
        }
        self.marginal(x)
    }

    /// Probability that the variables bound in `t` take those values.
    pub fn marginal(&self, t: &Term) -> Result<F> {
        let val = self.upward(
            |l| match t.get(l.var()) {
                Some(b) if !l.satisfied_by(b) => F::zero(),
                _ => F::one(),
            },
            |v, theta| match t.get(v) {
                Some(true) => theta,
                Some(false) => F::one() - theta,
                None => F::one(),
            },
            false,
        );
        Ok(val[self.root()])
    }

    /// Most probable completion of `evidence`; ties go to the lowest element.
    pub fn mpe(&self, evidence: &Term) -> Result<(Term, F)> {
        let lit = |l: Lit| match evidence.get(l.var()) {
            Some(b) if !l.satisfied_by(b) => F::zero(),
            _ => F::one(),
        };
        let top = |v: Var, theta: F| match evidence.get(v) {
            Some(true) => theta,
            Some(false) => F::one() - theta,
            None => theta.max(F::one() - theta),
        };
        let val = self.upward(lit, top, true);
        let best = val[self.root()];
        if !(best > F::zero()) {
            return Err(Error::ZeroProbabilityEvidence);
        }
        let mut term = Term::new();
        let mut stack = vec![self.root()];
        while let Some(i) = stack.pop() {
            match &self.nodes[i] {
                PsddNode::Literal(l) => term.set(l.var(), l.is_positive()),
                PsddNode::Top { var, theta } => {
                    let value = evidence.get(*var).unwrap_or(*theta >= F::one() - *theta);
                    term.set(*var, value);
                }
                PsddNode::Decision { elements, .. } => {
                    let mut pick = 0;
                    let mut pv = F::zero();
                    for (j, e) in elements.iter().enumerate() {
                        let v = e.theta * val[e.prime] * val[e.sub];
                        if v > pv {
                            pick = j;
                            pv = v;
                        }
                    }
                    stack.push(elements[pick].prime);
                    stack.push(elements[pick].sub);
                }
                PsddNode::False => {}
            }
        }
        Ok((term, best))
    }

    /// Independent top-down samples; identical seeds give identical datasets.
    pub fn sample(&self, seed: u64, count: usize) -> Dataset {
        let n = self.var_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Dataset::with_var_count(n);
        for _ in 0..count {
            let mut values = vec![false; n as usize];
            let mut stack = vec![self.root()];
            while let Some(i) = stack.pop() {
                match &self.nodes[i] {
                    PsddNode::Literal(l) => values[l.var().slot()] = l.is_positive(),
                    PsddNode::Top { var, theta } => {
                        values[var.slot()] = rng.gen::<f64>() < theta.to_f64().expect("finite");
                    }
                    PsddNode::Decision { elements, .. } => {
                        let r: f64 = rng.gen();
                        let mut acc = 0.0;
                        let mut pick = None;
                        for (j, e) in elements.iter().enumerate() {
                            let t = e.theta.to_f64().expect("finite");
                            if t <= 0.0 {
                                continue;
                            }
                            pick = Some(j);
                            acc += t;
                            if r < acc {
                                break;
                            }
                        }
                        let e = &elements[pick.expect("some element has positive probability")];
                        stack.push(e.prime);
                        stack.push(e.sub);
                    }
                    PsddNode::False => unreachable!("zero-probability elements are never sampled"),
                }
            }
            data.push(values, 1).expect("row width matches");
        }
        data
    }

    /// Σ multiplicity · ln Pr(row); a zero-probability row is an error.
    pub fn log_likelihood(&self, data: &Dataset) -> Result<F> {
        let mut ll = F::zero();
        for (row, (values, mult)) in data.rows().iter().enumerate() {
            let t = Term::from_values(values);
            let p = self.probability(&t)?;
            if !(p > F::zero()) {
                return Err(Error::ZeroProbabilityRow { row: row + 1 });
            }
            ll = ll + F::from_u64(*mult).expect("count fits") * p.ln();
        }
        Ok(ll)
    }

    /// Parameters proportional to model counts, giving the uniform distribution over models.
    pub fn set_uniform_over_models(&mut self) {
        let mut mc: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let c = match node {
                PsddNode::False => BigUint::zero(),
                PsddNode::Literal(_) => BigUint::from(1u32),
                PsddNode::Top { .. } => BigUint::from(2u32),
                PsddNode::Decision { elements, .. } => elements.iter().map(|e| &mc[e.prime] * &mc[e.sub]).sum(),
            };
            mc.push(c);
        }
        for i in 0..self.nodes.len() {
            let total = mc[i].clone();
            match &mut self.nodes[i] {
                PsddNode::Decision { elements, .. } => {
                    for e in elements.iter_mut() {
                        let share = BigRational::new((&mc[e.prime] * &mc[e.sub]).into(), total.clone().into());
                        e.theta = F::from_f64(share.to_f64().expect("ratio in [0,1]")).expect("finite");
                    }
                }
                PsddNode::Top { theta, .. } => *theta = F::from_f64(0.5).expect("finite"),
                _ => {}
            }
        }
    }
}

/// Uniform samples over the models of `cnf`.
pub fn sample_space_dataset(cnf: &Cnf, seed: u64, count: usize) -> Result<Dataset> {
    let vars: Vec<Var> = (1..=cnf.var_count()).map(Var::new).collect();
    let mut mgr = SddManager::new(Vtree::balanced(&vars)?);
    let base = mgr.compile_cnf(cnf, ClauseOrder::ByVtree)?;
    let mut p: Psdd<f64> = Psdd::from_sdd(&mut mgr, base)?;
    p.set_uniform_over_models();
    Ok(p.sample(seed, count))
}
