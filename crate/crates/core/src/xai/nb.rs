//! Naive Bayes classifiers with a posterior threshold, compiled exactly.
//!
//! All arithmetic is on rationals: a float in the model file stands for its
//! exact binary value, and strings such as `"3/10"` are also accepted.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{ite, DecisionFunction};
use crate::error::{Error, Result};
use crate::logic::{Term, Var};
use crate::sdd::{Ix, Sdd, SddManager, FALSE, TRUE};
use crate::vtree::Vtree;

const MAX_FEATURES: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn exact(&self, what: &str) -> Result<BigRational> {
        match self {
            Number::Float(f) => {
                BigRational::from_float(*f).ok_or_else(|| Error::InvalidModel(format!("{what} is not finite")))
            }
            Number::Text(s) => {
                let parsed = match s.split_once('/') {
                    Some((a, b)) => a.trim().parse::<BigInt>().ok().zip(b.trim().parse::<BigInt>().ok()),
                    None => s.trim().parse::<BigInt>().ok().map(|a| (a, BigInt::one())),
                };
                match parsed {
                    Some((_, d)) if d.is_zero() => Err(Error::InvalidModel(format!("{what} has zero denominator"))),
                    Some((n, d)) => Ok(BigRational::new(n, d)),
                    None => Err(Error::InvalidModel(format!("{what}: cannot read {s:?}"))),
                }
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureFile {
    name: String,
    pos_likelihood: Number,
    neg_likelihood: Number,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    prior: Number,
    threshold: Number,
    features: Vec<FeatureFile>,
    #[serde(default)]
    protected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbFeature {
    pub name: String,
    /// Pr(feature = true | positive class).
    pub pos: BigRational,
    /// Pr(feature = true | negative class).
    pub neg: BigRational,
}

/// Decides positive iff Pr(+ | x) ≥ threshold; ties are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    pub prior: BigRational,
    pub threshold: BigRational,
    pub features: Vec<NbFeature>,
    pub protected: Vec<String>,
}

/// A ratio of class likelihoods, possibly infinite.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Odds {
    Finite(BigRational),
    Infinite,
}

impl Odds {
    fn of(pos: &BigRational, neg: &BigRational) -> Option<Odds> {
        match (pos.is_zero(), neg.is_zero()) {
            (true, true) => None,
            (_, true) => Some(Odds::Infinite),
            _ => Some(Odds::Finite(pos / neg)),
        }
    }

    fn times(&self, other: &Odds) -> Odds {
        match (self, other) {
            (Odds::Finite(a), Odds::Finite(b)) => Odds::Finite(a * b),
            (Odds::Finite(a), Odds::Infinite) | (Odds::Infinite, Odds::Finite(a)) if a.is_zero() => {
                Odds::Finite(BigRational::zero())
            }
            _ => Odds::Infinite,
        }
    }

    fn at_least(&self, k: &BigRational) -> bool {
        match self {
            Odds::Finite(a) => a >= k,
            Odds::Infinite => true,
        }
    }

    fn at_least_odds(&self, other: &Odds) -> bool {
        match (self, other) {
            (Odds::Infinite, _) => true,
            (Odds::Finite(_), Odds::Infinite) => false,
            (Odds::Finite(a), Odds::Finite(b)) => a >= b,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Odds::Finite(a) if a.is_zero())
    }
}

fn complement(p: &BigRational) -> BigRational {
    BigRational::one() - p
}

impl NaiveBayes {
    pub fn new(prior: BigRational, threshold: BigRational, features: Vec<NbFeature>, protected: Vec<String>) -> Result<Self> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        if !(prior > zero && prior < one) {
            return Err(Error::InvalidModel(format!("prior {prior} outside (0,1)")));
        }
        if !(threshold > zero && threshold < one) {
            return Err(Error::InvalidModel(format!("threshold {threshold} outside (0,1)")));
        }
        for f in &features {
            for p in [&f.pos, &f.neg] {
                if *p < zero || *p > one {
                    return Err(Error::InvalidModel(format!("likelihood {p} of {:?} outside [0,1]", f.name)));
                }
            }
        }
        let nb = NaiveBayes { prior, threshold, features, protected };
        for p in &nb.protected {
            if nb.feature_var(p).is_none() {
                return Err(Error::InvalidModel(format!("unknown protected feature {p:?}")));
            }
        }
        Ok(nb)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        let features = f
            .features
            .iter()
            .map(|ff| {
                Ok(NbFeature {
                    name: ff.name.clone(),
                    pos: ff.pos_likelihood.exact("pos_likelihood")?,
                    neg: ff.neg_likelihood.exact("neg_likelihood")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        NaiveBayes::new(f.prior.exact("prior")?, f.threshold.exact("threshold")?, features, f.protected)
    }

    pub fn to_json(&self) -> String {
        let num = |r: &BigRational| Number::Text(r.to_string());
        let f = ModelFile {
            prior: num(&self.prior),
            threshold: num(&self.threshold),
            features: self
                .features
                .iter()
                .map(|x| FeatureFile { name: x.name.clone(), pos_likelihood: num(&x.pos), neg_likelihood: num(&x.neg) })
                .collect(),
            protected: self.protected.clone(),
        };
        serde_json::to_string_pretty(&f).expect("model serializes")
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn feature_var(&self, name: &str) -> Option<Var> {
        self.features.iter().position(|f| f.name == name).map(|i| Var::new(i as u32 + 1))
    }

    pub fn protected_vars(&self) -> Vec<Var> {
        self.protected.iter().filter_map(|p| self.feature_var(p)).collect()
    }

    /// Class likelihood ratio contributed by feature `i` taking `value`.
    fn odds(&self, i: usize, value: bool) -> Option<Odds> {
        let f = &self.features[i];
        if value {
            Odds::of(&f.pos, &f.neg)
        } else {
            Odds::of(&complement(&f.pos), &complement(&f.neg))
        }
    }

    /// Likelihood ratio the product of per-feature odds must reach.
    fn critical_odds(&self) -> BigRational {
        (&self.threshold * complement(&self.prior)) / (&self.prior * complement(&self.threshold))
    }

    /// Exact posterior-threshold decision; values[i] is feature i.
    pub fn decide(&self, values: &[bool]) -> Result<bool> {
        if values.len() != self.features.len() {
            return Err(Error::InvalidModel(format!("instance has {} values for {} features", values.len(), self.features.len())));
        }
        let mut pos = self.prior.clone();
        let mut neg = complement(&self.prior);
        for (f, &v) in self.features.iter().zip(values) {
            if v {
                pos *= &f.pos;
                neg *= &f.neg;
            } else {
                pos *= complement(&f.pos);
                neg *= complement(&f.neg);
            }
        }
        if pos.is_zero() && neg.is_zero() {
            return Err(Error::InvalidModel("instance has zero likelihood under both classes".into()));
        }
        Ok(pos * complement(&self.threshold) >= neg * &self.threshold)
    }

    pub fn decide_term(&self, x: &Term) -> Result<bool> {
        self.decide(&x.to_values(self.features.len() as u32)?)
    }

    /// Some instance would be impossible under both classes.
    fn has_dead_instance(&self) -> bool {
        let zero_under = |i: usize, v: bool, positive: bool| {
            let f = &self.features[i];
            let p = if positive { &f.pos } else { &f.neg };
            if v {
                p.is_zero()
            } else {
                complement(p).is_zero()
            }
        };
        let n = self.features.len();
        let kills_pos: Vec<(usize, bool)> =
            (0..n).flat_map(|i| [(i, true), (i, false)]).filter(|&(i, v)| zero_under(i, v, true)).collect();
        let kills_neg: Vec<(usize, bool)> =
            (0..n).flat_map(|i| [(i, true), (i, false)]).filter(|&(i, v)| zero_under(i, v, false)).collect();
        kills_pos.iter().any(|&(i, v)| kills_neg.iter().any(|&(j, w)| i != j || v == w))
    }

    /// OBDD of the decision, testing features in `order` (indices into `features`).
    pub fn compile(&self, order: &[usize]) -> Result<DecisionFunction> {
        let vars: Vec<Var> = order.iter().map(|&i| Var::new(i as u32 + 1)).collect();
        if self.features.is_empty() {
            return Err(Error::InvalidModel("model has no features".into()));
        }
        let mut mgr = SddManager::new(Vtree::right_linear(&vars)?);
        let root = self.compile_in(&mut mgr, order)?;
        DecisionFunction::new(mgr, root, self.names())
    }

    /// Compiles into an existing manager whose vtree is right-linear over `order`.
    pub fn compile_in(&self, mgr: &mut SddManager, order: &[usize]) -> Result<Sdd> {
        let n = self.features.len();
        if n > MAX_FEATURES {
            return Err(Error::TooManyVariables { what: "naive Bayes compilation", limit: MAX_FEATURES as u32, actual: n as u32 });
        }
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidModel("feature order must be a permutation".into()));
        }
        let expected: Vec<Var> = order.iter().map(|&i| Var::new(i as u32 + 1)).collect();
        if !mgr.vtree().is_right_linear() || mgr.vtree().vars() != expected.as_slice() {
            return Err(Error::NotObdd);
        }
        if self.has_dead_instance() {
            return Err(Error::InvalidModel("some instance has zero likelihood under both classes".into()));
        }
        let odds: Vec<[Odds; 2]> = order
            .iter()
            .map(|&i| [self.odds(i, false).expect("no dead values"), self.odds(i, true).expect("no dead values")])
            .collect();
        let mut suffix_min = vec![Odds::Finite(BigRational::one()); n + 1];
        let mut suffix_max = vec![Odds::Finite(BigRational::one()); n + 1];
        for d in (0..n).rev() {
            let [a, b] = &odds[d];
            let (lo, hi) = if b.at_least_odds(a) { (a, b) } else { (b, a) };
            suffix_min[d] = suffix_min[d + 1].times(lo);
            suffix_max[d] = suffix_max[d + 1].times(hi);
        }
        let ctx = Ctx { order, odds, suffix_min, suffix_max, k: self.critical_odds() };
        let mut memo = HashMap::new();
        let start = Odds::Finite(BigRational::one());
        let r = build(mgr, &ctx, 0, &start, &mut memo);
        Ok(mgr.wrap(r))
    }
}

struct Ctx<'a> {
    order: &'a [usize],
    odds: Vec<[Odds; 2]>,
    suffix_min: Vec<Odds>,
    suffix_max: Vec<Odds>,
    k: BigRational,
}

fn build(mgr: &mut SddManager, ctx: &Ctx<'_>, depth: usize, r: &Odds, memo: &mut HashMap<(usize, Odds), Ix>) -> Ix {
    if *r == Odds::Infinite {
        return TRUE;
    }
    if r.is_zero() {
        return FALSE;
    }
    if r.times(&ctx.suffix_min[depth]).at_least(&ctx.k) {
        return TRUE;
    }
    if !r.times(&ctx.suffix_max[depth]).at_least(&ctx.k) {
        return FALSE;
    }
    if let Some(&x) = memo.get(&(depth, r.clone())) {
        return x;
    }
    let hi = build(mgr, ctx, depth + 1, &r.times(&ctx.odds[depth][1]), memo);
    let lo = build(mgr, ctx, depth + 1, &r.times(&ctx.odds[depth][0]), memo);
    let x = ite(mgr, Var::new(ctx.order[depth] as u32 + 1), hi, lo);
    memo.insert((depth, r.clone()), x);
    x
}
