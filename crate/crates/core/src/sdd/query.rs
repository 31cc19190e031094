use std::collections::HashMap;

use num_bigint::BigUint;

use super::{Ix, Kind, Sdd, SddManager, FALSE, TRUE};
use crate::error::{Error, Result};
use crate::logic::{Lit, Term, Var, WeightMap};
use crate::nnf::{NnfBuilder, NnfCircuit};
use crate::scalar::Weight;

/// Per-variable combination for variables a node does not mention.
struct Gaps<'a, W> {
    per_var: Vec<W>,
    memo: HashMap<(usize, usize), W>,
    mgr: &'a SddManager,
}

impl<'a, W: Weight> Gaps<'a, W> {
    fn new(mgr: &'a SddManager, per_var: impl Fn(Var) -> W) -> Self {
        let per_var = mgr.vtree.vars().iter().map(|&v| per_var(v)).collect();
        Gaps { per_var, memo: HashMap::new(), mgr }
    }

    /// Product over variables under `outer` that are not under `inner`.
    fn between(&mut self, outer: usize, inner: Option<usize>) -> W {
        let key = (outer, inner.unwrap_or(usize::MAX));
        if let Some(w) = self.memo.get(&key) {
            return w.clone();
        }
        let vt = &self.mgr.vtree;
        let (lo, hi) = vt.var_range(outer);
        let (skip_lo, skip_hi) = match inner {
            Some(i) => vt.var_range(i),
            None => (usize::MAX, usize::MAX),
        };
        let mut acc = W::one();
        for k in lo..=hi {
            if inner.is_some() && k >= skip_lo && k <= skip_hi {
                continue;
            }
            acc = acc * self.per_var[k].clone();
        }
        self.memo.insert(key, acc.clone());
        acc
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Sum,
    Max,
}

impl SddManager {
    /// Models over all vtree variables.
    pub fn model_count(&self, a: Sdd) -> Result<BigUint> {
        let a = self.ix(a)?;
        let mut gaps = Gaps::new(self, |_| BigUint::from(2u32));
        let val = self.fold(a, &mut gaps, |_| Mode::Sum, &|_| BigUint::from(1u32));
        Ok(self.over(a, self.vtree.root(), &val, &mut gaps))
    }

    /// Weighted model count over all vtree variables.
    pub fn wmc<W: Weight>(&self, a: Sdd, w: &WeightMap<W>) -> Result<W> {
        let a = self.ix(a)?;
        let mut gaps = Gaps::new(self, |v| w.var_sum(v));
        let val = self.fold(a, &mut gaps, |_| Mode::Sum, &|l| w.get(l));
        Ok(self.over(a, self.vtree.root(), &val, &mut gaps))
    }

    fn fold<W: Weight>(
        &self,
        a: Ix,
        gaps: &mut Gaps<'_, W>,
        mode: impl Fn(usize) -> Mode,
        lit: &dyn Fn(Lit) -> W,
    ) -> HashMap<Ix, W> {
        let mut val: HashMap<Ix, W> = HashMap::new();
        for x in self.reachable(a) {
            let value = match self.kind(x) {
                Kind::False => W::zero(),
                Kind::True => W::one(),
                Kind::Literal(l) => lit(*l),
                Kind::Decision(els) => {
                    let v = self.vnode(x);
                    let (lv, rv) = (self.vtree.left(v), self.vtree.right(v));
                    let m = mode(v);
                    let mut acc: Option<W> = None;
                    for &(p, s) in els.iter() {
                        let e = self.over(p, lv, &val, gaps) * self.over(s, rv, &val, gaps);
                        acc = Some(match (acc, m) {
                            (None, _) => e,
                            (Some(t), Mode::Sum) => t + e,
                            (Some(t), Mode::Max) => t.max_of(e),
                        });
                    }
                    acc.unwrap_or_else(W::zero)
                }
            };
            val.insert(x, value);
        }
        val
    }

    fn over<W: Weight>(&self, x: Ix, u: usize, val: &HashMap<Ix, W>, gaps: &mut Gaps<'_, W>) -> W {
        match x {
            FALSE => W::zero(),
            TRUE => gaps.between(u, None),
            _ => val[&x].clone() * gaps.between(u, Some(self.vnode(x))),
        }
    }

    /// Value of `a` under an assignment to every variable it mentions.
    pub fn evaluate(&self, a: Sdd, t: &Term) -> Result<bool> {
        let a = self.ix(a)?;
        let mut memo = HashMap::new();
        self.eval_ix(a, t, &mut memo)
    }

    fn eval_ix(&self, a: Ix, t: &Term, memo: &mut HashMap<Ix, bool>) -> Result<bool> {
        if let Some(&b) = memo.get(&a) {
            return Ok(b);
        }
        let r = match self.kind(a) {
            Kind::False => false,
            Kind::True => true,
            Kind::Literal(l) => l.satisfied_by(t.get(l.var()).ok_or(Error::IncompleteAssignment(l.var()))?),
            Kind::Decision(els) => {
                let mut r = false;
                for &(p, s) in els.iter() {
                    if self.eval_ix(p, t, memo)? {
                        r = self.eval_ix(s, t, memo)?;
                        break;
                    }
                }
                r
            }
        };
        memo.insert(a, r);
        Ok(r)
    }

    /// Total element count over distinct decision nodes below `a`.
    pub fn size(&self, a: Sdd) -> Result<usize> {
        let a = self.ix(a)?;
        Ok(self
            .reachable(a)
            .into_iter()
            .map(|x| match self.kind(x) {
                Kind::Decision(els) => els.len(),
                _ => 0,
            })
            .sum())
    }

    /// Distinct decision nodes below `a`.
    pub fn node_count(&self, a: Sdd) -> Result<usize> {
        let a = self.ix(a)?;
        Ok(self.reachable(a).into_iter().filter(|&x| matches!(self.kind(x), Kind::Decision(_))).count())
    }

    /// Deterministic, decomposable NNF with one or-gate per decision node.
    pub fn to_nnf(&self, a: Sdd) -> Result<NnfCircuit> {
        let a = self.ix(a)?;
        let var_count = self.vtree.vars().iter().map(|v| v.index()).max().unwrap_or(0);
        let mut b = NnfBuilder::new(var_count);
        let mut map: HashMap<Ix, usize> = HashMap::new();
        for x in self.reachable(a) {
            let id = match self.kind(x) {
                Kind::False => b.constant(false),
                Kind::True => b.constant(true),
                Kind::Literal(l) => b.lit(*l),
                Kind::Decision(els) => {
                    let mut children = Vec::with_capacity(els.len());
                    for &(p, s) in els.iter() {
                        if s == FALSE {
                            continue;
                        }
                        if s == TRUE {
                            children.push(map[&p]);
                        } else {
                            children.push(b.and(vec![map[&p], map[&s]]));
                        }
                    }
                    b.or(children)
                }
            };
            map.insert(x, id);
        }
        Ok(b.finish(map[&a]))
    }

    /// Maximizes over `y` the weighted count over the remaining variables.
    ///
    /// Requires a vtree node whose variables are exactly the others. With `y`
    /// empty this is the weighted model count, with `y` covering every variable
    /// it is the most probable explanation.
    pub fn map_emajsat<W: Weight>(&self, a: Sdd, w: &WeightMap<W>, y: &[Var]) -> Result<(Term, W)> {
        let a = self.ix(a)?;
        for &v in y {
            if self.vtree.leaf_of(v).is_none() {
                return Err(Error::UnknownVariable(v));
            }
        }
        let in_y: std::collections::HashSet<Var> = y.iter().copied().collect();
        let z: Vec<Var> = self.vtree.vars().iter().copied().filter(|v| !in_y.contains(v)).collect();
        if y.is_empty() {
            return Ok((Term::new(), self.wmc(self.wrap(a), w)?));
        }
        let sum_root = if z.is_empty() {
            None
        } else {
            Some(self.vtree.constrained_node(&z).ok_or(Error::NotConstrained)?)
        };
        let mode = |v: usize| match sum_root {
            Some(u) if self.vtree.is_sub(v, u) => Mode::Sum,
            _ => Mode::Max,
        };
        let gap = |v: Var| if in_y.contains(&v) { w.get(Lit::pos(v)).max_of(w.get(Lit::neg(v))) } else { w.var_sum(v) };
        let mut gaps = Gaps::new(self, gap);

        let root = self.vtree.root();
        let val = self.fold(a, &mut gaps, &mode, &|l| w.get(l));
        let best = self.over(a, root, &val, &mut gaps);

        let mut term = Term::new();
        let mut stack = vec![(a, root)];
        while let Some((x, u)) = stack.pop() {
            let inner = if x == TRUE || x == FALSE { None } else { Some(self.vnode(x)) };
            for &v in self.vtree.vars_under(u) {
                let covered = inner.is_some_and(|i| self.vtree.vars_under(i).contains(&v));
                if !covered && in_y.contains(&v) {
                    term.set(v, w.get(Lit::pos(v)) >= w.get(Lit::neg(v)));
                }
            }
            let Some(v) = inner else { continue };
            match self.kind(x) {
                Kind::Literal(l) => {
                    if in_y.contains(&l.var()) {
                        term.set(l.var(), l.is_positive());
                    }
                }
                Kind::Decision(els) if mode(v) == Mode::Max => {
                    let (lv, rv) = (self.vtree.left(v), self.vtree.right(v));
                    let mut pick: Option<(usize, W)> = None;
                    for (i, &(p, s)) in els.iter().enumerate() {
                        let e = self.over(p, lv, &val, &mut gaps) * self.over(s, rv, &val, &mut gaps);
                        if pick.as_ref().is_none_or(|(_, b)| e > *b) {
                            pick = Some((i, e));
                        }
                    }
                    let (p, s) = els[pick.map_or(0, |(i, _)| i)];
                    stack.push((s, rv));
                    stack.push((p, lv));
                }
                _ => {}
            }
        }
        Ok((term, best))
    }
}
