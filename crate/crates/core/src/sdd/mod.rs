//! Sentential decision diagrams compiled bottom-up over a fixed vtree.
//!
//! Every node is kept compressed (distinct subs) and trimmed, and stored in a
//! unique table, so equivalent functions share one node id. Nodes are never
//! collected; a manager only grows.

mod io;
mod query;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::{Error, Result};
use crate::logic::{Cnf, Lit, Term, Var};
use crate::vtree::Vtree;

pub(crate) type Ix = u32;
pub(crate) const FALSE: Ix = 0;
pub(crate) const TRUE: Ix = 1;
const NO_VTREE: usize = usize::MAX;

static NEXT_MANAGER: AtomicU32 = AtomicU32::new(1);

/// Handle to a node of one particular manager.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sdd {
    mgr: u32,
    ix: Ix,
}

impl Sdd {
    /// Position in the manager's node arena; stable for the manager's lifetime.
    pub fn id(self) -> u32 {
        self.ix
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Conjoin,
    Disjoin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClauseOrder {
    /// As listed in the formula.
    Given,
    /// Deepest clauses (by the vtree node covering their variables) first.
    #[default]
    ByVtree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Kind {
    False,
    True,
    Literal(Lit),
    Decision(Box<[(Ix, Ix)]>),
}

/// Read-only view of a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SddView {
    False,
    True,
    Literal(Lit),
    Decision { vtree: usize, elements: Vec<(Sdd, Sdd)> },
}

#[derive(Debug, Clone)]
struct Node {
    kind: Kind,
    vtree: usize,
}

#[derive(Debug, Clone)]
pub struct SddManager {
    id: u32,
    vtree: Vtree,
    nodes: Vec<Node>,
    unique: HashMap<(usize, Box<[(Ix, Ix)]>), Ix>,
    literals: HashMap<Lit, Ix>,
    apply_cache: HashMap<(Op, Ix, Ix), Ix>,
    negations: HashMap<Ix, Ix>,
}

impl SddManager {
    pub fn new(vtree: Vtree) -> Self {
        let mut m = SddManager {
            id: NEXT_MANAGER.fetch_add(1, Ordering::Relaxed),
            vtree,
            nodes: vec![
                Node { kind: Kind::False, vtree: NO_VTREE },
                Node { kind: Kind::True, vtree: NO_VTREE },
            ],
            unique: HashMap::new(),
            literals: HashMap::new(),
            apply_cache: HashMap::new(),
            negations: HashMap::from([(FALSE, TRUE), (TRUE, FALSE)]),
        };
        for v in m.vtree.vars().to_vec() {
            let leaf = m.vtree.leaf_of(v).expect("vtree variable has a leaf");
            let p = m.push(Kind::Literal(Lit::pos(v)), leaf);
            let n = m.push(Kind::Literal(Lit::neg(v)), leaf);
            m.literals.insert(Lit::pos(v), p);
            m.literals.insert(Lit::neg(v), n);
            m.negations.insert(p, n);
            m.negations.insert(n, p);
        }
        m
    }

    fn push(&mut self, kind: Kind, vtree: usize) -> Ix {
        self.nodes.push(Node { kind, vtree });
        (self.nodes.len() - 1) as Ix
    }

    pub fn vtree(&self) -> &Vtree {
        &self.vtree
    }

    /// Nodes allocated so far, including dead ones.
    pub fn allocated(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn wrap(&self, ix: Ix) -> Sdd {
        Sdd { mgr: self.id, ix }
    }

    pub(crate) fn ix(&self, a: Sdd) -> Result<Ix> {
        if a.mgr != self.id {
            return Err(Error::ManagerMismatch);
        }
        Ok(a.ix)
    }

    pub(crate) fn kind(&self, a: Ix) -> &Kind {
        &self.nodes[a as usize].kind
    }

    /// Vtree node a non-constant node is normalized for.
    pub(crate) fn vnode(&self, a: Ix) -> usize {
        self.nodes[a as usize].vtree
    }

    pub fn view(&self, a: Sdd) -> Result<SddView> {
        let ix = self.ix(a)?;
        Ok(match self.kind(ix) {
            Kind::False => SddView::False,
            Kind::True => SddView::True,
            Kind::Literal(l) => SddView::Literal(*l),
            Kind::Decision(els) => SddView::Decision {
                vtree: self.vnode(ix),
                elements: els.iter().map(|&(p, s)| (self.wrap(p), self.wrap(s))).collect(),
            },
        })
    }

    pub fn constant(&self, value: bool) -> Sdd {
        self.wrap(if value { TRUE } else { FALSE })
    }

    pub fn literal(&self, lit: Lit) -> Result<Sdd> {
        self.lit_ix(lit).map(|ix| self.wrap(ix))
    }

    pub(crate) fn lit_ix(&self, lit: Lit) -> Result<Ix> {
        self.literals.get(&lit).copied().ok_or(Error::UnknownVariable(lit.var()))
    }

    pub fn is_true(&self, a: Sdd) -> bool {
        a.ix == TRUE && a.mgr == self.id
    }

    pub fn is_false(&self, a: Sdd) -> bool {
        a.ix == FALSE && a.mgr == self.id
    }

    pub fn apply(&mut self, a: Sdd, b: Sdd, op: Op) -> Result<Sdd> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        let r = self.apply_ix(a, b, op);
        Ok(self.wrap(r))
    }

    pub fn conjoin(&mut self, a: Sdd, b: Sdd) -> Result<Sdd> {
        self.apply(a, b, Op::Conjoin)
    }

    pub fn disjoin(&mut self, a: Sdd, b: Sdd) -> Result<Sdd> {
        self.apply(a, b, Op::Disjoin)
    }

    pub fn negate(&mut self, a: Sdd) -> Result<Sdd> {
        let a = self.ix(a)?;
        let r = self.negate_ix(a);
        Ok(self.wrap(r))
    }

    pub(crate) fn and(&mut self, a: Ix, b: Ix) -> Ix {
        self.apply_ix(a, b, Op::Conjoin)
    }

    pub(crate) fn or(&mut self, a: Ix, b: Ix) -> Ix {
        self.apply_ix(a, b, Op::Disjoin)
    }

    pub(crate) fn apply_ix(&mut self, a: Ix, b: Ix, op: Op) -> Ix {
        let (absorb, unit) = match op {
            Op::Conjoin => (FALSE, TRUE),
            Op::Disjoin => (TRUE, FALSE),
        };
        if a == absorb || b == absorb {
            return absorb;
        }
        if a == unit || a == b {
            return b;
        }
        if b == unit {
            return a;
        }
        if self.negations.get(&a) == Some(&b) {
            return absorb;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if let Some(&r) = self.apply_cache.get(&(op, a, b)) {
            return r;
        }

        let (va, vb) = (self.vnode(a), self.vnode(b));
        let w = if va == vb {
            va
        } else if self.vtree.is_sub(va, vb) {
            vb
        } else if self.vtree.is_sub(vb, va) {
            va
        } else {
            self.vtree.lca(va, vb)
        };
        // Two distinct literals on one leaf are complementary, caught above.
        debug_assert!(!self.vtree.is_leaf(w));

        let ea = self.elements_at(a, w);
        let eb = self.elements_at(b, w);
        let mut elements = Vec::with_capacity(ea.len() * eb.len());
        for &(p, s) in ea.iter() {
            for &(q, t) in eb.iter() {
                let pq = self.and(p, q);
                if pq == FALSE {
                    continue;
                }
                let st = self.apply_ix(s, t, op);
                elements.push((pq, st));
            }
        }
        let r = self.make_decision(w, elements);
        self.apply_cache.insert((op, a, b), r);
        r
    }

    /// Elements of `a` viewed as a decision for internal vtree node `w` above or at its own.
    fn elements_at(&mut self, a: Ix, w: usize) -> Vec<(Ix, Ix)> {
        let v = self.vnode(a);
        if v == w {
            match self.kind(a) {
                Kind::Decision(els) => els.to_vec(),
                _ => unreachable!("only decision nodes are normalized for internal vtree nodes"),
            }
        } else if self.vtree.is_sub(v, self.vtree.left(w)) {
            let na = self.negate_ix(a);
            vec![(a, TRUE), (na, FALSE)]
        } else {
            vec![(TRUE, a)]
        }
    }

    /// Compresses, trims and uniques a decision for vtree node `w`.
    pub(crate) fn make_decision(&mut self, w: usize, elements: Vec<(Ix, Ix)>) -> Ix {
        let mut by_sub: Vec<(Ix, Ix)> = Vec::with_capacity(elements.len());
        let mut slot: HashMap<Ix, usize> = HashMap::with_capacity(elements.len());
        for (p, s) in elements {
            if p == FALSE {
                continue;
            }
            match slot.get(&s) {
                Some(&i) => {
                    let merged = self.or(by_sub[i].0, p);
                    by_sub[i].0 = merged;
                }
                None => {
                    slot.insert(s, by_sub.len());
                    by_sub.push((p, s));
                }
            }
        }
        match by_sub.as_slice() {
            [] => return FALSE,
            [(_, s)] => return *s,
            [(p, TRUE), (_, FALSE)] | [(_, FALSE), (p, TRUE)] => return *p,
            _ => {}
        }
        by_sub.sort_unstable();
        let key = (w, by_sub.into_boxed_slice());
        if let Some(&r) = self.unique.get(&key) {
            return r;
        }
        let r = self.push(Kind::Decision(key.1.clone()), w);
        self.unique.insert(key, r);
        r
    }

    pub(crate) fn negate_ix(&mut self, a: Ix) -> Ix {
        if let Some(&n) = self.negations.get(&a) {
            return n;
        }
        let Kind::Decision(els) = self.kind(a).clone() else {
            unreachable!("constants and literals have cached negations")
        };
        let w = self.vnode(a);
        let negated: Vec<(Ix, Ix)> = els.iter().map(|&(p, s)| (p, self.negate_ix(s))).collect();
        let n = self.make_decision(w, negated);
        self.negations.insert(a, n);
        self.negations.insert(n, a);
        n
    }

    /// Fixes the variables bound in `t`; the result no longer depends on them.
    pub fn condition(&mut self, a: Sdd, t: &Term) -> Result<Sdd> {
        let a = self.ix(a)?;
        let r = self.condition_ix(a, t);
        Ok(self.wrap(r))
    }

    pub(crate) fn condition_ix(&mut self, a: Ix, t: &Term) -> Ix {
        if t.is_empty() {
            return a;
        }
        let touched = self.touched_vtree_nodes(t);
        let mut memo = HashMap::new();
        self.condition_rec(a, t, &touched, &mut memo)
    }

    fn touched_vtree_nodes(&self, t: &Term) -> Vec<bool> {
        let mut touched = vec![false; self.vtree.len()];
        for v in t.vars() {
            let mut node = self.vtree.leaf_of(v);
            while let Some(n) = node {
                if touched[n] {
                    break;
                }
                touched[n] = true;
                node = self.vtree.parent(n);
            }
        }
        touched
    }

    fn condition_rec(&mut self, a: Ix, t: &Term, touched: &[bool], memo: &mut HashMap<Ix, Ix>) -> Ix {
        if a == TRUE || a == FALSE || !touched[self.vnode(a)] {
            return a;
        }
        if let Some(&r) = memo.get(&a) {
            return r;
        }
        let r = match self.kind(a).clone() {
            Kind::Literal(l) => match t.get(l.var()) {
                Some(b) if l.satisfied_by(b) => TRUE,
                Some(_) => FALSE,
                None => a,
            },
            Kind::Decision(els) => {
                let mut acc = FALSE;
                for &(p, s) in els.iter() {
                    let cp = self.condition_rec(p, t, touched, memo);
                    if cp == FALSE {
                        continue;
                    }
                    let cs = self.condition_rec(s, t, touched, memo);
                    let e = self.and(cp, cs);
                    acc = self.or(acc, e);
                }
                acc
            }
            _ => a,
        };
        memo.insert(a, r);
        r
    }

    pub fn compile_cnf(&mut self, cnf: &Cnf, order: ClauseOrder) -> Result<Sdd> {
        let mut clauses: Vec<Ix> = Vec::with_capacity(cnf.clauses().len());
        let mut keys: Vec<(u32, usize)> = Vec::with_capacity(cnf.clauses().len());
        for clause in cnf.clauses() {
            let mut c = FALSE;
            let mut node: Option<usize> = None;
            for &l in clause {
                let li = self.lit_ix(l)?;
                c = self.or(c, li);
                let leaf = self.vnode(li);
                node = Some(node.map_or(leaf, |n| self.vtree.lca(n, leaf)));
            }
            let depth = node.map_or(0, |n| self.vtree.node_depth(n));
            keys.push((u32::MAX - depth, node.unwrap_or(0)));
            clauses.push(c);
        }
        let mut idx: Vec<usize> = (0..clauses.len()).collect();
        if order == ClauseOrder::ByVtree {
            idx.sort_by_key(|&i| keys[i]);
        }
        let mut acc = TRUE;
        for i in idx {
            acc = self.and(acc, clauses[i]);
            if acc == FALSE {
                break;
            }
        }
        Ok(self.wrap(acc))
    }

    /// Conjunction of a term's literals.
    pub fn term(&mut self, t: &Term) -> Result<Sdd> {
        let mut acc = TRUE;
        for l in t.lits() {
            let li = self.lit_ix(l)?;
            acc = self.and(acc, li);
        }
        Ok(self.wrap(acc))
    }

    /// Checks structured decomposability, prime partitioning and compression below `a`.
    pub fn check_invariants(&mut self, a: Sdd) -> std::result::Result<(), String> {
        let root = self.ix(a).map_err(|e| e.to_string())?;
        for x in self.reachable(root) {
            let Kind::Decision(els) = self.kind(x).clone() else { continue };
            let v = self.vnode(x);
            let (l, r) = (self.vtree.left(v), self.vtree.right(v));
            let mut cover = FALSE;
            for (i, &(p, s)) in els.iter().enumerate() {
                if p == FALSE {
                    return Err(format!("node {x}: false prime"));
                }
                if !(p == TRUE || self.vtree.is_sub(self.vnode(p), l)) {
                    return Err(format!("node {x}: prime {p} outside left subtree"));
                }
                if !(s == TRUE || s == FALSE || self.vtree.is_sub(self.vnode(s), r)) {
                    return Err(format!("node {x}: sub {s} outside right subtree"));
                }
                for &(q, t) in &els[i + 1..] {
                    if self.and(p, q) != FALSE {
                        return Err(format!("node {x}: primes {p} and {q} overlap"));
                    }
                    if s == t {
                        return Err(format!("node {x}: repeated sub {s}"));
                    }
                }
                cover = self.or(cover, p);
            }
            if cover != TRUE {
                return Err(format!("node {x}: primes not exhaustive"));
            }
        }
        Ok(())
    }

    /// Nodes reachable from `a`, children before parents.
    pub(crate) fn reachable(&self, a: Ix) -> Vec<Ix> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![(a, false)];
        while let Some((x, done)) = stack.pop() {
            if done {
                out.push(x);
                continue;
            }
            if !seen.insert(x) {
                continue;
            }
            stack.push((x, true));
            if let Kind::Decision(els) = self.kind(x) {
                for &(p, s) in els.iter().rev() {
                    stack.push((s, false));
                    stack.push((p, false));
                }
            }
        }
        out
    }

    /// Variables `a` depends on, ascending.
    pub fn support(&self, a: Sdd) -> Result<Vec<Var>> {
        let root = self.ix(a)?;
        let mut vars: Vec<Var> = self
            .reachable(root)
            .into_iter()
            .filter_map(|x| match self.kind(x) {
                Kind::Literal(l) => Some(l.var()),
                _ => None,
            })
            .collect();
        vars.sort_unstable();
        vars.dedup();
        Ok(vars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    fn mgr(n: u32) -> SddManager {
        let vars: Vec<Var> = (1..=n).map(v).collect();
        SddManager::new(Vtree::balanced(&vars).unwrap())
    }

    #[test]
    fn literals_are_canonical() {
        let m = mgr(3);
        let a1 = m.literal(Lit::pos(v(1))).unwrap();
        let a2 = m.literal(Lit::pos(v(1))).unwrap();
        assert_eq!(a1, a2);
        assert!(matches!(m.literal(Lit::pos(v(9))), Err(Error::UnknownVariable(_))));
        assert_eq!(m.support(a1).unwrap(), vec![v(1)]);
    }

    #[test]
    fn constants_are_units() {
        let mut m = mgr(3);
        let a = m.literal(Lit::pos(v(2))).unwrap();
        let t = m.constant(true);
        assert_eq!(m.conjoin(t, a).unwrap(), a);
        let f = m.constant(false);
        assert_eq!(m.disjoin(f, a).unwrap(), a);
    }

    #[test]
    fn complementary_literals() {
        let mut m = mgr(2);
        let a = m.literal(Lit::pos(v(1))).unwrap();
        let na = m.literal(Lit::neg(v(1))).unwrap();
        let r = m.conjoin(a, na).unwrap();
        assert!(m.is_false(r));
        let r = m.disjoin(a, na).unwrap();
        assert!(m.is_true(r));
    }

    #[test]
    fn manager_mismatch() {
        let mut m1 = mgr(2);
        let m2 = mgr(2);
        let a = m2.literal(Lit::pos(v(1))).unwrap();
        let b = m1.literal(Lit::pos(v(2))).unwrap();
        assert!(matches!(m1.conjoin(a, b), Err(Error::ManagerMismatch)));
    }

    #[test]
    fn negation_is_involutive() {
        let mut m = mgr(4);
        let a = m.literal(Lit::pos(v(1))).unwrap();
        let b = m.literal(Lit::neg(v(3))).unwrap();
        let c = m.literal(Lit::pos(v(4))).unwrap();
        let ab = m.conjoin(a, b).unwrap();
        let f = m.disjoin(ab, c).unwrap();
        let nf = m.negate(f).unwrap();
        assert_eq!(m.negate(nf).unwrap(), f);
        let r = m.conjoin(f, nf).unwrap();
        assert!(m.is_false(r));
        let r = m.disjoin(f, nf).unwrap();
        assert!(m.is_true(r));
        let t = m.constant(true);
        let r = m.negate(t).unwrap();
        assert!(m.is_false(r));
    }

    #[test]
    fn condition_on_conjunction() {
        let mut m = mgr(3);
        let a = m.literal(Lit::pos(v(1))).unwrap();
        let b = m.literal(Lit::pos(v(2))).unwrap();
        let ab = m.conjoin(a, b).unwrap();
        let t = Term::from_lits([Lit::pos(v(1))]).unwrap();
        assert_eq!(m.condition(ab, &t).unwrap(), b);
        let full = Term::from_lits([Lit::pos(v(1)), Lit::pos(v(2))]).unwrap();
        let r = m.condition(ab, &full).unwrap();
        assert!(m.is_true(r));
    }

    #[test]
    fn invariants_hold_after_apply() {
        let mut m = mgr(5);
        let mut f = m.constant(false);
        for (x, y) in [(1, -2), (2, 3), (-4, 5), (1, 5), (-3, -5)] {
            let a = m.literal(Lit::from_dimacs(x)).unwrap();
            let b = m.literal(Lit::from_dimacs(y)).unwrap();
            let ab = m.conjoin(a, b).unwrap();
            f = m.disjoin(f, ab).unwrap();
        }
        m.check_invariants(f).unwrap();
        let nf = m.negate(f).unwrap();
        m.check_invariants(nf).unwrap();
    }

    #[test]
    fn empty_cnf_compiles_to_true() {
        let mut m = mgr(2);
        let r = m.compile_cnf(&Cnf::new(2), ClauseOrder::Given).unwrap();
        assert!(m.is_true(r));
        let bad = Cnf::from_clauses(3, vec![vec![Lit::pos(v(3))]]).unwrap();
        assert!(matches!(m.compile_cnf(&bad, ClauseOrder::Given), Err(Error::UnknownVariable(_))));
    }
}
