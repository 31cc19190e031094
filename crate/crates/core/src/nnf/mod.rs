//! Circuits in negation normal form.
//!
//! Nodes live in an append-only arena where every child precedes its parents,
//! so all bottom-up passes are a single forward sweep over the node vector.

mod c2d;
mod query;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{Lit, Term, Var};
use crate::varset::VarSet;

pub use query::{Check, Marginals};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NnfNode {
    True,
    False,
    Lit(Lit),
    And(Vec<usize>),
    Or(Vec<usize>),
}

impl NnfNode {
    pub fn children(&self) -> &[usize] {
        match self {
            NnfNode::And(c) | NnfNode::Or(c) => c,
            _ => &[],
        }
    }
}

/// Why a circuit fails a tractability property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyViolation {
    NotDecomposable { node: usize, var: Var },
    NotDeterministic { node: usize, witness: Term },
    NotSmooth { node: usize, var: Var },
}

impl fmt::Display for PropertyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyViolation::NotDecomposable { node, var } => {
                write!(f, "and-node {node} has children sharing variable {var}")
            }
            PropertyViolation::NotDeterministic { node, witness } => {
                write!(f, "or-node {node} has two high inputs under [{witness}]")
            }
            PropertyViolation::NotSmooth { node, var } => {
                write!(f, "or-node {node} has a child not mentioning variable {var}")
            }
        }
    }
}

impl std::error::Error for PropertyViolation {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NnfCircuit {
    nodes: Vec<NnfNode>,
    root: usize,
    var_count: u32,
}

impl NnfCircuit {
    /// Validates topological order and literal ranges.
    pub fn new(nodes: Vec<NnfNode>, root: usize, var_count: u32) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::parse(0, format!("root {root} out of range")));
        }
        for (i, n) in nodes.iter().enumerate() {
            match n {
                NnfNode::Lit(l) if l.var().index() > var_count => {
                    return Err(Error::LiteralOutOfRange { lit: l.to_dimacs(), var_count })
                }
                NnfNode::And(c) | NnfNode::Or(c) => {
                    if let Some(bad) = c.iter().find(|&&c| c >= i) {
                        return Err(Error::parse(0, format!("node {i} references later node {bad}")));
                    }
                }
                _ => {}
            }
        }
        Ok(NnfCircuit { nodes, root, var_count })
    }

    pub fn constant(value: bool, var_count: u32) -> Self {
        let node = if value { NnfNode::True } else { NnfNode::False };
        NnfCircuit { nodes: vec![node], root: 0, var_count }
    }

    pub fn nodes(&self) -> &[NnfNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    /// Variables mentioned below each node.
    pub(crate) fn var_sets(&self) -> Vec<VarSet> {
        let mut sets: Vec<VarSet> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let s = match n {
                NnfNode::Lit(l) => VarSet::singleton(l.var()),
                NnfNode::And(c) | NnfNode::Or(c) => {
                    let mut s = VarSet::new();
                    for &ch in c {
                        s.union_with(&sets[ch]);
                    }
                    s
                }
                _ => VarSet::new(),
            };
            sets.push(s);
        }
        sets
    }

    /// Variables mentioned anywhere under the root, ascending.
    pub fn mentioned_vars(&self) -> Vec<Var> {
        self.var_sets()[self.root].iter().collect()
    }

    /// Gate values with `value(var)` supplying the inputs.
    fn node_values<F: Fn(Var) -> Option<bool>>(&self, value: F) -> Result<Vec<bool>> {
        let mut vals = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n {
                NnfNode::True => true,
                NnfNode::False => false,
                NnfNode::Lit(l) => {
                    l.satisfied_by(value(l.var()).ok_or(Error::IncompleteAssignment(l.var()))?)
                }
                NnfNode::And(c) => c.iter().all(|&i| vals[i]),
                NnfNode::Or(c) => c.iter().any(|&i| vals[i]),
            };
            vals.push(v);
        }
        Ok(vals)
    }

    pub fn evaluate(&self, x: &Term) -> Result<bool> {
        Ok(self.node_values(|v| x.get(v))?[self.root])
    }

    /// `values[i]` is the value of variable `i+1`.
    pub fn evaluate_values(&self, values: &[bool]) -> bool {
        self.node_values(|v| values.get(v.slot()).copied())
            .expect("dense assignment covers the circuit")[self.root]
    }

    /// Replaces literal leaves over bound variables by constants.
    pub fn condition(&self, t: &Term) -> NnfCircuit {
        if t.is_empty() {
            return self.clone();
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                NnfNode::Lit(l) => match t.get(l.var()) {
                    Some(b) if l.satisfied_by(b) => NnfNode::True,
                    Some(_) => NnfNode::False,
                    None => n.clone(),
                },
                _ => n.clone(),
            })
            .collect();
        NnfCircuit { nodes, root: self.root, var_count: self.var_count }
    }

    pub fn check_decomposability(&self) -> std::result::Result<(), PropertyViolation> {
        let sets = self.var_sets();
        for (i, n) in self.nodes.iter().enumerate() {
            if let NnfNode::And(c) = n {
                let mut seen = VarSet::new();
                for &ch in c {
                    if let Some(var) = seen.first_common(&sets[ch]) {
                        return Err(PropertyViolation::NotDecomposable { node: i, var });
                    }
                    seen.union_with(&sets[ch]);
                }
            }
        }
        Ok(())
    }

    pub fn check_smoothness(&self) -> std::result::Result<(), PropertyViolation> {
        let sets = self.var_sets();
        for (i, n) in self.nodes.iter().enumerate() {
            if let NnfNode::Or(c) = n {
                for &ch in c {
                    if let Some(var) = sets[i].difference(&sets[ch]).next() {
                        return Err(PropertyViolation::NotSmooth { node: i, var });
                    }
                }
            }
        }
        Ok(())
    }

    /// Enumerates every input; at most 24 variables.
    pub fn check_determinism_exhaustive(&self) -> Result<()> {
        const LIMIT: u32 = 24;
        if self.var_count > LIMIT {
            return Err(Error::TooManyVariables {
                what: "exhaustive determinism check",
                limit: LIMIT,
                actual: self.var_count,
            });
        }
        let n = self.var_count;
        let mut values = vec![false; n as usize];
        for bits in 0..1u64 << n {
            for (i, v) in values.iter_mut().enumerate() {
                *v = bits >> i & 1 == 1;
            }
            let vals = self.node_values(|v| values.get(v.slot()).copied())?;
            for (i, node) in self.nodes.iter().enumerate() {
                if let NnfNode::Or(c) = node {
                    if c.iter().filter(|&&ch| vals[ch]).count() >= 2 {
                        return Err(PropertyViolation::NotDeterministic {
                            node: i,
                            witness: Term::from_bits(n, bits),
                        }
                        .into());
                    }
                }
            }
        }
        Ok(())
    }

    /// Conjoins each or-input with `(X ∨ ¬X)` for every variable it is missing.
    pub fn smooth(&self) -> NnfCircuit {
        if self.check_smoothness().is_ok() {
            return self.clone();
        }
        let sets = self.var_sets();
        let mut b = NnfBuilder::new(self.var_count);
        let mut map = Vec::with_capacity(self.nodes.len());
        let mut gadgets: HashMap<Var, usize> = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let id = match n {
                NnfNode::Or(c) => {
                    let children = c
                        .iter()
                        .map(|&ch| {
                            let missing: Vec<Var> = sets[i].difference(&sets[ch]).collect();
                            if missing.is_empty() {
                                return map[ch];
                            }
                            let mut parts = vec![map[ch]];
                            for v in missing {
                                let g = *gadgets.entry(v).or_insert_with(|| {
                                    let p = b.lit(Lit::pos(v));
                                    let q = b.lit(Lit::neg(v));
                                    b.or(vec![p, q])
                                });
                                parts.push(g);
                            }
                            b.and(parts)
                        })
                        .collect();
                    b.or(children)
                }
                NnfNode::And(c) => b.and(c.iter().map(|&ch| map[ch]).collect()),
                leaf => b.add(leaf.clone()),
            };
            map.push(id);
        }
        b.finish(map[self.root])
    }
}

/// Hash-consing constructor keeping child-before-parent order.
#[derive(Debug, Clone)]
pub struct NnfBuilder {
    nodes: Vec<NnfNode>,
    index: HashMap<NnfNode, usize>,
    var_count: u32,
}

impl NnfBuilder {
    pub fn new(var_count: u32) -> Self {
        NnfBuilder { nodes: Vec::new(), index: HashMap::new(), var_count }
    }

    fn add(&mut self, node: NnfNode) -> usize {
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        debug_assert!(node.children().iter().all(|&c| c < self.nodes.len()));
        let i = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, i);
        i
    }

    pub fn constant(&mut self, value: bool) -> usize {
        self.add(if value { NnfNode::True } else { NnfNode::False })
    }

    pub fn lit(&mut self, lit: Lit) -> usize {
        if lit.var().index() > self.var_count {
            self.var_count = lit.var().index();
        }
        self.add(NnfNode::Lit(lit))
    }

    pub fn and(&mut self, children: Vec<usize>) -> usize {
        self.add(NnfNode::And(children))
    }

    pub fn or(&mut self, children: Vec<usize>) -> usize {
        self.add(NnfNode::Or(children))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn finish(self, root: usize) -> NnfCircuit {
        assert!(root < self.nodes.len(), "root must be a built node");
        NnfCircuit { nodes: self.nodes, root, var_count: self.var_count }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    #[test]
    fn rejects_forward_references() {
        let nodes = vec![NnfNode::And(vec![1]), NnfNode::True];
        assert!(NnfCircuit::new(nodes, 0, 0).is_err());
    }

    #[test]
    fn evaluate_constant_and_incomplete() {
        let c = NnfCircuit::constant(true, 3);
        assert!(c.evaluate(&Term::new()).unwrap());
        let mut b = NnfBuilder::new(2);
        let a = b.lit(Lit::pos(v(1)));
        let c = b.finish(a);
        assert!(matches!(c.evaluate(&Term::new()), Err(Error::IncompleteAssignment(_))));
    }

    #[test]
    fn decomposability_violations() {
        let mut b = NnfBuilder::new(2);
        let a = b.lit(Lit::pos(v(1)));
        let r = b.and(vec![a, a]);
        assert_eq!(
            b.finish(r).check_decomposability(),
            Err(PropertyViolation::NotDecomposable { node: 1, var: v(1) })
        );

        let mut b = NnfBuilder::new(2);
        let a = b.lit(Lit::pos(v(1)));
        let na = b.lit(Lit::neg(v(1)));
        let bb = b.lit(Lit::pos(v(2)));
        let o = b.or(vec![na, bb]);
        let r = b.and(vec![a, o]);
        assert!(matches!(
            b.finish(r).check_decomposability(),
            Err(PropertyViolation::NotDecomposable { var, .. }) if var == v(1)
        ));
    }

    #[test]
    fn determinism_checks() {
        let mut b = NnfBuilder::new(2);
        let a = b.lit(Lit::pos(v(1)));
        let bb = b.lit(Lit::pos(v(2)));
        let r = b.or(vec![a, bb]);
        match b.finish(r).check_determinism_exhaustive() {
            Err(Error::Property(PropertyViolation::NotDeterministic { witness, .. })) => {
                assert_eq!(witness, Term::from_bits(2, 0b11));
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut b = NnfBuilder::new(2);
        let a = b.lit(Lit::pos(v(1)));
        let bb = b.lit(Lit::pos(v(2)));
        let na = b.lit(Lit::neg(v(1)));
        let ab = b.and(vec![a, bb]);
        let r = b.or(vec![ab, na]);
        assert!(b.finish(r).check_determinism_exhaustive().is_ok());

        assert!(matches!(
            NnfCircuit::constant(true, 30).check_determinism_exhaustive(),
            Err(Error::TooManyVariables { .. })
        ));
    }

    #[test]
    fn condition_replaces_leaves() {
        let mut b = NnfBuilder::new(1);
        let a = b.lit(Lit::pos(v(1)));
        let na = b.lit(Lit::neg(v(1)));
        let r = b.or(vec![a, na]);
        let c = b.finish(r);
        let t = Term::from_lits([Lit::pos(v(1))]).unwrap();
        let k = c.condition(&t);
        assert_eq!(k.nodes()[0], NnfNode::True);
        assert_eq!(k.nodes()[1], NnfNode::False);
        assert!(k.mentioned_vars().is_empty());
        assert_eq!(c.condition(&Term::new()), c);
    }

    #[test]
    fn smoothing_adds_gadgets() {
        // Or(A, And(A, B))
        let mut b = NnfBuilder::new(2);
        let a = b.lit(Lit::pos(v(1)));
        let bb = b.lit(Lit::pos(v(2)));
        let ab = b.and(vec![a, bb]);
        let r = b.or(vec![a, ab]);
        let c = b.finish(r);
        assert!(c.check_smoothness().is_err());
        let s = c.smooth();
        assert!(s.check_smoothness().is_ok());
        let root = &s.nodes()[s.root()];
        let NnfNode::Or(children) = root else { panic!("root must stay an or-node") };
        let NnfNode::And(parts) = &s.nodes()[children[0]] else { panic!("gadget conjunction") };
        assert_eq!(parts.len(), 2);
        assert_eq!(s.nodes()[parts[0]], NnfNode::Lit(Lit::pos(v(1))));
        let NnfNode::Or(g) = &s.nodes()[parts[1]] else { panic!("gadget") };
        assert_eq!(s.nodes()[g[0]], NnfNode::Lit(Lit::pos(v(2))));
        assert_eq!(s.nodes()[g[1]], NnfNode::Lit(Lit::neg(v(2))));
        for bits in 0..4 {
            let x = Term::from_bits(2, bits);
            assert_eq!(c.evaluate(&x).unwrap(), s.evaluate(&x).unwrap());
        }
        let again = s.smooth();
        assert_eq!(again.nodes().len(), s.nodes().len());
    }
}
