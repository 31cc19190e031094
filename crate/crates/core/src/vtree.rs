//! Variable trees.
//!
//! Nodes are identified by their in-order position, so leaves sit at even
//! positions and every subtree occupies a contiguous position range. The same
//! numbering is used by the text format, which keeps files interoperable with
//! other vtree tools.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::Var;

/// A vtree as a nested value, for building custom trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VtreeShape {
    Leaf(Var),
    Node(Box<VtreeShape>, Box<VtreeShape>),
}

impl VtreeShape {
    pub fn node(left: VtreeShape, right: VtreeShape) -> Self {
        VtreeShape::Node(Box::new(left), Box::new(right))
    }

    fn balanced(vars: &[Var]) -> Self {
        match vars {
            [v] => VtreeShape::Leaf(*v),
            _ => {
                let mid = vars.len().div_ceil(2);
                VtreeShape::node(Self::balanced(&vars[..mid]), Self::balanced(&vars[mid..]))
            }
        }
    }

    fn right_linear(vars: &[Var]) -> Self {
        match vars {
            [v] => VtreeShape::Leaf(*v),
            [first, rest @ ..] => VtreeShape::node(VtreeShape::Leaf(*first), Self::right_linear(rest)),
            [] => unreachable!("callers reject empty variable lists"),
        }
    }

    fn random(vars: &[Var], rng: &mut ChaCha8Rng) -> Self {
        match vars {
            [v] => VtreeShape::Leaf(*v),
            _ => {
                let split = rng.gen_range(1..vars.len());
                VtreeShape::node(Self::random(&vars[..split], rng), Self::random(&vars[split..], rng))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VtreeNode {
    Leaf(Var),
    Internal { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vtree {
    nodes: Vec<VtreeNode>,
    parent: Vec<Option<usize>>,
    first: Vec<usize>,
    last: Vec<usize>,
    depth: Vec<u32>,
    root: usize,
    /// Leaf variables in left-to-right order.
    vars: Vec<Var>,
    leaf_of: HashMap<Var, usize>,
}

impl Vtree {
    pub fn from_shape(shape: &VtreeShape) -> Result<Self> {
        fn layout(s: &VtreeShape, nodes: &mut Vec<Option<VtreeNode>>, vars: &mut Vec<Var>) -> usize {
            match s {
                VtreeShape::Leaf(v) => {
                    vars.push(*v);
                    nodes.push(Some(VtreeNode::Leaf(*v)));
                    nodes.len() - 1
                }
                VtreeShape::Node(l, r) => {
                    let left = layout(l, nodes, vars);
                    nodes.push(None);
                    let me = nodes.len() - 1;
                    let right = layout(r, nodes, vars);
                    nodes[me] = Some(VtreeNode::Internal { left, right });
                    me
                }
            }
        }
        let mut slots = Vec::new();
        let mut vars = Vec::new();
        let root = layout(shape, &mut slots, &mut vars);
        let nodes: Vec<VtreeNode> = slots.into_iter().map(|n| n.expect("all slots filled")).collect();

        let mut leaf_of = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if let VtreeNode::Leaf(v) = n {
                if leaf_of.insert(*v, i).is_some() {
                    return Err(Error::InvalidVtree(format!("variable {v} labels two leaves")));
                }
            }
        }
        let len = nodes.len();
        let mut t = Vtree {
            nodes,
            parent: vec![None; len],
            first: (0..len).collect(),
            last: (0..len).collect(),
            depth: vec![0; len],
            root,
            vars,
            leaf_of,
        };
        t.index();
        Ok(t)
    }

    fn index(&mut self) {
        let mut stack = vec![self.root];
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(v) = stack.pop() {
            order.push(v);
            if let VtreeNode::Internal { left, right } = self.nodes[v] {
                self.parent[left] = Some(v);
                self.parent[right] = Some(v);
                self.depth[left] = self.depth[v] + 1;
                self.depth[right] = self.depth[v] + 1;
                stack.push(left);
                stack.push(right);
            }
        }
        for &v in order.iter().rev() {
            if let VtreeNode::Internal { left, right } = self.nodes[v] {
                self.first[v] = self.first[left];
                self.last[v] = self.last[right];
            }
        }
    }

    /// The left child of every internal node is a leaf.
    pub fn right_linear(vars: &[Var]) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::EmptyVariables);
        }
        Self::from_shape(&VtreeShape::right_linear(vars))
    }

    /// Recursive halving, the larger half on the left.
    pub fn balanced(vars: &[Var]) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::EmptyVariables);
        }
        Self::from_shape(&VtreeShape::balanced(vars))
    }

    /// Shuffled leaves with uniformly drawn split points; reproducible per seed.
    pub fn random(vars: &[Var], seed: u64) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::EmptyVariables);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = vars.to_vec();
        order.shuffle(&mut rng);
        Self::from_shape(&VtreeShape::random(&order, &mut rng))
    }

    /// A vtree whose root's right child carries exactly `x`, with `y` balanced on the left.
    pub fn constrained(x: &[Var], y: &[Var]) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::EmptyVariables);
        }
        let xs: HashSet<Var> = x.iter().copied().collect();
        if let Some(v) = y.iter().find(|v| xs.contains(v)) {
            return Err(Error::InvalidVtree(format!("variable {v} on both sides of the split")));
        }
        Self::from_shape(&VtreeShape::node(VtreeShape::balanced(y), VtreeShape::balanced(x)))
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: usize) -> VtreeNode {
        self.nodes[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        matches!(self.nodes[v], VtreeNode::Leaf(_))
    }

    /// Panics on leaves.
    pub fn left(&self, v: usize) -> usize {
        match self.nodes[v] {
            VtreeNode::Internal { left, .. } => left,
            VtreeNode::Leaf(_) => panic!("leaf {v} has no children"),
        }
    }

    /// Panics on leaves.
    pub fn right(&self, v: usize) -> usize {
        match self.nodes[v] {
            VtreeNode::Internal { right, .. } => right,
            VtreeNode::Leaf(_) => panic!("leaf {v} has no children"),
        }
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn leaf_var(&self, v: usize) -> Option<Var> {
        match self.nodes[v] {
            VtreeNode::Leaf(x) => Some(x),
            _ => None,
        }
    }

    pub fn leaf_of(&self, var: Var) -> Option<usize> {
        self.leaf_of.get(&var).copied()
    }

    /// All variables, left to right.
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Variables under `v`, left to right.
    pub fn vars_under(&self, v: usize) -> &[Var] {
        &self.vars[self.first[v] / 2..=self.last[v] / 2]
    }

    /// Inclusive index range of `vars_under(v)` within `vars()`.
    pub(crate) fn var_range(&self, v: usize) -> (usize, usize) {
        (self.first[v] / 2, self.last[v] / 2)
    }

    /// Edges from the root to `v`.
    pub fn node_depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn var_count_under(&self, v: usize) -> usize {
        (self.last[v] - self.first[v]) / 2 + 1
    }

    /// `a` lies in the subtree rooted at `b` (inclusive).
    pub fn is_sub(&self, a: usize, b: usize) -> bool {
        self.first[b] <= a && a <= self.last[b]
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("deeper node has a parent");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("deeper node has a parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root");
            b = self.parent[b].expect("non-root");
        }
        a
    }

    /// Number of node levels; a single leaf has depth 1.
    pub fn depth(&self) -> u32 {
        self.depth.iter().max().copied().unwrap_or(0) + 1
    }

    pub fn is_right_linear(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| !matches!(n, VtreeNode::Internal { left, .. } if !self.is_leaf(*left)))
    }

    /// Nodes reached from the root by following right children only, root first.
    pub fn right_spine(&self) -> Vec<usize> {
        let mut spine = vec![self.root];
        let mut v = self.root;
        while let VtreeNode::Internal { right, .. } = self.nodes[v] {
            spine.push(right);
            v = right;
        }
        spine
    }

    /// The right-spine node whose variables are exactly `x`, if any.
    pub fn constrained_node(&self, x: &[Var]) -> Option<usize> {
        let want: HashSet<Var> = x.iter().copied().collect();
        if want.len() != x.len() || want.is_empty() {
            return None;
        }
        self.right_spine().into_iter().find(|&u| {
            self.var_count_under(u) == want.len() && self.vars_under(u).iter().all(|v| want.contains(v))
        })
    }

    pub fn is_constrained_for(&self, x: &[Var]) -> bool {
        self.constrained_node(x).is_some()
    }

    pub fn to_shape(&self) -> VtreeShape {
        fn go(t: &Vtree, v: usize) -> VtreeShape {
            match t.nodes[v] {
                VtreeNode::Leaf(x) => VtreeShape::Leaf(x),
                VtreeNode::Internal { left, right } => VtreeShape::node(go(t, left), go(t, right)),
            }
        }
        go(self, self.root)
    }

    /// `vtree N` header, then `L id var` / `I id left right` lines, children first.
    pub fn serialize(&self) -> String {
        let mut out = format!("vtree {}\n", self.nodes.len());
        let mut post = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            match self.nodes[v] {
                VtreeNode::Internal { left, right } if !expanded => {
                    stack.push((v, true));
                    stack.push((right, false));
                    stack.push((left, false));
                }
                _ => post.push(v),
            }
        }
        for v in post {
            match self.nodes[v] {
                VtreeNode::Leaf(x) => out.push_str(&format!("L {v} {x}\n")),
                VtreeNode::Internal { left, right } => out.push_str(&format!("I {v} {left} {right}\n")),
            }
        }
        out
    }

    /// Reads the format written by [`Vtree::serialize`]; `c` lines are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut shapes: HashMap<u64, VtreeShape> = HashMap::new();
        let mut used: HashSet<u64> = HashSet::new();
        let mut order: Vec<u64> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |k: usize| -> Result<u64> {
                toks.get(k)
                    .ok_or_else(|| Error::parse(ln, "missing field"))?
                    .parse()
                    .map_err(|_| Error::parse(ln, "bad number"))
            };
            match toks[0] {
                "vtree" => {
                    if declared.is_some() {
                        return Err(Error::parse(ln, "duplicate header"));
                    }
                    declared = Some(num(1)? as usize);
                }
                "L" | "I" if declared.is_none() => return Err(Error::parse(ln, "node before header")),
                "L" => {
                    let (id, var) = (num(1)?, num(2)?);
                    if var == 0 || var > u32::MAX as u64 {
                        return Err(Error::parse(ln, "bad variable"));
                    }
                    if shapes.insert(id, VtreeShape::Leaf(Var::new(var as u32))).is_some() {
                        return Err(Error::parse(ln, format!("duplicate node id {id}")));
                    }
                    order.push(id);
                }
                "I" => {
                    let (id, l, r) = (num(1)?, num(2)?, num(3)?);
                    if l == r {
                        return Err(Error::parse(ln, "children must differ"));
                    }
                    let mut take = |c: u64| {
                        if !used.insert(c) {
                            return Err(Error::parse(ln, format!("node {c} has two parents")));
                        }
                        shapes.remove(&c).ok_or_else(|| Error::parse(ln, format!("dangling child id {c}")))
                    };
                    let left = take(l)?;
                    let right = take(r)?;
                    if shapes.contains_key(&id) || used.contains(&id) {
                        return Err(Error::parse(ln, format!("duplicate node id {id}")));
                    }
                    shapes.insert(id, VtreeShape::node(left, right));
                    order.push(id);
                }
                other => return Err(Error::parse(ln, format!("unknown line type `{other}`"))),
            }
        }
        let declared = declared.ok_or_else(|| Error::parse(0, "missing header"))?;
        if order.len() != declared {
            return Err(Error::parse(0, format!("header declares {declared} nodes, found {}", order.len())));
        }
        if shapes.len() != 1 {
            return Err(Error::InvalidVtree(format!("{} disconnected roots", shapes.len())));
        }
        let shape = shapes.into_values().next().expect("one root");
        Self::from_shape(&shape)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(ids: &[u32]) -> Vec<Var> {
        ids.iter().map(|&i| Var::new(i)).collect()
    }

    const A: u32 = 1;
    const K: u32 = 2;
    const L: u32 = 3;
    const P: u32 = 4;

    #[test]
    fn balanced_course_vtree() {
        let t = Vtree::balanced(&vs(&[L, K, P, A])).unwrap();
        let expect = VtreeShape::node(
            VtreeShape::node(VtreeShape::Leaf(Var::new(L)), VtreeShape::Leaf(Var::new(K))),
            VtreeShape::node(VtreeShape::Leaf(Var::new(P)), VtreeShape::Leaf(Var::new(A))),
        );
        assert_eq!(t.to_shape(), expect);
        assert_eq!(t.root(), 3);
        assert_eq!(t.vars_under(t.right(t.root())), &vs(&[P, A])[..]);
        assert_eq!(Vtree::balanced(&vs(&[1, 2])).unwrap().len(), 3);
        assert_eq!(Vtree::balanced(&vs(&[1, 2, 3, 4, 5, 6, 7])).unwrap().depth(), 4);
    }

    #[test]
    fn right_linear_shape() {
        let t = Vtree::right_linear(&vs(&[1, 2, 3, 4])).unwrap();
        assert!(t.is_right_linear());
        assert_eq!(t.right_spine().len(), 4);
        let single = Vtree::right_linear(&vs(&[1])).unwrap();
        assert!(single.is_leaf(single.root()));
        assert!(!Vtree::balanced(&vs(&[1, 2, 3, 4])).unwrap().is_right_linear());
        assert!(matches!(Vtree::right_linear(&[]), Err(Error::EmptyVariables)));
        assert!(matches!(Vtree::balanced(&[]), Err(Error::EmptyVariables)));
    }

    #[test]
    fn leaves_at_even_positions() {
        let t = Vtree::random(&vs(&[1, 2, 3, 4, 5, 6]), 3).unwrap();
        for v in 0..t.len() {
            assert_eq!(t.is_leaf(v), v % 2 == 0);
        }
    }

    #[test]
    fn constrained_split() {
        // C=3, E=5 | A=1, B=2, D=4
        let t = Vtree::constrained(&vs(&[3, 5]), &vs(&[1, 2, 4])).unwrap();
        let leaf = |i| VtreeShape::Leaf(Var::new(i));
        let expect = VtreeShape::node(
            VtreeShape::node(VtreeShape::node(leaf(1), leaf(2)), leaf(4)),
            VtreeShape::node(leaf(3), leaf(5)),
        );
        assert_eq!(t.to_shape(), expect);
        assert!(t.is_constrained_for(&vs(&[5, 3])));
        assert!(!t.is_constrained_for(&vs(&[1, 2])));
        let u = Vtree::constrained(&vs(&[1, 2, 3]), &vs(&[4])).unwrap();
        assert_eq!(u.constrained_node(&vs(&[1, 2, 3])), Some(u.right(u.root())));
        assert!(Vtree::constrained(&vs(&[1]), &vs(&[1, 2])).is_err());
        assert!(Vtree::constrained(&[], &vs(&[1])).is_err());
    }

    #[test]
    fn constrained_on_course_vtree() {
        let t = Vtree::balanced(&vs(&[L, K, P, A])).unwrap();
        assert!(t.is_constrained_for(&vs(&[P, A])));
        assert!(!t.is_constrained_for(&vs(&[K, P])));
        assert!(t.is_constrained_for(&vs(&[L, K, P, A])));
    }

    #[test]
    fn lca_and_subtrees() {
        let t = Vtree::balanced(&vs(&[L, K, P, A])).unwrap();
        let (l, a) = (t.leaf_of(Var::new(L)).unwrap(), t.leaf_of(Var::new(A)).unwrap());
        assert_eq!(t.lca(l, a), t.root());
        assert!(t.is_sub(l, t.left(t.root())));
        assert!(!t.is_sub(a, t.left(t.root())));
        assert_eq!(t.lca(l, l), l);
    }

    #[test]
    fn random_is_seeded() {
        let v = vs(&[1, 2, 3, 4, 5]);
        assert_eq!(Vtree::random(&v, 9).unwrap(), Vtree::random(&v, 9).unwrap());
        let one = Vtree::random(&vs(&[7]), 1).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn text_round_trip() {
        let t = Vtree::balanced(&vs(&[L, K, P, A])).unwrap();
        let text = t.serialize();
        assert_eq!(text, "vtree 7\nL 0 3\nL 2 2\nI 1 0 2\nL 4 4\nL 6 1\nI 5 4 6\nI 3 1 5\n");
        assert_eq!(Vtree::parse(&text).unwrap(), t);
        assert_eq!(t.serialize(), text);
        let commented = format!("c generated\n{text}");
        assert_eq!(Vtree::parse(&commented).unwrap(), t);
    }

    #[test]
    fn parse_errors() {
        assert!(Vtree::parse("vtree 3\nL 0 1\nI 1 0 2\nL 2 2\n").is_err());
        assert!(Vtree::parse("vtree 2\nL 0 1\nL 2 2\n").is_err());
        assert!(Vtree::parse("vtree 3\nL 0 1\nL 2 1\nI 1 0 2\n").is_err());
        assert!(Vtree::parse("L 0 1\n").is_err());
    }
}
