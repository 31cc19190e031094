//! Text format, children first, root last:
//!
//! ```text
//! psdd N
//! F id
//! L id vtree lit
//! T id vtree var
//! D id vtree k prime sub ... prime sub
//! P id 0 w0 1 w1 ...
//! ```
//!
//! Every `T` and `D` line is followed by a `P` line giving its parameters; for
//! `T`, element 0 is the positive literal. Vtree ids are in-order positions of
//! a vtree stored separately.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Element, Psdd, PsddNode};
use crate::error::{Error, Result};
use crate::logic::{Lit, Var};
use crate::scalar::Probability;
use crate::vtree::Vtree;

const SUM_TOLERANCE: f64 = 1e-9;

impl<F: Probability + std::fmt::Display> Psdd<F> {
    pub fn write(&self) -> String {
        let mut out = format!("psdd {}\n", self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let v = self.vtree_of[i];
            match node {
                PsddNode::False => writeln!(out, "F {i}").unwrap(),
                PsddNode::Literal(l) => writeln!(out, "L {i} {v} {}", l.to_dimacs()).unwrap(),
                PsddNode::Top { var, theta } => {
                    writeln!(out, "T {i} {v} {}", var.index()).unwrap();
                    writeln!(out, "P {i} 0 {theta} 1 {}", F::one() - *theta).unwrap();
                }
                PsddNode::Decision { elements, .. } => {
                    write!(out, "D {i} {v} {}", elements.len()).unwrap();
                    for e in elements {
                        write!(out, " {} {}", e.prime, e.sub).unwrap();
                    }
                    write!(out, "\nP {i}").unwrap();
                    for (j, e) in elements.iter().enumerate() {
                        write!(out, " {j} {}", e.theta).unwrap();
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn read(text: &str, vtree: Vtree) -> Result<Self> {
        let mut nodes: Vec<PsddNode<F>> = Vec::new();
        let mut vtree_of: Vec<usize> = Vec::new();
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut pending: Option<usize> = None;
        let mut declared: Option<usize> = None;
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some(&head) = toks.first() else { continue };
            if head == "c" {
                continue;
            }
            let field = |i: usize| -> Result<&str> {
                toks.get(i).copied().ok_or_else(|| Error::parse(line_no, "missing field"))
            };
            let int = |i: usize| -> Result<usize> {
                let t = field(i)?;
                t.parse().map_err(|_| Error::parse(line_no, format!("bad number {t:?}")))
            };
            let node_ref = |i: usize| -> Result<usize> {
                let r = int(i)?;
                ids.get(&r).copied().ok_or_else(|| Error::parse(line_no, format!("node {r} used before definition")))
            };
            if head == "psdd" {
                declared = Some(int(1)?);
                continue;
            }
            if declared.is_none() {
                return Err(Error::parse(line_no, "expected `psdd N` header"));
            }
            if head != "P" && pending.is_some() {
                return Err(Error::parse(line_no, "missing parameter line"));
            }
            let id = int(1)?;
            let vtree_node = |i: usize| -> Result<usize> {
                let v = int(i)?;
                if v >= vtree.len() {
                    return Err(Error::parse(line_no, format!("vtree node {v} out of range")));
                }
                Ok(v)
            };
            let (node, v) = match head {
                "F" => (PsddNode::False, usize::MAX),
                "L" => {
                    let v = vtree_node(2)?;
                    let code: i64 = field(3)?.parse().map_err(|_| Error::parse(line_no, "bad literal"))?;
                    if code == 0 || vtree.leaf_var(v) != Some(Var::new(code.unsigned_abs() as u32)) {
                        return Err(Error::parse(line_no, format!("literal {code} is not at vtree leaf {v}")));
                    }
                    (PsddNode::Literal(Lit::from_dimacs(code)), v)
                }
                "T" => {
                    let v = vtree_node(2)?;
                    let var = int(3)?;
                    if var == 0 || vtree.leaf_var(v) != Some(Var::new(var as u32)) {
                        return Err(Error::parse(line_no, format!("variable {var} is not at vtree leaf {v}")));
                    }
                    (PsddNode::Top { var: Var::new(var as u32), theta: F::zero() }, v)
                }
                "D" => {
                    let v = vtree_node(2)?;
                    if vtree.is_leaf(v) {
                        return Err(Error::parse(line_no, format!("vtree node {v} is a leaf")));
                    }
                    let k = int(3)?;
                    if toks.len() != 4 + 2 * k {
                        return Err(Error::parse(line_no, "element count does not match"));
                    }
                    let mut elements = Vec::with_capacity(k);
                    for e in 0..k {
                        let (prime, sub) = (node_ref(4 + 2 * e)?, node_ref(5 + 2 * e)?);
                        let sub_ok = matches!(nodes[sub], PsddNode::False) || vtree_of[sub] == vtree.right(v);
                        if vtree_of[prime] != vtree.left(v) || !sub_ok {
                            return Err(Error::parse(line_no, "element is not normalized for its vtree node"));
                        }
                        elements.push(Element { prime, sub, theta: F::zero() });
                    }
                    (PsddNode::Decision { vtree: v, elements }, v)
                }
                "P" => {
                    let target = node_ref(1)?;
                    if pending != Some(target) {
                        return Err(Error::parse(line_no, "parameters for a node not just defined"));
                    }
                    pending = None;
                    let arity = match &nodes[target] {
                        PsddNode::Decision { elements, .. } => elements.len(),
                        _ => 2,
                    };
                    if toks.len() != 2 + 2 * arity {
                        return Err(Error::parse(line_no, "parameter count does not match"));
                    }
                    let mut thetas = vec![F::zero(); arity];
                    let mut sum = 0.0;
                    for j in 0..arity {
                        let e = int(2 + 2 * j)?;
                        let t: f64 = field(3 + 2 * j)?.parse().map_err(|_| Error::parse(line_no, "bad parameter"))?;
                        if e >= arity || !(0.0..=1.0).contains(&t) {
                            return Err(Error::parse(line_no, format!("bad parameter {e} {t}")));
                        }
                        thetas[e] = F::from_f64(t).expect("finite");
                        sum += t;
                    }
                    if (sum - 1.0).abs() > SUM_TOLERANCE {
                        return Err(Error::parse(line_no, format!("parameters sum to {sum}")));
                    }
                    match &mut nodes[target] {
                        PsddNode::Decision { elements, .. } => {
                            for (e, t) in elements.iter_mut().zip(thetas) {
                                e.theta = t;
                            }
                        }
                        PsddNode::Top { theta, .. } => *theta = thetas[0],
                        _ => unreachable!(),
                    }
                    continue;
                }
                other => return Err(Error::parse(line_no, format!("unknown line kind {other:?}"))),
            };
            if matches!(node, PsddNode::Top { .. } | PsddNode::Decision { .. }) {
                pending = Some(nodes.len());
            }
            if ids.insert(id, nodes.len()).is_some() {
                return Err(Error::parse(line_no, format!("duplicate node id {id}")));
            }
            nodes.push(node);
            vtree_of.push(v);
        }
        if pending.is_some() {
            return Err(Error::parse(text.lines().count(), "missing parameter line"));
        }
        let n = declared.ok_or_else(|| Error::parse(1, "empty file"))?;
        if n != nodes.len() || nodes.is_empty() {
            return Err(Error::parse(text.lines().count(), format!("header declares {n} nodes, found {}", nodes.len())));
        }
        let root = nodes.len() - 1;
        if vtree_of[root] != vtree.root() {
            return Err(Error::parse(text.lines().count(), "root is not normalized for the vtree root"));
        }
        Ok(Psdd { vtree, nodes, vtree_of })
    }
}

#[cfg(test)]
mod tests {
    use crate::logic::{Cnf, Term, Var};
    use crate::psdd::Psdd;
    use crate::sdd::{ClauseOrder, SddManager};
    use crate::vtree::Vtree;

    #[test]
    fn round_trip_preserves_distribution() {
        let vars: Vec<Var> = (1..=4).map(Var::new).collect();
        let vt = Vtree::balanced(&vars).unwrap();
        let mut m = SddManager::new(vt.clone());
        let cnf = Cnf::parse_dimacs("p cnf 4 2\n1 2 0\n-2 3 0\n").unwrap();
        let r = m.compile_cnf(&cnf, ClauseOrder::ByVtree).unwrap();
        let mut p: Psdd<f64> = Psdd::from_sdd(&mut m, r).unwrap();
        p.randomize(5);
        let text = p.write();
        let q: Psdd<f64> = Psdd::read(&text, vt).unwrap();
        assert_eq!(q.write(), text);
        for b in 0..16 {
            let t = Term::from_bits(4, b);
            assert_eq!(p.probability(&t).unwrap(), q.probability(&t).unwrap());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let vars: Vec<Var> = (1..=2).map(Var::new).collect();
        let vt = Vtree::balanced(&vars).unwrap();
        assert!(Psdd::<f64>::read("psdd 1\nT 0 0 1\nP 0 0 0.3 1 0.3\n", vt.clone()).is_err());
        assert!(Psdd::<f64>::read("psdd 1\nT 0 0 1\n", vt.clone()).is_err());
        assert!(Psdd::<f64>::read("psdd 1\nT 0 0 2\nP 0 0 0.5 1 0.5\n", vt).is_err());
    }
}
