//! Text format: `sdd N` followed by one line per node, children first.
//!
//! ```text
//! F id
//! T id
//! L id vtree lit
//! D id vtree k prime sub ... prime sub
//! ```
//!
//! The last node listed is the root. Vtree ids refer to in-order positions of
//! the manager's vtree, which is stored separately.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Ix, Kind, Sdd, SddManager, FALSE, TRUE};
use crate::error::{Error, Result};
use crate::logic::Lit;

impl SddManager {
    pub fn write_sdd(&self, a: Sdd) -> Result<String> {
        let a = self.ix(a)?;
        let order = self.reachable(a);
        let ids: HashMap<Ix, usize> = order.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut out = format!("sdd {}\n", order.len());
        for (i, &x) in order.iter().enumerate() {
            match self.kind(x) {
                Kind::False => writeln!(out, "F {i}"),
                Kind::True => writeln!(out, "T {i}"),
                Kind::Literal(l) => writeln!(out, "L {i} {} {}", self.vnode(x), l.to_dimacs()),
                Kind::Decision(els) => {
                    write!(out, "D {i} {} {}", self.vnode(x), els.len()).unwrap();
                    for (p, s) in els.iter() {
                        write!(out, " {} {}", ids[p], ids[s]).unwrap();
                    }
                    writeln!(out)
                }
            }
            .unwrap();
        }
        Ok(out)
    }

    /// Rebuilds a diagram written by [`SddManager::write_sdd`] in this manager.
    pub fn read_sdd(&mut self, text: &str) -> Result<Sdd> {
        let mut nodes: HashMap<usize, Ix> = HashMap::new();
        let mut declared: Option<usize> = None;
        let mut last: Option<Ix> = None;
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some(&head) = toks.first() else { continue };
            if head == "c" {
                continue;
            }
            let num = |i: usize| -> Result<i64> {
                toks.get(i)
                    .ok_or_else(|| Error::parse(line_no, "missing field"))?
                    .parse::<i64>()
                    .map_err(|_| Error::parse(line_no, format!("bad number {:?}", toks[i])))
            };
            let id_at = |i: usize| -> Result<usize> {
                let v = num(i)?;
                usize::try_from(v).map_err(|_| Error::parse(line_no, "negative id"))
            };
            if head == "sdd" {
                declared = Some(id_at(1)?);
                continue;
            }
            if declared.is_none() {
                return Err(Error::parse(line_no, "expected `sdd N` header"));
            }
            let id = id_at(1)?;
            let x = match head {
                "F" => FALSE,
                "T" => TRUE,
                "L" => {
                    let lit = num(3)?;
                    if lit == 0 {
                        return Err(Error::parse(line_no, "literal 0"));
                    }
                    let ix = self.lit_ix(Lit::from_dimacs(lit))?;
                    let vt = id_at(2)?;
                    if vt != self.vnode(ix) {
                        return Err(Error::parse(line_no, format!("literal {lit} is not at vtree node {vt}")));
                    }
                    ix
                }
                "D" => {
                    let vt = id_at(2)?;
                    if vt >= self.vtree.len() || self.vtree.is_leaf(vt) {
                        return Err(Error::parse(line_no, format!("vtree node {vt} is not internal")));
                    }
                    let k = id_at(3)?;
                    if toks.len() != 4 + 2 * k {
                        return Err(Error::parse(line_no, "element count does not match"));
                    }
                    let mut acc = FALSE;
                    for e in 0..k {
                        let get = |j: usize| -> Result<Ix> {
                            let r = id_at(j)?;
                            nodes
                                .get(&r)
                                .copied()
                                .ok_or_else(|| Error::parse(line_no, format!("node {r} used before definition")))
                        };
                        let (p, s) = (get(4 + 2 * e)?, get(5 + 2 * e)?);
                        let ps = self.and(p, s);
                        acc = self.or(acc, ps);
                    }
                    acc
                }
                other => return Err(Error::parse(line_no, format!("unknown node kind {other:?}"))),
            };
            if nodes.insert(id, x).is_some() {
                return Err(Error::parse(line_no, format!("duplicate node id {id}")));
            }
            last = Some(x);
        }
        let n = declared.ok_or_else(|| Error::parse(1, "empty file"))?;
        if n != nodes.len() {
            return Err(Error::parse(text.lines().count(), format!("header declares {n} nodes, found {}", nodes.len())));
        }
        last.map(|x| self.wrap(x)).ok_or_else(|| Error::parse(1, "no nodes"))
    }
}

#[cfg(test)]
mod tests {
    use crate::logic::{Cnf, Var};
    use crate::sdd::{ClauseOrder, SddManager};
    use crate::vtree::Vtree;

    #[test]
    fn round_trip_into_fresh_manager() {
        let vars: Vec<Var> = (1..=5).map(Var::new).collect();
        let vt = Vtree::balanced(&vars).unwrap();
        let cnf = Cnf::parse_dimacs("p cnf 5 3\n1 -2 0\n2 3 -4 0\n-1 5 0\n").unwrap();
        let mut m = SddManager::new(vt.clone());
        let r = m.compile_cnf(&cnf, ClauseOrder::Given).unwrap();
        let text = m.write_sdd(r).unwrap();
        assert_eq!(m.read_sdd(&text).unwrap(), r);
        let mut m2 = SddManager::new(vt);
        let r2 = m2.read_sdd(&text).unwrap();
        assert_eq!(m.model_count(r).unwrap(), m2.model_count(r2).unwrap());
        assert_eq!(m.size(r).unwrap(), m2.size(r2).unwrap());
    }

    #[test]
    fn rejects_forward_references() {
        let vars: Vec<Var> = (1..=2).map(Var::new).collect();
        let mut m = SddManager::new(Vtree::balanced(&vars).unwrap());
        assert!(m.read_sdd("sdd 2\nD 0 1 1 1 1\nT 1\n").is_err());
        assert!(m.read_sdd("L 0 0 1\n").is_err());
        assert!(m.read_sdd("sdd 1\nL 0 2 1\n").is_err());
    }
}
