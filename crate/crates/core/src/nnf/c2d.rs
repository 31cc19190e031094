//! The `.nnf` text format written by c2d-style d-DNNF compilers.
//!
//! ```text
//! nnf <nodes> <edges> <vars>
//! L <signed literal>
//! A <k> <c1> .. <ck>
//! O <decision var or 0> <k> <c1> .. <ck>
//! ```
//! `A 0` is the constant true and `O 0 0` the constant false. The last line is the root.

use super::{NnfCircuit, NnfNode};
use crate::error::{Error, Result};
use crate::logic::Lit;

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what}")))
}

impl NnfCircuit {
    pub fn parse_c2d(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, u32)> = None;
        let mut nodes: Vec<NnfNode> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let tag = toks.next().unwrap_or_default();
            if tag == "nnf" {
                if header.is_some() {
                    return Err(Error::parse(ln, "duplicate header"));
                }
                header = Some((
                    num(toks.next(), ln, "node count")?,
                    num(toks.next(), ln, "edge count")?,
                    num(toks.next(), ln, "variable count")?,
                ));
                continue;
            }
            let (_, _, var_count) = header.ok_or_else(|| Error::parse(ln, "node before header"))?;
            let node = match tag {
                "L" => {
                    let code: i64 = num(toks.next(), ln, "literal")?;
                    if code == 0 || code.unsigned_abs() > var_count as u64 {
                        return Err(Error::LiteralOutOfRange { lit: code, var_count });
                    }
                    NnfNode::Lit(Lit::from_dimacs(code))
                }
                "A" | "O" => {
                    if tag == "O" {
                        let _decision: u32 = num(toks.next(), ln, "decision variable")?;
                    }
                    let k: usize = num(toks.next(), ln, "child count")?;
                    let children = (0..k)
                        .map(|_| num::<usize>(toks.next(), ln, "child index"))
                        .collect::<Result<Vec<_>>>()?;
                    if let Some(c) = children.iter().find(|&&c| c >= nodes.len()) {
                        return Err(Error::parse(ln, format!("forward reference to node {c}")));
                    }
                    match (tag, k) {
                        ("A", 0) => NnfNode::True,
                        ("O", 0) => NnfNode::False,
                        ("A", _) => NnfNode::And(children),
                        _ => NnfNode::Or(children),
                    }
                }
                other => return Err(Error::parse(ln, format!("unknown line type `{other}`"))),
            };
            if toks.next().is_some() {
                return Err(Error::parse(ln, "trailing tokens"));
            }
            nodes.push(node);
        }
        let (n, _, var_count) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
        if nodes.len() != n {
            return Err(Error::parse(0, format!("header declares {n} nodes, found {}", nodes.len())));
        }
        if nodes.is_empty() {
            return Err(Error::parse(0, "empty circuit"));
        }
        let root = nodes.len() - 1;
        NnfCircuit::new(nodes, root, var_count)
    }

    /// Writes the nodes reachable from the root, children first; the root comes last.
    pub fn to_c2d(&self) -> String {
        let mut reach = vec![false; self.nodes.len()];
        reach[self.root] = true;
        for i in (0..self.nodes.len()).rev() {
            if reach[i] {
                for &c in self.nodes[i].children() {
                    reach[c] = true;
                }
            }
        }
        // The root has the largest index among reachable nodes, so it is written last.
        let mut renum = vec![usize::MAX; self.nodes.len()];
        let mut lines = Vec::new();
        let mut edges = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if !reach[i] {
                continue;
            }
            renum[i] = lines.len();
            let kids = |c: &[usize]| c.iter().map(|&x| renum[x].to_string()).collect::<Vec<_>>().join(" ");
            let line = match node {
                NnfNode::True => "A 0".to_string(),
                NnfNode::False => "O 0 0".to_string(),
                NnfNode::Lit(l) => format!("L {}", l.to_dimacs()),
                NnfNode::And(c) => {
                    edges += c.len();
                    format!("A {} {}", c.len(), kids(c))
                }
                NnfNode::Or(c) => {
                    edges += c.len();
                    format!("O 0 {} {}", c.len(), kids(c))
                }
            };
            lines.push(line.trim_end().to_string());
        }
        let mut out = format!("nnf {} {} {}\n", lines.len(), edges, self.var_count);
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}
