//! Binary Bayesian networks, their weighted CNF encoding, and inference by
//! compiling the encoding and counting.
//!
//! Network variable `i` (0-based, in declaration order) is CNF variable `i+1`,
//! so terms over network variables can be used directly on the encoding.
//! Parameter variables follow, two per CPT row.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{Cnf, Lit, Term, Var, WeightMap};
use crate::nnf::{Check, NnfCircuit};
use crate::sdd::{ClauseOrder, SddManager};
use crate::vtree::Vtree;

const SUM_TOLERANCE: f64 = 1e-12;
const BRUTE_FORCE_LIMIT: u32 = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum CptEntry {
    Theta(f64),
    Pair(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkFile {
    variables: Vec<String>,
    parents: Vec<Vec<String>>,
    cpt: Vec<Vec<CptEntry>>,
}

/// A network over binary variables.
///
/// CPT rows are indexed by parent instantiations in binary counting order:
/// the first parent is the most significant bit and `true` counts as 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    /// `theta[i][u]` is θ(x_i = true | u).
    theta: Vec<Vec<f64>>,
    topo: Vec<usize>,
}

impl BayesNet {
    pub fn new(names: Vec<String>, parents: Vec<Vec<usize>>, theta: Vec<Vec<f64>>) -> Result<Self> {
        let n = names.len();
        if parents.len() != n || theta.len() != n {
            return Err(Error::InvalidNetwork("variables, parents and cpt lengths differ".into()));
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate variable {name:?}")));
            }
        }
        for i in 0..n {
            if parents[i].iter().any(|&p| p >= n || p == i) {
                return Err(Error::InvalidNetwork(format!("bad parent list for {:?}", names[i])));
            }
            let rows = 1usize
                .checked_shl(parents[i].len() as u32)
                .ok_or_else(|| Error::InvalidNetwork("too many parents".into()))?;
            if theta[i].len() != rows {
                return Err(Error::InvalidNetwork(format!(
                    "{:?} needs {rows} cpt rows, got {}",
                    names[i],
                    theta[i].len()
                )));
            }
            if let Some(t) = theta[i].iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return Err(Error::InvalidNetwork(format!("parameter {t} of {:?} outside [0,1]", names[i])));
            }
        }
        let topo = topological_order(&parents).ok_or_else(|| Error::InvalidNetwork("cyclic parent graph".into()))?;
        Ok(BayesNet { names, parents, theta, topo })
    }

    /// Reads the JSON network format; a CPT entry is θ(x|u) or the pair [θ(x|u), θ(¬x|u)].
    pub fn from_json(text: &str) -> Result<Self> {
        let f: NetworkFile = serde_json::from_str(text)?;
        let index: HashMap<&str, usize> = f.variables.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut parents = Vec::with_capacity(f.parents.len());
        for ps in &f.parents {
            let mut row = Vec::with_capacity(ps.len());
            for p in ps {
                row.push(*index.get(p.as_str()).ok_or_else(|| Error::InvalidNetwork(format!("unknown parent {p:?}")))?);
            }
            parents.push(row);
        }
        let mut theta = Vec::with_capacity(f.cpt.len());
        for (i, rows) in f.cpt.iter().enumerate() {
            let mut out = Vec::with_capacity(rows.len());
            for e in rows {
                out.push(match e {
                    CptEntry::Theta(t) => *t,
                    CptEntry::Pair(p) if p.len() == 2 => {
                        if (p[0] + p[1] - 1.0).abs() > SUM_TOLERANCE {
                            return Err(Error::InvalidNetwork(format!(
                                "cpt row of {:?} sums to {}",
                                f.variables.get(i).map_or("?", |s| s.as_str()),
                                p[0] + p[1]
                            )));
                        }
                        p[0]
                    }
                    CptEntry::Pair(p) => {
                        return Err(Error::InvalidNetwork(format!("non-binary cpt row with {} values", p.len())))
                    }
                });
            }
            theta.push(out);
        }
        BayesNet::new(f.variables, parents, theta)
    }

    pub fn to_json(&self) -> String {
        let f = NetworkFile {
            variables: self.names.clone(),
            parents: self
                .parents
                .iter()
                .map(|ps| ps.iter().map(|&p| self.names[p].clone()).collect())
                .collect(),
            cpt: self
                .theta
                .iter()
                .map(|rows| rows.iter().map(|&t| CptEntry::Pair(vec![t, 1.0 - t])).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("network serializes")
    }

    /// Random network over `n` variables in which variable `i` draws up to
    /// `max_parents` parents among variables `0..i`.
    pub fn random(n: usize, max_parents: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..n).map(|i| format!("X{}", i + 1)).collect();
        let mut parents = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        for i in 0..n {
            let k = rng.gen_range(0..=max_parents.min(i));
            let mut pool: Vec<usize> = (0..i).collect();
            let mut ps = Vec::with_capacity(k);
            for _ in 0..k {
                ps.push(pool.swap_remove(rng.gen_range(0..pool.len())));
            }
            ps.sort_unstable();
            theta.push((0..1usize << k).map(|_| rng.gen::<f64>()).collect());
            parents.push(ps);
        }
        BayesNet::new(names, parents, theta).expect("random network is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    /// θ(x_i = value | row u).
    pub fn theta(&self, i: usize, u: usize, value: bool) -> f64 {
        let t = self.theta[i][u];
        if value {
            t
        } else {
            1.0 - t
        }
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name).map(|i| Var::new(i as u32 + 1))
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.slot()]
    }

    pub fn parse_term(&self, text: &str) -> Result<Term> {
        let t = Term::parse_with(text, |s| self.var(s))?;
        if let Some(v) = t.vars().find(|v| v.slot() >= self.len()) {
            return Err(Error::UnknownVariable(v));
        }
        Ok(t)
    }

    pub fn format_term(&self, t: &Term) -> String {
        t.display_with(|v| self.name(v).to_string())
    }

    fn row_of(&self, i: usize, values: &[bool]) -> usize {
        self.parents[i].iter().fold(0, |u, &p| (u << 1) | values[p] as usize)
    }

    /// Probability of a complete instantiation.
    pub fn joint(&self, values: &[bool]) -> f64 {
        (0..self.len()).map(|i| self.theta(i, self.row_of(i, values), values[i])).product()
    }

    /// Every complete instantiation with its probability.
    pub fn joint_brute_force(&self) -> Result<BTreeMap<Term, f64>> {
        let n = self.len() as u32;
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::TooManyVariables { what: "brute-force joint", limit: BRUTE_FORCE_LIMIT, actual: n });
        }
        Ok((0..1u64 << n)
            .map(|bits| {
                let t = Term::from_bits(n, bits);
                let p = self.joint(&t.to_values(n).expect("complete"));
                (t, p)
            })
            .collect())
    }

    pub fn encode(&self) -> BnEncoding {
        let n = self.len() as u32;
        let mut next = n;
        let mut params = Vec::with_capacity(self.len());
        let mut weights = WeightMap::unit(n);
        let mut clauses: Vec<Vec<Lit>> = Vec::new();
        for i in 0..self.len() {
            let x = Var::new(i as u32 + 1);
            let k = self.parents[i].len();
            let mut rows = Vec::with_capacity(1 << k);
            for u in 0..1usize << k {
                let us: Vec<Lit> = self.parents[i]
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| Lit::new(Var::new(p as u32 + 1), u >> (k - 1 - j) & 1 == 1))
                    .collect();
                let mut pair = [x; 2];
                for (slot, value) in [(0, true), (1, false)] {
                    next += 1;
                    let pv = Var::new(next);
                    pair[slot] = pv;
                    let xl = Lit::new(x, value);
                    let mut long = vec![!xl];
                    long.extend(us.iter().map(|&l| !l));
                    long.push(Lit::pos(pv));
                    clauses.push(long);
                    clauses.push(vec![Lit::neg(pv), xl]);
                    for &l in &us {
                        clauses.push(vec![Lit::neg(pv), l]);
                    }
                    weights.set(Lit::pos(pv), self.theta(i, u, value)).expect("parameters are admissible");
                    weights.set(Lit::neg(pv), 1.0).expect("one is admissible");
                }
                rows.push((pair[0], pair[1]));
            }
            params.push(rows);
        }
        let cnf = Cnf::from_clauses(next, clauses).expect("encoding literals are in range");
        BnEncoding { cnf, weights, network_vars: n, params }
    }

    /// Topological order with each network variable followed by its parameter variables.
    fn interleaved_order(&self, enc: &BnEncoding) -> Vec<Var> {
        let mut order = Vec::with_capacity(enc.cnf.var_count() as usize);
        for &i in &self.topo {
            order.push(Var::new(i as u32 + 1));
            for &(p, q) in &enc.params[i] {
                order.push(p);
                order.push(q);
            }
        }
        order
    }

    pub fn compile(&self, shape: VtreeKind) -> Result<CompiledBn> {
        let enc = self.encode();
        let order = self.interleaved_order(&enc);
        if order.is_empty() {
            return Err(Error::InvalidNetwork("network has no variables".into()));
        }
        let vtree = match shape {
            VtreeKind::Balanced => Vtree::balanced(&order)?,
            VtreeKind::RightLinear => Vtree::right_linear(&order)?,
        };
        let mut mgr = SddManager::new(vtree);
        let root = mgr.compile_cnf(&enc.cnf, ClauseOrder::ByVtree)?;
        let circuit = mgr.to_nnf(root)?.smooth();
        Ok(CompiledBn { net: self.clone(), enc, circuit })
    }

    /// Pr(target | evidence) by summing the joint table.
    pub fn marginal_brute_force(&self, q: &Query) -> Result<f64> {
        let joint = self.joint_brute_force()?;
        let pe: f64 = joint.iter().filter(|(t, _)| q.evidence.is_subterm_of(t)).map(|(_, p)| p).sum();
        if pe == 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        if !q.target.is_compatible(&q.evidence) {
            return Ok(0.0);
        }
        let both = q.target.extended(&q.evidence)?;
        let pte: f64 = joint.iter().filter(|(t, _)| both.is_subterm_of(t)).map(|(_, p)| p).sum();
        Ok(pte / pe)
    }

    /// Most probable completion of `evidence`; ties keep the first in binary counting order.
    pub fn mpe_brute_force(&self, evidence: &Term) -> Result<(Term, f64)> {
        let mut best: Option<(Term, f64)> = None;
        for (t, p) in self.joint_brute_force()? {
            if evidence.is_subterm_of(&t) && best.as_ref().is_none_or(|(_, b)| p > *b) {
                best = Some((t, p));
            }
        }
        match best {
            Some((_, p)) if p == 0.0 => Err(Error::ZeroProbabilityEvidence),
            Some(b) => Ok(b),
            None => Err(Error::ZeroProbabilityEvidence),
        }
    }

    pub fn query_marginal(&self, q: &Query, backend: Backend) -> Result<f64> {
        match backend {
            Backend::CompileSdd => self.compile(VtreeKind::Balanced)?.marginal(q),
            Backend::BruteForce => self.marginal_brute_force(q),
        }
    }

    pub fn query_mpe(&self, evidence: &Term, backend: Backend) -> Result<(Term, f64)> {
        match backend {
            Backend::CompileSdd => self.compile(VtreeKind::Balanced)?.mpe(evidence),
            Backend::BruteForce => self.mpe_brute_force(evidence),
        }
    }
}

fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    let mut children = vec![Vec::new(); n];
    for (i, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(i);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VtreeKind {
    #[default]
    Balanced,
    RightLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    CompileSdd,
    BruteForce,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Query {
    pub target: Term,
    pub evidence: Term,
}

/// Weighted CNF whose weighted model count is the network's joint distribution.
#[derive(Debug, Clone)]
pub struct BnEncoding {
    pub cnf: Cnf,
    pub weights: WeightMap<f64>,
    network_vars: u32,
    /// Per network variable, per CPT row: (P_{x|u}, P_{¬x|u}).
    params: Vec<Vec<(Var, Var)>>,
}

impl BnEncoding {
    pub fn indicator_of(&self, i: usize) -> Var {
        Var::new(i as u32 + 1)
    }

    /// Parameter variable of θ(x_i = value | row u).
    pub fn param_var_of(&self, i: usize, u: usize, value: bool) -> Var {
        let (p, q) = self.params[i][u];
        if value {
            p
        } else {
            q
        }
    }

    pub fn network_vars(&self) -> u32 {
        self.network_vars
    }
}

/// A network compiled once into a smooth d-DNNF and queried many times.
#[derive(Debug, Clone)]
pub struct CompiledBn {
    net: BayesNet,
    enc: BnEncoding,
    circuit: NnfCircuit,
}

impl CompiledBn {
    pub fn network(&self) -> &BayesNet {
        &self.net
    }

    pub fn encoding(&self) -> &BnEncoding {
        &self.enc
    }

    pub fn circuit(&self) -> &NnfCircuit {
        &self.circuit
    }

    /// WMC of the encoding conjoined with `t`, realized by zeroing weights.
    pub fn probability_of(&self, t: &Term) -> Result<f64> {
        let mut w = self.enc.weights.clone();
        w.restrict_to(t)?;
        self.circuit.wmc(&w, Check::Trust)
    }

    pub fn marginal(&self, q: &Query) -> Result<f64> {
        let pe = self.probability_of(&q.evidence)?;
        if pe == 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        if !q.target.is_compatible(&q.evidence) {
            return Ok(0.0);
        }
        let pte = self.probability_of(&q.target.extended(&q.evidence)?)?;
        Ok(pte / pe)
    }

    pub fn mpe(&self, evidence: &Term) -> Result<(Term, f64)> {
        let mut w = self.enc.weights.clone();
        w.restrict_to(evidence)?;
        let (model, p) = match self.circuit.max_weight_model(&w, Check::Trust) {
            Err(Error::Unsatisfiable) => return Err(Error::ZeroProbabilityEvidence),
            r => r?,
        };
        if p == 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        let n = self.enc.network_vars;
        Ok((model.restricted(|v| v.index() <= n), p))
    }
}
