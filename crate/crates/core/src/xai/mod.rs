//! Explaining and verifying the decisions of Boolean classifiers compiled
//! into decision diagrams.

mod forest;
mod nb;

pub use forest::{DecisionForest, TreeNode};
pub use nb::{NaiveBayes, NbFeature};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{Cnf, Lit, Term, Var};
use crate::nnf::{NnfBuilder, NnfCircuit};
use crate::sdd::{ClauseOrder, Ix, Kind, Sdd, SddManager, FALSE, TRUE};
use crate::vtree::Vtree;

const MAX_PRIME_VARS: u32 = 20;
const MAX_ENUMERATION_VARS: u32 = 16;

/// A Boolean function of features `1..=n`, held as an SDD in its own manager.
#[derive(Debug, Clone)]
pub struct DecisionFunction {
    mgr: SddManager,
    root: Sdd,
    names: Vec<String>,
}

impl DecisionFunction {
    /// `names[i]` names variable `i+1`; the vtree must cover exactly those variables.
    pub fn new(mgr: SddManager, root: Sdd, names: Vec<String>) -> Result<Self> {
        let n = names.len() as u32;
        let mut vars: Vec<u32> = mgr.vtree().vars().iter().map(|v| v.index()).collect();
        vars.sort_unstable();
        if vars != (1..=n).collect::<Vec<_>>() {
            return Err(Error::InvalidModel(format!("vtree must cover exactly variables 1..={n}")));
        }
        mgr.ix(root)?;
        Ok(DecisionFunction { mgr, root, names })
    }

    fn default_names(n: u32) -> Vec<String> {
        (1..=n).map(|i| format!("X{i}")).collect()
    }

    /// Compiles `cnf` as an OBDD with variable order `1..=n`.
    pub fn from_cnf(cnf: &Cnf) -> Result<Self> {
        let n = cnf.var_count();
        let vars: Vec<Var> = (1..=n).map(Var::new).collect();
        let mut mgr = SddManager::new(Vtree::right_linear(&vars)?);
        let root = mgr.compile_cnf(cnf, ClauseOrder::ByVtree)?;
        DecisionFunction::new(mgr, root, Self::default_names(n))
    }

    /// OBDD of the function given by its truth table; `f` receives `values[i]` for variable `i+1`.
    pub fn from_fn(n: u32, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        if n > MAX_PRIME_VARS {
            return Err(Error::TooManyVariables { what: "truth-table construction", limit: MAX_PRIME_VARS, actual: n });
        }
        let vars: Vec<Var> = (1..=n).map(Var::new).collect();
        let mut mgr = SddManager::new(Vtree::right_linear(&vars)?);
        let mut values = vec![false; n as usize];
        let root = shannon(&mut mgr, &f, &mut values, 0);
        let root = mgr.wrap(root);
        DecisionFunction::new(mgr, root, Self::default_names(n))
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.names.len() {
            return Err(Error::InvalidModel(format!("expected {} names, got {}", self.names.len(), names.len())));
        }
        let unique: HashSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidModel("duplicate feature name".into()));
        }
        self.names = names;
        Ok(self)
    }

    pub fn manager(&self) -> &SddManager {
        &self.mgr
    }

    pub fn root(&self) -> Sdd {
        self.root
    }

    pub fn var_count(&self) -> u32 {
        self.names.len() as u32
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name).map(|i| Var::new(i as u32 + 1))
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.slot()]
    }

    pub fn parse_term(&self, text: &str) -> Result<Term> {
        let t = Term::parse_with(text, |s| self.var(s))?;
        if let Some(v) = t.vars().find(|v| v.index() > self.var_count()) {
            return Err(Error::UnknownVariable(v));
        }
        Ok(t)
    }

    /// Complete instance; every feature must be bound.
    pub fn parse_instance(&self, text: &str) -> Result<Term> {
        let t = self.parse_term(text)?;
        t.to_values(self.var_count())?;
        Ok(t)
    }

    pub fn format_term(&self, t: &Term) -> String {
        t.display_with(|v| self.name(v).to_string())
    }

    pub fn evaluate(&self, values: &[bool]) -> bool {
        let t = Term::from_values(values);
        self.mgr.evaluate(self.root, &t).expect("instance binds every feature")
    }

    pub fn decide(&self, x: &Term) -> Result<bool> {
        self.mgr.evaluate(self.root, x)
    }

    pub fn is_constant(&self) -> Option<bool> {
        if self.mgr.is_true(self.root) {
            Some(true)
        } else if self.mgr.is_false(self.root) {
            Some(false)
        } else {
            None
        }
    }

    /// The function itself, or its complement when `polarity` is false.
    fn polar(&mut self, polarity: bool) -> Sdd {
        if polarity {
            self.root
        } else {
            self.mgr.negate(self.root).expect("own node")
        }
    }

    /// Whether `t` forces the function to `polarity`.
    pub fn is_implicant(&mut self, t: &Term, polarity: bool) -> Result<bool> {
        let g = self.polar(polarity);
        let c = self.mgr.condition(g, t)?;
        Ok(self.mgr.is_true(c))
    }

    /// Minimal terms forcing the function to `polarity`, sorted.
    pub fn prime_implicants(&mut self, polarity: bool) -> Result<Vec<Term>> {
        let n = self.var_count();
        if n > MAX_PRIME_VARS {
            return Err(Error::TooManyVariables { what: "prime implicants", limit: MAX_PRIME_VARS, actual: n });
        }
        let g = self.polar(polarity);
        let mut memo = HashMap::new();
        let mut out = self.primes(g, None, &mut memo)?;
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    /// Prime implicants of `g` by Shannon expansion on its first variable.
    /// With `within` set, only primes that are subterms of it are produced.
    fn primes(&mut self, g: Sdd, within: Option<&Term>, memo: &mut HashMap<Sdd, Vec<Term>>) -> Result<Vec<Term>> {
        if self.mgr.is_false(g) {
            return Ok(Vec::new());
        }
        if self.mgr.is_true(g) {
            return Ok(vec![Term::new()]);
        }
        if let Some(p) = memo.get(&g) {
            return Ok(p.clone());
        }
        let x = self.mgr.support(g)?[0];
        let g0 = self.mgr.condition(g, &Term::from_lits([Lit::neg(x)])?)?;
        let g1 = self.mgr.condition(g, &Term::from_lits([Lit::pos(x)])?)?;
        let both = self.mgr.conjoin(g0, g1)?;
        let shared = self.primes(both, within, memo)?;
        let shared_set: HashSet<&Term> = shared.iter().collect();
        let mut out = shared.clone();
        for (branch, value) in [(g0, false), (g1, true)] {
            if within.is_some_and(|t| t.get(x) != Some(value)) {
                continue;
            }
            for p in self.primes(branch, within, memo)? {
                if !shared_set.contains(&p) {
                    let mut q = p;
                    q.set(x, value);
                    out.push(q);
                }
            }
        }
        memo.insert(g, out.clone());
        Ok(out)
    }

    /// Prime implicants of the decision on `x` that `x` satisfies, sorted.
    pub fn sufficient_reasons(&mut self, x: &Term) -> Result<Vec<Term>> {
        let d = self.decide(x)?;
        let g = self.polar(d);
        let mut out = self.primes(g, Some(x), &mut HashMap::new())?;
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    fn require_obdd(&self) -> Result<()> {
        if self.mgr.vtree().is_right_linear() {
            Ok(())
        } else {
            Err(Error::NotObdd)
        }
    }

    /// For an OBDD node: the variable tested, the child agreeing with `x`, and the other child.
    fn branch(&self, g: Ix, x: &Term) -> (Var, Lit, Ix, Ix) {
        match self.mgr.kind(g) {
            Kind::Literal(l) => {
                let agree = x.contains(*l);
                let (a, d) = if agree { (TRUE, FALSE) } else { (FALSE, TRUE) };
                (l.var(), Lit::new(l.var(), x.get(l.var()).expect("complete instance")), a, d)
            }
            Kind::Decision(els) => {
                let lit_of = |p: Ix| match self.mgr.kind(p) {
                    Kind::Literal(l) => *l,
                    _ => unreachable!("primes of a right-linear vtree are literals"),
                };
                let (p0, s0) = els[0];
                let (_, s1) = els[1];
                let l = lit_of(p0);
                let value = x.get(l.var()).expect("complete instance");
                let (a, d) = if l.satisfied_by(value) { (s0, s1) } else { (s1, s0) };
                (l.var(), Lit::new(l.var(), value), a, d)
            }
            _ => unreachable!("constants have no branch"),
        }
    }

    /// Monotone circuit over the instance's literals that holds exactly on the
    /// inputs sharing with `x` some sufficient reason for its decision.
    pub fn complete_reason(&mut self, x: &Term) -> Result<ReasonCircuit> {
        self.require_obdd()?;
        let d = self.decide(x)?;
        let g = self.polar(d);
        let g = self.mgr.ix(g)?;
        let mut b = NnfBuilder::new(self.var_count());
        let t = b.constant(true);
        let f = b.constant(false);
        let mut map: HashMap<Ix, usize> = HashMap::from([(TRUE, t), (FALSE, f)]);
        for node in self.mgr.reachable(g) {
            if node == TRUE || node == FALSE {
                continue;
            }
            let (_, lx, a, dis) = self.branch(node, x);
            let (ra, rd) = (map[&a], map[&dis]);
            let r = if ra == f {
                f
            } else if rd == t {
                ra
            } else {
                let lit = b.lit(lx);
                let left = if ra == t { lit } else { b.and(vec![lit, ra]) };
                if rd == f {
                    left
                } else {
                    let right = if ra == t { rd } else { b.and(vec![ra, rd]) };
                    b.or(vec![left, right])
                }
            };
            map.insert(node, r);
        }
        Ok(ReasonCircuit { circuit: b.finish(map[&g]), instance: x.clone(), decision: d })
    }

    /// Whether some change to protected features alone would flip the decision on `x`.
    pub fn decision_biased(&mut self, x: &Term, protected: &[Var]) -> Result<bool> {
        let fixed = x.restricted(|v| !protected.contains(&v));
        let c = self.mgr.condition(self.root, &fixed)?;
        Ok(!(self.mgr.is_true(c) || self.mgr.is_false(c)))
    }

    /// Whether the function depends on some protected feature.
    pub fn classifier_biased(&mut self, protected: &[Var]) -> Result<bool> {
        for &p in protected {
            let hi = self.mgr.condition(self.root, &Term::from_lits([Lit::pos(p)])?)?;
            let lo = self.mgr.condition(self.root, &Term::from_lits([Lit::neg(p)])?)?;
            if hi != lo {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Fewest feature flips that change the decision on `x`.
    pub fn decision_robustness(&self, x: &Term) -> Result<Robustness> {
        self.require_obdd()?;
        let values = x.to_values(self.var_count())?;
        Ok(self.flips()?.robustness(&values))
    }

    fn flips(&self) -> Result<Flips> {
        let root = self.mgr.ix(self.root)?;
        let mut at: HashMap<Ix, usize> = HashMap::new();
        let mut f = Flips { slot: Vec::new(), hi: Vec::new(), lo: Vec::new(), root: Target::Const(false) };
        let target = |at: &HashMap<Ix, usize>, g: Ix| match g {
            TRUE => Target::Const(true),
            FALSE => Target::Const(false),
            _ => Target::Node(at[&g]),
        };
        for node in self.mgr.reachable(root) {
            let (var, hi, lo) = match self.mgr.kind(node) {
                Kind::True | Kind::False => continue,
                Kind::Literal(l) => (l.var(), Target::Const(l.is_positive()), Target::Const(!l.is_positive())),
                Kind::Decision(els) => {
                    let Kind::Literal(l) = self.mgr.kind(els[0].0) else {
                        unreachable!("primes of a right-linear vtree are literals")
                    };
                    let (first, second) = (target(&at, els[0].1), target(&at, els[1].1));
                    if l.is_positive() {
                        (l.var(), first, second)
                    } else {
                        (l.var(), second, first)
                    }
                }
            };
            at.insert(node, f.slot.len());
            f.slot.push(var.slot());
            f.hi.push(hi);
            f.lo.push(lo);
        }
        f.root = target(&at, root);
        Ok(f)
    }

    /// Instance count per robustness level over all `2^n` instances.
    pub fn robustness_histogram(&self) -> Result<BTreeMap<Robustness, u64>> {
        let n = self.var_count();
        if n > MAX_ENUMERATION_VARS {
            return Err(Error::TooManyVariables { what: "robustness enumeration", limit: MAX_ENUMERATION_VARS, actual: n });
        }
        self.require_obdd()?;
        let flips = self.flips()?;
        let mut hist = BTreeMap::new();
        for bits in 0..1u64 << n {
            let values: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let r = flips.robustness(&values);
            *hist.entry(r).or_insert(0) += 1;
        }
        Ok(hist)
    }

    /// Average decision robustness over all instances.
    pub fn model_robustness(&self) -> Result<f64> {
        if self.is_constant().is_some() {
            return Err(Error::ConstantFunction);
        }
        let hist = self.robustness_histogram()?;
        let total: u64 = hist
            .iter()
            .map(|(r, c)| match r {
                Robustness::Finite(k) => *k as u64 * c,
                Robustness::Unbounded => unreachable!("non-constant functions can always flip"),
            })
            .sum();
        Ok(total as f64 / (1u64 << self.var_count()) as f64)
    }
}

fn shannon(mgr: &mut SddManager, f: &dyn Fn(&[bool]) -> bool, values: &mut Vec<bool>, i: usize) -> Ix {
    if i == values.len() {
        return if f(values) { TRUE } else { FALSE };
    }
    values[i] = true;
    let hi = shannon(mgr, f, values, i + 1);
    values[i] = false;
    let lo = shannon(mgr, f, values, i + 1);
    ite(mgr, Var::new(i as u32 + 1), hi, lo)
}

pub(crate) fn ite(mgr: &mut SddManager, x: Var, hi: Ix, lo: Ix) -> Ix {
    let p = mgr.lit_ix(Lit::pos(x)).expect("variable in vtree");
    let n = mgr.lit_ix(Lit::neg(x)).expect("variable in vtree");
    let a = mgr.and(p, hi);
    let b = mgr.and(n, lo);
    mgr.or(a, b)
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Const(bool),
    Node(usize),
}

/// An OBDD as arrays, children before parents.
struct Flips {
    slot: Vec<usize>,
    hi: Vec<Target>,
    lo: Vec<Target>,
    root: Target,
}

impl Flips {
    fn decide(&self, values: &[bool]) -> bool {
        let mut t = self.root;
        loop {
            match t {
                Target::Const(b) => return b,
                Target::Node(i) => t = if values[self.slot[i]] { self.hi[i] } else { self.lo[i] },
            }
        }
    }

    fn robustness(&self, values: &[bool]) -> Robustness {
        let d = self.decide(values);
        let mut cost: Vec<Option<u32>> = Vec::with_capacity(self.slot.len());
        let at = |cost: &[Option<u32>], t: Target| match t {
            Target::Const(b) => (b != d).then_some(0),
            Target::Node(i) => cost[i],
        };
        for i in 0..self.slot.len() {
            let (agree, flip) = if values[self.slot[i]] { (self.hi[i], self.lo[i]) } else { (self.lo[i], self.hi[i]) };
            let c = match (at(&cost, agree), at(&cost, flip).map(|c| c + 1)) {
                (Some(p), Some(q)) => Some(p.min(q)),
                (p, q) => p.or(q),
            };
            cost.push(c);
        }
        at(&cost, self.root).map_or(Robustness::Unbounded, Robustness::Finite)
    }
}

/// Minimum flip count, or unbounded for constant functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Robustness {
    Finite(u32),
    Unbounded,
}

impl fmt::Display for Robustness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Robustness::Finite(k) => write!(f, "{k}"),
            Robustness::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// The complete reason for a decision as a monotone circuit over the instance's literals.
#[derive(Debug, Clone)]
pub struct ReasonCircuit {
    pub circuit: NnfCircuit,
    pub instance: Term,
    pub decision: bool,
}

impl ReasonCircuit {
    /// True guarantees the classifier gives `y` the same decision.
    pub fn decision_sticks(&self, y: &Term) -> Result<bool> {
        self.circuit.evaluate(y)
    }
}
