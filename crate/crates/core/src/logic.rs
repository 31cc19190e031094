//! Variables, literals, partial instantiations, CNF formulas and literal weights.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Not;

use crate::error::{Error, Result};
use crate::scalar::Weight;

/// A Boolean variable, 1-based as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics on 0.
    pub fn new(index: u32) -> Self {
        assert!(index > 0, "variables are 1-based");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based slot for dense per-variable tables.
    pub fn slot(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit { var, positive }
    }

    pub fn pos(var: Var) -> Self {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Self {
        Lit::new(var, false)
    }

    /// Signed DIMACS encoding; panics on 0.
    pub fn from_dimacs(code: i64) -> Self {
        assert!(code != 0);
        Lit::new(Var::new(code.unsigned_abs() as u32), code > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var.0 as i64;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// True iff `value` for the variable satisfies the literal.
    pub fn satisfied_by(self, value: bool) -> bool {
        value == self.positive
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit::new(self.var, !self.positive)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A partial instantiation; read as the conjunction of its literals.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    values: BTreeMap<Var, bool>,
}

impl Term {
    pub fn new() -> Self {
        Term::default()
    }

    /// Fails when the literals bind some variable both ways.
    pub fn from_lits<I: IntoIterator<Item = Lit>>(lits: I) -> Result<Self> {
        let mut t = Term::new();
        for l in lits {
            t.bind(l.var, l.positive)?;
        }
        Ok(t)
    }

    /// Complete term over variables `1..=n` whose value for variable `i` is bit `i-1` of `bits`.
    pub fn from_bits(n: u32, bits: u64) -> Self {
        let values = (1..=n).map(|i| (Var(i), bits >> (i - 1) & 1 == 1)).collect();
        Term { values }
    }

    /// Complete term from a dense slice, `values[i]` for variable `i+1`.
    pub fn from_values(values: &[bool]) -> Self {
        Term {
            values: values
                .iter()
                .enumerate()
                .map(|(i, &b)| (Var(i as u32 + 1), b))
                .collect(),
        }
    }

    pub fn bind(&mut self, var: Var, value: bool) -> Result<()> {
        match self.values.insert(var, value) {
            Some(old) if old != value => {
                self.values.insert(var, old);
                Err(Error::ConflictingBinding(var))
            }
            _ => Ok(()),
        }
    }

    /// Overwrites any existing binding.
    pub fn set(&mut self, var: Var, value: bool) {
        self.values.insert(var, value);
    }

    pub fn unbind(&mut self, var: Var) {
        self.values.remove(&var);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.get(lit.var) == Some(lit.positive)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.values.keys().copied()
    }

    /// Literals in variable order.
    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values.iter().map(|(&v, &b)| Lit::new(v, b))
    }

    /// No variable is bound differently in the two terms.
    pub fn is_compatible(&self, other: &Term) -> bool {
        self.values
            .iter()
            .all(|(v, b)| other.get(*v).map_or(true, |o| o == *b))
    }

    /// Every literal of `self` appears in `other`.
    pub fn is_subterm_of(&self, other: &Term) -> bool {
        self.lits().all(|l| other.contains(l))
    }

    /// Union of two compatible terms.
    pub fn extended(&self, other: &Term) -> Result<Term> {
        let mut t = self.clone();
        for l in other.lits() {
            t.bind(l.var, l.positive)?;
        }
        Ok(t)
    }

    /// Keeps only the bindings of `vars`.
    pub fn restricted<F: Fn(Var) -> bool>(&self, keep: F) -> Term {
        Term {
            values: self
                .values
                .iter()
                .filter(|(v, _)| keep(**v))
                .map(|(v, b)| (*v, *b))
                .collect(),
        }
    }

    /// Dense values for variables `1..=n`, failing on the first unbound one.
    pub fn to_values(&self, n: u32) -> Result<Vec<bool>> {
        (1..=n)
            .map(|i| self.get(Var(i)).ok_or(Error::IncompleteAssignment(Var(i))))
            .collect()
    }

    /// Parses literals separated by commas or whitespace.
    ///
    /// A literal is `name`, `~name`, `-name`, `!name`, `name=1` or `name=0`;
    /// tokens `lookup` does not know are read as DIMACS integers.
    pub fn parse_with<F: Fn(&str) -> Option<Var>>(text: &str, lookup: F) -> Result<Term> {
        let mut t = Term::new();
        for tok in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let (name, value) = if let Some((n, v)) = tok.split_once('=') {
                match v {
                    "1" | "true" => (n, true),
                    "0" | "false" => (n, false),
                    _ => return Err(Error::UnknownName(tok.to_string())),
                }
            } else if let Some(n) = tok.strip_prefix(['~', '!']) {
                (n, false)
            } else {
                (tok, true)
            };
            let lit = match lookup(name) {
                Some(v) => Lit::new(v, value),
                None => {
                    let stripped = tok.strip_prefix('-').map(|n| (n, lookup(n)));
                    match (stripped, tok.parse::<i64>()) {
                        (Some((_, Some(v))), _) => Lit::neg(v),
                        (_, Ok(code)) if code != 0 && !tok.contains('=') => Lit::from_dimacs(code),
                        _ => return Err(Error::UnknownName(name.to_string())),
                    }
                }
            };
            t.bind(lit.var, lit.positive)?;
        }
        Ok(t)
    }

    /// Space-separated literals, `~` marking negation, named through `name`.
    pub fn display_with<F: Fn(Var) -> String>(&self, name: F) -> String {
        self.lits()
            .map(|l| {
                if l.positive {
                    name(l.var)
                } else {
                    format!("~{}", name(l.var))
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lits().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromIterator<Lit> for Term {
    /// Later literals overwrite earlier ones on the same variable.
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        let mut t = Term::new();
        for l in iter {
            t.set(l.var, l.positive);
        }
        t
    }
}

/// A formula in conjunctive normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    var_count: u32,
    clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new(var_count: u32) -> Self {
        Cnf { var_count, clauses: Vec::new() }
    }

    pub fn from_clauses(var_count: u32, clauses: Vec<Vec<Lit>>) -> Result<Self> {
        let mut cnf = Cnf::new(var_count);
        for c in clauses {
            cnf.add_clause(c)?;
        }
        Ok(cnf)
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) -> Result<()> {
        if let Some(l) = clause.iter().find(|l| l.var.0 > self.var_count) {
            return Err(Error::LiteralOutOfRange { lit: l.to_dimacs(), var_count: self.var_count });
        }
        self.clauses.push(clause);
        Ok(())
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn evaluate_values(&self, values: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.satisfied_by(values[l.var.slot()])))
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(u32, usize)> = None;
        let mut cnf = Cnf::new(0);
        let mut current: Vec<Lit> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(Error::parse(line_no, "duplicate header"));
                }
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::parse(line_no, "expected `p cnf <vars> <clauses>`"));
                }
                let vars = parts[2]
                    .parse::<u32>()
                    .map_err(|_| Error::parse(line_no, "bad variable count"))?;
                let clauses = parts[3]
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line_no, "bad clause count"))?;
                header = Some((vars, clauses));
                cnf.var_count = vars;
                continue;
            }
            if header.is_none() {
                return Err(Error::parse(line_no, "clause before header"));
            }
            for tok in line.split_whitespace() {
                let code: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad literal `{tok}`")))?;
                if code == 0 {
                    cnf.clauses.push(std::mem::take(&mut current));
                } else {
                    if code.unsigned_abs() > cnf.var_count as u64 {
                        return Err(Error::LiteralOutOfRange { lit: code, var_count: cnf.var_count });
                    }
                    current.push(Lit::from_dimacs(code));
                }
            }
        }
        let (_, expected) = header.ok_or_else(|| Error::parse(last_line, "missing header"))?;
        if !current.is_empty() {
            return Err(Error::parse(last_line, "clause missing terminating 0"));
        }
        if cnf.clauses.len() != expected {
            return Err(Error::parse(
                last_line,
                format!("header declares {expected} clauses, found {}", cnf.clauses.len()),
            ));
        }
        Ok(cnf)
    }

    /// Clause order and literal order are preserved.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.var_count, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Total map from literals to weights; unset literals weigh one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap<W> {
    pos: Vec<W>,
    neg: Vec<W>,
}

impl<W: Weight> WeightMap<W> {
    pub fn unit(var_count: u32) -> Self {
        WeightMap {
            pos: vec![W::one(); var_count as usize],
            neg: vec![W::one(); var_count as usize],
        }
    }

    pub fn var_count(&self) -> u32 {
        self.pos.len() as u32
    }

    /// Grows the map with unit weights as needed.
    pub fn set(&mut self, lit: Lit, weight: W) -> Result<()> {
        if !weight.is_admissible() {
            return Err(Error::InvalidWeight { lit: lit.to_string(), weight: format!("{weight:?}") });
        }
        let slot = lit.var.slot();
        if slot >= self.pos.len() {
            self.pos.resize(slot + 1, W::one());
            self.neg.resize(slot + 1, W::one());
        }
        if lit.positive {
            self.pos[slot] = weight;
        } else {
            self.neg[slot] = weight;
        }
        Ok(())
    }

    pub fn get(&self, lit: Lit) -> W {
        let table = if lit.positive { &self.pos } else { &self.neg };
        table.get(lit.var.slot()).cloned().unwrap_or_else(W::one)
    }

    /// `W(x) + W(¬x)`.
    pub fn var_sum(&self, var: Var) -> W {
        self.get(Lit::pos(var)) + self.get(Lit::neg(var))
    }

    /// Zeroes the weight of every literal contradicting `term`.
    pub fn restrict_to(&mut self, term: &Term) -> Result<()> {
        for l in term.lits() {
            self.set(!l, W::zero())?;
        }
        Ok(())
    }
}

impl WeightMap<f64> {
    /// Lines of `<dimacs-literal> <weight>`; `c` lines are comments.
    pub fn parse(text: &str, var_count: u32) -> Result<Self> {
        let mut w = WeightMap::unit(var_count);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(l), Some(x), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(i + 1, "expected `<literal> <weight>`"));
            };
            let code: i64 = l.parse().map_err(|_| Error::parse(i + 1, "bad literal"))?;
            if code == 0 || code.unsigned_abs() > var_count as u64 {
                return Err(Error::LiteralOutOfRange { lit: code, var_count });
            }
            let x: f64 = x.parse().map_err(|_| Error::parse(i + 1, "bad weight"))?;
            w.set(Lit::from_dimacs(code), x)?;
        }
        Ok(w)
    }

    /// Every literal's weight in the `parse` format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.var_count() {
            for l in [Lit::pos(Var(i)), Lit::neg(Var(i))] {
                out.push_str(&format!("{} {}\n", l.to_dimacs(), self.get(l)));
            }
        }
        out
    }
}
