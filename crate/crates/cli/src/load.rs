use std::path::Path;

use sentential::{
    ClauseOrder, Cnf, DecisionForest, DecisionFunction, Error, NaiveBayes, NnfCircuit, Sdd, SddManager, Term, Var, Vtree,
};

use crate::Failure;

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.display().to_string(), e))
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(path.display().to_string(), e))
}

/// First token of the first non-comment line.
fn header(text: &str) -> &str {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('c'))
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("")
}

/// `right-linear`, `balanced`, `random:SEED`, `constrained:V,V,...` or a vtree file.
pub fn vtree(spec: &str, n: u32) -> Result<Vtree, Failure> {
    let vars: Vec<Var> = (1..=n).map(Var::new).collect();
    let t = match spec {
        "right-linear" => Vtree::right_linear(&vars)?,
        "balanced" => Vtree::balanced(&vars)?,
        _ => {
            if let Some(seed) = spec.strip_prefix("random:") {
                let seed: u64 = seed.parse().map_err(|_| Failure::Usage(format!("bad vtree seed {seed:?}")))?;
                Vtree::random(&vars, seed)?
            } else if let Some(list) = spec.strip_prefix("constrained:") {
                let mut x = Vec::new();
                for tok in list.split(',').filter(|t| !t.is_empty()) {
                    let i: u32 = tok.parse().map_err(|_| Failure::Usage(format!("bad variable {tok:?}")))?;
                    if i == 0 || i > n {
                        return Err(Failure::Usage(format!("variable {i} outside 1..={n}")));
                    }
                    x.push(Var::new(i));
                }
                let y: Vec<Var> = vars.iter().copied().filter(|v| !x.contains(v)).collect();
                Vtree::constrained(&x, &y)?
            } else {
                let t = Vtree::parse(&read(Path::new(spec))?)?;
                if t.var_count() != n as usize {
                    return Err(Error::InvalidVtree(format!("vtree has {} variables, need {n}", t.var_count())).into());
                }
                t
            }
        }
    };
    Ok(t)
}

pub enum Circuit {
    Sdd(SddManager, Sdd),
    Nnf(NnfCircuit),
}

impl Circuit {
    pub fn var_count(&self) -> u32 {
        match self {
            Circuit::Sdd(m, _) => m.vtree().var_count() as u32,
            Circuit::Nnf(c) => c.var_count(),
        }
    }
}

/// A DIMACS CNF (compiled under `spec`), a c2d NNF, or an SDD file read
/// against the vtree file `spec`.
pub fn circuit(path: &Path, spec: &str) -> Result<Circuit, Failure> {
    let text = read(path)?;
    match header(&text) {
        "p" => {
            let cnf = Cnf::parse_dimacs(&text)?;
            let mut mgr = SddManager::new(vtree(spec, cnf.var_count())?);
            let root = mgr.compile_cnf(&cnf, ClauseOrder::ByVtree)?;
            Ok(Circuit::Sdd(mgr, root))
        }
        "nnf" => Ok(Circuit::Nnf(NnfCircuit::parse_c2d(&text)?)),
        "sdd" => {
            let t = Vtree::parse(&read(Path::new(spec)).map_err(|_| {
                Failure::Usage("an SDD file needs `--vtree <vtree file>`".into())
            })?)?;
            let mut mgr = SddManager::new(t);
            let root = mgr.read_sdd(&text)?;
            Ok(Circuit::Sdd(mgr, root))
        }
        other => Err(Error::Parse { line: 1, msg: format!("unrecognized file kind {other:?}") }.into()),
    }
}

/// A classifier: naive Bayes or forest JSON, or a DIMACS CNF compiled as an OBDD.
pub struct Model {
    pub function: DecisionFunction,
    pub protected: Vec<Var>,
}

pub fn model(path: &Path, names: Option<&str>) -> Result<Model, Failure> {
    let text = read(path)?;
    let (function, protected) = if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
        if value.get("trees").is_some() {
            let forest = DecisionForest::from_json(&text)?;
            (forest.compile()?, forest.protected_vars())
        } else {
            let nb = NaiveBayes::from_json(&text)?;
            let order: Vec<usize> = (0..nb.features.len()).collect();
            (nb.compile(&order)?, nb.protected_vars())
        }
    } else {
        (DecisionFunction::from_cnf(&Cnf::parse_dimacs(&text)?)?, Vec::new())
    };
    let function = match names {
        Some(list) => function.with_names(list.split(',').map(|s| s.trim().to_string()).collect())?,
        None => function,
    };
    Ok(Model { function, protected })
}

/// Terms given on the command line; unknown names are usage errors.
pub fn term(text: &str, parse: impl FnOnce(&str) -> sentential::Result<Term>) -> Result<Term, Failure> {
    parse(text).map_err(|e| Failure::Usage(format!("bad term {text:?}: {e}")))
}

/// Names `X3`/`x3` or DIMACS integers for variables `1..=n`.
pub fn numbered_term(text: &str, n: u32) -> Result<Term, Failure> {
    let t = term(text, |s| {
        Term::parse_with(s, |name| {
            let i: u32 = name.trim_start_matches(['x', 'X']).parse().ok()?;
            (1..=n).contains(&i).then(|| Var::new(i))
        })
    })?;
    if let Some(v) = t.vars().find(|v| v.index() > n) {
        return Err(Failure::Usage(format!("variable {v} outside 1..={n}")));
    }
    Ok(t)
}
