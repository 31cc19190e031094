mod formats;
mod load;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sentential::{
    Backend, BayesNet, Check, ClauseOrder, Cnf, Dataset, Error, ErrorKind, Graph, GridRouteSpace, Psdd, Query,
    RankingSpace, Robustness, SddManager, Term, Var, Vtree, VtreeKind, WeightMap,
};

use load::{read, write, Circuit};

pub enum Failure {
    Usage(String),
    Io(String, std::io::Error),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Res<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "sentential", version, about = "Compile, count, learn and explain with sentential decision diagrams")]
struct Cli {
    /// Print the file formats and exit.
    #[arg(long)]
    formats: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a DIMACS CNF into an SDD and report its size.
    Compile {
        cnf: PathBuf,
        /// right-linear | balanced | random:SEED | constrained:V,V,... | vtree file
        #[arg(long, default_value = "balanced")]
        vtree: String,
        /// Write the SDD here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the vtree here.
        #[arg(long)]
        vtree_out: Option<PathBuf>,
        /// Also report the model count.
        #[arg(long)]
        count: bool,
        /// Also report compile time (makes the output nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Model count of a CNF, c2d NNF or SDD file.
    Count(CircuitArgs),
    /// Weighted model count of a CNF, c2d NNF or SDD file.
    Wmc {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Lines of `<literal> <weight>`; missing literals weigh 1.
        #[arg(long)]
        weights: PathBuf,
    },
    /// Bayesian network queries.
    #[command(subcommand)]
    Bn(BnCommand),
    /// Probabilistic SDDs.
    #[command(subcommand)]
    Psdd(PsddCommand),
    /// CNF encodings of combinatorial spaces.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Explain a classifier's decision on an instance.
    Explain {
        #[command(flatten)]
        model: ModelArgs,
        /// Complete instance, e.g. "A ~B C".
        #[arg(long, allow_hyphen_values = true)]
        instance: String,
        /// Comma-separated protected features; overrides the model file.
        #[arg(long)]
        protected: Option<String>,
        /// Comma-separated subset of reasons,primes,complete,bias,robustness.
        #[arg(long, default_value = "reasons,bias,robustness")]
        queries: String,
    },
    /// Decision robustness of one instance, or a histogram over all instances.
    Robust {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "all", required_unless_present = "all")]
        instance: Option<String>,
        #[arg(long)]
        all: bool,
    },
}

#[derive(Args)]
struct CircuitArgs {
    circuit: PathBuf,
    /// Vtree spec for CNF input, vtree file for SDD input.
    #[arg(long, default_value = "balanced")]
    vtree: String,
    /// Verify decomposability, determinism and smoothness of NNF input.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct ModelArgs {
    /// Naive Bayes JSON, decision forest JSON, or DIMACS CNF.
    model: PathBuf,
    /// Comma-separated feature names for a CNF model (default X1,X2,...).
    #[arg(long)]
    names: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Balanced,
    RightLinear,
}

impl From<Shape> for VtreeKind {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Balanced => VtreeKind::Balanced,
            Shape::RightLinear => VtreeKind::RightLinear,
        }
    }
}

#[derive(Subcommand)]
enum BnCommand {
    /// Write the weighted CNF encoding of a network.
    Encode {
        network: PathBuf,
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Pr(target | evidence).
    Marginal {
        network: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        evidence: String,
        /// Also answer by enumerating the joint distribution.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, value_enum, default_value = "balanced")]
        vtree_kind: Shape,
    },
    /// Most probable complete instantiation consistent with the evidence.
    Mpe {
        network: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        evidence: String,
        #[arg(long)]
        brute_force: bool,
        #[arg(long, value_enum, default_value = "balanced")]
        vtree_kind: Shape,
    },
}

#[derive(Args)]
struct PsddFile {
    psdd: PathBuf,
    /// Vtree file the PSDD was written against.
    #[arg(long)]
    vtree: PathBuf,
}

#[derive(Subcommand)]
enum PsddCommand {
    /// Maximum-likelihood parameters for the base SDD of a CNF.
    Learn {
        #[arg(long)]
        cnf: PathBuf,
        /// CSV with a header of variable names and an optional `count` column.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        laplace: f64,
        #[arg(long, default_value = "balanced")]
        vtree: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        vtree_out: PathBuf,
    },
    /// Probability of a complete instance.
    Prob {
        #[command(flatten)]
        file: PsddFile,
        #[arg(long, allow_hyphen_values = true)]
        instance: String,
    },
    /// Probability of a partial instance.
    Mar {
        #[command(flatten)]
        file: PsddFile,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        evidence: String,
    },
    /// Most probable completion of the evidence.
    Mpe {
        #[command(flatten)]
        file: PsddFile,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        evidence: String,
    },
    /// Draw independent samples as CSV.
    Sample {
        #[command(flatten)]
        file: PsddFile,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Log-likelihood of a dataset.
    Ll {
        #[command(flatten)]
        file: PsddFile,
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Subcommand)]
enum SpaceCommand {
    /// Total orders of N items; variable (i-1)*N+j means item i at position j.
    Rankings {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simple routes across a W x H grid of cells, corner to corner.
    Grid {
        width: usize,
        height: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simple routes between two vertices of an edge-list graph.
    Graph {
        graph: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.formats {
        print!("{}", formats::TEXT);
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return ExitCode::from(2);
    };
    match run(command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let code = match &f {
                Failure::Usage(msg) => {
                    eprintln!("error: {msg}");
                    2
                }
                Failure::Io(path, e) => {
                    eprintln!("error: {path}: {e}");
                    3
                }
                Failure::Lib(e) => {
                    eprintln!("error: {e}");
                    match e.kind() {
                        ErrorKind::Format => 3,
                        ErrorKind::Semantic => 4,
                        ErrorKind::Capacity => 5,
                    }
                }
            };
            ExitCode::from(code)
        }
    }
}

fn doc(v: Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
}

fn list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn run(command: Command) -> Res<String> {
    match command {
        Command::Compile { cnf, vtree, out, vtree_out, count, timing } => {
            compile(&cnf, &vtree, out.as_deref(), vtree_out.as_deref(), count, timing)
        }
        Command::Count(args) => {
            let n = match load::circuit(&args.circuit, &args.vtree)? {
                Circuit::Sdd(m, r) => m.model_count(r)?,
                Circuit::Nnf(c) => c.smooth().model_count(check(args.check))?,
            };
            Ok(format!("{n}\n"))
        }
        Command::Wmc { circuit, weights } => {
            let c = load::circuit(&circuit.circuit, &circuit.vtree)?;
            let w = WeightMap::parse(&read(&weights)?, c.var_count())?;
            let x = match c {
                Circuit::Sdd(m, r) => m.wmc(r, &w)?,
                Circuit::Nnf(c) => c.smooth().wmc(&w, check(circuit.check))?,
            };
            Ok(format!("{x}\n"))
        }
        Command::Bn(c) => bn(c),
        Command::Psdd(c) => psdd(c),
        Command::Space(c) => space(c),
        Command::Explain { model, instance, protected, queries } => {
            explain(&model, &instance, protected.as_deref(), &queries)
        }
        Command::Robust { model, instance, all } => {
            let m = load::model(&model.model, model.names.as_deref())?;
            let f = m.function;
            if all {
                let mut out = String::from("level,count\n");
                for (level, count) in f.robustness_histogram()? {
                    out.push_str(&format!("{level},{count}\n"));
                }
                Ok(out)
            } else {
                let text = instance.expect("clap requires --instance without --all");
                let x = load::term(&text, |s| f.parse_instance(s))?;
                Ok(format!("{}\n", f.decision_robustness(&x)?))
            }
        }
    }
}

fn check(verify: bool) -> Check {
    if verify {
        Check::Verify
    } else {
        Check::Trust
    }
}

fn compile(path: &Path, spec: &str, out: Option<&Path>, vtree_out: Option<&Path>, count: bool, timing: bool) -> Res<String> {
    let cnf = Cnf::parse_dimacs(&read(path)?)?;
    let vtree = load::vtree(spec, cnf.var_count())?;
    let mut mgr = SddManager::new(vtree);
    let start = Instant::now();
    let root = mgr.compile_cnf(&cnf, ClauseOrder::ByVtree)?;
    let seconds = start.elapsed().as_secs_f64();
    if let Some(p) = out {
        write(p, &mgr.write_sdd(root)?)?;
    }
    if let Some(p) = vtree_out {
        write(p, &mgr.vtree().serialize())?;
    }
    let mut report = json!({
        "vars": cnf.var_count(),
        "clauses": cnf.clauses().len(),
        "size": mgr.size(root)?,
        "node_count": mgr.node_count(root)?,
    });
    if count {
        report["model_count"] = json!(mgr.model_count(root)?.to_string());
    }
    if timing {
        report["compile_seconds"] = json!(seconds);
    }
    Ok(doc(report))
}

fn network(path: &Path) -> Res<BayesNet> {
    Ok(BayesNet::from_json(&read(path)?)?)
}

fn bn(c: BnCommand) -> Res<String> {
    match c {
        BnCommand::Encode { network: path, cnf, weights } => {
            let enc = network(&path)?.encode();
            write(&cnf, &enc.cnf.to_dimacs())?;
            write(&weights, &enc.weights.to_text())?;
            Ok(doc(json!({
                "network_vars": enc.network_vars(),
                "vars": enc.cnf.var_count(),
                "clauses": enc.cnf.clauses().len(),
            })))
        }
        BnCommand::Marginal { network: path, target, evidence, brute_force, vtree_kind } => {
            let net = network(&path)?;
            let q = Query {
                target: load::term(&target, |s| net.parse_term(s))?,
                evidence: load::term(&evidence, |s| net.parse_term(s))?,
            };
            let p = net.compile(vtree_kind.into())?.marginal(&q)?;
            let mut report = json!({
                "target": net.format_term(&q.target),
                "evidence": net.format_term(&q.evidence),
                "probability": p,
            });
            if brute_force {
                report["brute_force"] = json!(net.query_marginal(&q, Backend::BruteForce)?);
            }
            Ok(doc(report))
        }
        BnCommand::Mpe { network: path, evidence, brute_force, vtree_kind } => {
            let net = network(&path)?;
            let e = load::term(&evidence, |s| net.parse_term(s))?;
            let (x, p) = net.compile(vtree_kind.into())?.mpe(&e)?;
            let mut report = json!({
                "evidence": net.format_term(&e),
                "assignment": net.format_term(&x),
                "probability": p,
            });
            if brute_force {
                let (y, q) = net.query_mpe(&e, Backend::BruteForce)?;
                report["brute_force"] = json!({ "assignment": net.format_term(&y), "probability": q });
            }
            Ok(doc(report))
        }
    }
}

fn numbered(t: &Term) -> String {
    t.display_with(|v| format!("X{}", v.index()))
}

fn open_psdd(f: &PsddFile) -> Res<Psdd<f64>> {
    let vtree = Vtree::parse(&read(&f.vtree)?)?;
    Ok(Psdd::read(&read(&f.psdd)?, vtree)?)
}

fn dataset(path: &Path, n: u32) -> Res<Dataset> {
    let data = Dataset::from_csv(&read(path)?)?;
    if data.var_count() != n {
        return Err(Error::InvalidModel(format!("dataset has {} columns, need {n}", data.var_count())).into());
    }
    Ok(data)
}

fn psdd(c: PsddCommand) -> Res<String> {
    match c {
        PsddCommand::Learn { cnf, data, laplace, vtree, out, vtree_out } => {
            if !(laplace >= 0.0 && laplace.is_finite()) {
                return Err(Failure::Usage(format!("laplace must be a nonnegative number, got {laplace}")));
            }
            let cnf = Cnf::parse_dimacs(&read(&cnf)?)?;
            let data = dataset(&data, cnf.var_count())?;
            let mut mgr = SddManager::new(load::vtree(&vtree, cnf.var_count())?);
            let base = mgr.compile_cnf(&cnf, ClauseOrder::ByVtree)?;
            let p: Psdd<f64> = Psdd::learn_ml(&mut mgr, base, &data, laplace)?;
            write(&out, &p.write())?;
            write(&vtree_out, &p.vtree().serialize())?;
            Ok(doc(json!({ "size": p.size(), "rows": data.len(), "examples": data.total() })))
        }
        PsddCommand::Prob { file, instance } => {
            let p = open_psdd(&file)?;
            let x = load::numbered_term(&instance, p.var_count())?;
            Ok(format!("{}\n", p.probability(&x)?))
        }
        PsddCommand::Mar { file, evidence } => {
            let p = open_psdd(&file)?;
            let e = load::numbered_term(&evidence, p.var_count())?;
            Ok(format!("{}\n", p.marginal(&e)?))
        }
        PsddCommand::Mpe { file, evidence } => {
            let p = open_psdd(&file)?;
            let e = load::numbered_term(&evidence, p.var_count())?;
            let (x, pr) = p.mpe(&e)?;
            Ok(doc(json!({ "assignment": numbered(&x), "probability": pr })))
        }
        PsddCommand::Sample { file, count, seed } => Ok(open_psdd(&file)?.sample(seed, count).to_csv()?),
        PsddCommand::Ll { file, data } => {
            let p = open_psdd(&file)?;
            let data = dataset(&data, p.var_count())?;
            Ok(doc(json!({ "log_likelihood": p.log_likelihood(&data)?, "examples": data.total() })))
        }
    }
}

fn space(c: SpaceCommand) -> Res<String> {
    let (cnf, out) = match c {
        SpaceCommand::Rankings { n, out } => (RankingSpace::new(n)?.cnf(), out),
        SpaceCommand::Grid { width, height, out } => (GridRouteSpace::new(width, height)?.cnf(), out),
        SpaceCommand::Graph { graph, from, to, out } => (Graph::parse(&read(&graph)?)?.simple_routes(from, to)?, out),
    };
    match out {
        Some(p) => {
            write(&p, &cnf.to_dimacs())?;
            Ok(doc(json!({ "vars": cnf.var_count(), "clauses": cnf.clauses().len() })))
        }
        None => Ok(cnf.to_dimacs()),
    }
}

fn explain(model: &ModelArgs, instance: &str, protected: Option<&str>, queries: &str) -> Res<String> {
    let load::Model { function: mut f, protected: declared } = load::model(&model.model, model.names.as_deref())?;
    let x = load::term(instance, |s| f.parse_instance(s))?;
    let protected: Vec<Var> = match protected {
        Some(names) => list(names)
            .map(|name| f.var(name).ok_or_else(|| Failure::Usage(format!("unknown protected feature {name:?}"))))
            .collect::<Res<_>>()?,
        None => declared,
    };
    let wanted: BTreeSet<&str> = list(queries).collect();
    if let Some(q) = wanted.iter().find(|q| !["reasons", "primes", "complete", "bias", "robustness"].contains(q)) {
        return Err(Failure::Usage(format!("unknown query {q:?}")));
    }
    let decision = f.decide(&x)?;
    let mut report = json!({
        "instance": f.format_term(&x),
        "decision": decision,
    });
    if wanted.contains("reasons") {
        let r: Vec<String> = f.sufficient_reasons(&x)?.iter().map(|t| f.format_term(t)).collect();
        report["sufficient_reasons"] = json!(r);
    }
    if wanted.contains("primes") {
        let p: Vec<String> = f.prime_implicants(decision)?.iter().map(|t| f.format_term(t)).collect();
        report["prime_implicants"] = json!(p);
    }
    if wanted.contains("complete") {
        let r = f.complete_reason(&x)?;
        report["complete_reason"] = json!({
            "edges": r.circuit.edge_count(),
            "c2d": r.circuit.to_c2d(),
        });
    }
    if wanted.contains("bias") && !protected.is_empty() {
        let names: Vec<String> = protected.iter().map(|&v| f.name(v).to_string()).collect();
        report["protected"] = json!(names);
        report["biased"] = json!(f.decision_biased(&x, &protected)?);
        report["classifier_biased"] = json!(f.classifier_biased(&protected)?);
    }
    if wanted.contains("robustness") {
        report["robustness"] = match f.decision_robustness(&x)? {
            Robustness::Finite(k) => json!(k),
            Robustness::Unbounded => json!("unbounded"),
        };
    }
    Ok(doc(report))
}
