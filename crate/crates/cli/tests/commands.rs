use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ENROLLMENT: &str = "p cnf 4 3\n4 3 0\n-1 4 0\n-2 1 3 0\n";
const ADMISSION: &str = "p cnf 3 3\n1 -3 0\n2 3 0\n1 2 0\n";

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("sentential-{}-{name}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentential")).args(args).output().unwrap()
}

fn stdout(args: &[&dyn AsRef<std::ffi::OsStr>]) -> String {
    let out = run(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&dyn AsRef<std::ffi::OsStr>]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn code(args: &[&dyn AsRef<std::ffi::OsStr>]) -> i32 {
    let out = run(args);
    assert!(out.stdout.is_empty() || out.status.success());
    out.status.code().unwrap()
}

fn p(path: &Path) -> &std::ffi::OsStr {
    path.as_os_str()
}

#[test]
fn compile_reports_the_count_and_files_read_back() {
    let s = Scratch::new("compile");
    let cnf = s.file("e.cnf", ENROLLMENT);
    let (sdd, vtree) = (s.path("e.sdd"), s.path("e.vtree"));
    let report = json(&[&"compile", &p(&cnf), &"--count", &"--out", &p(&sdd), &"--vtree-out", &p(&vtree)]);
    assert_eq!(report["model_count"], "9");
    assert!(report.get("compile_seconds").is_none());
    assert_eq!(stdout(&[&"count", &p(&sdd), &"--vtree", &p(&vtree)]), "9\n");
    for spec in ["right-linear", "balanced", "random:3", "constrained:1,4"] {
        assert_eq!(stdout(&[&"count", &p(&cnf), &"--vtree", &spec]), "9\n", "{spec}");
    }
}

#[test]
fn empty_cnf_counts_every_assignment() {
    let s = Scratch::new("empty");
    let cnf = s.file("t.cnf", "p cnf 3 0\n");
    assert_eq!(stdout(&[&"count", &p(&cnf)]), "8\n");
    let w = s.file("t.w", "1 0.25\n-1 0.75\n");
    assert_eq!(stdout(&[&"wmc", &p(&cnf), &"--weights", &p(&w)]), "4\n");
}

#[test]
fn c2d_input_is_counted() {
    let s = Scratch::new("c2d");
    let nnf = s.file("a.nnf", "nnf 3 2 2\nL 1\nL 2\nA 2 0 1\n");
    assert_eq!(stdout(&[&"count", &p(&nnf), &"--check"]), "1\n");
    let bad = s.file("b.nnf", "nnf 3 2 1\nL 1\nL -1\nA 2 0 1\n");
    assert_eq!(code(&[&"count", &p(&bad), &"--check"]), 4);
}

#[test]
fn spaces_have_the_expected_counts() {
    let s = Scratch::new("spaces");
    let r = s.path("r.cnf");
    json(&[&"space", &"rankings", &"4", &"--out", &p(&r)]);
    assert_eq!(stdout(&[&"count", &p(&r)]), "24\n");
    let g = s.file("g.cnf", &stdout(&[&"space", &"grid", &"2", &"2"]));
    assert_eq!(stdout(&[&"count", &p(&g)]), "6\n");
    let k4 = s.file("k4.txt", "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let routes = s.file("k4.cnf", &stdout(&[&"space", &"graph", &p(&k4), &"--from", &"0", &"--to", &"3"]));
    assert_eq!(stdout(&[&"count", &p(&routes)]), "5\n");
}

#[test]
fn learned_uniform_psdd_gives_each_model_one_ninth() {
    let s = Scratch::new("psdd");
    let cnf = s.file("e.cnf", ENROLLMENT);
    let mut csv = String::from("X1,X2,X3,X4\n");
    for b in 0..16u32 {
        let v: Vec<bool> = (0..4).map(|i| b >> i & 1 == 1).collect();
        let (a, k, l, pp) = (v[0], v[1], v[2], v[3]);
        if (pp || l) && (!a || pp) && (!k || a || l) {
            let cells: Vec<&str> = v.iter().map(|&x| if x { "1" } else { "0" }).collect();
            csv.push_str(&cells.join(","));
            csv.push('\n');
        }
    }
    let data = s.file("u.csv", &csv);
    let (out, vt) = (s.path("e.psdd"), s.path("e.vtree"));
    json(&[&"psdd", &"learn", &"--cnf", &p(&cnf), &"--data", &p(&data), &"--laplace", &"0", &"--out", &p(&out), &"--vtree-out", &p(&vt)]);
    let prob: f64 = stdout(&[&"psdd", &"prob", &p(&out), &"--vtree", &p(&vt), &"--instance", &"X1 X2 X3 X4"]).trim().parse().unwrap();
    assert!((prob - 1.0 / 9.0).abs() < 1e-12);
    let outside: f64 = stdout(&[&"psdd", &"prob", &p(&out), &"--vtree", &p(&vt), &"--instance", &"1 -2 -3 -4"]).trim().parse().unwrap();
    assert_eq!(outside, 0.0);

    let sample = |seed: &str| stdout(&[&"psdd", &"sample", &p(&out), &"--vtree", &p(&vt), &"--count", &"20", &"--seed", &seed]);
    assert_eq!(sample("7"), sample("7"));
    assert!(sample("7").starts_with("X1,X2,X3,X4,count\n"));

    let bad = s.file("bad.csv", "X1,X2,X3,X4\n1,1,1,1\n0,0,0,0\n");
    let out = run(&[&"psdd" as &dyn AsRef<std::ffi::OsStr>, &"learn", &"--cnf", &p(&cnf), &"--data", &p(&bad), &"--out", &p(&s.path("x")), &"--vtree-out", &p(&s.path("y"))]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}

#[test]
fn explanations_of_the_admission_function() {
    let s = Scratch::new("explain");
    let f = s.file("f.cnf", ADMISSION);
    let report = json(&[&"explain", &p(&f), &"--names", &"A,B,C", &"--instance", &"A B ~C", &"--queries", &"reasons,primes"]);
    assert_eq!(report["decision"], true);
    assert_eq!(report["sufficient_reasons"], serde_json::json!(["A B", "B ~C"]));
    assert_eq!(report["prime_implicants"], serde_json::json!(["A B", "A C", "B ~C"]));
    assert_eq!(code(&[&"explain", &p(&f), &"--names", &"A,B,C", &"--instance", &"A Q ~C"]), 2);
    assert_eq!(code(&[&"explain", &p(&f), &"--names", &"A,B,C", &"--instance", &"A B"]), 2);
}

#[test]
fn bias_on_rich_or_excellent_and_working() {
    // Positive iff R or (E and W); R is protected.
    let s = Scratch::new("bias");
    let f = s.file("f.cnf", "p cnf 3 2\n1 2 0\n1 3 0\n");
    let ask = |x: &str| json(&[&"explain", &p(&f), &"--names", &"R,E,W", &"--instance", &x, &"--protected", &"R", &"--queries", &"bias"]);
    assert_eq!(ask("R ~E W")["biased"], true);
    assert_eq!(ask("R E W")["biased"], false);
    assert_eq!(ask("~R E W")["biased"], false);
    assert_eq!(ask("~R E W")["classifier_biased"], true);
}

#[test]
fn robustness_of_parity_and_constants() {
    let s = Scratch::new("robust");
    // x1 xor x2
    let parity = s.file("x.cnf", "p cnf 2 2\n1 2 0\n-1 -2 0\n");
    assert_eq!(stdout(&[&"robust", &p(&parity), &"--all"]), "level,count\n1,4\n");
    assert_eq!(stdout(&[&"robust", &p(&parity), &"--instance", &"1 -2"]), "1\n");
    let constant = s.file("t.cnf", "p cnf 2 0\n");
    assert_eq!(stdout(&[&"robust", &p(&constant), &"--instance", &"X1 X2"]), "unbounded\n");
    let forest = s.file(
        "f.json",
        r#"{"features":["A","B"],"trees":[{"feature":"A","low":false,"high":true},{"feature":"B","low":false,"high":true},true]}"#,
    );
    assert_eq!(stdout(&[&"robust", &p(&forest), &"--instance", &"~A ~B"]), "1\n");
}

#[test]
fn network_queries_and_their_failures() {
    let s = Scratch::new("bn");
    let net = s.file("n.json", r#"{"variables":["A","B"],"parents":[[],["A"]],"cpt":[[0.3],[0.9,0.2]]}"#);
    let r = json(&[&"bn", &"marginal", &p(&net), &"--target", &"B", &"--evidence", &"~A", &"--brute-force"]);
    assert!((r["probability"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    assert!((r["brute_force"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    let m = json(&[&"bn", &"mpe", &p(&net)]);
    assert_eq!(m["assignment"], "~A B");

    let (cnf, w) = (s.path("n.cnf"), s.path("n.w"));
    json(&[&"bn", &"encode", &p(&net), &"--cnf", &p(&cnf), &"--weights", &p(&w)]);
    let total: f64 = stdout(&[&"wmc", &p(&cnf), &"--weights", &p(&w)]).trim().parse().unwrap();
    assert!((total - 1.0).abs() < 1e-12);

    let certain = s.file("c.json", r#"{"variables":["A","B"],"parents":[[],["A"]],"cpt":[[1.0],[0.9,0.2]]}"#);
    assert_eq!(code(&[&"bn", &"marginal", &p(&certain), &"--target", &"B", &"--evidence", &"~A"]), 4);
    let broken = s.file("b.json", "{\"variables\": [");
    assert_eq!(code(&[&"bn", &"marginal", &p(&broken), &"--target", &"A"]), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&[&"--version"]), 0);
    assert_eq!(code(&[&"--formats"]), 0);
    assert_eq!(code(&[&"frobnicate"]), 2);
    assert_eq!(code(&[] as &[&dyn AsRef<std::ffi::OsStr>]), 2);
    assert_eq!(code(&[&"count", &"/nonexistent/file.cnf"]), 3);
    let s = Scratch::new("codes");
    let bad = s.file("bad.cnf", "p cnf 2 1\n1 3 0\n");
    assert_eq!(code(&[&"count", &p(&bad)]), 3);
    assert_eq!(code(&[&"space", &"rankings", &"40"]), 5);
}

#[test]
fn output_is_deterministic() {
    let s = Scratch::new("determinism");
    let cnf = s.file("e.cnf", ENROLLMENT);
    let a = stdout(&[&"compile", &p(&cnf), &"--count", &"--vtree", &"random:11"]);
    let b = stdout(&[&"compile", &p(&cnf), &"--count", &"--vtree", &"random:11"]);
    assert_eq!(a, b);
}
