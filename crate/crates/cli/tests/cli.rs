use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lattice-fm"));
    c.env_remove("LATTICE_FM_LIMIT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    (code(&o), serde_json::from_slice(&o.stdout).expect("valid JSON"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

struct Fixtures {
    _dir: TempDir,
    a: String,
    b: String,
    c: String,
    d: String,
    e: String,
}

fn fixtures() -> Fixtures {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str, g: &str| {
        write(dir.path(), &format!("{n}.json"), &format!(r#"{{"name": "{n}", "gram": {g}}}"#)).display().to_string()
    };
    Fixtures {
        a: p("A", "[[2, 4], [4, 0]]"),
        b: p("B", "[[0, 4], [4, 0]]"),
        c: p("C", "[[-2, 4], [4, 0]]"),
        d: p("D", "[[2, 1], [1, 12]]"),
        e: p("E", "[[4, 1], [1, 6]]"),
        _dir: dir,
    }
}

#[test]
fn disc_form_reports() {
    let f = fixtures();
    let o = run(&["disc-form", &f.a]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("Z/2 x Z/8; q = [1/2, 3/8]"));
    assert_eq!(stdout(&run(&["disc-form", "U"])).trim(), "trivial");
    let o = stdout(&run(&["disc-form", "L2d(7)"]));
    assert!(o.starts_with("Z/14; q = [27/14]\nsigned q = [-1/14]"), "{o}");
    let (_, v) = json(&["disc-form", &f.b]);
    assert_eq!(v["result"]["invariant_factors"], serde_json::json!([4, 4]));
    assert_eq!(v["result"]["length"], 2);
}

#[test]
fn same_genus_exit_codes_and_reasons() {
    let f = fixtures();
    let o = run(&["same-genus", &f.d, &f.e]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "same genus"));
    let o = run(&["same-genus", &f.a, &f.b]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("groups differ"));
    let (c, v) = json(&["same-genus", &f.a, &f.c]);
    assert_eq!(c, 1);
    assert_eq!(v["result"]["reason"], "form");
    assert_eq!(v["holds"], false);
}

#[test]
fn glue_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("glued.json");
    let o = run(&["glue", "<8>+<2>", "--lift", "1/2,0", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("index 2"));
    // The written file is diag(2,2) up to isometry: same genus, and D = Z/2 x Z/2.
    let o = run(&["same-genus", out.to_str().unwrap(), "<2>+<2>"]);
    assert_eq!(code(&o), 0);

    let (c, v) = json(&["glue", "<2>+<-2>", "--lift", "1/2,1/2"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["det"], "-1");
    let (_, u) = json(&["signature", "U"]);
    let gram: Vec<Vec<String>> = serde_json::from_value(v["result"]["gram"].clone()).unwrap();
    let g = write(dir.path(), "g.json", &format!(r#"{{"name": "g", "gram": {}}}"#, serde_json::to_string(&gram).unwrap()));
    let (c, sig) = json(&["signature", g.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(
        (sig["result"]["plus"].clone(), sig["result"]["minus"].clone()),
        (u["result"]["plus"].clone(), u["result"]["minus"].clone())
    );

    let (c, v) = json(&["glue", "<8>+<2>"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["index"], "1");
    assert_eq!(v["result"]["gram"], serde_json::json!([["8", "0"], ["0", "2"]]));
}

#[test]
fn glue_accepts_a_subgroup_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "h.json", r#"{"lift": [["1/2", "0"]]}"#);
    let o = run(&["glue", "<8>+<2>", "--subgroup", s.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("Gram [[2, 0], [0, 2]]"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["glue", "<2>+<2>", "--lift", "1/2,0"])), 4);
    assert_eq!(code(&run(&["disc-form", "no-such-lattice"])), 2);
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(code(&run(&["disc-form", bad.to_str().unwrap()])), 2);
    let odd = write(dir.path(), "odd.json", r#"{"name": "odd", "gram": [[1, 0], [0, 2]]}"#);
    assert_eq!(code(&run(&["disc-form", odd.to_str().unwrap()])), 3);
    let (c, v) = json(&["disc-form", odd.to_str().unwrap()]);
    assert_eq!(c, 3);
    assert_eq!(v["error"]["kind"], "validation");
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["represents", "<2>+<2>", "6"])), 1);
    assert_eq!(code(&run(&["primitive-check", "<2>+<2>", "-v", "2,0"])), 1);
    assert_eq!(code(&run(&["primitive-check", "<2>+<2>", "-v", "1,0"])), 0);
}

#[test]
fn fm_counts() {
    assert_eq!(stdout(&run(&["fm-count", "--rank-one", "6"])).lines().next(), Some("2"));
    assert_eq!(stdout(&run(&["fm-count", "--rank-one", "1"])).lines().next(), Some("1"));
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"candidates": [{"label": "S", "lattice": "E8(-1)"}]}"#);
    let (c, v) = json(&["fm-count", "--input", spec.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["count"], 1);
    let indefinite = write(dir.path(), "i.json", r#"{"candidates": [{"lattice": "U+<-4>"}]}"#);
    assert_eq!(code(&run(&["fm-count", "--input", indefinite.to_str().unwrap()])), 4);
    let signed = write(dir.path(), "j.json", r#"{"candidates": [{"lattice": "U+<-4>", "o_images": "sign"}]}"#);
    assert_eq!(code(&run(&["fm-count", "--input", signed.to_str().unwrap()])), 0);
}

#[test]
fn claim_suite() {
    let o = run(&["paper-suite"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("18 of 18 checks passed"));
    assert_eq!(code(&run(&["claim-suite", "--corrupt"])), 1);
    let (c, v) = json(&["claim-suite", "--filter", "picard-rank-one"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["total"], 1);
    assert_eq!(code(&run(&["claim-suite", "--filter", "nothing-matches"])), 3);
}

#[test]
fn group_limit_from_environment() {
    let o = bin().args(["gluings", "<4>", "<-4>"]).env("LATTICE_FM_LIMIT", "3").output().unwrap();
    assert_eq!(code(&o), 4);
    let o = bin().args(["gluings", "<4>", "<-4>"]).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("2 gluings"));
}

#[test]
fn reports_are_deterministic() {
    let args = ["--format", "json", "orbit-count", "A2", "A2(-1)"];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, run(&args).stdout);
}

#[test]
fn written_lattice_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(&["complement", "K3", "-v", "0,0,0,0,1,7,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let first = std::fs::read_to_string(&out).unwrap();
    let again = dir.path().join("again.json");
    // gluing with no generators rewrites the same Gram matrix
    let o = run(&["glue", out.to_str().unwrap(), "-o", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v1: Value = serde_json::from_str(&first).unwrap();
    let v2: Value = serde_json::from_str(&std::fs::read_to_string(&again).unwrap()).unwrap();
    assert_eq!(v1["gram"], v2["gram"]);
    let (_, same) = json(&["same-genus", out.to_str().unwrap(), "L2d(7)"]);
    assert_eq!(same["result"]["same_genus"], true);
}

#[test]
fn eichler_family() {
    let (c, v) = json(&["eichler", "--vc", "5"]);
    assert_eq!(c, 0);
    assert_eq!((v["result"]["stable_orbits"].clone(), v["result"]["full_orbit_lower_bound"].clone()), (10.into(), 5.into()));
    let o = run(&["eichler", "L2d(2)", "-v", "0,0,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("v^2 = 0, div(v) = 1"));
}

#[test]
fn classify_and_gluings() {
    let (c, v) = json(&["classify", "<8>+<2>", "--ambient", "<2>+<2>", "--matrix", "[[2,0],[0,1]]"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["order"], 2);
    let (c, v) = json(&["gluings", "<4>", "<-4>"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["count"], 2);
    let (c, v) = json(&["orbit-count", "<4>", "<-4>"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["orbits"], 1);
}
