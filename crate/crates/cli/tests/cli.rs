use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const DIRAC: &str = r#"{"type": "atomic", "atoms": [[0.0, 1.0]]}"#;
// Fourth roots of unity rotated by 1/8, so no atom sits on ±1/2.
const ROOTS4: &str = r#"{"type": "atomic", "atoms": [[-0.375, 0.25], [-0.125, 0.25], [0.125, 0.25], [0.375, 0.25]]}"#;
const THREE: &str = r#"{"type": "atomic", "atoms": [[0.1, 0.3], [-0.2, 0.4], [0.3, 0.3]]}"#;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.dir.path().join(name)
    }

    fn measure(&self, name: &str, json: &str) -> String {
        let p = self.path(name);
        fs::write(&p, json).unwrap();
        p.display().to_string()
    }

    fn spw(&self, out: &str, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_spw"))
            .arg("--out")
            .arg(self.path(out))
            .args(args)
            .output()
            .unwrap()
    }

    fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path(rel)).unwrap()
    }
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn alpha_of_dirac() {
    let run = Run::new();
    let m = run.measure("d.json", DIRAC);
    let out = run.spw("o", &["--measure", &m, "--order", "5", "alpha"]);
    assert_eq!(out.status.code(), Some(0));
    let alpha = rows(&run.read("o/alpha.csv"));
    assert_eq!(alpha.len(), 6);
    assert_eq!(alpha[0], vec![0.0, 1.0, 0.0]);
    assert_eq!(alpha[1], vec![1.0, -1.0, 0.0]);
    for r in &alpha[2..] {
        assert_eq!(&r[1..], &[0.0, 0.0]);
    }
    let b = rows(&run.read("o/b.csv"));
    assert_eq!(b[1], vec![1.0, 1.0, 0.0]);
    assert_eq!(json(&run.path("o/alpha.json"))["order"], 5);
}

#[test]
fn parseval_exact_on_roots_of_unity() {
    let run = Run::new();
    let m = run.measure("r.json", ROOTS4);
    let out = run.spw("o", &["--measure", &m, "--order", "3", "--tol", "1e-12", "--seed", "7", "parseval"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&run.path("o/parseval_verdict.json"));
    assert_eq!(v["verdict"], true);
    assert_eq!(v["order"], 3);
    assert!(v["defect"].as_f64().unwrap() <= 1e-12);
    assert!(v["bound"].is_number());
    let record = json(&run.path("o/parseval.json"));
    assert!(record["wall_time"].is_number());
}

#[test]
fn adversarial_membership_fails_with_exit_two() {
    let run = Run::new();
    let m = run.measure("m.json", THREE);
    let out = run.spw("o", &["--measure", &m, "membership", "--adversarial"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&run.path("o/membership_verdict.json"));
    assert_eq!(v["verdict"], false);
    assert!(v["defect"].as_f64().unwrap() >= 0.5);
}

#[test]
fn from_function_membership_passes() {
    let run = Run::new();
    let m = run.measure("m.json", THREE);
    let out = run.spw("o", &["--measure", &m, "membership"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_are_deterministic() {
    let run = Run::new();
    let m = run.measure("m.json", THREE);
    for out in ["a", "b"] {
        let status = run.spw(out, &["--measure", &m, "--seed", "11", "--order", "128", "reconstruct"]).status;
        assert_eq!(status.code(), Some(0));
    }
    for file in ["reconstruct.csv", "samples.csv", "reconstruct_verdict.json"] {
        assert_eq!(run.read(&format!("a/{file}")), run.read(&format!("b/{file}")), "{file}");
    }
    let other = run.spw("c", &["--measure", &m, "--seed", "12", "--order", "128", "reconstruct"]);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(run.read("a/samples.csv"), run.read("c/samples.csv"));
}

#[test]
fn reconstruct_from_sample_files() {
    let run = Run::new();
    let m = run.measure("r.json", ROOTS4);
    assert_eq!(run.spw("gen", &["--measure", &m, "--order", "64", "reconstruct"]).status.code(), Some(0));
    fs::write(run.path("points.csv"), "re,im\n0.5,0\n-1.25,0.5\n").unwrap();
    let samples = run.path("gen/samples.csv").display().to_string();
    let points = run.path("points.csv").display().to_string();
    let out = run.spw("o", &["--measure", &m, "reconstruct", "--samples", &samples, "--points", &points]);
    assert_eq!(out.status.code(), Some(0));
    let report = run.read("o/reconstruct.csv");
    assert!(report.starts_with("re_z,im_z,re_F,im_F,err,order"));
    assert_eq!(report.lines().count(), 3);
    // No references, so no verdict.
    assert!(!run.path("o/reconstruct_verdict.json").exists());
}

#[test]
fn malformed_measure_reports_line() {
    let run = Run::new();
    let m = run.measure("bad.json", "{\"type\": \"atomic\",\n\"atoms\": [[0.0, 1.0],]}");
    let out = run.spw("o", &["--measure", &m, "moments"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn malformed_csv_reports_line() {
    let run = Run::new();
    let m = run.measure("m.json", THREE);
    fs::write(run.path("s.csv"), "j,re,im\n0,1,0\n1,oops,0\n").unwrap();
    let samples = run.path("s.csv").display().to_string();
    let out = run.spw("o", &["--measure", &m, "reconstruct", "--samples", &samples]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn atom_on_half_is_an_input_error() {
    let run = Run::new();
    let m = run.measure("h.json", r#"{"type": "atomic", "atoms": [[0.5, 1.0]]}"#);
    assert_eq!(run.spw("o", &["--measure", &m, "alpha"]).status.code(), Some(1));
}

#[test]
fn infeasible_moments_exit_two() {
    let run = Run::new();
    let m = run.measure("r.json", ROOTS4);
    // Rotated fourth roots force |a_n| to be 4-periodic; a_4 = 0 breaks it.
    let mut csv = String::from("n,re,im\n");
    for n in 0..=64 {
        let re = if n == 0 { 1.0 } else { 0.0 };
        csv.push_str(&format!("{n},{re},0\n"));
    }
    fs::write(run.path("a.csv"), csv).unwrap();
    let a = run.path("a.csv").display().to_string();
    let out = run.spw("o", &["--measure", &m, "moments-solve", "--moments", &a]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&run.path("o/moments_solve.json"))["solved"], false);
}

#[test]
fn cantor_check_default_measure() {
    let run = Run::new();
    let out = run.spw("o", &["cantor-check", "--refine-depth", "10", "--max-n", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&run.read("o/cantor.csv"));
    assert_eq!(table.len(), 17);
    assert!(table.iter().all(|r| r[5] <= 1e-6));
}

#[test]
fn plotdata_collects_reports() {
    let run = Run::new();
    let m = run.measure("m.json", THREE);
    assert_eq!(run.spw("o", &["--measure", &m, "--order", "64", "alpha"]).status.code(), Some(0));
    let alpha = run.path("o/alpha.csv").display().to_string();
    let out = run.spw("o", &["plotdata", &alpha]);
    assert_eq!(out.status.code(), Some(0));
    let plot = run.read("o/plotdata.csv");
    assert!(plot.starts_with("series_name,x,y\n"));
    assert_eq!(plot.lines().count(), 66);

    let missing = run.path("o/nope.csv").display().to_string();
    assert_eq!(run.spw("o", &["plotdata", &missing]).status.code(), Some(1));
}

#[test]
fn help_and_bad_flags() {
    let run = Run::new();
    assert_eq!(run.spw("o", &["--help"]).status.code(), Some(0));
    assert_eq!(run.spw("o", &["--tol", "-1", "moments"]).status.code(), Some(1));
    assert_eq!(run.spw("o", &["frobnicate"]).status.code(), Some(1));
}
