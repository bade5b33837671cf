use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsopt::data::to_libsvm_string;
use nsopt::problems::{separable_blobs, BlobSpec};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nsopt"));
    c.env_remove("NSOPT_SEED");
    c
}

fn nsopt(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn blobs_file(dir: &Path) -> PathBuf {
    let d = separable_blobs(&BlobSpec::new(120, 6, 1)).unwrap();
    let p = dir.join("blobs.libsvm");
    std::fs::write(&p, to_libsvm_string(&d)).unwrap();
    p
}

#[test]
fn run_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let o = nsopt(dir.path(), &["run", "--problem", "blobs.libsvm", "--method", "ls-sps", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("# schema: nsopt/1"));
    assert_eq!(lines.next(), Some("k,N_k,alpha_k,zeta_k,fev_cum,f_saa,f_true"));
    assert!(lines.count() > 1);
    assert!(stdout(&o).contains("f_true="));
    assert!(stderr(&o).contains("effective config"));
}

#[test]
fn run_json_format() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let o = nsopt(
        dir.path(),
        &["run", "--problem", "blobs.libsvm", "--format", "json", "--output", "t.json", "--budget", "500"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(v["schema"], "nsopt/1");
    assert!(v["records"].as_array().unwrap().len() > 1);
}

#[test]
fn unknown_method_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let o = nsopt(dir.path(), &["run", "--problem", "blobs.libsvm", "--method", "newton"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for m in ["sps", "sps-f", "ls-sps", "ls-sps-f", "ls-ps", "ls-ps-f"] {
        assert!(err.contains(m), "{err}");
    }
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn unknown_flag_and_missing_subcommand_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nsopt(dir.path(), &["run", "--problem", "x", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(nsopt(dir.path(), &[]).status.code(), Some(2));
    assert_eq!(nsopt(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn zero_budget_trace_has_initial_record_only() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let o = nsopt(dir.path(), &["run", "--problem", "blobs.libsvm", "--budget", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
    assert!(trace.lines().nth(2).unwrap().starts_with("0,"));
}

#[test]
fn bad_dataset_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.libsvm"), "+1 1:1\n-1 1:oops\n").unwrap();
    let o = nsopt(dir.path(), &["run", "--problem", "bad.libsvm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = nsopt(dir.path(), &["run", "--problem", "absent.libsvm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let o = nsopt(dir.path(), &["run", "--problem", "blobs.libsvm", "--c1", "2"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("cfg.json"), r#"{"solver": {"unknown_knob": 1}}"#).unwrap();
    let o = nsopt(dir.path(), &["run", "--problem", "blobs.libsvm", "--config", "cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn seed_env_fallback_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let a = bin()
        .current_dir(dir.path())
        .env("NSOPT_SEED", "42")
        .args(["run", "--problem", "blobs.libsvm", "--output", "a.csv"])
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = nsopt(dir.path(), &["run", "--problem", "blobs.libsvm", "--seed", "42", "--output", "b.csv"]);
    assert_eq!(b.status.code(), Some(0));
    let c = nsopt(dir.path(), &["run", "--problem", "blobs.libsvm", "--seed", "43", "--output", "c.csv"]);
    assert_eq!(c.status.code(), Some(0));
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn inspect_reports_split() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let o = nsopt(dir.path(), &["inspect", "--problem", "blobs.libsvm", "--train-fraction", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("rows=120 cols=6"), "{out}");
    assert!(out.contains("split: train=96 test=24"), "{out}");
}

const SPEC: &str = r#"{
    "schema": "nsopt/1",
    "methods": ["sps", "ls-sps", "ls-ps"],
    "datasets": [
        {"name": "file", "path": "blobs.libsvm", "train_fraction": 0.8, "split_seed": 3},
        {"name": "synth", "synthetic": {"n_rows": 80, "n_cols": 4, "seed": 9}}
    ],
    "seeds": [1, 2],
    "budget": {"per_entry": 10},
    "f_star": {"mode": "reference", "budget_multiplier": 3}
}"#;

#[test]
fn campaign_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    std::fs::write(dir.path().join("spec.json"), SPEC).unwrap();
    let a = nsopt(dir.path(), &["campaign", "--spec", "spec.json", "--out", "a", "--parallelism", "1"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = nsopt(dir.path(), &["campaign", "--spec", "spec.json", "--out", "b", "--parallelism", "4"]);
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));

    let det = |d: &str| {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(d).join("results.json")).unwrap()).unwrap();
        assert_eq!(v["schema"], "nsopt/1");
        serde_json::to_string(&v["deterministic"]).unwrap()
    };
    assert_eq!(det("a"), det("b"));
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/profiles.csv"), read("b/profiles.csv"));
    let traces: Vec<_> = std::fs::read_dir(dir.path().join("a/traces")).unwrap().collect();
    assert_eq!(traces.len(), 3 * 2 * 2);
    for t in std::fs::read_dir(dir.path().join("a/traces")).unwrap() {
        let name = t.unwrap().file_name();
        let name = name.to_str().unwrap();
        assert_eq!(read(&format!("a/traces/{name}")), read(&format!("b/traces/{name}")));
    }
    assert!(!dir.path().join("a/failures.json").exists());

    // profile recomputation from results.json matches the campaign's file
    let p = nsopt(dir.path(), &["profile", "--results", "a/results.json", "--output", "p.csv"]);
    assert_eq!(p.status.code(), Some(0), "{}", stderr(&p));
    assert_eq!(read("p.csv"), read("a/profiles.csv"));
    let p = nsopt(dir.path(), &["profile", "--results", "a/results.json", "--tau", "0.1", "--q-grid", "1,2,4"]);
    assert_eq!(p.status.code(), Some(0));
    assert!(stdout(&p).contains("performance_profile,ls-sps,4.0000000000000000e0,"));
    let p = nsopt(dir.path(), &["profile", "--results", "a/results.json", "--q-grid", "0.5"]);
    assert_eq!(p.status.code(), Some(2));
}

#[test]
fn campaign_without_f_star_fails_before_work() {
    let dir = tempfile::tempdir().unwrap();
    blobs_file(dir.path());
    let spec = r#"{"methods": ["sps"], "datasets": [{"name": "b", "path": "blobs.libsvm"}], "seeds": [1]}"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();
    let o = nsopt(dir.path(), &["campaign", "--spec", "spec.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f_star"));
    assert!(!dir.path().join("out").exists());

    let spec = r#"{"methods": ["sps"], "datasets": [{"name": "b", "path": "nope.libsvm"}], "seeds": [1],
                   "f_star": {"mode": "given", "values": {"b": 1.0}}}"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();
    let o = nsopt(dir.path(), &["campaign", "--spec", "spec.json", "--out", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}
