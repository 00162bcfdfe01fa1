use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use shallow_shadows::brickwork::Depth;
use shallow_shadows::channel::tau::PairChannel;
use shallow_shadows::pauli::PauliString;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shallow-shadows"));
    c.env_remove("SHALLOW_SHADOWS_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The value column of `channel` output, one per Pauli.
fn values(out: &str) -> Vec<f64> {
    out.lines().map(|l| l.rsplit('\t').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn channel_eigenvalues() {
    let t = values(&stdout_ok(&["channel", "--n", "8", "--d", "0", "--pauli", "ZIIIIIII"]));
    assert!((t[0] - 1.0 / 3.0).abs() < 1e-12);
    let t = values(&stdout_ok(&["channel", "--n", "2", "--d", "1", "--pauli", "ZI"]));
    assert!((t[0] - 0.2).abs() < 1e-12);
    let t = values(&stdout_ok(&["channel", "--n", "8", "--d", "inf", "--pauli", "ZZZZZZZZ", "--pauli", "XIIIIIII"]));
    assert!((t[0] - 1.0 / 257.0).abs() < 1e-15);
    assert!((t[1] - 1.0 / 257.0).abs() < 1e-15);
}

#[test]
fn channel_rejects_bad_input() {
    let out = run(&["channel", "--n", "7", "--d", "1", "--pauli", "ZIIIIII"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));
    let out = run(&["channel", "--n", "4", "--d", "1", "--pauli", "ZI"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!run(&["channel", "--n", "4", "--d", "deep", "--pauli", "ZIII"]).status.success());
}

#[test]
fn saved_channel_mps_evaluates_to_t() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.json");
    stdout_ok(&["channel", "--n", "6", "--d", "2", "--save", path(&file)]);
    let mps = shallow_shadows::mps::PeriodicMps::load(&file).unwrap();
    let t = values(&stdout_ok(&["channel", "--n", "6", "--d", "2", "--pauli", "XZIIYI"]));
    assert!((mps.evaluate(&[1, 2, 0, 0, 3, 0]).unwrap() - t[0]).abs() < 1e-12);
}

#[test]
fn tau_agrees_with_library_and_cache() {
    let (a, b) = ("ZZIIXI", "IZZIXI");
    let expected = PairChannel::new(6, Depth::Finite(2))
        .unwrap()
        .tau(&a.parse::<PauliString>().unwrap(), &b.parse::<PauliString>().unwrap())
        .unwrap();
    let pair = format!("{a},{b}");
    let plain = values(&stdout_ok(&["tau", "--n", "6", "--d", "2", "--pair", &pair]));
    assert!((plain[0] - expected).abs() < 1e-12);

    let cache = tempfile::tempdir().unwrap();
    for _ in 0..2 {
        let out = bin()
            .env("SHALLOW_SHADOWS_CACHE", cache.path())
            .args(["tau", "--n", "6", "--d", "2", "--pair", &pair])
            .output()
            .unwrap();
        assert!(out.status.success());
        assert!((values(&String::from_utf8(out.stdout).unwrap())[0] - expected).abs() < 1e-12);
        assert!(cache.path().join("gamma-v1.bin").exists());
    }
}

#[test]
fn inversion_is_heralded_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for f in [&a, &b] {
        let summary = json(&["invert", "--n", "10", "--d", "3", "--chi", "3", "--out", path(f)]);
        assert_eq!(summary["heralded"], true);
        assert!(summary["herald_epsilon"].as_f64().unwrap() < 1e-3);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let stored: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(stored["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(stored["d"], 3);
}

#[test]
fn impossible_bond_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("v.json");
    let out = run(&["invert", "--n", "10", "--d", "3", "--chi", "1", "--out", path(&f)]);
    assert_eq!(out.status.code(), Some(2));
    // the result is kept for inspection
    let stored: Value = serde_json::from_slice(&std::fs::read(&f).unwrap()).unwrap();
    assert_eq!(stored["result"]["heralded"], false);
}

#[test]
fn sampling_is_deterministic_and_explicit_circuits_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, e) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"), dir.path().join("e.jsonl"));
    let base = ["sample", "--n", "6", "--d", "2", "--state", "ghz", "--count", "300", "--seed", "9", "--out"];
    for f in [&a, &b] {
        let mut args = base.to_vec();
        args.push(path(f));
        stdout_ok(&args);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let mut args = base.to_vec();
    args.extend([path(&e), "--explicit"]);
    stdout_ok(&args);
    assert!(std::fs::read_to_string(&e).unwrap().contains("circuit"));

    let est = |f: &Path| json(&["estimate", "--records", path(f), "--term", "ZZIIII", "--term", "0.5:XXXXXX"]);
    assert_eq!(est(&a)["estimate"], est(&e)["estimate"]);
}

#[test]
fn estimators_agree_and_report_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("r.jsonl");
    let inv = dir.path().join("inv.json");
    stdout_ok(&["sample", "--n", "8", "--d", "2", "--state", "ghz", "--count", "2000", "--seed", "3", "--out", path(&rec)]);
    stdout_ok(&["invert", "--n", "8", "--d", "2", "--eps", "1e-5", "--out", path(&inv)]);

    let sparse = json(&["estimate", "--records", path(&rec), "--observable", "ghz-projector", "--blocks", "10"]);
    assert_eq!(sparse["estimator"], "sparse");
    assert_eq!(sparse["block_means"].as_array().unwrap().len(), 10);
    assert_eq!(sparse["norm"]["method"], "stabilizer-exact");
    let bound = sparse["variance_bound"].as_f64().unwrap();
    let se = sparse["standard_error"].as_f64().unwrap();
    assert!(sparse["sample_variance"].as_f64().unwrap() <= bound * 1.2);
    assert!((sparse["estimate"].as_f64().unwrap() - 1.0).abs() < 5.0 * se * 10f64.sqrt());

    let mps = json(&[
        "estimate", "--records", path(&rec), "--observable", "ghz-projector", "--blocks", "10", "--estimator", "mps",
        "--inverse", path(&inv),
    ]);
    let eps = mps["herald_epsilon"].as_f64().unwrap();
    assert!(eps > 0.0 && eps <= 1e-5);
    for (x, y) in sparse["block_means"].as_array().unwrap().iter().zip(mps["block_means"].as_array().unwrap()) {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= eps + 1e-9);
    }
    assert_ne!(sparse["config_hash"], mps["config_hash"]);

    // an inverse for another depth is refused
    let wrong = dir.path().join("wrong.json");
    stdout_ok(&["invert", "--n", "8", "--d", "1", "--out", path(&wrong)]);
    let out = run(&[
        "estimate", "--records", path(&rec), "--observable", "ghz-projector", "--estimator", "mps", "--inverse",
        path(&wrong),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn norm_methods() {
    let p = json(&["norm", "--n", "8", "--d", "0", "--pauli", "ZZIIIIII"]);
    assert_eq!(p["method"], "pauli-exact");
    assert!((p["ls_norm_sq"].as_f64().unwrap() - 9.0).abs() < 1e-9);

    let s = json(&["norm", "--n", "10", "--d", "6", "--pauli", "ZZIIIIIIII", "--method", "statmech"]);
    let exact = json(&["norm", "--n", "10", "--d", "6", "--pauli", "ZZIIIIIIII"]);
    assert!(s["worst_case_upper_sq"].as_f64().unwrap() >= exact["ls_norm_sq"].as_f64().unwrap());
    let out = run(&["norm", "--n", "10", "--d", "1", "--pauli", "ZZIIIIIIII", "--method", "statmech"]);
    assert!(!out.status.success());

    let g = json(&["norm", "--n", "8", "--d", "1", "--observable", "ghz-projector"]);
    let f = json(&["norm", "--n", "8", "--d", "1", "--observable", "ghz-projector", "--method", "frobenius"]);
    assert_eq!(g["method"], "stabilizer-exact");
    assert_eq!(f["method"], "frobenius-bound");
    assert!(f["worst_case_upper_sq"].as_f64().unwrap() >= g["worst_case_upper_sq"].as_f64().unwrap());

    let h = json(&["norm", "--n", "8", "--d", "2", "--observable", "cluster-hamiltonian"]);
    assert_eq!(h["method"], "sparse-triangle");
    assert!(h["worst_case_upper_sq"].as_f64().unwrap() >= h["ls_norm_sq"].as_f64().unwrap());
}

#[test]
fn run_reads_config_and_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let report = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        format!(
            r#"
n = 6
d = 1
state = {{ generators = ["XXIIII", "ZZIIII", "IIXXII", "IIZZII", "IIIIXX", "IIIIZZ"] }}
observable = {{ terms = [[1.0, "XXIIII"], [1.0, "ZZIIII"], [0.5, "IIXXZZ"]] }}
shots = 4000
blocks = 8
seed = 5
output = "{}"
"#,
            report.display()
        ),
    )
    .unwrap();
    let a = json(&["run", "--config", path(&cfg)]);
    let stored: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(a, stored);
    // Bell pairs: every term has expectation one
    let se = a["standard_error"].as_f64().unwrap();
    assert!((a["estimate"].as_f64().unwrap() - 2.5).abs() < 6.0 * se, "{a}");
    assert_eq!(a["snapshots"], 4000);

    let again = json(&["run", "--config", path(&cfg)]);
    assert_eq!(a, again);
    let b = json(&["run", "--config", path(&cfg), "--seed", "6", "--d", "inf"]);
    assert_ne!(a["config_hash"], b["config_hash"]);
    assert_eq!(b["d"], "inf");

    assert_eq!(run(&["run", "--config", path(&cfg), "--blocks", "7"]).status.code(), Some(1));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn reproduce_commands_write_csv() {
    let ghz = stdout_ok(&["reproduce", "ghz-fidelity", "--n", "6", "--depths", "0,1,inf", "--reps", "5", "--shots", "200"]);
    assert!(ghz.starts_with("depth,rep,estimate,two_sme,within"));
    let rows = csv_rows(&ghz);
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[10][0], "inf");

    let norms = stdout_ok(&["reproduce", "pauli-norms", "--n", "20"]);
    let rows = csv_rows(&norms);
    assert_eq!(rows.len(), 6 * 20);
    let full: Vec<f64> = rows.iter().filter(|r| r[1] == "20").map(|r| r[3].parse().unwrap()).collect();
    assert!(full.windows(2).all(|w| w[1] <= w[0]));
    assert!(full.iter().all(|&r| r >= 1.0 - 1e-12));
    assert!(full[5] <= 1.1);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    stdout_ok(&["reproduce", "hamiltonian", "--n", "6", "--depths", "0,1,inf", "--shots", "500", "--out", path(&out)]);
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let exact_variance: f64 = r[7].parse().unwrap();
        let ls: f64 = r[5].parse().unwrap();
        let triangle: f64 = r[6].parse().unwrap();
        assert!(ls <= triangle && exact_variance > 0.0);
    }
}
