use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condsym"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p_value(o: &Output) -> f64 {
    let text = stdout(o);
    let line = text.lines().find(|l| l.starts_with("p_value ")).expect("p_value line");
    line["p_value ".len()..].parse().unwrap()
}

#[test]
fn test_prints_a_p_value() {
    for extra in [&[][..], &["--sampler", "transitive", "--statistic", "mmd"][..], &["--test", "baseline"][..]] {
        let o = bin()
            .args(["test", "--data"])
            .arg(fixture("paired20.csv"))
            .args(["--b", "19", "--seed", "3"])
            .args(extra)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let p = p_value(&o);
        assert!(p > 0.0 && p <= 1.0);
        assert_eq!((p * 20.0).round(), p * 20.0);
    }
}

#[test]
fn test_is_reproducible_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.json");
    let run = || {
        bin().args(["--threads", "1", "test", "--data"]).arg(fixture("paired20.csv")).args(["--b", "9", "--seed", "5", "--out"]).arg(&out).output().unwrap()
    };
    let a = run();
    let first = std::fs::read_to_string(&out).unwrap();
    let b = run();
    assert_eq!(stdout(&a), stdout(&b));
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["null_stats"].as_array().unwrap().len(), 9);
    assert_eq!(v["p_value"].as_f64().unwrap(), p_value(&a));
}

#[test]
fn usage_and_config_errors_exit_2() {
    let o = bin().args(["test", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["test", "--data", "/nonexistent/file.csv"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"source": {"kind": "synth", "design": {"design": "gauss_cov", "d": 3, "p": 0.0}}, "group": "so3"}"#).unwrap();
    let o = bin().args(["experiment", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["powerbound", "--n", "100"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(bin().arg("--help").output().unwrap().status.success());
}

#[test]
fn experiment_null_rate_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("null.json");
    std::fs::write(
        &cfg,
        r#"{
            "source": {"kind": "synth", "design": {"design": "gauss_cov", "d": 3, "p": 0.0}},
            "group": "special_orthogonal",
            "statistic": {"kind": "mmd", "families": ["gaussian"]},
            "grid": {"n": [100]},
            "replications": 100,
            "b": 39,
            "seed": 9
        }"#,
    )
    .unwrap();
    let csv = dir.path().join("report.csv");
    let o = bin().args(["experiment", "--config"]).arg(&cfg).arg("--out").arg(&csv).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    let rate_col = headers.iter().position(|h| h == "rate").unwrap();
    let records: Vec<csv::StringRecord> = rows.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 1);
    let rate: f64 = records[0][rate_col].parse().unwrap();
    assert!(rate <= 0.12, "null rate {rate}");

    let json = dir.path().join("report.json");
    let o = bin().args(["experiment", "--replications", "5", "--seed", "1", "--config"]).arg(&cfg).arg("--out").arg(&json).output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["cells"][0]["replications"], 5);
    assert_eq!(v["seed"], 1);

    let hist = dir.path().join("hist.csv");
    let o = bin().args(["pvals", "--replications", "5", "--config"]).arg(&cfg).arg("--out").arg(&hist).output().unwrap();
    assert!(o.status.success());
    let text = std::fs::read_to_string(&hist).unwrap();
    assert_eq!(text.lines().count(), 1 + 40);
    let total: usize = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 5);
}

#[test]
fn powerbound_prints_json() {
    let o = bin().args(["powerbound", "--n", "200", "--b", "99", "--eta", "1", "--delta", "1.5"]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["b_alpha"], 4);
    let bound = v["bound"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&bound));
    assert_eq!(v["below_threshold"], false);
    let o = bin().args(["powerbound", "--n", "200", "--eta", "1", "--delta", "1.5", "--l", "20"]).output().unwrap();
    let adaptive: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(adaptive["bound"].as_f64().unwrap() <= bound);
}
