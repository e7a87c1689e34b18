use std::path::Path;
use std::process::{Command, Output};

fn deco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deco")).args(args).output().expect("deco runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn flat_curve_starts_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = deco(&["dephase", "curve", "--kind", "flat", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(&out);
    assert!(text.starts_with("# tool = deco "));
    assert!(text.contains("# seed = 0\n"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header[1], "gamma");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows.len(), 101);
    let sidecar: serde_json::Value = serde_json::from_str(&read(&dir.path().join("curve.csv.run.json"))).unwrap();
    assert!(sidecar["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn chaos_rate_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["chaos", "rate", "--kind", "wigner", "--seed", "7", "--levels", "300", "--realizations", "8"];
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert!(deco(&[&args[..], &["--out", a.to_str().unwrap()]].concat()).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_deco"))
        .args(args)
        .args(["--out", b.to_str().unwrap()])
        .env("DECO_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&read(&a)).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["config"]["kind"], "wigner");
    assert!(v["result"]["correlation_Q_spacing"].is_number());
}

#[test]
fn closed_caldeira_leggett_keeps_purity() {
    let o = deco(&[
        "mastereq", "run", "--equation", "cl", "--eta", "0", "--t-final", "2", "--stride", "500", "--initial", "coherent",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&String::from_utf8(o.stdout).unwrap());
    let col = header.iter().position(|h| h == "purity").unwrap();
    let first: f64 = rows[0][col].parse().unwrap();
    let last: f64 = rows[rows.len() - 1][col].parse().unwrap();
    assert!((first - last).abs() < 1e-8);
}

#[test]
fn pure_dephasing_records_pairs() {
    let o = deco(&[
        "mastereq", "run", "--equation", "pure-dephasing", "--n", "32", "--t-final", "0.2", "--stride", "50", "--pairs",
        "10:21,0:31",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(header.last().unwrap(), "coh_0_31");
    assert!(!header.contains(&"leak".to_string()));
    assert_eq!(rows.len(), 5);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# family run\ngamma_target = 0.02\nwidths = 0.1, 0.01\n").unwrap();
    let o = deco(&["scatter", "family", "--config", cfg.to_str().unwrap(), "--widths", "0.2,0.05,0.01"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# gamma_target = 0.02\n"));
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!((r[3].parse::<f64>().unwrap() / 0.02 - 1.0).abs() < 1e-9);
    }
}

#[test]
fn json_and_csv_formats() {
    let o = deco(&["formfactor", "classify", "--kind", "inverse-square", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("class,VanHoveSingular\n"));
    assert!(text.contains("norm_sq,divergent\n"));
    let o = deco(&["scatter", "family", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["columns"][2], "norm_sq");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let o = deco(&["dephase", "curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown config key"));

    let o = deco(&["dephase", "curve", "--kind", "flat", "--omega-min", "2", "--omega-c", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidWeight"));

    let o = deco(&["scatter", "family", "--gamma-target", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidTarget"));

    let o = deco(&["chaos", "rate", "--levels", "100", "--realizations", "2", "--fit-lo", "0.5", "--fit-hi", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = deco(&["dephase", "curve", "--points", "many"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let o = deco(&["scatter", "rate", "--kind", "flat", "--density", "thermal"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("DivergentIntegral"));

    let o = deco(&[
        "mastereq", "run", "--n", "6", "--eta", "0.5", "--temperature", "5", "--t-final", "5", "--initial", "ground",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("TruncationLeak"));
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = deco(&["scatter", "rate", "--density", "thermal", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn tabulated_weight_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("j.csv");
    std::fs::write(&table, "omega,J\n0,1\n0.5,1\n1,1\n").unwrap();
    let o = deco(&["formfactor", "classify", "--kind", "tabulated", "--table", table.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["result"]["norm_sq"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}
