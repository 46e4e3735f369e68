use std::process::{Command, Output};

use serde_json::Value;

fn ghacs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghacs"))
        .args(args)
        .output()
        .expect("failed to launch ghacs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = ghacs(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "ghacs {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_ok(args)).expect("output is not JSON")
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

fn column(header: &csv::StringRecord, name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn exit_codes() {
    assert_eq!(
        ghacs(&["stats", "--k", "1.5", "--z", "2.5"]).status.code(),
        Some(0)
    );
    assert_eq!(ghacs(&["stats", "--z", "2.5"]).status.code(), Some(2));
    assert_eq!(
        ghacs(&["stats", "--k", "-1", "--z", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ghacs(&["stats", "--k", "1.5", "--z", "-2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ghacs(&["stats", "--k", "1.5", "--z", "1", "--gamma", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ghacs(&["sweep", "--k", "1.5", "--z-min", "2", "--z-max", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ghacs(&["sweep", "--k", "1.5", "--cutoffs", "50,x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ghacs(&["stats", "--k", "1.5", "--z", "15", "--hard-cap", "100"])
            .status
            .code(),
        Some(3)
    );
    // a fixed cutoff is never "not converged"
    assert_eq!(
        ghacs(&["stats", "--k", "1.5", "--z", "15", "--fixed-nmax", "100"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn errors_go_to_stderr() {
    let out = ghacs(&["stats", "--k", "1.5", "--z", "15", "--hard-cap", "100"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ghacs: "));
}

#[test]
fn repeated_runs_are_identical() {
    let args = [
        "sweep", "--k", "1.5", "--z-min", "0.5", "--z-max", "12", "--z-step", "0.5", "--format",
        "csv",
    ];
    assert_eq!(stdout_ok(&args), stdout_ok(&args));
    let args = ["table", "--k", "1.5", "--format", "json"];
    assert_eq!(stdout_ok(&args), stdout_ok(&args));
}

#[test]
fn poisson_limit() {
    let v = json(&["stats", "--k", "2", "--z", "3", "--format", "json"]);
    let row = &v["rows"][0];
    assert!((row["mean"].as_f64().unwrap() - 9.0).abs() < 1e-10);
    assert!((row["variance"].as_f64().unwrap() - 9.0).abs() < 1e-9);
    assert_eq!(row["statistics"], "poissonian");

    let table = stdout_ok(&["stats", "--k", "2", "--z", "3"]);
    let q = table.lines().find(|l| l.starts_with("mandel_q")).unwrap();
    assert_eq!(q.split_whitespace().last(), Some("0.00"));
}

#[test]
fn fixed_cutoff_collapse_is_printed() {
    let table = stdout_ok(&["stats", "--k", "1.5", "--z", "10", "--fixed-nmax", "150"]);
    let q = table.lines().find(|l| l.starts_with("mandel_q")).unwrap();
    assert_eq!(q.split_whitespace().last(), Some("-0.95"));
}

#[test]
fn zero_amplitude_q_is_undefined() {
    let text = stdout_ok(&["table", "--k", "1.5", "--z", "0,2.5", "--format", "csv"]);
    let rows = csv_rows(&text);
    let q = column(&rows[0], "adaptive_q");
    assert_eq!(&rows[1][q], "undefined");
    assert!(rows[2][q].parse::<f64>().is_ok());

    let v = json(&["stats", "--k", "1.5", "--z", "0", "--format", "json"]);
    assert!(v["rows"][0]["mandel_q"].is_null());
    assert_eq!(v["rows"][0]["converged"], true);
}

#[test]
fn dist_footer_matches_weights() {
    for args in [
        ["dist", "--k", "1.5", "--z", "5"],
        ["dist", "--k", "3", "--z", "7.5"],
    ] {
        let rows = csv_rows(&stdout_ok(&args));
        assert_eq!(&rows[0][0], "n");
        let mut footer = std::collections::HashMap::new();
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for r in &rows[1..] {
            match r[0].parse::<f64>() {
                Ok(n) => {
                    let p: f64 = r[1].parse().unwrap();
                    assert!((0.0..=1.0).contains(&p));
                    s0 += p;
                    s1 += n * p;
                    s2 += n * n * p;
                }
                Err(_) => {
                    footer.insert(r[0].to_string(), r[1].to_string());
                }
            }
        }
        let get = |k: &str| footer[k].parse::<f64>().unwrap();
        let mean = s1 / s0;
        let var = s2 / s0 - mean * mean;
        assert!((s0 - 1.0).abs() < 1e-12);
        assert!((get("sum") - s0).abs() < 1e-12);
        assert!((get("mean") - mean).abs() < 1e-8 * mean.max(1.0));
        assert!((get("variance") - var).abs() < 1e-8 * mean.max(1.0));
        assert_eq!(footer["converged"], "true");
    }
}

#[test]
fn dist_json_matches_stats() {
    let d = json(&["dist", "--k", "1.5", "--z", "5", "--format", "json"]);
    let s = json(&["stats", "--k", "1.5", "--z", "5", "--format", "json"]);
    assert_eq!(d["mean"], s["rows"][0]["mean"]);
    assert_eq!(d["variance"], s["rows"][0]["variance"]);
    let rows = d["rows"].as_array().unwrap();
    assert_eq!(rows.len() as u64, d["terms_used"].as_u64().unwrap() + 1);
}

#[test]
fn dist_poisson_and_vacuum() {
    let rows = csv_rows(&stdout_ok(&["dist", "--k", "2", "--z", "1"]));
    let e = (-1.0f64).exp();
    for (n, expected) in [(0, e), (1, e), (2, e / 2.0), (3, e / 6.0)] {
        assert_eq!(rows[n + 1][0].parse::<usize>().unwrap(), n);
        let p: f64 = rows[n + 1][1].parse().unwrap();
        assert!((p - expected).abs() < 1e-14, "P_{n} = {p}");
    }

    let v = json(&["dist", "--k", "1.5", "--z", "0", "--format", "json"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["p_n"], 1.0);
}

#[test]
fn large_cutoff_follows_adaptive_curve() {
    let v = json(&[
        "sweep",
        "--k",
        "1.5",
        "--z-min",
        "1",
        "--z-max",
        "15",
        "--z-step",
        "1",
        "--cutoffs",
        "700",
        "--format",
        "json",
    ]);
    let rows = v["rows"].as_array().unwrap();
    let q_of = |curve: &str| -> Vec<f64> {
        rows.iter()
            .filter(|r| r["curve"] == curve)
            .map(|r| r["mandel_q"].as_f64().unwrap())
            .collect()
    };
    let (a, f) = (q_of("adaptive"), q_of("fixed_700"));
    assert_eq!(a.len(), 15);
    assert_eq!(a.len(), f.len());
    for (x, y) in a.iter().zip(&f) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn empty_cutoffs_give_adaptive_only() {
    let text = stdout_ok(&["sweep", "--k", "1.5", "--z-max", "1", "--cutoffs", ""]);
    let rows = csv_rows(&text);
    let curve = column(&rows[0], "curve");
    assert_eq!(rows.len(), 11);
    assert!(rows[1..].iter().all(|r| &r[curve] == "adaptive"));
}

#[test]
fn json_echoes_inputs() {
    let v = json(&[
        "table", "--k", "1.5", "--gamma", "3", "--z", "5", "--format", "json",
    ]);
    assert_eq!(v["inputs"]["gamma"], 3.0);
    assert_eq!(v["inputs"]["k"], 1.5);
    assert_eq!(v["rows"][0]["gamma"], 3.0);
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.csv");
    let printed = stdout_ok(&["stats", "--k", "1.5", "--z", "5", "--format", "csv"]);
    let quiet = stdout_ok(&[
        "stats",
        "--k",
        "1.5",
        "--z",
        "5",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(quiet.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
}
