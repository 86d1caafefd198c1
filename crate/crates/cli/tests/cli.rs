use std::path::PathBuf;
use std::process::{Command, Output};

use cholspace::linalg::determinant_spd;
use cholspace::SpdPoint;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cholspace"));
    cmd.env_remove("CHOLSPACE_SEED");
    cmd
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/swelling_pair.json")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// `(metric, t, value)` records of an interpolation CSV.
fn rows(csv: &str) -> Vec<(String, f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (f[0].to_string(), f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect()
}

fn row_of(records: &[(String, f64, f64)], metric: &str) -> Vec<f64> {
    records.iter().filter(|r| r.0 == metric).map(|r| r.2).collect()
}

#[test]
fn interpolation_reproduces_endpoint_determinants() {
    let out = bin().args(["interpolate", "--input"]).arg(fixture()).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "metric,theta,eps,t,value");

    let pair: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture()).unwrap()).unwrap();
    let to_spd = |key: &str| {
        let rows: Vec<Vec<f64>> = serde_json::from_value(pair[key].clone()).unwrap();
        SpdPoint::from_rows(&rows).unwrap()
    };
    let (dp, dq) = (determinant_spd(&to_spd("P")), determinant_spd(&to_spd("Q")));
    let records = rows(&text);
    for kind in ["1.0-EM", "0.5-EM", "0.1-EM", "LEM", "AIM", "BWM", "LCM", "0.1-CDEM", "0.5-CDEM", "1.0-CDEM"] {
        let row = row_of(&records, kind);
        assert_eq!(row.len(), 10, "{kind}");
        assert_eq!(row[0], dp, "{kind}");
        assert_eq!(row[9], dq, "{kind}");
    }
}

#[test]
fn log_type_rows_agree_and_euclidean_swells() {
    let out = bin().args(["interpolate", "--input"]).arg(fixture()).output().unwrap();
    let records = rows(&stdout(&out));
    let round = |v: &[f64]| v.iter().map(|d| (d * 100.0).round() / 100.0).collect::<Vec<_>>();
    let lem = round(&row_of(&records, "LEM"));
    assert_eq!(lem, vec![3.07, 3.10, 3.14, 3.17, 3.20, 3.24, 3.27, 3.31, 3.34, 3.38]);
    assert_eq!(round(&row_of(&records, "AIM")), lem);
    assert_eq!(round(&row_of(&records, "LCM")), lem);

    let em = row_of(&records, "1.0-EM");
    let peak = em.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(peak > 10.0 * em[0].max(em[9]), "EM peak {peak}");
    // Deformation toward CM shrinks the swelling of the Cholesky interpolation.
    let cdem = |theta: &str| row_of(&records, &format!("{theta}-CDEM"));
    let (c01, c05, c10) = (cdem("0.1"), cdem("0.5"), cdem("1.0"));
    for i in 0..10 {
        assert!(c01[i] <= c05[i] + 1e-12 && c05[i] <= c10[i] + 1e-12, "column {i}");
    }
}

#[test]
fn interpolation_can_emit_matrices() {
    let out = bin()
        .args(["interpolate", "--kinds", "LEM,BWM", "--steps", "4", "--emit-matrices", "--input"])
        .arg(fixture())
        .output()
        .unwrap();
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap().len(), 6);
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 8);
    for r in &records {
        let m: Vec<Vec<f64>> = serde_json::from_str(&r[5]).unwrap();
        let det = determinant_spd(&SpdPoint::from_rows(&m).unwrap());
        let reported: f64 = r[4].parse().unwrap();
        assert!((det - reported).abs() <= 1e-9 * reported);
    }
}

#[test]
fn stability_is_deterministic_and_seed_env_overrides() {
    let args = ["stability", "--trials", "300", "--eps", "1e-3,1e-10", "--seed", "5"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), "metric,theta,eps,t,value");
    assert_eq!(text.lines().count(), 1 + 2 + 2 * 2 * 2);

    let overridden = bin().args(args).env("CHOLSPACE_SEED", "11").output().unwrap();
    let direct = bin()
        .args(["stability", "--trials", "300", "--eps", "1e-3,1e-10", "--seed", "11"])
        .output()
        .unwrap();
    assert_eq!(overridden.stdout, direct.stdout);
    assert_ne!(overridden.stdout, a.stdout);

    let bad = bin().args(args).env("CHOLSPACE_SEED", "seven").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn stability_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rates.csv");
    let out = bin()
        .args(["stability", "--trials", "100", "--eps", "1", "--metrics", "CM,DEM", "--theta", "0.5", "--csv"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let body = std::fs::read_to_string(&path).unwrap();
    assert_eq!(body, "metric,theta,eps,t,value\nCM,,1e0,1,0.00\nDEM,0.5,1e0,1,0.00\n");
}

#[test]
fn stability_rejects_bad_arguments() {
    let out = bin().args(["stability", "--metrics", "AIM"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["stability", "--theta", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["stability", "--trials", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_operators() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_temp(&dir, "x.json", r#"{"n": 1, "P": [[1]], "Q": [[4]], "V": [[1]], "t": 1}"#);
    let run = |metric: &str, op: &str| -> serde_json::Value {
        let out = bin().args(["eval", "--metric", metric, "--op", op, "--input"]).arg(&input).output().unwrap();
        assert!(out.status.success(), "{metric} {op}: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    };
    assert_eq!(run("CM", "exp")["result"][0][0].as_f64().unwrap(), std::f64::consts::E);
    assert_eq!(run("2-DGBWM", "log")["result"][0][0].as_f64().unwrap(), 3.0);
    assert_eq!(run("0.5-DEM", "dist")["result"].as_f64().unwrap(), 2.0);
    assert_eq!(run("1-CDEM", "gyro-add")["result"][0][0].as_f64().unwrap(), 4.0);
    assert_eq!(run("LCM", "dist")["result"].as_f64().unwrap(), 2f64.ln());
}

#[test]
fn eval_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let small = write_temp(&dir, "small.json", r#"{"n": 1, "P": [[0.3]], "Q": [[0.3]]}"#);
    let out = bin().args(["eval", "--metric", "1-DEM", "--op", "gyro-add", "--input"]).arg(&small).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let indefinite = write_temp(&dir, "bad.json", r#"{"n": 2, "P": [[1, 2], [2, 1]], "Q": [[1, 0], [0, 1]]}"#);
    let out = bin().args(["interpolate", "--input"]).arg(&indefinite).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let garbage = write_temp(&dir, "garbage.json", "{ not json");
    let out = bin().args(["eval", "--metric", "CM", "--op", "dist", "--input"]).arg(&garbage).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let shape = write_temp(&dir, "shape.json", r#"{"n": 2, "P": [[1]], "Q": [[1]]}"#);
    let out = bin().args(["interpolate", "--input"]).arg(&shape).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let ok = write_temp(&dir, "ok.json", r#"{"n": 1, "P": [[1]], "Q": [[2]]}"#);
    for (metric, op) in [("XYZ", "dist"), ("CM", "frobnicate"), ("CM", "transport")] {
        let out = bin().args(["eval", "--metric", metric, "--op", op, "--input"]).arg(&ok).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{metric} {op}");
    }
    let out = bin().args(["interpolate", "--kinds", "FOO", "--input"]).arg(&ok).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
