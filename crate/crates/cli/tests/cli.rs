use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spinbie(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbie"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("SPINBIE_OUT")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn mellin_sweep_reports_exponents() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spinbie(&["mellin-sweep"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("mellin-sweep");
    let mut rdr = csv::Reader::from_path(dir.join("exponents.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let k = rows.iter().find(|r| &r[0] == "inv_iplus_k").unwrap();
    let slope: f64 = k[1].parse().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
    let r = report(&dir);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["experiment"], "mellin-sweep");
    assert!(r["versions"]["spinbie"].is_string());
}

#[test]
fn dirichlet2d_example_is_accurate() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["dirichlet2d", "dirichlet2d-classical"] {
        let out = spinbie(&[name], tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let r = report(&tmp.path().join(name));
        let err = r["results"]["max_probe_error"].as_f64().unwrap();
        assert!(err < 1e-8, "{name}: {err}");
        assert!(tmp.path().join(name).join("boundary.csv").exists());
    }
}

#[test]
fn malformed_json_reports_line_and_column() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", "{\n  \"experiment\": \"mellin-sweep\",\n  \"thetas\": [0.4, 0.2,, 0.1]\n}\n");
    let out = spinbie(&["mellin-sweep", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column"), "{err}");
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write(tmp.path(), "u.json", r#"{"experiment": "mellin-sweep", "thetas": [0.4, 0.2, 0.1], "extra": 1}"#);
    let mismatch = write(tmp.path(), "m.json", r#"{"experiment": "mellin-sweep", "thetas": [0.4, 0.2, 0.1]}"#);
    let bad_k = write(
        tmp.path(),
        "k.json",
        r#"{"experiment": "maxwell-pec", "geometry": {"kind": "icosphere", "radius": 1.0, "subdivisions": 0},
            "wave_number": [1.0, -0.5], "incident": {"kind": "zero"}}"#,
    );
    let kind = write(tmp.path(), "x.json", r#"{"experiment": "fourier-sweep"}"#);
    for (sub, cfg) in [("mellin-sweep", &unknown), ("corner-sweep", &mismatch), ("maxwell-pec", &bad_k), ("mellin-sweep", &kind)] {
        let out = spinbie(&[sub, "--config", cfg], tmp.path());
        assert_eq!(out.status.code(), Some(1), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = tmp.path().join("nope.json");
    let out = spinbie(&["mellin-sweep", "--config", missing.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = spinbie(&["dirichlet2d"], dir.path());
        assert!(out.status.success());
    }
    for name in ["boundary.csv", "probes.csv"] {
        let x = std::fs::read(a.path().join("dirichlet2d").join(name)).unwrap();
        let y = std::fs::read(b.path().join("dirichlet2d").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn operator_dump_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spinbie(&["operator-dump"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, m) = spinbie::operators::read_dump(&tmp.path().join("operator-dump").join("operator.bin")).unwrap();
    assert_eq!(header.nodes, 64);
    assert_eq!((m.nrows(), m.ncols()), (header.rows, header.cols));
}

#[test]
fn examples_parse_and_env_sets_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in [
        "dirichlet2d",
        "dirichlet2d-classical",
        "maxwell-pec",
        "dirac-generic",
        "transmission",
        "mellin-sweep",
        "corner-sweep",
        "resonance-sweep",
        "calderon-check",
        "operator-dump",
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_spinbie")).args([sub, "--print-example"]).output().unwrap();
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["experiment"], sub);
    }
    let out = Command::new(env!("CARGO_BIN_EXE_spinbie"))
        .arg("mellin-sweep")
        .env("SPINBIE_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("mellin-sweep").join("report.json").exists());
}

#[test]
fn small_scattering_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "pec.json",
        r#"{"experiment": "maxwell-pec",
            "geometry": {"kind": "icosphere", "radius": 1.0, "subdivisions": 1},
            "wave_number": 2.0,
            "incident": {"kind": "scaled", "factor": [-1.0, 0.0], "field":
                {"kind": "dipole", "position": [0.1, 0.0, 0.0], "moment": [[0,0],[1,0],[0,0]], "k": [2.0, 0.0]}},
            "reference": {"kind": "dipole", "position": [0.1, 0.0, 0.0], "moment": [[0,0],[1,0],[0,0]], "k": [2.0, 0.0]},
            "probes": {"random": {"radius": 2.0, "count": 5}}, "seed": 7}"#,
    );
    let out = spinbie(&["maxwell-pec", "--config", &cfg, "--threads", "1"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("maxwell-pec"));
    let err = r["results"]["scattered"]["trace_relative_error"].as_f64().unwrap();
    assert!(err < 0.15, "{err}");
}
