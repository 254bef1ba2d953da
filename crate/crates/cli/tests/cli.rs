use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-filippov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn derive_b_fills_in_the_partner() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("full.json");
    let o = run(&["derive-b", s(&fixture("lemma_example.json")), "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout), "omega = 1.5\n");
    let doc = read_json(&out);
    let b: Vec<Vec<f64>> = serde_json::from_value(doc["B"].clone()).unwrap();
    assert_eq!(b, vec![vec![-1.0, -5.0, -3.0], vec![-1.0, -5.0, -6.0], vec![-7.0, -8.0, -9.0]]);
    assert_eq!(doc["torus"]["R"], 2.0);
}

#[test]
fn derive_b_warns_on_zero_omega() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("full.json");
    let o = run(&["derive-b", s(&fixture("zero.json")), "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout), "omega = 0\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: omega = 0"));
    let b: Vec<Vec<f64>> = serde_json::from_value(read_json(&out)["B"].clone()).unwrap();
    assert!(b.iter().flatten().all(|&x| x == 0.0));
}

#[test]
fn missing_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["derive-b", s(&fixture("missing_a.json")), "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing field `A`"));
    let o = run(&["classify", s(&dir.path().join("absent.json")), "--out", s(&dir.path().join("c.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let svg = dir.path().join("c.svg");
    let o = run(&["classify", s(&fixture("xz_omega_1_5.json")), "--out", s(&out), "--svg", s(&svg)]);
    assert!(o.status.success());
    let doc = read_json(&out);
    assert_eq!(doc["case"], "XZCase");
    assert_eq!(doc["components"].as_array().unwrap().len(), 6);
    assert_eq!(doc["gamma"], 5.0);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));

    run(&["classify", s(&fixture("z_squared.json")), "--out", s(&out)]);
    assert_eq!(read_json(&out)["components"].as_array().unwrap().len(), 2);

    run(&["classify", s(&fixture("spiral.json")), "--out", s(&out)]);
    let doc = read_json(&out);
    assert_eq!(doc["case"], "NumericalFallback");
    let comps = doc["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(doc["polylines"].as_array().unwrap().len(), 2);
    let level = 3f64.sqrt() / 2.0;
    let mut signs = Vec::new();
    for c in comps {
        assert_eq!(c["kind"], "Polyline");
        let pts: Vec<[f64; 3]> = serde_json::from_value(c["samples"].clone()).unwrap();
        for p in &pts {
            assert!((p[2].abs() - level).abs() < 0.02);
            assert!((p[0].hypot(p[1]) - 1.5).abs() < 0.02);
        }
        signs.push(pts[0][2].signum());
    }
    signs.sort_by(f64::total_cmp);
    assert_eq!(signs, vec![-1.0, 1.0]);
}

#[test]
fn simulate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let report = dir.path().join("r.json");
    let o = run(&[
        "simulate", s(&fixture("spiral.json")), "--x0", "4,0,0", "--tmax", "3", "--out", s(&out),
        "--report", s(&report), "--svg", s(&dir.path().join("t.svg")),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,x,y,z,mode,segment\n"));
    let rows = csv_rows(&out);
    let first_slide = rows.iter().find(|r| r[4] == "slide").unwrap();
    let t: f64 = first_slide[0].parse().unwrap();
    let (x, y): (f64, f64) = (first_slide[1].parse().unwrap(), first_slide[2].parse().unwrap());
    assert!((t - 0.287682).abs() < 1e-6);
    assert!((x.hypot(y) - 3.0).abs() < 1e-9);
    assert_eq!(first_slide[5], "1");
    let r = read_json(&report);
    assert_eq!(r["command"], "simulate");
    assert_eq!(r["diagnostics"]["segments"], 2);

    run(&["simulate", s(&fixture("spiral.json")), "--x0", "4,0,0", "--tmax", "0", "--out", s(&out)]);
    assert_eq!(csv_rows(&out).len(), 1);

    let o = run(&[
        "simulate", s(&fixture("zero.json")), "--x0", "3,0,0", "--tmax", "2", "--out", s(&out),
        "--report", s(&report),
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][4], "slide");
    assert_eq!(read_json(&report)["diagnostics"]["terminal_event"], "DegenerateStop");

    let o = run(&["simulate", s(&fixture("spiral.json")), "--x0", "4,0", "--tmax", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", s(&fixture("spiral.json")), "--x0", "4,0,0", "--tmax", "-1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

/// `X₊h = 4xz(S − 5)` for the xz fixture.
fn xz_lie(u: f64, v: f64) -> f64 {
    let (x, _, z) = ((2.0 + v.cos()) * u.cos(), (2.0 + v.cos()) * u.sin(), v.sin());
    let s = 5.0 + 4.0 * v.cos();
    4.0 * x * z * (s - 5.0)
}

#[test]
fn regions_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let n = 64;
    let o = run(&["regions", s(&fixture("xz_omega_1_5.json")), "--grid", "64", "--out", s(&out), "--svg", s(&dir.path().join("g.svg"))]);
    assert!(o.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), n * n);
    assert!(rows.iter().all(|r| r[2] != "crossing"));
    assert!(rows.iter().any(|r| r[2] == "sliding"));
    assert!(rows.iter().any(|r| r[2] == "escaping"));
    let step = std::f64::consts::TAU / n as f64;
    for r in rows.iter().filter(|r| r[2] == "tangency") {
        let (u, v): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let here = xz_lie(u, v);
        let near_curve = here.abs() < 1e-6
            || [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)]
                .iter()
                .any(|(du, dv)| xz_lie(u + du, v + dv) * here <= 0.0);
        assert!(near_curve, "tangency at ({u}, {v}) away from the analytic curves");
    }
    for r in rows.iter().filter(|r| r[2] != "tangency") {
        let (u, v): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let expected = if xz_lie(u, v) < 0.0 { "sliding" } else { "escaping" };
        assert_eq!(r[2], expected);
    }

    run(&["regions", s(&fixture("zero.json")), "--grid", "16", "--out", s(&out)]);
    assert!(csv_rows(&out).iter().all(|r| r[2] == "tangency"));

    let o = run(&["regions", s(&fixture("xz_omega_1_5.json")), "--grid", "8", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid too coarse"));
}

#[test]
fn non_inelastic_documents_only_allow_region_maps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = run(&["regions", s(&fixture("elastic.json")), "--grid", "16", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["regions", s(&fixture("elastic.json")), "--grid", "16", "--out", s(&out), "--allow-non-inelastic"]);
    assert!(o.status.success());
    assert!(csv_rows(&out).iter().all(|r| r[2] == "crossing"));
    let o = run(&["classify", s(&fixture("elastic.json")), "--out", s(&out), "--allow-non-inelastic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn orbit_check_and_equiv_examples() {
    let o = run(&["orbit-check", s(&fixture("xz_omega_1_5.json")), "--p0", "2.5,0,-0.8660254037844386"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["closed"], true);
    assert!((doc["period"].as_f64().unwrap() - 4.18879).abs() < 1e-5);

    let o = run(&["orbit-check", s(&fixture("zero.json")), "--p0", "3,0,0"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let o = run(&["equiv", s(&fixture("xz_omega_1_5.json")), s(&fixture("xz_omega_minus_0_3.json")), "--out", s(&out)]);
    assert!(o.status.success());
    let r = read_json(&out);
    assert_eq!(r["equivalent"], true);
    assert_eq!(r["homeomorphism_descriptor"], "ReflectionY");
    assert_eq!(r["orientation_relation"], "Reversed");

    run(&["equiv", s(&fixture("xz_omega_1_5.json")), s(&fixture("zero.json")), "--out", s(&out)]);
    assert_eq!(read_json(&out)["equivalent"], false);
    run(&["equiv", s(&fixture("xz_omega_1_5.json")), s(&fixture("xz_omega_1_5.json")), "--out", s(&out), "--strict"]);
    assert_eq!(read_json(&out)["equivalent"], false);
}

#[test]
fn sweep_writes_one_report_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = Command::new(env!("CARGO_BIN_EXE_torus-filippov"))
        .args(["sweep", s(&fixture("sweep.json")), "--out-dir", s(&out), "--grid", "64"])
        .env("TORUS_FILIPPOV_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let index = read_json(&out.join("index.json"));
    assert_eq!(index["count"], 6);
    let mut flagged = Vec::new();
    for cell in index["cells"].as_array().unwrap() {
        let report = read_json(&out.join(cell["file"].as_str().unwrap()));
        assert_eq!(report["index"], cell["index"]);
        if report["degenerate_omega"] == true {
            flagged.push((
                report["parameters"]["a21"].as_f64().unwrap(),
                report["parameters"]["b21"].as_f64().unwrap(),
            ));
        }
    }
    flagged.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(flagged, vec![(-1.0, 1.0), (0.0, 0.0)]);

    let o = Command::new(env!("CARGO_BIN_EXE_torus-filippov"))
        .args(["sweep", s(&fixture("sweep.json")), "--out-dir", s(&out)])
        .env("TORUS_FILIPPOV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
