use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eoq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eoq"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn field_sweep_default_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = eoq(dir.path(), &["sweep-field"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("h* = 0.750000000"), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
    let text = std::fs::read_to_string(dir.path().join("sweep-field.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,e1,e2,e3,e4,e5,e6,e7,e8,gap");
    assert_eq!(lines.len(), 302);
    let mid: Vec<f64> = lines[151].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(mid[0], 0.75);
    assert!((mid[9] - 0.75).abs() < 1e-12);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (k, extra) in [&[][..], &["--workers", "1"][..], &["--workers", "3"][..]]
        .iter()
        .enumerate()
    {
        let out = format!("run{k}.csv");
        let mut args = vec!["sweep-intra", "--points", "101", "-o", &out];
        args.extend_from_slice(extra);
        assert!(eoq(dir.path(), &args).status.success());
    }
    let a = std::fs::read(dir.path().join("run0.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("run1.csv")).unwrap());
    assert_eq!(a, std::fs::read(dir.path().join("run2.csv")).unwrap());
}

#[test]
fn units_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = eoq(dir.path(), &["units", "--J", "7", "--g", "0.44"]);
    assert!(o.status.success());
    let v = json(&dir.path().join("units.json"));
    assert_eq!(v["schema"], 1);
    let b = v["result"]["B_tesla"].as_f64().unwrap();
    assert!((b - 0.206).abs() < 1e-3);
    assert!((v["result"]["gap_microeV"].as_f64().unwrap() - 5.25).abs() < 1e-9);
}

#[test]
fn polynomial_report_has_every_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = eoq(
        dir.path(),
        &[
            "verify-polynomials",
            "--grid",
            "0:0.7:71",
            "-o",
            "poly.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&dir.path().join("poly.json"));
    let points = v["result"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 71);
    for key in ["line_00", "line_00_c3", "quadratic_11", "cubic_01"] {
        assert!(points[0][key].is_number(), "{key}");
    }
    assert_eq!(points[0]["line_00_c3"].as_f64().unwrap().abs(), 6.0);
}

#[test]
fn single_qubit_gate_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = eoq(
        dir.path(),
        &[
            "gate", "--type", "rx", "--theta", "pi", "--format", "json", "-o", "rx.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&dir.path().join("rx.json"));
    assert!(v["result"]["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert_eq!(v["result"]["schedule"].as_array().unwrap().len(), 1);
    let o = eoq(
        dir.path(),
        &[
            "gate", "--type", "rx", "--theta", "pi", "--format", "csv", "-o", "rx.csv",
        ],
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("rx.csv")).unwrap();
    assert!(csv.starts_with("segment,t_start,duration,ramp,J12_start,J13_start,J23_start"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.ini"),
        "format = csv\noutput = u.csv\n[units]\nh = 0.75\n",
    )
    .unwrap();
    let o = eoq(dir.path(), &["units", "--config", "run.ini", "--h", "0.6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("u.csv")).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(row[2], 0.6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = eoq(
        dir.path(),
        &["gate", "--type", "cphase", "--phi", "pi", "--j14", "0.9"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("0.75"), "{}", stderr(&o));

    std::fs::write(dir.path().join("bad.ini"), "[units]\nspeed = 3\n").unwrap();
    let o = eoq(dir.path(), &["units", "--config", "bad.ini"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("speed"));

    std::fs::write(
        dir.path().join("broken.ini"),
        "[units]\nh = 1\njust words\ng = 0.44\n",
    )
    .unwrap();
    let o = eoq(dir.path(), &["units", "--config", "broken.ini"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.ini:3"), "{}", stderr(&o));

    let o = eoq(dir.path(), &["sweep-field", "--points", "one"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("points"));

    let o = eoq(dir.path(), &["gate", "--type", "rz"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta"));

    let o = eoq(dir.path(), &["units", "--g", "0"]);
    assert_eq!(o.status.code(), Some(3));

    let o = eoq(dir.path(), &["units", "-o", "missing/dir/u.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing/dir/u.json"));
}

#[test]
fn conditional_phase_gate_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let o = eoq(
        dir.path(),
        &[
            "gate", "--type", "cphase", "--phi", "pi", "--j14", "0.5", "--ramp", "10", "-o",
            "cz.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&dir.path().join("cz.json"));
    assert!(v["result"]["fidelity"].as_f64().unwrap() >= 0.9999);
    assert!(v["result"]["calibration"]["hold_time"].as_f64().unwrap() > 0.0);
    assert_eq!(v["result"]["logical_block"].as_array().unwrap().len(), 4);
}
