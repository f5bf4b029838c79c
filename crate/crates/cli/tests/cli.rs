use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeezespin"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

/// Data rows of a CSV as (header, rows), skipping the comment block.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn rates_at_zero_drive_give_the_lamb_shift() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["rates", "--set", "r=0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let shift = v["rates"]["dispersive_shift"].as_f64().unwrap();
    assert!((shift + 6.25e-5).abs() < 1e-15, "{shift}");
}

#[test]
fn undriven_uncoupled_resonator_has_an_empty_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum", "--set", "g=0", "--set", "lambda=0", "--set", "grid.points=128"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("spectrum_resonator.csv"));
    assert_eq!(header, ["omega", "S"]);
    assert!(rows.len() >= 128);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
    let features: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum_resonator.features.json")).unwrap()).unwrap();
    assert_eq!(features["features"]["note"], "unresolved");
}

#[test]
fn sweeps_are_byte_identical_and_echo_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# anticrossing\nsweep.axis = rc\nsweep.start = 0.3\nsweep.stop = 0.5\nsweep.points = 2\ngrid.points = 301\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (d, jobs) in [(&a, "1"), (&b, "2")] {
        let out = run(d, &["anticross", "--config", cfg.to_str().unwrap(), "--jobs", jobs]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ta = std::fs::read_to_string(a.join("anticross.csv")).unwrap();
    let tb = std::fs::read_to_string(b.join("anticross.csv")).unwrap();
    let strip = |t: &str| t.lines().filter(|l| !l.starts_with("# config.out_dir")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&ta), strip(&tb));
    assert!(!ta.contains('\r'));
    for key in ["# squeezespin = ", "# frame = squeezed", "# n_fock = 30", "# kappa = 4e-2"] {
        assert!(ta.contains(key), "missing {key}");
    }
    let (header, rows) = read_csv(&a.join("anticross.csv"));
    assert_eq!(rows.len(), 2);
    let r = col(&header, "r");
    assert!((rows[0][r].parse::<f64>().unwrap() - 0.3).abs() < 1e-12);
    assert!(rows.iter().all(|row| row[col(&header, "status")] == "ok"));
}

#[test]
fn config_errors_are_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["rates", "--set", "bogus=1"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "Config");

    let out = run(dir.path(), &["rates", "--set", "lambda=1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "ParametricInstability");
}

#[test]
fn oversized_rotating_truncation_fails_in_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "truncation", "--set", "sweep.axis=r", "--set", "sweep.start=0", "--set", "sweep.stop=0.5", "--set", "sweep.points=2",
            "--set", "frames=squeezed,rotating", "--set", "n_values=20,250",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let (header, rows) = read_csv(&dir.path().join("truncation.csv"));
    assert_eq!(rows.len(), 8);
    let st = col(&header, "status");
    let eta = col(&header, "eta_numeric");
    let failed: Vec<_> = rows.iter().filter(|r| r[st] != "ok").collect();
    assert_eq!(failed.len(), 2);
    assert!(failed.iter().all(|r| r[st].contains("resource guard") && r[st].contains("squeezed frame")));
    for row in rows.iter().filter(|r| r[0].parse::<f64>().unwrap() == 0.0 && r[st] == "ok") {
        assert_eq!(row[eta].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn thermal_photon_correlation_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "photon-corr", "--set", "g=0", "--set", "bath.kind=thermal", "--set", "bath.nbar=1", "--set", "frame=rotating",
            "--set", "n_fock=30", "--set", "sweep.axis=tau", "--set", "sweep.start=0", "--set", "sweep.stop=100",
            "--set", "sweep.points=11",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("photon_corr.csv"));
    let (t, c, re) = (col(&header, "tau"), col(&header, "closed_form"), col(&header, "re_corr"));
    for row in &rows {
        let tau: f64 = row[t].parse().unwrap();
        let want = 1.0 + 2.0 * (-0.04 * tau).exp();
        assert!((row[c].parse::<f64>().unwrap() - want).abs() < 1e-12);
        assert!((row[re].parse::<f64>().unwrap() - want).abs() < 1e-5 * want);
    }
}

#[test]
fn shift_width_zero_drive_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["shift-width", "--set", "sweep.axis=r", "--set", "sweep.start=0", "--set", "sweep.stop=0", "--set", "sweep.points=1", "--set", "grid.points=801"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("shift_width.csv"));
    let row = &rows[0];
    assert_eq!(row[col(&header, "shift_analytic")].parse::<f64>().unwrap(), -6.25e-5);
    assert_eq!(row[col(&header, "reliability_flag")], "0");
    let num: f64 = row[col(&header, "shift_numeric")].parse().unwrap();
    assert!((num / -6.25e-5 - 1.0).abs() < 0.1);
}
