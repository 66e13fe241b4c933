use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn qtm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("c.toml");
    std::fs::write(&p, text).unwrap();
    p
}

/// Totals column of the W, Q_h and Q_c rows of a steady report.
fn totals(report: &str) -> Vec<f64> {
    report
        .lines()
        .filter(|l| ["W ", "Q_h ", "Q_c "].iter().any(|p| l.trim_start().starts_with(p)))
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn validate_prints_canonical_form() {
    let o = qtm(&["validate", "--config", config("reference.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("mode = \"cascaded\""));
    assert!(text.contains("omega_matrix = [[0.1, 0.1], [0.1, 0.1]]"));
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "[hot]\nomega = 1\ng = [0.5]\ntemprature = 1\n");
    for cmd in ["validate", "steady"] {
        let o = qtm(&[cmd, "--config", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    }
    let o = qtm(&["steady", "--config", "/nonexistent/qtm.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_2() {
    let reference = config("reference.toml");
    let reference = reference.to_str().unwrap();
    for args in [
        vec!["steady", "--config", reference, "--scenarios", "xyz2"],
        vec!["sweep", "--config", reference, "--grid", "1:0:0.1"],
        vec!["collision-check", "--config", reference, "--tau", "0.1,0.2"],
        vec!["collision-check", "--config", reference, "--tau", "0.1,x,0.3"],
        vec!["steady", "--config", reference, "--threads", "0"],
    ] {
        let o = qtm(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    // all-to-all tags need omega_matrix
    let o = qtm(&["steady", "--config", config("equilibrium.toml").to_str().unwrap(), "--scenarios", "cas1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("omega_matrix"));
}

#[test]
fn reference_point_is_an_engine() {
    let o = qtm(&["steady", "--config", config("reference.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("scenario cas2"));
    assert!(text.contains("regime Engine (E)"), "{text}");
    let t = totals(&text);
    assert!(t[0] < 0.0 && t[1] > 0.0 && t[2] < 0.0);
}

#[test]
fn equal_temperatures_are_a_boundary() {
    let o = qtm(&["steady", "--config", config("equilibrium.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("regime Boundary (B)"), "{text}");
    let t = totals(&text);
    assert_eq!(t.len(), 3);
    assert!(t.iter().all(|v| v.abs() < 1e-8), "{t:?}");
}

#[test]
fn decoupled_kernel_exits_3() {
    let o = qtm(&["steady", "--config", config("decoupled.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("DEGENERATE"));
}

#[test]
fn decoupled_collision_check_is_exactly_zero() {
    let o = qtm(&["collision-check", "--config", config("decoupled.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.contains(" yes ") || l.trim_start().starts_with("QME")).collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let cells: Vec<&str> = r.split_whitespace().collect();
        for c in &cells[cells.len() - 3..] {
            assert_eq!(c.parse::<f64>().unwrap(), 0.0, "{r}");
        }
    }
}

#[test]
fn sweep_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let reference = config("reference.toml");
    let base = ["sweep", "--config", reference.to_str().unwrap(), "--grid", "0.9:2.1:0.1", "--scenarios", "com2,ind1"];
    let o = qtm(&[&base[..], &["--out", a.path().to_str().unwrap(), "--plots"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = qtm(&[&base[..], &["--out", b.path().to_str().unwrap(), "--threads", "1"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["sweep_com2.csv", "sweep_ind1.csv", "summary.csv", "power_efficiency_ind1.dat"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    assert!(a.path().join("power_efficiency.svg").exists());
    assert!(a.path().join("currents_com2.dat").exists());
    assert!(!b.path().join("power_efficiency.svg").exists());
}

#[test]
fn full_sweep_has_171_rows_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = qtm(&[
        "sweep",
        "--config",
        config("reference.toml").to_str().unwrap(),
        "--scenarios",
        "all",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for tag in ["com1", "com2", "cas1", "cas2", "ind1", "ind2"] {
        let mut r = csv::Reader::from_path(dir.path().join(format!("sweep_{tag}.csv"))).unwrap();
        let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header.len(), 16);
        assert_eq!(header[0], "scenario");
        assert_eq!(header[15], "error");
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 171);
        for row in &rows {
            assert_eq!(&row[0], tag);
            // residual and entropy production always populated, errors empty
            assert!(row[13].parse::<f64>().unwrap().is_finite());
            assert!(row[14].parse::<f64>().unwrap().is_finite());
            assert_eq!(&row[15], "", "{row:?}");
        }
        let labels: String = rows.iter().map(|row| row[11].to_string()).collect();
        assert!(labels.starts_with("AAAA") && labels.ends_with("RRRR"));
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    let text = stdout(&o);
    assert!(text.contains("efficiency at maximum power"));
}

#[test]
fn collision_check_reports_first_order_convergence() {
    let o = qtm(&["collision-check", "--config", config("reference.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let orders: Vec<f64> = text
        .lines()
        .find(|l| l.contains("convergence order"))
        .unwrap()
        .split_whitespace()
        .filter_map(|w| w.parse().ok())
        .collect();
    assert_eq!(orders.len(), 3);
    assert!(orders.iter().all(|o| (0.8..=1.2).contains(o)), "{orders:?}");
    let devs: Vec<f64> = text
        .lines()
        .find(|l| l.contains("relative deviation"))
        .unwrap()
        .split_whitespace()
        .filter_map(|w| w.parse().ok())
        .collect();
    assert!(devs.iter().all(|d| *d < 1e-3), "{devs:?}");
}
