use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn herald(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_herald"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("HERALD_JOBS")
        .output()
        .expect("herald runs")
}

fn written(o: &Output) -> PathBuf {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    PathBuf::from(String::from_utf8(o.stdout.clone()).unwrap().trim())
}

/// Header and rows of a CSV, comment lines dropped.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn cz_effective_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = written(&herald(
        dir.path(),
        &["cz", "--C", "100", "--a", "0.25", "--source", "effective"],
    ));
    let (h, rows) = table(&csv);
    assert_eq!(
        h.join(","),
        "C,a,delta_E,delta_e,t_gate,P_success,infidelity,source"
    );
    assert_eq!(rows.len(), 1);
    let t: f64 = rows[0][col(&h, "t_gate")].parse().unwrap();
    assert!((37.7..38.1).contains(&t), "{t}");
    assert_eq!(rows[0][col(&h, "source")], "effective");
    assert!(csv.with_extension("json").exists());
}

#[test]
fn identical_flags_give_identical_csv() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["cz", "--C", "300,10,100", "--a", "0.1..0.3:0.1"];
    let a = fs::read(written(&herald(d1.path(), &args))).unwrap();
    let b = fs::read(written(&herald(d2.path(), &args))).unwrap();
    assert_eq!(a, b);
    // rows come out sorted regardless of the order of --C
    let (h, rows) = table(&written(&herald(d1.path(), &args)));
    let cs: Vec<f64> = rows
        .iter()
        .map(|r| r[col(&h, "C")].parse().unwrap())
        .collect();
    assert_eq!(cs.len(), 9);
    assert!(cs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn usage_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["cz", "--C", ""][..],
        &["cz", "--C", "10", "--delta-E2", "100"],
        &["cz", "--C", "10", "--scheme", "b"],
        &["toffoli", "--N", "1"],
        &["repeater", "--p", "0"],
        &["repeater", "--L", "100"],
    ] {
        let o = herald(dir.path(), args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn repeater_anchor_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv = written(&herald(
        dir.path(),
        &[
            "repeater",
            "--p",
            "1",
            "--L",
            "128",
            "--L0",
            "1",
            "--F-final",
            "0.9",
            "--eps0",
            "0.005",
            "--epsg",
            "0.005",
        ],
    ));
    let (h, rows) = table(&csv);
    let ratio: f64 = rows[0][col(&h, "ratio")].parse().unwrap();
    let n_max: f64 = rows[0][col(&h, "N_max")].parse().unwrap();
    assert!((ratio / 3.0 - 1.0).abs() < 0.3, "{ratio}");
    assert!((n_max - 10.54).abs() < 0.01, "{n_max}");
}

#[test]
fn toffoli_generic_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let csv = written(&herald(
        dir.path(),
        &["toffoli", "--N", "15,5,10", "--C", "1000"],
    ));
    let (h, rows) = table(&csv);
    let ns: Vec<usize> = rows
        .iter()
        .map(|r| r[col(&h, "N")].parse().unwrap())
        .collect();
    assert_eq!(ns, vec![5, 10, 15]);
    let err: Vec<f64> = rows
        .iter()
        .map(|r| 1.0 - r[col(&h, "F")].parse::<f64>().unwrap())
        .collect();
    assert!(err[0] > err[1] && err[1] > err[2], "{err:?}");
}

#[test]
fn replay_reproduces_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let csv = written(&herald(
        dir.path(),
        &["toffoli", "--N", "3,4", "--C", "30,300", "--input", "worst"],
    ));
    let manifest = csv.with_extension("json");
    let o = herald(
        dir.path(),
        &["replay", "--manifest", manifest.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    // a tampered CSV checksum is reported
    let text = fs::read_to_string(&manifest).unwrap();
    let mut m: serde_json::Value = serde_json::from_str(&text).unwrap();
    m["files"][0]["sha256"] = serde_json::Value::String("0".repeat(64));
    fs::write(&manifest, serde_json::to_string_pretty(&m).unwrap()).unwrap();
    let o = herald(
        dir.path(),
        &["replay", "--manifest", manifest.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn manifest_records_points_and_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let csv = written(&herald(
        dir.path(),
        &["cz", "--C", "10,100", "--calibrate", "closed-form"],
    ));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(m["points"].as_array().unwrap().len(), 2);
    assert!(m["points"][0]["calibration"]["residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(m["files"].as_array().unwrap().len(), 1);
    let header = fs::read_to_string(&csv).unwrap();
    assert!(header.contains(m["config_sha256"].as_str().unwrap()));
}

#[test]
fn herald_jobs_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_herald"))
        .arg("--out")
        .arg(dir.path())
        .args(["repeater"])
        .env("HERALD_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
