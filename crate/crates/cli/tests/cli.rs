use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rmtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtlab"))
        .args(args)
        .env_remove("RMTLAB_OUT_DIR")
        .output()
        .expect("spawn rmtlab")
}

fn out_arg(dir: &Path) -> String {
    format!("--out={}", dir.display())
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn fredholm_table_starts_at_one() {
    let d = tempfile::tempdir().unwrap();
    let o = rmtlab(&[&out_arg(d.path()), "fredholm", "--smax", "4", "--step", "0.05"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.path().join("fredholm.csv")).unwrap();
    assert!(csv.starts_with("# rmtlab "));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 81);
    assert!((rows[0][1] - 1.0).abs() < 1e-12);
    // H decreasing, cdf increasing
    for w in rows.windows(2) {
        assert!(w[1][1] < w[0][1]);
        assert!(w[1][4] >= w[0][4] - 1e-9);
    }
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["command"], "fredholm");
    assert!(d.path().join("fredholm.svg").exists());
    assert!(d.path().join("fredholm.json").exists());
}

#[test]
fn replay_reproduces_csv_and_plot_is_idempotent() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    let o = rmtlab(&[&out_arg(&a), "spacing-mc", "--N", "40", "--trials", "100", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = a.join("spacing-mc.json");
    let o = rmtlab(&[&out_arg(&b), "replay", summary.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(a.join("spacing-mc.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("spacing-mc.csv")).unwrap());

    let svg = fs::read(a.join("spacing-mc.svg")).unwrap();
    let o = rmtlab(&["plot", summary.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(svg, fs::read(a.join("spacing-mc.svg")).unwrap());
}

#[test]
fn threads_flag_does_not_change_results() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    let args = ["spectrum", "--N", "60", "--trials", "8", "--seed", "3"];
    for (dir, t) in [(&a, "1"), (&b, "2")] {
        let mut v = vec![out_arg(dir), "--threads".into(), t.into()];
        v.extend(args.iter().map(|s| s.to_string()));
        let o = rmtlab(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(a.join("spectrum.csv")).unwrap(), fs::read(b.join("spectrum.csv")).unwrap());
}

#[test]
fn env_var_selects_output_dir() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rmtlab"))
        .args(["prop22-check", "--N", "2"])
        .env("RMTLAB_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = fs::read_to_string(d.path().join("prop22-check.csv")).unwrap();
    let gaps: Vec<f64> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(gaps.len(), 3);
    assert!(gaps.iter().all(|g| *g < 1e-10));
}

#[test]
fn kernel_scan_writes_csv_and_plot() {
    let d = tempfile::tempdir().unwrap();
    let o = rmtlab(&[&out_arg(d.path()), "kernel-scan", "--N", "200", "--a", "1", "--u", "0", "--tau-max", "2", "--tau-step", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.path().join("kernel-scan.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("tau,kernel_value,sine_value,abs_error"));
    let svg = fs::read_to_string(d.path().join("kernel-scan.svg")).unwrap();
    assert!(svg.contains("<svg"));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["metrics"]["per_N"][0]["sup_error_of_mean"].as_f64().unwrap() < 0.05);
}

#[test]
fn config_file_drives_run() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("exp.cfg");
    fs::write(&cfg, "# small spectrum run\nexperiment = spectrum\nlaw.kind = uniform\nN = 50\nseed = 4\ntrials = 3\n").unwrap();
    let o = rmtlab(&[&out_arg(&d.path().join("o")), "run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["seed"], 4);
    assert_eq!(summary["params"]["law"], "uniform");
}

#[test]
fn schema_violations_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    fs::write(&cfg, "experiment = spectrum\nwidth = 3\n").unwrap();
    let o = rmtlab(&[&out_arg(d.path()), "run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));

    let o = rmtlab(&[&out_arg(d.path()), "--config", cfg.to_str().unwrap(), "spectrum"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&cfg, "a = -1\n").unwrap();
    let o = rmtlab(&[&out_arg(d.path()), "--config", cfg.to_str().unwrap(), "spectrum"]);
    assert_eq!(o.status.code(), Some(2));

    let o = rmtlab(&[&out_arg(d.path()), "spectrum", "--law", "cauchy"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rmtlab(&[&out_arg(d.path()), "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_with_json() {
    let d = tempfile::tempdir().unwrap();
    let o = rmtlab(&[&out_arg(d.path()), "kernel-scan", "--N", "50", "--u", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).expect("json diagnostics on stderr");
    assert!(err["kind"] == "domain");
}

#[test]
fn sample_round_trips_matrix() {
    let d = tempfile::tempdir().unwrap();
    let o = rmtlab(&[&out_arg(d.path()), "sample", "--N", "6", "--format", "csv", "--spectrum"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = rmtlab::io::read_matrix_csv(std::io::BufReader::new(fs::File::open(d.path().join("sample-matrix.csv")).unwrap())).unwrap();
    assert_eq!(m.dim(), 6);
    let s = rmtlab::io::read_spectrum_csv(std::io::BufReader::new(fs::File::open(d.path().join("sample-spectrum.csv")).unwrap())).unwrap();
    let e = rmtlab::spectral::hermitian_eigenvalues(&m).unwrap();
    for (x, y) in s.values().iter().zip(e.values()) {
        assert!((x - y).abs() < 1e-12);
    }
}
