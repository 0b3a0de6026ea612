use std::path::Path;
use std::process::{Command, Output};

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .env_remove("BERGMAN_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn moments_of_lebesgue_measure() {
    let o = bergman(&["moments", "--weight", "alpha=0;M=one", "--n-max", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.ends_with('\n'));
    let values = column(&text, "I_n");
    assert_eq!(values.len(), 5);
    for (n, v) in values.iter().enumerate() {
        assert!((v - 1.0 / (2.0 * n as f64 + 2.0)).abs() < 1e-15, "I_{n} = {v}");
    }
}

#[test]
fn kernel_at_origin() {
    let o = bergman(&["kernel", "--weight", "alpha=1;M=one", "--z", "0", "--w", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let value = column(&text, "series_re")[0];
    assert!((value - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(column(&text, "closed_re")[0], value);
    assert_eq!(column(&text, "abs_err")[0], 0.0);
}

#[test]
fn kernel_accepts_negative_components() {
    let o = bergman(&["kernel", "--weight", "alpha=2;M=one", "--z", "-0.3+0.2i", "--w", "0.1-0.5i"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(column(&stdout(&o), "abs_err")[0] < 1e-9);
}

#[test]
fn bv_of_quadratic_multiplier() {
    let o = bergman(&["bv", "--weight", "alpha=0;M=poly-r2:2,-1", "--n-max", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    let sup = v["observed"]["sup_scaled"].to_string().parse::<f64>().unwrap();
    assert!((sup - 1.0).abs() < 0.01, "sup_scaled = {sup}");
}

#[test]
fn violated_tolerance_exits_two() {
    let o = bergman(&["moments", "--weight", "alpha=0.5;M=exp-r2:1", "--n-max", "40", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed"));
    let o = bergman(&["identity-check", "--f", "sing:0.4", "--weight", "alpha=0.5;M=exp-r2:1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bergman(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bergman(&["moments", "--angular", "100"]).status.code(), Some(1));
    assert_eq!(bergman(&["moments", "--weight", "alpha=-2;M=one"]).status.code(), Some(1));
    assert_eq!(bergman(&["project", "--f", "nonsense:1"]).status.code(), Some(1));
    assert_eq!(bergman(&["kernel", "--z", "1.5", "--w", "0"]).status.code(), Some(1));
    assert_eq!(bergman(&["report", "--only", "11"]).status.code(), Some(1));
    assert_eq!(bergman(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_byte_identical() {
    let args = [
        "project", "--f", "sing:0.4", "--weight", "alpha=0.5;M=exp-r2:1", "--radial", "64", "--angular", "128",
    ];
    let a = bergman(&args);
    let b = bergman(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let args = ["opnorm", "--radial", "48", "--angular", "64", "--p", "2,3"];
    assert_eq!(bergman(&args).stdout, bergman(&args).stdout);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"weight": "alpha=1;M=one", "n_max": 7, "format": "json"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = bergman(&["moments", "--config", cfg]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["weight"], "alpha=1;M=one");
    assert_eq!(v["n_max"], 7);

    let o = bergman(&["moments", "--config", cfg, "--n-max", "3", "--format", "csv"]);
    assert_eq!(column(&stdout(&o), "I_n").len(), 4);

    std::fs::write(dir.path().join("bad.json"), r#"{"n_max": "many"}"#).unwrap();
    let bad = dir.path().join("bad.json");
    assert_eq!(bergman(&["moments", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(["coeffs", "--n-max", "5"])
        .env("BERGMAN_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("coeffs.csv")).unwrap();
    assert_eq!(written.lines().count(), 7);

    let explicit = dir.path().join("nested/out.csv");
    let o = bergman(&["coeffs", "--n-max", "5", "-o", explicit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(Path::new(&explicit)).unwrap(), written);
}

#[test]
fn sn_partial_sums_stay_bounded() {
    let o = bergman(&["sn", "--radial", "64", "--angular", "256", "--N", "64", "--p", "2,4"]);
    assert_eq!(o.status.code(), Some(0));
    let ratios = column(&stdout(&o), "ratio");
    assert_eq!(ratios.len(), 2 * 7);
    assert!(ratios.iter().all(|r| r.is_finite() && *r < 2.0));
}

#[test]
fn limits_extrapolate() {
    let o = bergman(&["limits", "--weight", "alpha=0.5;M=exp-r2:1", "--ns", "512,1024", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["observed"].as_array().unwrap().len(), 2);
}

#[test]
fn report_subset() {
    let o = bergman(&["report", "--only", "1,7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains("PASS")).count(), 2);
}
