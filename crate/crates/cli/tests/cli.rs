use std::path::Path;
use std::process::{Command, Output};

fn quasidiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasidiff")).args(args).env_remove("QUASIDIFF_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn diffract_matches_golden_csv() {
    let o = quasidiff(&["diffract", "--scheme", "fibonacci", "--weight", "gaussian", "--floor", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text, golden("diffract_fibonacci_gaussian.csv"));
    let rows = data_rows(&text);
    assert_eq!(&rows[0][..2], &["0", "0"]);
    let top: f64 = rows[0][4].parse().unwrap();
    assert!((top - 0.2).abs() < 1e-12);
}

#[test]
fn diffract_matches_golden_json() {
    let o = quasidiff(&["diffract", "--floor", "1e-2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text, golden("diffract_fibonacci_gaussian.json"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["command"], "diffract");
    assert!(v["truncation"]["completeness_bound"].as_f64().unwrap() < 1e-2);
    let peaks = v["result"]["peaks"].as_array().unwrap();
    for p in peaks {
        let ks = p["kstar"][0].as_f64().unwrap();
        let want = 0.2 * (-2.0 * std::f64::consts::PI * ks * ks).exp();
        assert!((p["intensity"].as_f64().unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn density_example() {
    let o = quasidiff(&["density", "--scheme", "fibonacci", "--window", "interval:-1:0.618034:open-closed", "--r", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    let emp: f64 = rows[0][2].parse().unwrap();
    assert!((emp - 0.723_606_8).abs() < 0.01 * 0.723_606_8);
}

#[test]
fn missing_seed_is_a_validation_error() {
    let o = quasidiff(&["randomtile", "--tiles", "10", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    assert!(o.stdout.is_empty());
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        vec!["weyl", "--sigma", "1"],
        vec!["density", "--r", "-5"],
        vec!["density", "--r", "1e9"],
        vec!["diffract", "--weight", "lorentzian"],
        vec!["weyl", "--window", "interval:2:1"],
        vec!["fourier-bohr"],
        vec!["poisson-check", "--weight", "nope"],
        vec!["randomtile", "--seed", "1", "--p-u", "1.5"],
        vec!["density", "--bogus"],
    ] {
        let o = quasidiff(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn resource_cap_exits_3() {
    let o = quasidiff(&["modelset", "--window", "interval:-1000:1000", "--r", "1e7"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failed_check_exits_4() {
    // a tolerance below the rounding floor of the sums cannot be met
    let o = quasidiff(&["poisson-check", "--sigma", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().last().unwrap().ends_with(",false"));
}

#[test]
fn every_output_carries_metadata() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["scheme-info"],
        vec!["modelset", "--r", "5"],
        vec!["density", "--r", "100"],
        vec!["weyl", "--r", "100", "--a", "-3.5"],
        vec!["fourier-bohr", "--k", "1,1", "--r", "100"],
        vec!["fourier-bohr", "--k-direct", "0.3", "--r", "100"],
        vec!["autocorr", "--z", "1,0", "--z", "0,1", "--n", "100"],
        vec!["poisson-check"],
        vec!["randomtile", "--seed", "3", "--tiles", "50", "--samples", "20", "--bins", "8"],
    ];
    for args in cases {
        let o = quasidiff(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        let meta: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        assert!(meta[0].starts_with("# quasidiff "), "{args:?}");
        assert!(meta.iter().any(|l| l.starts_with("# config: {")), "{args:?}");
        assert!(meta.iter().any(|l| l.starts_with("# truncation: {")), "{args:?}");
        let mut json_args = args.clone();
        json_args.extend(["--format", "json"]);
        let o = quasidiff(&json_args);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(v["truncation"].is_object() && v["config"].is_object() && v["quasidiff"].is_string(), "{args:?}");
    }
}

#[test]
fn weyl_and_fourier_bohr_values() {
    let o = quasidiff(&["weyl", "--r", "1000"]);
    let rows = data_rows(&stdout(&o));
    let finite: f64 = rows[0][1].parse().unwrap();
    let limit: f64 = rows[1][1].parse().unwrap();
    assert!((limit - 1.0 / 5f64.sqrt()).abs() < 1e-14);
    assert!((finite - limit).abs() < 0.01 * limit);
    // k = (1,1): k* = (tau - 1)/sqrt 5, c = e^{-pi k*^2}/sqrt 5
    let o = quasidiff(&["fourier-bohr", "--k", "1,1", "--r", "1000"]);
    let rows = data_rows(&stdout(&o));
    let limit: f64 = rows[1][1].parse().unwrap();
    let ks = ((1.0 + 5f64.sqrt()) / 2.0 - 1.0) / 5f64.sqrt();
    assert!((limit - (-std::f64::consts::PI * ks * ks).exp() / 5f64.sqrt()).abs() < 1e-14);
}

#[test]
fn regular_model_set_with_hat_weight() {
    // hat supported in (-0.8, 0.6), inside the Fibonacci window
    let args = ["weyl", "--window", "fibonacci", "--weight", "hat:center=-0.1,half_width=0.7", "--r", "2000"];
    let o = quasidiff(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&stdout(&o));
    let finite: f64 = rows[0][1].parse().unwrap();
    let limit: f64 = rows[1][1].parse().unwrap();
    assert!((limit - 0.7 / 5f64.sqrt()).abs() < 1e-10, "{limit}");
    assert!((finite - limit).abs() < 0.01 * limit);
    let o = quasidiff(&["weyl", "--window", "fibonacci", "--weight", "gaussian"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn randomtile_summary_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tiles.csv");
    let o = quasidiff(&["randomtile", "--seed", "11", "--tiles", "100", "--samples", "200", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tiles.summary.json")).unwrap()).unwrap();
    assert!(summary["l1_distance"].as_f64().unwrap() < 0.2);
    assert_eq!(summary["n_tiles"], 100);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().find(|l| !l.starts_with('#')), Some("bin_center,empirical_density,profile_value"));
}

#[test]
fn scheme_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fib.json");
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    std::fs::write(
        &path,
        format!("{{\"name\": \"fib\", \"d\": 1, \"m\": 1, \"basis\": [1, {tau:e}, 1, {:e}], \"certified\": true}}", 1.0 - tau),
    )
    .unwrap();
    let o = quasidiff(&["density", "--scheme", path.to_str().unwrap(), "--r", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&stdout(&o));
    let exact: f64 = rows[0][3].parse().unwrap();
    assert!((exact - tau / 5f64.sqrt()).abs() < 1e-12);
}
