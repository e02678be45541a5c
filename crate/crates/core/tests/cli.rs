use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spatial-polling"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn verify_lemmas_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--set", "replications=200", "verify-lemmas"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("verify-lemmas-report.txt")).unwrap();
    assert!(report.contains("seed = 0"));
    assert!(report.contains("interpolation-identity"));
    assert!(!report.contains("FAIL"));
}

#[test]
fn corrupted_kernel_exits_with_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--set", "replications=200", "verify-lemmas", "--corrupt-kernel"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("semidefinite") && stdout.contains("FAIL"));
}

#[test]
fn oversized_kernel_width_is_skipped_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--set", "replications=100", "--set", "a=0.4", "verify-lemmas"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("SKIP (precondition)"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "lambda = 0.5\nunknown_key = 3\n").unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "show-config"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--set", "r=-0.1", "show-config"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--set", "lambda=2", "stationary"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(&cfg, "scenario = \"t\"\nlambda = 0.5\nr = 0.2\n").unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "--set", "lambda=0.25", "--seed", "9", "show-config"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lambda = 0.25"));
    assert!(text.contains("r = 0.2"));
    assert!(text.contains("seed = 9"));
    assert!(text.contains("a = \"auto\""));
}

#[test]
fn drift_certificate_reports_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["--set", "lambda=0.5", "--set", "a=0.2", "--set", "replications=100", "drift-certificate"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("c1 = 0.04"), "{text}");
    assert!(text.contains("c2 = 0.28"), "{text}");
    let (header, rows) = csv_rows(&dir.path().join("drift-certificate.csv"));
    assert_eq!(header, ["family", "population", "distinct", "drift", "bound", "holds"]);
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r[5] == "true"));
}

#[test]
fn figures_emit_paths_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "--set",
            "steps=2000",
            "--set",
            "sweep_radii=[0.1, 0.5]",
            "--set",
            "min_cycles=300",
            "figures",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for l in ["0.1", "0.9"] {
        let (header, rows) = csv_rows(&dir.path().join(format!("path_lambda_{l}.csv")));
        assert_eq!(header, ["step", "population"]);
        assert_eq!(rows.len(), 2001);
    }
    let (header, rows) = csv_rows(&dir.path().join("light_traffic_sweep.csv"));
    assert_eq!(header, ["r", "simulated_mean", "ci_half_width", "approximation", "cycles", "method"]);
    let approx: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!((approx[0] - 0.5).abs() < 1e-12);
    assert!((approx[1] - 0.1).abs() < 1e-12);
}

#[test]
fn runs_are_deterministic_given_the_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "5", "--set", "steps=3000", "--set", "sweep_radii=[0.2]", "--set", "min_cycles=100", "figures"];
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    assert_eq!(run(b.path(), &args).status.code(), Some(0));
    for f in ["path_lambda_0.1.csv", "path_lambda_0.9.csv", "light_traffic_sweep.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn stability_sweep_brackets_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "--set",
            "lambdas=[0.8, 1.0, 1.2]",
            "--set",
            "radii=[0.1, 0.25]",
            "--set",
            "steps=20000",
            "--set",
            "min_cycles=100",
            "--threads",
            "2",
            "stability-sweep",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("stability_sweep.csv"));
    assert_eq!(header[..4], ["lambda", "load", "r", "regime"]);
    assert_eq!(rows.len(), 6);
    let slope_col = header.iter().position(|h| h == "growth_slope").unwrap();
    let mean_col = header.iter().position(|h| h == "mean_population").unwrap();
    for r in &rows {
        match r[3].as_str() {
            "stable" => assert!(r[mean_col].parse::<f64>().unwrap().is_finite()),
            "boundary" => assert!(r[slope_col].is_empty() && r[4].contains("not positive recurrent")),
            "unstable" => {
                let s: f64 = r[slope_col].parse().unwrap();
                assert!((s - 0.2).abs() < 0.06, "{s}");
            }
            other => panic!("{other}"),
        }
    }
}

#[test]
fn stationary_laplace_and_tail_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--set", "lambda=0.5", "--set", "min_cycles=2000", "stationary"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&dir.path().join("stationary.csv"));
    assert_eq!(header[0], "mean_population");
    assert_eq!(rows.len(), 1);

    let out = run(dir.path(), &["--set", "lambda=0.5", "--set", "steps=200000", "laplace-check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (header, rows) = csv_rows(&dir.path().join("laplace.csv"));
    assert_eq!(header, ["theta", "lhs", "rhs", "residual", "stderr", "within_3se"]);
    assert_eq!(rows.len(), 3);

    let out = run(dir.path(), &["--set", "lambda=0.5", "--set", "steps=400000", "tail-fit"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (header, rows) = csv_rows(&dir.path().join("tail.csv"));
    assert_eq!(header, ["k", "log_survival"]);
    assert!(rows.len() >= 5);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn too_short_tail_run_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--set", "lambda=0.01", "--set", "steps=100", "tail-fit"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bundled_scenarios_load() {
    let dir = tempfile::tempdir().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let out = run(dir.path(), &["--config", path.to_str().unwrap(), "show-config"]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        seen += 1;
    }
    assert!(seen >= 2);
}
