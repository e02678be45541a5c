//! Scenario-driven experiments behind the command-line tool. Every command is
//! deterministic given the scenario (including its seed) and writes a report
//! with the resolved scenario next to its CSV output.

pub mod certificate;
pub mod config;
pub mod corpus;
pub mod lemmas;
pub mod output;
pub mod runs;

use std::path::PathBuf;

pub use certificate::{drift_certificate, CertificateMode, CertificateReport};
pub use config::{KernelWidth, ScenarioConfig};
pub use lemmas::{verify_lemmas, CheckStatus, LemmaOptions, LemmaReport};

use crate::error::Result;
use crate::lyapunov::Kernel;
use output::{write_csv, write_report};

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    /// False when a checked property was violated.
    pub passed: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn finish(config: &ScenarioConfig, command: &str, passed: bool, summary: String, mut files: Vec<PathBuf>) -> Result<CommandOutcome> {
    files.push(write_report(config, command, &summary)?);
    Ok(CommandOutcome { passed, summary, files })
}

/// Runs the property corpus with `config.replications` instances per check.
/// Writes `verify-lemmas-report.txt`.
pub fn cmd_verify_lemmas(config: &ScenarioConfig, corrupt_kernel: bool) -> Result<CommandOutcome> {
    let options = LemmaOptions {
        instances: config.replications,
        kernel: if corrupt_kernel { Kernel::Unclamped } else { Kernel::Triangular },
    };
    let report = verify_lemmas(config, &options)?;
    finish(config, "verify-lemmas", report.passed(), report.to_text(), vec![])
}

/// Writes `drift-certificate.csv` (`family,population,distinct,drift,bound,holds`)
/// and the report.
pub fn cmd_drift_certificate(config: &ScenarioConfig) -> Result<CommandOutcome> {
    let report = drift_certificate(config)?;
    let mut files = Vec::new();
    if !report.rows.is_empty() {
        let path = config.out_dir.join("drift-certificate.csv");
        write_csv(&path, &report.rows)?;
        files.push(path);
    }
    finish(config, "drift-certificate", report.passed(), report.to_text(), files)
}

/// Writes `path_lambda_<λ>.csv` (`step,population`) per path rate and
/// `light_traffic_sweep.csv` (`r,simulated_mean,ci_half_width,approximation,cycles,method`).
pub fn cmd_figures(config: &ScenarioConfig) -> Result<CommandOutcome> {
    let mut files = Vec::new();
    let mut summary = String::new();
    for (l, path) in runs::figure_paths(config)? {
        let file = config.out_dir.join(format!("path_lambda_{l}.csv"));
        write_csv(&file, &runs::path_rows(&path))?;
        summary.push_str(&format!(
            "path lambda={l}: {} steps, empty fraction {:.4}\n",
            path.steps,
            path.empty_fraction()
        ));
        files.push(file);
    }
    let rows = runs::light_traffic_sweep(config)?;
    for r in &rows {
        summary.push_str(&format!(
            "r={}: mean {:.4} ± {:.4} ({}), approximation {:.4}\n",
            r.r, r.simulated_mean, r.ci_half_width, r.method, r.approximation
        ));
    }
    let file = config.out_dir.join("light_traffic_sweep.csv");
    write_csv(&file, &rows)?;
    files.push(file);
    finish(config, "figures", true, summary, files)
}

/// Writes `stability_sweep.csv`, one row per `(λ, r)`.
pub fn cmd_stability_sweep(config: &ScenarioConfig) -> Result<CommandOutcome> {
    let rows = runs::stability_sweep(config)?;
    let mut summary = String::new();
    for r in &rows {
        let detail = match r.regime {
            runs::Regime::Stable => format!(
                "mean {:.3} ± {:.3}, {} cycles",
                r.mean_population.unwrap_or(f64::NAN),
                r.ci_half_width.unwrap_or(f64::NAN),
                r.cycles.unwrap_or(0)
            ),
            runs::Regime::Boundary => String::new(),
            runs::Regime::Unstable => format!(
                "slope {:.4} (expected {:.4})",
                r.growth_slope.unwrap_or(f64::NAN),
                r.expected_slope.unwrap_or(f64::NAN)
            ),
        };
        summary.push_str(&format!("lambda={} r={}: {} {detail}\n", r.lambda, r.r, r.note));
    }
    let file = config.out_dir.join("stability_sweep.csv");
    write_csv(&file, &rows)?;
    finish(config, "stability-sweep", true, summary, vec![file])
}

/// `mean_population,half_width_95,mean_at_polls,half_width_at_polls,cycles,cycle_length_mean,polls,method`
#[derive(Debug, Clone, serde::Serialize)]
struct StationaryRow {
    mean_population: f64,
    half_width_95: f64,
    mean_at_polls: f64,
    half_width_at_polls: f64,
    cycles: usize,
    cycle_length_mean: f64,
    polls: u64,
    method: &'static str,
}

/// Writes `stationary.csv` (one summary row).
pub fn cmd_stationary(config: &ScenarioConfig) -> Result<CommandOutcome> {
    let est = runs::stationary(config)?;
    let row = StationaryRow {
        mean_population: est.mean_population,
        half_width_95: est.half_width_95,
        mean_at_polls: est.mean_at_polls,
        half_width_at_polls: est.half_width_at_polls,
        cycles: est.cycles,
        cycle_length_mean: est.cycle_length_mean,
        polls: est.polls,
        method: runs::method_label(est.method),
    };
    let summary = format!(
        "mean population {:.5} ± {:.5} ({}, {} cycles, light-traffic approximation {:.5})\n",
        est.mean_population,
        est.half_width_95,
        row.method,
        est.cycles,
        runs::light_traffic_approximation(config, config.r)
    );
    let file = config.out_dir.join("stationary.csv");
    write_csv(&file, &[row])?;
    finish(config, "stationary", true, summary, vec![file])
}

/// Writes `laplace.csv` (`theta,lhs,rhs,residual,stderr,within_3se`); fails
/// when any residual exceeds three standard errors.
pub fn cmd_laplace_check(config: &ScenarioConfig) -> Result<CommandOutcome> {
    let rows = runs::laplace_check(config)?;
    let summary: String = rows
        .iter()
        .map(|r| format!("theta={}: residual {:e} stderr {:e}\n", r.theta, r.residual, r.stderr))
        .collect();
    let file = config.out_dir.join("laplace.csv");
    write_csv(&file, &rows)?;
    let passed = rows.iter().all(|r| r.within_3se);
    finish(config, "laplace-check", passed, summary, vec![file])
}

/// Smallest coefficient of determination accepted by `tail-fit`.
pub const TAIL_R2_THRESHOLD: f64 = 0.95;

/// Writes `tail.csv` (`k,log_survival`); fails unless the slope is negative
/// and `R² >` [`TAIL_R2_THRESHOLD`].
pub fn cmd_tail_fit(config: &ScenarioConfig) -> Result<CommandOutcome> {
    let (est, fit) = runs::tail_fit(config)?;
    let file = config.out_dir.join("tail.csv");
    write_csv(&file, &runs::tail_rows(&fit))?;
    let summary = format!(
        "slope {:.5}, R^2 {:.5}, {} populated levels, {} cycles\n",
        fit.rate,
        fit.r_squared,
        fit.points.len(),
        est.cycles
    );
    let passed = fit.rate < 0.0 && fit.r_squared > TAIL_R2_THRESHOLD;
    finish(config, "tail-fit", passed, summary, vec![file])
}
