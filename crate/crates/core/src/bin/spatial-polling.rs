use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spatial_polling::experiments::{self, CommandOutcome, ScenarioConfig};
use spatial_polling::Error;

const CSV_HELP: &str = "\
Output files (all CSV files have a header row):
  verify-lemmas      verify-lemmas-report.txt
  drift-certificate  drift-certificate.csv: family,population,distinct,drift,bound,holds
  figures            path_lambda_<lambda>.csv: step,population
                     light_traffic_sweep.csv: r,simulated_mean,ci_half_width,approximation,cycles,method
  stability-sweep    stability_sweep.csv: lambda,load,r,regime,note,cycles,cycle_length_mean,
                     mean_population,ci_half_width,method,final_population,growth_slope,expected_slope
  stationary         stationary.csv: mean_population,half_width_95,mean_at_polls,half_width_at_polls,
                     cycles,cycle_length_mean,polls,method
  laplace-check      laplace.csv: theta,lhs,rhs,residual,stderr,within_3se
  tail-fit           tail.csv: k,log_survival
Every command also writes <command>-report.txt with the resolved scenario.

Exit status: 0 all checks pass, 1 property violation, 2 configuration error.";

/// Experiments for a greedy polling server on a circle.
#[derive(Debug, Parser)]
#[command(name = "spatial-polling", version, after_help = CSV_HELP)]
struct Cli {
    /// Scenario file (flat TOML); built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a scenario key, e.g. --set lambda=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the quadratic-form property corpus.
    VerifyLemmas {
        /// Replace the kernel by a − d without the positive part (harness check).
        #[arg(long, hide = true)]
        corrupt_kernel: bool,
    },
    /// Check the energy drift bound and evaluate the population-drift counterexample.
    DriftCertificate,
    /// Example paths and the light-traffic sweep.
    Figures,
    /// Cycle statistics or growth slopes over a grid of arrival rates and radii.
    StabilitySweep,
    /// Regenerative stationary mean at the scenario.
    Stationary,
    /// Steady-state Laplace identity residuals.
    LaplaceCheck,
    /// Log-survival fit of the stationary population.
    TailFit,
    /// Print the resolved scenario.
    ShowConfig,
}

fn resolve(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(d) = &cli.out_dir {
        overrides.push(format!("out_dir={:?}", d.display().to_string()));
    }
    match &cli.config {
        Some(path) => ScenarioConfig::load(path, &overrides),
        None => ScenarioConfig::from_toml_with("", &overrides),
    }
}

fn run(cli: &Cli, config: &ScenarioConfig) -> Result<CommandOutcome, Error> {
    match cli.command {
        Command::VerifyLemmas { corrupt_kernel } => experiments::cmd_verify_lemmas(config, corrupt_kernel),
        Command::DriftCertificate => experiments::cmd_drift_certificate(config),
        Command::Figures => experiments::cmd_figures(config),
        Command::StabilitySweep => experiments::cmd_stability_sweep(config),
        Command::Stationary => experiments::cmd_stationary(config),
        Command::LaplaceCheck => experiments::cmd_laplace_check(config),
        Command::TailFit => experiments::cmd_tail_fit(config),
        Command::ShowConfig => Ok(CommandOutcome {
            passed: true,
            summary: config.to_toml(),
            files: vec![],
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &config) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("property violation");
                ExitCode::from(1)
            }
        }
        Err(e @ (Error::InsufficientCycles { .. } | Error::InsufficientTailData { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
    }
}
