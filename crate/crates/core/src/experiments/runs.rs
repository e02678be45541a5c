//! Simulation-backed commands: figure data, the stability sweep, stationary
//! estimation, the Laplace identity check and the tail fit.

use rayon::prelude::*;
use serde::Serialize;

use crate::configuration::Configuration;
use crate::error::Result;
use crate::experiments::config::ScenarioConfig;
use crate::geometry::ball_measure_unchecked;
use crate::simulator::{
    derive_seed, laplace_residual, laplace_sample, run_path, stationary_or_batch_means, stationary_run,
    tail_geometric_fit, EstimateMethod, LaplaceResidual, PathRecord, StationaryEstimate, TailFit,
};

/// `step,population`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRow {
    pub step: u64,
    pub population: u64,
}

/// `r,simulated_mean,ci_half_width,approximation,cycles,method`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub simulated_mean: f64,
    pub ci_half_width: f64,
    pub approximation: f64,
    pub cycles: usize,
    pub method: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Stable,
    /// `λs₁ = 1`: not positive recurrent, no growth claim.
    Boundary,
    Unstable,
}

/// One `(λ, r)` point of the stability sweep. Cycle columns are filled on the
/// stable side, growth columns on the unstable side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub lambda: f64,
    pub load: f64,
    pub r: f64,
    pub regime: Regime,
    pub note: &'static str,
    pub cycles: Option<usize>,
    pub cycle_length_mean: Option<f64>,
    pub mean_population: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub method: Option<&'static str>,
    pub final_population: Option<u64>,
    pub growth_slope: Option<f64>,
    pub expected_slope: Option<f64>,
}

/// `theta,lhs,rhs,residual,stderr,within_3se`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceRow {
    pub theta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub stderr: f64,
    pub within_3se: bool,
}

impl From<LaplaceResidual> for LaplaceRow {
    fn from(l: LaplaceResidual) -> Self {
        Self {
            theta: l.theta,
            lhs: l.lhs,
            rhs: l.rhs,
            residual: l.residual,
            stderr: l.stderr,
            within_3se: l.within(3.0),
        }
    }
}

/// `k,log_survival`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub k: u64,
    pub log_survival: f64,
}

pub fn method_label(m: EstimateMethod) -> &'static str {
    match m {
        EstimateMethod::Regenerative => "regenerative",
        EstimateMethod::BatchMeans => "batch-means",
    }
}

pub fn path_rows(path: &PathRecord) -> Vec<PathRow> {
    path.population
        .iter()
        .enumerate()
        .map(|(t, &p)| PathRow {
            step: t as u64,
            population: p,
        })
        .collect()
}

/// Light-traffic approximation `λs₁/m(B_r)`.
pub fn light_traffic_approximation(config: &ScenarioConfig, r: f64) -> f64 {
    config.load_factor() / ball_measure_unchecked(r, config.circumference)
}

/// Example paths at each of `path_lambdas`, started empty, `steps` long.
pub fn figure_paths(config: &ScenarioConfig) -> Result<Vec<(f64, PathRecord)>> {
    let empty = Configuration::empty(config.circumference)?;
    config
        .path_lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            let params = config.system_with(l, config.r)?;
            Ok((l, run_path(&params, config.steps, derive_seed(config.seed, i as u64), &empty)?))
        })
        .collect()
}

/// Stationary mean against the light-traffic approximation over
/// `sweep_radii` at the scenario's `λ`.
pub fn light_traffic_sweep(config: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    config
        .sweep_radii
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let params = config.system_with(config.lambda, r)?;
            let est = stationary_or_batch_means(
                &params,
                config.min_cycles,
                config.max_steps,
                derive_seed(config.seed, 1000 + i as u64),
            )?;
            Ok(SweepRow {
                r,
                simulated_mean: est.mean_population,
                ci_half_width: est.half_width_95,
                approximation: light_traffic_approximation(config, r),
                cycles: est.cycles,
                method: method_label(est.method),
            })
        })
        .collect()
}

const BOUNDARY_TOL: f64 = 1e-12;

fn stability_point(config: &ScenarioConfig, lambda: f64, r: f64, seed: u64) -> Result<StabilityRow> {
    let params = config.system_with(lambda, r)?;
    let load = params.load();
    let mut row = StabilityRow {
        lambda,
        load,
        r,
        regime: Regime::Stable,
        note: "",
        cycles: None,
        cycle_length_mean: None,
        mean_population: None,
        ci_half_width: None,
        method: None,
        final_population: None,
        growth_slope: None,
        expected_slope: None,
    };
    if (load - 1.0).abs() <= BOUNDARY_TOL {
        row.regime = Regime::Boundary;
        row.note = "boundary: not positive recurrent";
    } else if load < 1.0 {
        let est = stationary_or_batch_means(&params, config.min_cycles, config.max_steps, seed)?;
        row.note = match est.method {
            EstimateMethod::Regenerative => "positive recurrent",
            EstimateMethod::BatchMeans => "positive recurrent; approximate (rare emptying)",
        };
        row.cycles = Some(est.cycles);
        row.cycle_length_mean = Some(est.cycle_length_mean);
        row.mean_population = Some(est.mean_population);
        row.ci_half_width = Some(est.half_width_95);
        row.method = Some(method_label(est.method));
    } else {
        row.regime = Regime::Unstable;
        row.note = "transient: population grows linearly";
        let path = run_path(&params, config.steps, seed, &Configuration::empty(config.circumference)?)?;
        row.final_population = path.population.last().copied();
        row.growth_slope = Some(path.growth_slope(config.steps / 2));
        row.expected_slope = Some(load - 1.0);
    }
    Ok(row)
}

/// Every `(λ, r)` in `lambdas × radii`, each on its own derived seed.
pub fn stability_sweep(config: &ScenarioConfig) -> Result<Vec<StabilityRow>> {
    let points: Vec<(f64, f64)> = config
        .lambdas
        .iter()
        .flat_map(|&l| config.radii.iter().map(move |&r| (l, r)))
        .collect();
    points
        .par_iter()
        .enumerate()
        .map(|(i, &(l, r))| stability_point(config, l, r, derive_seed(config.seed, i as u64)))
        .collect()
}

/// Regenerative estimate at the scenario, falling back to batch means.
pub fn stationary(config: &ScenarioConfig) -> Result<StationaryEstimate> {
    stationary_or_batch_means(&config.system()?, config.min_cycles, config.max_steps, config.seed)
}

/// Laplace residuals at each of `thetas` from one `steps`-poll run.
pub fn laplace_check(config: &ScenarioConfig) -> Result<Vec<LaplaceRow>> {
    let params = config.system()?;
    let sample = laplace_sample(&params, config.steps, config.seed)?;
    config
        .thetas
        .iter()
        .map(|&t| Ok(laplace_residual(&params, t, &sample)?.into()))
        .collect()
}

/// Tail fit on all cycles of one `steps`-poll run.
pub fn tail_fit(config: &ScenarioConfig) -> Result<(StationaryEstimate, TailFit)> {
    let est = stationary_run(&config.system()?, config.steps, config.seed)?;
    let fit = tail_geometric_fit(&est)?;
    Ok((est, fit))
}

pub fn tail_rows(fit: &TailFit) -> Vec<TailRow> {
    fit.points
        .iter()
        .map(|&(k, log_survival)| TailRow { k, log_survival })
        .collect()
}
