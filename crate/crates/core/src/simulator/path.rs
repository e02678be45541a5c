use crate::configuration::Configuration;
use crate::error::{check_steps, Result};
use crate::kernels::params::SystemParams;
use crate::simulator::step::{apply_step, substream, StepNoise};

/// Population sizes of one simulated path at polling instants.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub params: SystemParams,
    pub seed: u64,
    pub steps: u64,
    /// `‖W_t‖` for `t = 0..=steps`.
    pub population: Vec<u64>,
    /// Arrivals during each step (length `steps`).
    pub arrivals: Vec<u32>,
    /// Whether each step's poll served a customer (length `steps`).
    pub served: Vec<bool>,
    /// Configurations at the requested steps.
    pub snapshots: Vec<(u64, Configuration)>,
}

impl PathRecord {
    /// Fraction of polling instants `t ≥ 1` at which the system is empty.
    pub fn empty_fraction(&self) -> f64 {
        let n = self.population.len().saturating_sub(1);
        if n == 0 {
            return 0.0;
        }
        self.population[1..].iter().filter(|&&p| p == 0).count() as f64 / n as f64
    }

    /// Least-squares slope of the population against the step index over the
    /// steps `from..=steps`.
    pub fn growth_slope(&self, from: u64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .population
            .iter()
            .enumerate()
            .skip(from as usize)
            .map(|(t, &p)| (t as f64, p as f64))
            .collect();
        least_squares(&pts).0
    }
}

/// Slope, intercept and coefficient of determination of a straight-line fit.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Simulates `steps` transitions (arrivals, then a poll) from `initial`.
/// Identical inputs give identical records.
pub fn run_path(params: &SystemParams, steps: u64, seed: u64, initial: &Configuration) -> Result<PathRecord> {
    run_path_with_snapshots(params, steps, seed, initial, &[])
}

pub fn run_path_with_snapshots(
    params: &SystemParams,
    steps: u64,
    seed: u64,
    initial: &Configuration,
    snapshot_steps: &[u64],
) -> Result<PathRecord> {
    check_steps(steps)?;
    crate::configuration::check_same_circle(initial.circumference(), params.circumference())?;
    let mut rng = substream(seed, 0);
    let mut zeta = initial.clone();
    let mut noise = StepNoise::default();
    let mut population = Vec::with_capacity(steps as usize + 1);
    let mut arrivals = Vec::with_capacity(steps as usize);
    let mut served = Vec::with_capacity(steps as usize);
    let mut snapshots = Vec::new();
    population.push(zeta.total_variation());
    if snapshot_steps.contains(&0) {
        snapshots.push((0, zeta.clone()));
    }
    for t in 1..=steps {
        noise.draw(params, &mut rng);
        let out = apply_step(&mut zeta, &noise, params.r());
        population.push(zeta.total_variation());
        arrivals.push(out.arrivals as u32);
        served.push(out.served);
        if snapshot_steps.contains(&t) {
            snapshots.push((t, zeta.clone()));
        }
    }
    Ok(PathRecord {
        params: params.clone(),
        seed,
        steps,
        population,
        arrivals,
        served,
        snapshots,
    })
}
