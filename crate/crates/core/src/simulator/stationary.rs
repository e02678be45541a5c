//! Stationary estimation from regeneration cycles of the sampled chain, with a
//! batch-means fallback for long single runs and the scalar queue obtained
//! when every scan sees the whole circle.

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::configuration::Configuration;
use crate::error::{invalid, Error, Result};
use crate::kernels::arrivals::sample_count;
use crate::kernels::distribution::InterpollingDistribution;
use crate::kernels::params::SystemParams;
use crate::simulator::step::{apply_step, substream, StepNoise};

/// Smallest number of cycles for which an interval is reported.
pub const MIN_REPORTED_CYCLES: usize = 30;

const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Regenerative,
    /// Long single run with burn-in and batch means; approximate.
    BatchMeans,
}

/// Estimated stationary population with a 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryEstimate {
    /// Time-average number of customers in the system.
    pub mean_population: f64,
    pub half_width_95: f64,
    /// Mean of `‖W_t‖` just after polls.
    pub mean_at_polls: f64,
    pub half_width_at_polls: f64,
    /// Completed cycles (regenerative) or batches (batch means).
    pub cycles: usize,
    /// Mean number of polls per cycle (or per batch).
    pub cycle_length_mean: f64,
    pub polls: u64,
    /// `tail_histogram[k]` counts polling instants with `‖W_t‖ = k`.
    pub tail_histogram: Vec<u64>,
    pub method: EstimateMethod,
}

impl StationaryEstimate {
    pub fn interval(&self) -> (f64, f64) {
        (self.mean_population - self.half_width_95, self.mean_population + self.half_width_95)
    }

    /// Whether two estimates agree within their joint 95% interval.
    pub fn agrees_with(&self, other: &StationaryEstimate) -> bool {
        let joint = self.half_width_95.hypot(other.half_width_95);
        (self.mean_population - other.mean_population).abs() <= joint
    }
}

/// Controls for [`stationary_estimate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryOptions {
    pub min_cycles: usize,
    pub max_steps: u64,
    pub seed: u64,
    /// Independent chains, each on its own substream. The result depends on
    /// this count but not on the thread pool size.
    pub workers: usize,
}

/// One transition seen by the estimator.
#[derive(Debug, Clone, Copy)]
struct Transition {
    before: u64,
    arrivals: usize,
    duration: f64,
    after: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Cycle {
    duration: f64,
    area: f64,
    polls: f64,
    poll_sum: f64,
}

impl Cycle {
    fn absorb(&mut self, t: &Transition) {
        self.duration += t.duration;
        self.area += t.before as f64 * t.duration + 0.5 * t.arrivals as f64 * t.duration;
        self.polls += 1.0;
        self.poll_sum += t.after as f64;
    }
}

#[derive(Debug, Default)]
struct CycleLog {
    cycles: Vec<Cycle>,
    histogram: Vec<u64>,
    steps: u64,
}

fn record(histogram: &mut Vec<u64>, level: u64) {
    let k = level as usize;
    if histogram.len() <= k {
        histogram.resize(k + 1, 0);
    }
    histogram[k] += 1;
}

/// Runs a chain from the regeneration state until `target` cycles complete or
/// `max_steps` transitions have been made.
fn collect_cycles(target: usize, max_steps: u64, mut step: impl FnMut() -> Transition) -> CycleLog {
    let mut log = CycleLog::default();
    let mut current = Cycle::default();
    while log.cycles.len() < target && log.steps < max_steps {
        let t = step();
        log.steps += 1;
        current.absorb(&t);
        record(&mut log.histogram, t.after);
        if t.after == 0 {
            log.cycles.push(std::mem::take(&mut current));
        }
    }
    log
}

fn merge(logs: Vec<CycleLog>) -> CycleLog {
    let mut out = CycleLog::default();
    for log in logs {
        out.cycles.extend(log.cycles);
        out.steps += log.steps;
        if out.histogram.len() < log.histogram.len() {
            out.histogram.resize(log.histogram.len(), 0);
        }
        for (k, c) in log.histogram.into_iter().enumerate() {
            out.histogram[k] += c;
        }
    }
    out
}

/// Ratio estimator `ΣY/ΣD` with its asymptotic 95% half-width.
fn ratio_interval(pairs: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let k = pairs.clone().count() as f64;
    let (sy, sd) = pairs.clone().fold((0.0, 0.0), |(a, b), (y, d)| (a + y, b + d));
    let mean = sy / sd;
    let ss: f64 = pairs.map(|(y, d)| (y - mean * d).powi(2)).sum();
    let s = (ss / (k - 1.0)).sqrt();
    (mean, Z_95 * s / ((sd / k) * k.sqrt()))
}

fn regenerative_summary(log: CycleLog, required: usize) -> Result<StationaryEstimate> {
    if log.cycles.len() < required.max(MIN_REPORTED_CYCLES) {
        return Err(Error::InsufficientCycles {
            cycles: log.cycles.len(),
            required: required.max(MIN_REPORTED_CYCLES),
            steps: log.steps,
        });
    }
    let (mean, hw) = ratio_interval(log.cycles.iter().map(|c| (c.area, c.duration)));
    let (mean_p, hw_p) = ratio_interval(log.cycles.iter().map(|c| (c.poll_sum, c.polls)));
    let polls: f64 = log.cycles.iter().map(|c| c.polls).sum();
    Ok(StationaryEstimate {
        mean_population: mean,
        half_width_95: hw,
        mean_at_polls: mean_p,
        half_width_at_polls: hw_p,
        cycles: log.cycles.len(),
        cycle_length_mean: polls / log.cycles.len() as f64,
        polls: log.steps,
        tail_histogram: log.histogram,
        method: EstimateMethod::Regenerative,
    })
}

fn require_stable(params: &SystemParams) -> Result<()> {
    if params.load() >= 1.0 {
        Err(Error::Unstable(params.load()))
    } else {
        Ok(())
    }
}

fn spatial_stepper<'a>(
    params: &'a SystemParams,
    rng: &'a mut rand_chacha::ChaCha8Rng,
) -> impl FnMut() -> Transition + 'a {
    let mut zeta = Configuration::empty(params.circumference()).expect("validated circumference");
    let mut noise = StepNoise::default();
    move || {
        let before = zeta.total_variation();
        noise.draw(params, rng);
        let out = apply_step(&mut zeta, &noise, params.r());
        Transition {
            before,
            arrivals: out.arrivals,
            duration: noise.duration,
            after: zeta.total_variation(),
        }
    }
}

/// Regenerative estimate of the stationary population from a single chain
/// started empty. Cycles end when the system is empty just after a poll.
pub fn stationary_estimate(
    params: &SystemParams,
    min_cycles: usize,
    max_steps: u64,
    seed: u64,
) -> Result<StationaryEstimate> {
    stationary_estimate_with(
        params,
        &StationaryOptions {
            min_cycles,
            max_steps,
            seed,
            workers: 1,
        },
    )
}

pub fn stationary_estimate_with(params: &SystemParams, options: &StationaryOptions) -> Result<StationaryEstimate> {
    require_stable(params)?;
    if options.workers == 0 {
        return Err(invalid("workers", "must be at least 1"));
    }
    let w = options.workers;
    let logs: Vec<CycleLog> = (0..w)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(options.seed, i as u64);
            let target = options.min_cycles.div_ceil(w);
            let budget = options.max_steps / w as u64 + u64::from((i as u64) < options.max_steps % w as u64);
            collect_cycles(target, budget, spatial_stepper(params, &mut rng))
        })
        .collect();
    regenerative_summary(merge(logs), options.min_cycles)
}

/// Regenerative estimate from all cycles completed within exactly `steps`
/// transitions of a chain started empty.
pub fn stationary_run(params: &SystemParams, steps: u64, seed: u64) -> Result<StationaryEstimate> {
    require_stable(params)?;
    crate::error::check_steps(steps)?;
    let mut rng = substream(seed, 0);
    let log = collect_cycles(usize::MAX, steps, spatial_stepper(params, &mut rng));
    regenerative_summary(log, MIN_REPORTED_CYCLES)
}

/// Approximate estimate from one long run: the first 10% of `steps` are
/// discarded and the rest is split into `batches` batches whose time-average
/// populations give a Student-t interval.
pub fn batch_means_estimate(
    params: &SystemParams,
    steps: u64,
    batches: usize,
    seed: u64,
) -> Result<StationaryEstimate> {
    if batches < 2 {
        return Err(invalid("batches", "need at least 2"));
    }
    let burn = steps / 10;
    let per_batch = (steps - burn) / batches as u64;
    if per_batch == 0 {
        return Err(invalid("steps", "too few steps for the requested batches"));
    }
    let mut rng = substream(seed, 0);
    let mut step = spatial_stepper(params, &mut rng);
    for _ in 0..burn {
        step();
    }
    let mut histogram = Vec::new();
    let mut means = Vec::with_capacity(batches);
    let mut poll_means = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut c = Cycle::default();
        for _ in 0..per_batch {
            let t = step();
            c.absorb(&t);
            record(&mut histogram, t.after);
        }
        means.push(c.area / c.duration);
        poll_means.push(c.poll_sum / c.polls);
    }
    let t = StudentsT::new(0.0, 1.0, (batches - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let (mean, hw) = mean_interval(&means, t);
    let (mean_p, hw_p) = mean_interval(&poll_means, t);
    Ok(StationaryEstimate {
        mean_population: mean,
        half_width_95: hw,
        mean_at_polls: mean_p,
        half_width_at_polls: hw_p,
        cycles: batches,
        cycle_length_mean: per_batch as f64,
        polls: burn + per_batch * batches as u64,
        tail_histogram: histogram,
        method: EstimateMethod::BatchMeans,
    })
}

fn mean_interval(xs: &[f64], quantile: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, quantile * (var / n).sqrt())
}

/// Regenerative estimate when enough cycles complete within `max_steps`,
/// otherwise the batch-means estimate from a run of `max_steps` steps.
pub fn stationary_or_batch_means(
    params: &SystemParams,
    min_cycles: usize,
    max_steps: u64,
    seed: u64,
) -> Result<StationaryEstimate> {
    match stationary_estimate(params, min_cycles, max_steps, seed) {
        Err(Error::InsufficientCycles { .. }) => batch_means_estimate(params, max_steps, 50, seed),
        other => other,
    }
}

fn scalar_stepper<'a, R: Rng>(
    lambda: f64,
    g: &'a InterpollingDistribution,
    rng: &'a mut R,
) -> impl FnMut() -> Transition + 'a {
    let mut n: u64 = 0;
    move || {
        let before = n;
        let duration = g.sample(rng);
        let arrivals = sample_count(lambda, duration, rng);
        n = (n + arrivals as u64).saturating_sub(1);
        Transition {
            before,
            arrivals,
            duration,
            after: n,
        }
    }
}

/// The queue seen by a server that always finds a customer when the system is
/// nonempty: `N_{t+1} = N_t + A_t − 1` if positive, else 0. Estimated over the
/// complete cycles in `steps` transitions.
pub fn autonomous_queue_oracle(
    lambda: f64,
    g: &InterpollingDistribution,
    steps: u64,
    seed: u64,
) -> Result<StationaryEstimate> {
    crate::error::require_positive("lambda", lambda)?;
    let load = lambda * g.s1();
    if load >= 1.0 {
        return Err(Error::Unstable(load));
    }
    let mut rng = substream(seed, 0);
    let log = collect_cycles(usize::MAX, steps, scalar_stepper(lambda, g, &mut rng));
    regenerative_summary(log, MIN_REPORTED_CYCLES)
}

/// Population path of the same scalar queue, for any load.
pub fn autonomous_queue_path(lambda: f64, g: &InterpollingDistribution, steps: u64, seed: u64) -> Result<Vec<u64>> {
    crate::error::require_positive("lambda", lambda)?;
    crate::error::check_steps(steps)?;
    let mut rng = substream(seed, 0);
    let mut step = scalar_stepper(lambda, g, &mut rng);
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(0);
    for _ in 0..steps {
        out.push(step().after);
    }
    Ok(out)
}
