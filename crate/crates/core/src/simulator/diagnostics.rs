//! Monte Carlo drift, the steady-state Laplace identity, the stationary tail
//! fit and the emptying bound.

use crate::configuration::{check_same_circle, Configuration};
use crate::error::{invalid, Error, Result};
use crate::geometry::{arc_distance_unchecked, scan_success_unchecked};
use crate::kernels::arrivals::Estimate;
use crate::kernels::functional::Functional;
use crate::kernels::params::SystemParams;
use crate::kernels::polling::poll_at;
use crate::lyapunov::{energy, potential, EnergyParams};
use crate::simulator::path::least_squares;
use crate::simulator::step::{apply_step, substream, StepNoise};
use crate::simulator::stationary::StationaryEstimate;

/// Smallest reps accepted by [`drift_monte_carlo`].
pub const MIN_DRIFT_REPS: usize = 1000;
/// Populated histogram levels required by [`tail_geometric_fit`].
pub const MIN_TAIL_LEVELS: usize = 5;

/// Functionals supported by [`drift_monte_carlo`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftFunctional {
    Population,
    Energy(EnergyParams),
    Seminorm(EnergyParams),
    ExpSeminorm { params: EnergyParams, beta: f64 },
}

impl DriftFunctional {
    pub fn to_functional(self) -> Functional {
        match self {
            Self::Population => Functional::Population,
            Self::Energy(p) => Functional::Energy(p),
            Self::Seminorm(p) => Functional::Seminorm(p),
            Self::ExpSeminorm { params, beta } => Functional::ExpSeminorm { params, beta },
        }
    }

    fn energy_params(&self) -> Option<&EnergyParams> {
        match self {
            Self::Population => None,
            Self::Energy(p) | Self::Seminorm(p) | Self::ExpSeminorm { params: p, .. } => Some(p),
        }
    }

    fn of_energy(&self, h: f64) -> f64 {
        match self {
            Self::Population => unreachable!(),
            Self::Energy(_) => h,
            Self::Seminorm(_) => h.max(0.0).sqrt(),
            Self::ExpSeminorm { beta, .. } => (beta * h.max(0.0).sqrt()).exp(),
        }
    }
}

/// Sample mean of `f(W₁) − f(ζ)` over `reps` independent one-step transitions
/// from `zeta`, with its standard error.
pub fn drift_monte_carlo(
    zeta: &Configuration,
    params: &SystemParams,
    functional: DriftFunctional,
    reps: usize,
    seed: u64,
) -> Result<Estimate> {
    if reps < MIN_DRIFT_REPS {
        return Err(invalid("reps", format!("need at least {MIN_DRIFT_REPS}")));
    }
    check_same_circle(zeta.circumference(), params.circumference())?;
    if let Some(p) = functional.energy_params() {
        check_same_circle(p.circumference(), params.circumference())?;
    }
    let mut rng = substream(seed, 0);
    let mut noise = StepNoise::default();
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut xi = zeta.clone();
    let n0 = zeta.total_variation() as f64;
    let h0 = match functional.energy_params() {
        Some(p) => energy(zeta, p)?,
        None => 0.0,
    };
    let f0 = match functional {
        DriftFunctional::Population => n0,
        _ => functional.of_energy(h0),
    };
    for _ in 0..reps {
        noise.draw(params, &mut rng);
        let v = match functional.energy_params() {
            None => {
                xi.clone_from(zeta);
                let out = apply_step(&mut xi, &noise, params.r());
                n0 + out.arrivals as f64 - f64::from(u8::from(out.served)) - f0
            }
            Some(p) => functional.of_energy(stepped_energy(zeta, h0, &noise, params.r(), p, &mut xi)) - f0,
        };
        sum += v;
        sum2 += v * v;
    }
    let n = reps as f64;
    let mean = sum / n;
    let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

/// Energy after one step, updated from `h0 = h(ζ)` through the potential
/// instead of recomputing the double sum. `xi` is scratch space.
fn stepped_energy(zeta: &Configuration, h0: f64, noise: &StepNoise, r: f64, p: &EnergyParams, xi: &mut Configuration) -> f64 {
    let ell = zeta.circumference();
    let k = |x: f64, y: f64| p.kernel_at(arc_distance_unchecked(x, y, ell));
    let xs = &noise.locations;
    let mut h = h0;
    for (i, &x) in xs.iter().enumerate() {
        h += 2.0 * potential(zeta, x, p) + p.a();
        for &y in &xs[..i] {
            h += 2.0 * k(x, y);
        }
    }
    xi.clone_from(zeta);
    for &x in xs {
        xi.insert(x);
    }
    if let Some((_, y)) = poll_at(xi, r, noise.poll_location, noise.tie_coin) {
        let f_xi = potential(zeta, y, p) + xs.iter().map(|&x| k(x, y)).sum::<f64>();
        h += p.a() - 2.0 * f_xi;
    }
    h
}

/// Pre-poll samples `(‖ξ‖, k_r(ξ))` of the configuration seen by the server,
/// one per poll of a run of `polls` polls started empty; the first 10% are
/// discarded. Samples are in time order.
pub fn laplace_sample(params: &SystemParams, polls: u64, seed: u64) -> Result<Vec<(u64, f64)>> {
    crate::error::check_steps(polls)?;
    let burn = polls / 10;
    let mut rng = substream(seed, 0);
    let mut noise = StepNoise::default();
    let mut zeta = Configuration::empty(params.circumference())?;
    let mut out = Vec::with_capacity((polls - burn) as usize);
    for t in 0..polls {
        noise.draw(params, &mut rng);
        for &x in &noise.locations {
            zeta.insert(x);
        }
        if t >= burn {
            out.push((zeta.total_variation(), scan_success_unchecked(&zeta, params.r())));
        }
        poll_at(&mut zeta, params.r(), noise.poll_location, noise.tie_coin);
    }
    Ok(out)
}

/// Residual of the steady-state Laplace identity at `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceResidual {
    pub theta: f64,
    /// `Ê e^{−θ‖ξ‖}`.
    pub lhs: f64,
    /// `Ĝ(λ(1−e^{−θ})) Ê e^{−θ‖ξ‖}(1 + (e^θ−1)k_r(ξ))`.
    pub rhs: f64,
    pub residual: f64,
    /// Batch-means standard error of the residual.
    pub stderr: f64,
}

impl LaplaceResidual {
    /// Whether `|residual| < z·stderr`.
    pub fn within(&self, z: f64) -> bool {
        self.residual.abs() < z * self.stderr
    }
}

const LAPLACE_BATCHES: usize = 50;

/// Evaluates `Ê e^{−θ‖ξ‖} − Ĝ(λ(1−e^{−θ}))·Ê[e^{−θ‖ξ‖}(1 + (e^θ−1)k_r(ξ))]` on
/// time-ordered pre-poll samples.
pub fn laplace_residual(params: &SystemParams, theta: f64, sample: &[(u64, f64)]) -> Result<LaplaceResidual> {
    if !(theta.is_finite() && theta > 0.0 && theta < 700.0) {
        return Err(invalid("theta", format!("must lie in (0, 700), got {theta}")));
    }
    if sample.len() < 2 * LAPLACE_BATCHES {
        return Err(invalid("sample", format!("need at least {} samples", 2 * LAPLACE_BATCHES)));
    }
    let g_hat = params.interpolling().laplace(params.lambda() * -(-theta).exp_m1());
    let terms = sample.iter().map(|&(n, k)| {
        let e = (-theta * n as f64).exp();
        // e^{−θn}(e^θ − 1) without overflow
        let lift = (-theta * (n as f64 - 1.0)).exp() - e;
        (e, g_hat * (e + lift * k))
    });
    let per_batch = sample.len() / LAPLACE_BATCHES;
    let used = per_batch * LAPLACE_BATCHES;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut batch_means = Vec::with_capacity(LAPLACE_BATCHES);
    let mut acc = 0.0;
    for (i, (l, r)) in terms.take(used).enumerate() {
        lhs += l;
        rhs += r;
        acc += l - r;
        if (i + 1) % per_batch == 0 {
            batch_means.push(acc / per_batch as f64);
            acc = 0.0;
        }
    }
    let n = used as f64;
    let b = LAPLACE_BATCHES as f64;
    let m = batch_means.iter().sum::<f64>() / b;
    let var = batch_means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
    Ok(LaplaceResidual {
        theta,
        lhs: lhs / n,
        rhs: rhs / n,
        residual: (lhs - rhs) / n,
        stderr: (var / b).sqrt(),
    })
}

/// Straight-line fit of the log-survival function of the stationary population.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    /// Fitted slope of `log P(‖W‖ ≥ k)` in `k`; negative for a geometric tail.
    pub rate: f64,
    pub r_squared: f64,
    /// `(k, log P(‖W‖ ≥ k))` at the populated levels.
    pub points: Vec<(u64, f64)>,
}

/// Least-squares fit of `log P(‖W‖ ≥ k)` against `k` over the levels `k` that
/// were visited at least once.
pub fn tail_geometric_fit(estimate: &StationaryEstimate) -> Result<TailFit> {
    let hist = &estimate.tail_histogram;
    let levels = hist.iter().filter(|&&c| c > 0).count();
    if levels < MIN_TAIL_LEVELS {
        return Err(Error::InsufficientTailData {
            levels,
            required: MIN_TAIL_LEVELS,
        });
    }
    let total: u64 = hist.iter().sum();
    let mut survival = total;
    let mut points = Vec::with_capacity(levels);
    for (k, &c) in hist.iter().enumerate() {
        if c > 0 {
            points.push((k as u64, (survival as f64 / total as f64).ln()));
        }
        survival -= c;
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(k, y)| (k as f64, y)).collect();
    let (rate, _, r_squared) = least_squares(&xy);
    Ok(TailFit {
        rate,
        r_squared,
        points,
    })
}

/// Fraction of `reps` independent runs from `zeta` that are empty just after
/// some poll within the first `steps` polls.
pub fn emptying_probability(
    zeta: &Configuration,
    params: &SystemParams,
    steps: u64,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    crate::error::check_steps(steps)?;
    check_same_circle(zeta.circumference(), params.circumference())?;
    if reps == 0 {
        return Err(invalid("reps", "must be at least 1"));
    }
    let mut rng = substream(seed, 0);
    let mut noise = StepNoise::default();
    let mut xi = zeta.clone();
    let mut hits = 0usize;
    for _ in 0..reps {
        xi.clone_from(zeta);
        for _ in 0..steps {
            noise.draw(params, &mut rng);
            apply_step(&mut xi, &noise, params.r());
            if xi.is_empty() {
                hits += 1;
                break;
            }
        }
    }
    Ok(hits as f64 / reps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::distribution::InterpollingDistribution;
    use crate::simulator::stationary::{EstimateMethod, StationaryEstimate};

    fn params(lambda: f64, r: f64) -> SystemParams {
        SystemParams::new(lambda, r, 1.0, InterpollingDistribution::exponential(1.0).unwrap()).unwrap()
    }

    #[test]
    fn incremental_energy_matches_recomputation() {
        let p = params(2.0, 0.15);
        let ep = EnergyParams::new(0.3, 1.0).unwrap();
        let zeta = Configuration::from_locations(1.0, [0.05, 0.05, 0.3, 0.62, 0.9]).unwrap();
        let h0 = energy(&zeta, &ep).unwrap();
        let mut rng = substream(11, 0);
        let mut noise = StepNoise::default();
        let mut scratch = zeta.clone();
        for _ in 0..200 {
            noise.draw(&p, &mut rng);
            let fast = stepped_energy(&zeta, h0, &noise, p.r(), &ep, &mut scratch);
            let mut xi = zeta.clone();
            apply_step(&mut xi, &noise, p.r());
            let slow = energy(&xi, &ep).unwrap();
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn too_few_reps_rejected() {
        let z = Configuration::empty(1.0).unwrap();
        assert!(drift_monte_carlo(&z, &params(0.5, 0.1), DriftFunctional::Population, 999, 0).is_err());
    }

    #[test]
    fn two_level_histogram_is_insufficient() {
        let est = StationaryEstimate {
            mean_population: 0.5,
            half_width_95: 0.1,
            mean_at_polls: 0.5,
            half_width_at_polls: 0.1,
            cycles: 100,
            cycle_length_mean: 2.0,
            polls: 200,
            tail_histogram: vec![100, 100],
            method: EstimateMethod::Regenerative,
        };
        assert!(matches!(
            tail_geometric_fit(&est),
            Err(Error::InsufficientTailData { levels: 2, required: 5 })
        ));
    }

    #[test]
    fn geometric_histogram_fits_closely() {
        let hist: Vec<u64> = (0..12).map(|k| 1u64 << (20 - k)).collect();
        let est = StationaryEstimate {
            mean_population: 1.0,
            half_width_95: 0.0,
            mean_at_polls: 1.0,
            half_width_at_polls: 0.0,
            cycles: 100,
            cycle_length_mean: 1.0,
            polls: hist.iter().sum(),
            tail_histogram: hist,
            method: EstimateMethod::Regenerative,
        };
        let fit = tail_geometric_fit(&est).unwrap();
        // truncated geometric: survival is not exactly geometric at the top
        assert!(fit.rate < -0.6 && fit.rate > -0.8, "{}", fit.rate);
        assert!(fit.r_squared > 0.99);
        assert_eq!(fit.points[0], (0, 0.0));
    }

    #[test]
    fn laplace_theta_domain() {
        let p = params(0.1, 0.1);
        let sample = vec![(0u64, 0.0); 200];
        assert!(laplace_residual(&p, 0.0, &sample).is_err());
        assert!(laplace_residual(&p, f64::INFINITY, &sample).is_err());
        assert!(laplace_residual(&p, 1.0, &sample).is_ok());
    }

    #[test]
    fn emptying_from_empty_within_one_step_is_no_arrival_probability_at_least() {
        let p = params(0.5, 0.1);
        let z = Configuration::empty(1.0).unwrap();
        let pr = emptying_probability(&z, &p, 1, 20_000, 1).unwrap();
        // P(A = 0) = 1/(1+λ) for exponential; single arrival served w.p. m(B_r)
        assert!(pr > 1.0 / 1.5 - 0.01);
    }
}
