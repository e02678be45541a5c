//! The arrival step: a mixed-Poisson batch of uniform customers accumulated
//! during one interpolling time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::configuration::Configuration;
use crate::error::{invalid, Error, Result};
use crate::kernels::distribution::InterpollingDistribution;
use crate::kernels::functional::Functional;
use crate::kernels::params::SystemParams;
use crate::lyapunov::energy;

/// Hard cap on the number of series terms in the arrival operator.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// Customers that arrived during one interpolling time.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalBatch {
    pub duration: f64,
    pub locations: Vec<f64>,
}

impl ArrivalBatch {
    pub fn count(&self) -> usize {
        self.locations.len()
    }
}

/// A value with its Monte Carlo standard error (zero for exact values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }
}

/// Controls for the operators that fall back to sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSettings {
    /// Residual probability mass allowed when truncating the count series.
    pub tol: f64,
    /// Samples per stratum in Monte Carlo fallbacks.
    pub mc_reps: usize,
    pub seed: u64,
}

impl Default for OperatorSettings {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            mc_reps: 10_000,
            seed: 0,
        }
    }
}

/// Draws `N ~ Poisson(λS)` with `S ~ G`.
pub(crate) fn sample_count<R: Rng + ?Sized>(lambda: f64, duration: f64, rng: &mut R) -> usize {
    let mean = lambda * duration;
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// Draws one interpolling time `S ~ G`, then `N ~ Poisson(λS)` uniform
/// locations on the circle.
pub fn sample_interarrival_batch<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ArrivalBatch {
    let duration = params.interpolling().sample(rng);
    let n = sample_count(params.lambda(), duration, rng);
    let ell = params.circumference();
    let locations = (0..n).map(|_| rng.random::<f64>() * ell).collect();
    ArrivalBatch { duration, locations }
}

/// Smallest `N` with `Σ_{n ≤ N} G_λ(n) > 1 − tol`.
pub fn truncation_level(g: &InterpollingDistribution, lambda: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", format!("must lie in (0, 1), got {tol}")));
    }
    if let InterpollingDistribution::Exponential { mean } = g {
        // cumulative mass through N is 1 − q^{N+1}
        let q = lambda * mean / (1.0 + lambda * mean);
        let n = (tol.ln() / q.ln()).ceil() as i64 - 1;
        let n = n.max(0) as usize;
        return if n > MAX_SERIES_TERMS {
            Err(Error::SeriesNonConvergence {
                max_terms: MAX_SERIES_TERMS,
                residual: q.powf(MAX_SERIES_TERMS as f64 + 1.0),
            })
        } else {
            Ok(n)
        };
    }
    let mut mass = 0.0;
    for n in 0..=MAX_SERIES_TERMS {
        mass += g.pmf_unchecked(lambda, n as u64);
        if mass > 1.0 - tol {
            return Ok(n);
        }
    }
    Err(Error::SeriesNonConvergence {
        max_terms: MAX_SERIES_TERMS,
        residual: 1.0 - mass,
    })
}

/// `Aₐ f(ζ) = Σ_n G_λ(n) E f(ζ + δ_{X₁} + … + δ_{X_n})`.
///
/// Exact closed forms for `1`, population and energy:
/// `Aₐ‖·‖ = ‖ζ‖ + λs₁` and
/// `Aₐh = h + 2λs₁(a²/ℓ)‖ζ‖ + λs₁a + λ²s₂a²/ℓ`.
/// Other functionals are estimated by sampling each count stratum up to the
/// truncation level.
pub fn apply_arrival_operator(
    f: &Functional,
    zeta: &Configuration,
    params: &SystemParams,
    settings: &OperatorSettings,
) -> Result<Estimate> {
    crate::configuration::check_same_circle(zeta.circumference(), params.circumference())?;
    let g = params.interpolling();
    let mean_n = params.lambda() * g.s1();
    let fact2 = params.lambda() * params.lambda() * g.s2();
    match f {
        Functional::One => Ok(Estimate::exact(1.0)),
        Functional::Population => Ok(Estimate::exact(zeta.total_variation() as f64 + mean_n)),
        Functional::Energy(p) => {
            crate::configuration::check_same_circle(p.circumference(), params.circumference())?;
            let q = p.a() * p.a() / p.circumference();
            let h = energy(zeta, p)?;
            Ok(Estimate::exact(
                h + 2.0 * mean_n * q * zeta.total_variation() as f64 + mean_n * p.a() + fact2 * q,
            ))
        }
        _ => stratified_arrivals(f, zeta, params, settings),
    }
}

fn stratified_arrivals(
    f: &Functional,
    zeta: &Configuration,
    params: &SystemParams,
    settings: &OperatorSettings,
) -> Result<Estimate> {
    if settings.mc_reps < 2 {
        return Err(invalid("mc_reps", "need at least 2 samples per stratum"));
    }
    let g = params.interpolling();
    let n_max = truncation_level(g, params.lambda(), settings.tol)?;
    let ell = params.circumference();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut value = 0.0;
    let mut var = 0.0;
    let mut mass = 0.0;
    for n in 0..=n_max {
        let w = g.pmf_unchecked(params.lambda(), n as u64);
        mass += w;
        if n == 0 {
            value += w * f.eval(zeta);
            continue;
        }
        let reps = settings.mc_reps;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..reps {
            let mut xi = zeta.clone();
            for _ in 0..n {
                xi.insert(rng.random::<f64>() * ell);
            }
            let v = f.eval(&xi);
            sum += v;
            sum2 += v * v;
        }
        let m = sum / reps as f64;
        let s2 = ((sum2 - reps as f64 * m * m) / (reps as f64 - 1.0)).max(0.0);
        value += w * m;
        var += w * w * s2 / reps as f64;
    }
    Ok(Estimate {
        value: value / mass,
        stderr: var.sqrt() / mass,
    })
}
