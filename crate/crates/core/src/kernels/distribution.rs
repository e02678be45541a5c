//! Interpolling time distributions and the mixed-Poisson arrival counts they induce.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, require_positive, Error, Result};

/// Distribution `G` of the time between consecutive polls.
#[derive(Debug, Clone, PartialEq)]
pub enum InterpollingDistribution {
    Exponential { mean: f64 },
    Deterministic { value: f64 },
    Gamma { shape: f64, scale: f64 },
    Empirical { values: Vec<f64> },
}

impl InterpollingDistribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        require_positive("mean", mean)?;
        Ok(Self::Exponential { mean })
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        require_positive("value", value)?;
        Ok(Self::Deterministic { value })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        require_positive("shape", shape)?;
        require_positive("scale", scale)?;
        Ok(Self::Gamma { shape, scale })
    }

    /// Uniform distribution over the listed values (repeats allowed).
    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("values", "empirical distribution needs at least one value"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("values", "empirical values must be finite and nonnegative"));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(invalid("values", "empirical mean must be positive"));
        }
        Ok(Self::Empirical { values })
    }

    /// First moment `s₁`.
    pub fn s1(&self) -> f64 {
        match self {
            Self::Exponential { mean } => *mean,
            Self::Deterministic { value } => *value,
            Self::Gamma { shape, scale } => shape * scale,
            Self::Empirical { values } => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    /// Second moment `s₂`.
    pub fn s2(&self) -> f64 {
        match self {
            Self::Exponential { mean } => 2.0 * mean * mean,
            Self::Deterministic { value } => value * value,
            Self::Gamma { shape, scale } => shape * (shape + 1.0) * scale * scale,
            Self::Empirical { values } => values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64,
        }
    }

    /// Supremum of `θ` with `E e^{θS} < ∞`.
    pub fn theta_max(&self) -> f64 {
        match self {
            Self::Exponential { mean } => 1.0 / mean,
            Self::Gamma { scale, .. } => 1.0 / scale,
            Self::Deterministic { .. } | Self::Empirical { .. } => f64::INFINITY,
        }
    }

    /// Laplace transform `Ĝ(θ) = E e^{−θS}` for `θ > −θ_max`.
    pub fn laplace(&self, theta: f64) -> f64 {
        match self {
            Self::Exponential { mean } => 1.0 / (1.0 + theta * mean),
            Self::Deterministic { value } => (-theta * value).exp(),
            Self::Gamma { shape, scale } => (-shape * (theta * scale).ln_1p()).exp(),
            Self::Empirical { values } => {
                values.iter().map(|v| (-theta * v).exp()).sum::<f64>() / values.len() as f64
            }
        }
    }

    /// `E[S e^{−θS}]`.
    pub fn laplace_d1(&self, theta: f64) -> f64 {
        match self {
            Self::Exponential { mean } => mean / (1.0 + theta * mean).powi(2),
            Self::Deterministic { value } => value * (-theta * value).exp(),
            Self::Gamma { shape, scale } => {
                shape * scale * (-(shape + 1.0) * (theta * scale).ln_1p()).exp()
            }
            Self::Empirical { values } => {
                values.iter().map(|v| v * (-theta * v).exp()).sum::<f64>() / values.len() as f64
            }
        }
    }

    /// `E[S² e^{−θS}]`.
    pub fn laplace_d2(&self, theta: f64) -> f64 {
        match self {
            Self::Exponential { mean } => 2.0 * mean * mean / (1.0 + theta * mean).powi(3),
            Self::Deterministic { value } => value * value * (-theta * value).exp(),
            Self::Gamma { shape, scale } => {
                shape * (shape + 1.0) * scale * scale * (-(shape + 2.0) * (theta * scale).ln_1p()).exp()
            }
            Self::Empirical { values } => {
                values.iter().map(|v| v * v * (-theta * v).exp()).sum::<f64>() / values.len() as f64
            }
        }
    }

    /// `∫₀^θ Ĝ(t) dt` for `θ ≥ 0`.
    pub fn laplace_integral(&self, theta: f64) -> f64 {
        fn det(v: f64, theta: f64) -> f64 {
            if v == 0.0 {
                theta
            } else {
                -(-theta * v).exp_m1() / v
            }
        }
        match self {
            Self::Exponential { mean } => (theta * mean).ln_1p() / mean,
            Self::Deterministic { value } => det(*value, theta),
            Self::Gamma { shape, scale } => {
                let l = (theta * scale).ln_1p();
                let k1 = shape - 1.0;
                if k1.abs() < 1e-9 {
                    // second-order expansion around shape = 1
                    (l - 0.5 * k1 * l * l) / scale
                } else {
                    -(-k1 * l).exp_m1() / (scale * k1)
                }
            }
            Self::Empirical { values } => {
                values.iter().map(|v| det(*v, theta)).sum::<f64>() / values.len() as f64
            }
        }
    }

    /// Moment generating function `E e^{θS}`, finite only below `θ_max`.
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        if theta >= self.theta_max() {
            return Err(invalid(
                "theta",
                format!("moment generating function diverges for theta >= {}", self.theta_max()),
            ));
        }
        Ok(self.laplace(-theta))
    }

    /// Draws one interpolling time.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { mean } => Exp::new(1.0 / mean).expect("validated rate").sample(rng),
            Self::Deterministic { value } => *value,
            Self::Gamma { shape, scale } => Gamma::new(*shape, *scale).expect("validated gamma").sample(rng),
            Self::Empirical { values } => values[rng.random_range(0..values.len())],
        }
    }

    /// `G_λ(n) = ∫ e^{−λs}(λs)ⁿ/n! G(ds)`: probability of `n` arrivals in one
    /// interpolling time.
    pub fn mixed_poisson_pmf(&self, lambda: f64, n: u64) -> Result<f64> {
        require_positive("lambda", lambda)?;
        Ok(self.pmf_unchecked(lambda, n))
    }

    pub(crate) fn pmf_unchecked(&self, lambda: f64, n: u64) -> f64 {
        let nf = n as f64;
        match self {
            Self::Exponential { mean } => {
                let m = lambda * mean;
                let p = 1.0 / (1.0 + m);
                p * (nf * (m * p).ln()).exp()
            }
            Self::Deterministic { value } => poisson_pmf(lambda * value, n),
            Self::Gamma { shape, scale } => {
                let m = lambda * scale;
                let log = ln_gamma(nf + shape) - ln_gamma(*shape) - ln_gamma(nf + 1.0) - shape * m.ln_1p()
                    + nf * (m / (1.0 + m)).ln();
                log.exp()
            }
            Self::Empirical { values } => {
                values.iter().map(|v| poisson_pmf(lambda * v, n)).sum::<f64>() / values.len() as f64
            }
        }
    }
}

pub(crate) fn poisson_pmf(mean: f64, n: u64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    (nf * mean.ln() - mean - ln_gamma(nf + 1.0)).exp()
}

impl fmt::Display for InterpollingDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { mean } => write!(f, "exponential:{mean}"),
            Self::Deterministic { value } => write!(f, "deterministic:{value}"),
            Self::Gamma { shape, scale } => write!(f, "gamma:{shape},{scale}"),
            Self::Empirical { values } => {
                write!(f, "empirical:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `kind:p1[,p2,...]`, e.g. `exponential:1`, `gamma:2,0.5`.
impl FromStr for InterpollingDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `kind:parameters`, got `{s}`")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number `{t}`: {e}")))
            })
            .collect::<Result<_>>()?;
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("`{kind}` takes {n} parameter(s), got {}", nums.len())))
            }
        };
        match kind.trim() {
            "exponential" => {
                arity(1)?;
                Self::exponential(nums[0])
            }
            "deterministic" => {
                arity(1)?;
                Self::deterministic(nums[0])
            }
            "gamma" => {
                arity(2)?;
                Self::gamma(nums[0], nums[1])
            }
            "empirical" => Self::empirical(nums),
            other => Err(Error::Parse(format!("unknown interpolling distribution `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, integrate_interval};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all() -> Vec<InterpollingDistribution> {
        vec![
            InterpollingDistribution::exponential(1.3).unwrap(),
            InterpollingDistribution::deterministic(0.7).unwrap(),
            InterpollingDistribution::gamma(2.5, 0.4).unwrap(),
            InterpollingDistribution::gamma(1.0, 0.8).unwrap(),
            InterpollingDistribution::gamma(0.5, 2.0).unwrap(),
            InterpollingDistribution::empirical(vec![0.2, 1.0, 1.0, 2.5]).unwrap(),
        ]
    }

    // ∫₀^∞ f(s) g(s) ds on a mapped interval, for the densities with support on ℝ₊
    fn density_integral(d: &InterpollingDistribution, f: impl Fn(f64) -> f64) -> f64 {
        match d {
            InterpollingDistribution::Exponential { mean } => {
                let rule = gauss_legendre(64);
                let mut total = 0.0;
                let mut lo = 0.0;
                for k in 1..=80 {
                    let hi = k as f64 * mean;
                    total += integrate_interval(&rule, lo, hi, |s| f(s) * (-s / mean).exp() / mean);
                    lo = hi;
                }
                total
            }
            InterpollingDistribution::Gamma { shape, scale } => {
                let rule = gauss_legendre(64);
                let norm = ln_gamma(*shape).exp();
                let mut total = 0.0;
                let mut lo = 0.0f64;
                if *shape < 1.0 {
                    // substitute s = scale * v^(1/shape) to remove the singularity at 0
                    total += integrate_interval(&rule, 0.0, 1.0, |v| {
                        let s = scale * v.powf(1.0 / shape);
                        f(s) * (-s / scale).exp() / (shape * norm)
                    });
                    lo = *scale;
                }
                let density = |s: f64| (s / scale).powf(shape - 1.0) * (-s / scale).exp() / (scale * norm);
                let step = 0.5 * scale * shape.max(1.0);
                for _ in 0..200 {
                    let hi = lo + step;
                    total += integrate_interval(&rule, lo, hi, |s| f(s) * density(s));
                    lo = hi;
                }
                total
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn moments_and_jensen() {
        for d in all() {
            assert!(d.s1() > 0.0);
            assert!(d.s2() >= d.s1() * d.s1());
        }
    }

    #[test]
    fn pmf_examples() {
        let d = InterpollingDistribution::deterministic(1.0).unwrap();
        assert!((d.mixed_poisson_pmf(0.5, 0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        let e = InterpollingDistribution::exponential(1.0).unwrap();
        assert!((e.mixed_poisson_pmf(1.0, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((e.mixed_poisson_pmf(1.0, 2).unwrap() - 0.125).abs() < 1e-15);
        assert!(e.mixed_poisson_pmf(0.0, 2).is_err());
    }

    #[test]
    fn pmf_matches_quadrature_oracle() {
        for d in all() {
            if !matches!(d, InterpollingDistribution::Exponential { .. } | InterpollingDistribution::Gamma { .. }) {
                continue;
            }
            for n in [0u64, 1, 2, 5, 9] {
                let lambda = 0.8;
                let oracle = density_integral(&d, |s| poisson_pmf(lambda * s, n));
                let got = d.mixed_poisson_pmf(lambda, n).unwrap();
                assert!((oracle - got).abs() < 1e-9, "{d} n={n}: {oracle} vs {got}");
            }
        }
    }

    #[test]
    fn pmf_normalised_with_correct_moments() {
        for d in all() {
            let lambda = 0.9;
            let mut mass = 0.0;
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for n in 0..400u64 {
                let p = d.mixed_poisson_pmf(lambda, n).unwrap();
                mass += p;
                m1 += n as f64 * p;
                m2 += (n * n.saturating_sub(1)) as f64 * p;
            }
            assert!((mass - 1.0).abs() < 1e-10, "{d}");
            assert!((m1 - lambda * d.s1()).abs() < 1e-9, "{d}");
            assert!((m2 - lambda * lambda * d.s2()).abs() < 1e-8, "{d}");
        }
    }

    #[test]
    fn laplace_derivatives_and_integral() {
        for d in all() {
            for theta in [0.0, 0.3, 1.7] {
                let h = 1e-5;
                let fd1 = -(d.laplace(theta + h) - d.laplace(theta - h)) / (2.0 * h);
                assert!((fd1 - d.laplace_d1(theta)).abs() < 1e-7, "{d}");
                let fd2 = -(d.laplace_d1(theta + h) - d.laplace_d1(theta - h)) / (2.0 * h);
                assert!((fd2 - d.laplace_d2(theta)).abs() < 1e-7, "{d}");
                let rule = gauss_legendre(30);
                let int = integrate_interval(&rule, 0.0, theta, |t| d.laplace(t));
                assert!((int - d.laplace_integral(theta)).abs() < 1e-12, "{d}");
            }
        }
    }

    #[test]
    fn gamma_near_unit_shape_is_continuous() {
        let a = InterpollingDistribution::gamma(1.0, 0.8).unwrap().laplace_integral(2.0);
        let b = InterpollingDistribution::gamma(1.0 + 1e-7, 0.8).unwrap().laplace_integral(2.0);
        let c = InterpollingDistribution::gamma(1.0 - 1e-10, 0.8).unwrap().laplace_integral(2.0);
        assert!((a - b).abs() < 1e-6 && (a - c).abs() < 1e-9);
    }

    #[test]
    fn mgf_domain() {
        let e = InterpollingDistribution::exponential(1.0).unwrap();
        assert!((e.mgf(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(e.mgf(1.0).is_err());
        assert!(InterpollingDistribution::deterministic(1.0).unwrap().mgf(50.0).is_ok());
    }

    #[test]
    fn sampler_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in all() {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            assert!(xs.iter().all(|x| *x >= 0.0));
            let mean = xs.iter().sum::<f64>() / n as f64;
            let sd = (d.s2() - d.s1() * d.s1()).sqrt();
            assert!((mean - d.s1()).abs() <= 4.0 * sd / (n as f64).sqrt() + 1e-9, "{d}");
        }
    }

    #[test]
    fn text_round_trip() {
        for d in all() {
            let back: InterpollingDistribution = d.to_string().parse().unwrap();
            assert_eq!(back, d);
        }
        assert!("weibull:1".parse::<InterpollingDistribution>().is_err());
        assert!("gamma:1".parse::<InterpollingDistribution>().is_err());
        assert!("exponential:-1".parse::<InterpollingDistribution>().is_err());
    }
}
