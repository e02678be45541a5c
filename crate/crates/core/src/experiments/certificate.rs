//! The quadratic drift certificate and the population-drift counterexample.

use serde::Serialize;

use crate::configuration::Configuration;
use crate::error::Result;
use crate::experiments::config::ScenarioConfig;
use crate::experiments::corpus::drift_corpus;
use crate::geometry::ball_measure_unchecked;
use crate::kernels::drift::{energy_drift, poll_only_energy_drift, population_drift};
use crate::lyapunov::{drift_constants, DriftConstants};
use crate::simulator::step::substream;

/// Slack allowed above the bound.
pub const BOUND_TOLERANCE: f64 = 1e-10;
/// Largest single-point cluster in the corpus.
pub const MAX_CLUSTER: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMode {
    /// `λs₁ < 1`: the bound is checked on the corpus.
    Certificate,
    /// `λs₁ ≥ 1`: only the counterexample is evaluated.
    CounterexampleOnly,
}

/// One corpus row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftRow {
    pub family: &'static str,
    pub population: u64,
    pub distinct: usize,
    pub drift: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Exact population drift at `nδ₀` against `λs₁ − 1 + G_λ(0)(1 − m(B_r))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counterexample {
    pub cluster_size: u32,
    pub drift: f64,
    pub lower_bound: f64,
    /// The lower bound is positive, i.e. the population drifts upward at
    /// arbitrarily large clusters.
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub mode: CertificateMode,
    pub a: f64,
    pub constants: DriftConstants,
    pub rows: Vec<DriftRow>,
    /// Absent when `λ = 0`.
    pub counterexample: Option<Counterexample>,
}

impl CertificateReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds).count()
    }

    /// The bound held everywhere it was checked and the counterexample
    /// drift is not below its lower bound.
    pub fn passed(&self) -> bool {
        self.violations() == 0
            && self
                .counterexample
                .is_none_or(|c| c.drift >= c.lower_bound - BOUND_TOLERANCE)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "mode = {:?}\na = {}\nc1 = {}\nc2 = {}\n",
            self.mode, self.a, self.constants.c1, self.constants.c2
        );
        if self.mode == CertificateMode::Certificate {
            let worst = self
                .rows
                .iter()
                .map(|r| r.drift - r.bound)
                .fold(f64::NEG_INFINITY, f64::max);
            s.push_str(&format!(
                "corpus = {} configurations, violations = {}, max(drift - bound) = {worst:e}\n",
                self.rows.len(),
                self.violations()
            ));
        }
        if let Some(c) = &self.counterexample {
            s.push_str(&format!(
                "population drift at {}δ0 = {} (lower bound {}, positive = {})\n",
                c.cluster_size, c.drift, c.lower_bound, c.positive
            ));
        }
        s
    }
}

/// `λs₁ − 1 + G_λ(0)(1 − m(B_r))`.
pub fn counterexample_lower_bound(config: &ScenarioConfig) -> f64 {
    let g0 = config.interpolling.pmf_unchecked(config.lambda, 0);
    config.load_factor() - 1.0 + g0 * (1.0 - ball_measure_unchecked(config.r, config.circumference))
}

/// Checks `Dh(ζ) ≤ −c₁‖ζ‖ + c₂` with the exact energy drift on a structured
/// corpus of `config.replications` configurations (clusters up to
/// [`MAX_CLUSTER`]), and evaluates the population-drift
/// counterexample at `cluster_size·δ₀`. With `λs₁ ≥ 1` only the
/// counterexample is evaluated; with `λ = 0` the poll-only drift is used.
pub fn drift_certificate(config: &ScenarioConfig) -> Result<CertificateReport> {
    let p = config.energy()?;
    let g = &config.interpolling;
    let constants = drift_constants(config.lambda, g.s1(), g.s2(), &p)?;
    let ell = config.circumference;
    let stable = config.load_factor() < 1.0;
    let mode = if stable {
        CertificateMode::Certificate
    } else {
        CertificateMode::CounterexampleOnly
    };
    let system = (config.lambda > 0.0).then(|| config.system()).transpose()?;

    let mut rows = Vec::new();
    if stable {
        let mut rng = substream(config.seed, 0);
        for (family, zeta) in drift_corpus(&mut rng, ell, config.replications, MAX_CLUSTER) {
            let drift = match &system {
                Some(s) => energy_drift(&zeta, s, &p)?,
                None => {
                    if p.a() > 2.0 * config.r {
                        return Err(crate::error::Error::Precondition(format!(
                            "kernel width a = {} exceeds 2r = {}",
                            p.a(),
                            2.0 * config.r
                        )));
                    }
                    poll_only_energy_drift(&zeta, config.r, &p)
                }
            };
            let bound = constants.bound(zeta.total_variation());
            rows.push(DriftRow {
                family,
                population: zeta.total_variation(),
                distinct: zeta.distinct_len(),
                drift,
                bound,
                holds: drift <= bound + BOUND_TOLERANCE,
            });
        }
    }

    let counterexample = match &system {
        Some(s) => {
            let zeta = Configuration::cluster(ell, 0.0, config.cluster_size)?;
            let lower = counterexample_lower_bound(config);
            Some(Counterexample {
                cluster_size: config.cluster_size,
                drift: population_drift(&zeta, s)?,
                lower_bound: lower,
                positive: lower > 0.0,
            })
        }
        None => None,
    };

    Ok(CertificateReport {
        mode,
        a: p.a(),
        constants,
        rows,
        counterexample,
    })
}
