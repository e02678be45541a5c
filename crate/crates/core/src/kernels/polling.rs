//! The polling step: one uniform scan serving the nearest customer in range.

use rand::Rng;

use crate::configuration::Configuration;
use crate::geometry::{cell_ball_measures, CirclePoint};
use crate::kernels::functional::Functional;
use crate::kernels::params::SystemParams;

/// One branch of the polling kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct PollOutcome {
    /// Location of the served customer, `None` for an empty scan.
    pub served: Option<CirclePoint>,
    pub probability: f64,
    pub result: Configuration,
}

/// Exact law of the configuration after one poll.
#[derive(Debug, Clone, PartialEq)]
pub struct PollOutcomeDistribution {
    pub outcomes: Vec<PollOutcome>,
}

impl PollOutcomeDistribution {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// Probability that someone is served, `k_r(ζ)`.
    pub fn service_probability(&self) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.served.is_some())
            .map(|o| o.probability)
            .sum()
    }

    pub fn expectation(&self, f: &Functional) -> f64 {
        self.outcomes.iter().map(|o| o.probability * f.eval(&o.result)).sum()
    }
}

/// Serves the nearest customer within open distance `r` of the scan point `u`.
/// `tie_coin ∈ [0,1)` picks between two equidistant atoms. Returns the index
/// (before removal) and location of the served atom.
pub fn poll_at(zeta: &mut Configuration, r: f64, u: f64, tie_coin: f64) -> Option<(usize, f64)> {
    let nearest = zeta.nearest(u)?;
    if nearest.distance >= r {
        return None;
    }
    let index = match nearest.tie {
        Some(other) if tie_coin >= 0.5 => other,
        _ => nearest.index,
    };
    let location = zeta.atoms()[index].location.position();
    zeta.remove_one(index);
    Some((index, location))
}

/// Draws the configuration after one poll.
pub fn sample_poll<R: Rng + ?Sized>(zeta: &Configuration, params: &SystemParams, rng: &mut R) -> Configuration {
    let mut next = zeta.clone();
    let u = rng.random::<f64>() * params.circumference();
    let coin = rng.random::<f64>();
    poll_at(&mut next, params.r(), u, coin);
    next
}

/// Enumerates the polling kernel: each distinct atom `x` is served with
/// probability `m(B_r(x) ∩ Γ_ζ(x))`, and nobody with probability `1 − k_r(ζ)`.
pub fn poll_outcome_distribution(zeta: &Configuration, params: &SystemParams) -> PollOutcomeDistribution {
    let ell = zeta.circumference();
    let positions: Vec<f64> = zeta.positions().collect();
    let mut outcomes = Vec::with_capacity(positions.len() + 1);
    let mut served = 0.0;
    for (i, p) in cell_ball_measures(&positions, params.r(), ell).enumerate() {
        let mut result = zeta.clone();
        result.remove_one(i);
        served += p;
        outcomes.push(PollOutcome {
            served: Some(zeta.atoms()[i].location),
            probability: p,
            result,
        });
    }
    outcomes.push(PollOutcome {
        served: None,
        probability: (1.0 - served).max(0.0),
        result: zeta.clone(),
    });
    PollOutcomeDistribution { outcomes }
}

/// `Aₚ f(ζ) = f(ζ)(1 − k_r(ζ)) + Σ_x f(ζ − δ_x) m(B_r(x) ∩ Γ_ζ(x))`.
pub fn apply_polling_operator(f: &Functional, zeta: &Configuration, params: &SystemParams) -> f64 {
    poll_outcome_distribution(zeta, params).expectation(f)
}
