use std::fmt;
use std::sync::Arc;

use crate::configuration::Configuration;
use crate::lyapunov::{energy, EnergyParams};

/// A real functional of the system state.
#[derive(Clone)]
pub enum Functional {
    /// The constant `1`.
    One,
    /// Population size `‖ζ‖`.
    Population,
    /// Energy `h(ζ) = ⟨ζ,ζ⟩ₐ`.
    Energy(EnergyParams),
    /// Seminorm `‖ζ‖ₐ`.
    Seminorm(EnergyParams),
    /// `exp(β‖ζ‖ₐ)`.
    ExpSeminorm { params: EnergyParams, beta: f64 },
    /// Any other functional.
    Custom(Arc<dyn Fn(&Configuration) -> f64 + Send + Sync>),
}

impl Functional {
    pub fn custom(f: impl Fn(&Configuration) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, zeta: &Configuration) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Population => zeta.total_variation() as f64,
            Self::Energy(p) => energy(zeta, p).expect("circumference checked by caller"),
            Self::Seminorm(p) => energy(zeta, p).expect("circumference checked by caller").max(0.0).sqrt(),
            Self::ExpSeminorm { params, beta } => {
                (beta * energy(zeta, params).expect("circumference checked by caller").max(0.0).sqrt()).exp()
            }
            Self::Custom(f) => f(zeta),
        }
    }

    /// Transforms an energy value into this functional's value, for the
    /// functionals that depend on the state only through the energy.
    pub(crate) fn value_at_energy(&self, h: f64) -> Option<f64> {
        match self {
            Self::Energy(_) => Some(h),
            Self::Seminorm(_) => Some(h.max(0.0).sqrt()),
            Self::ExpSeminorm { beta, .. } => Some((beta * h.max(0.0).sqrt()).exp()),
            _ => None,
        }
    }

    pub(crate) fn energy_params(&self) -> Option<&EnergyParams> {
        match self {
            Self::Energy(p) | Self::Seminorm(p) | Self::ExpSeminorm { params: p, .. } => Some(p),
            _ => None,
        }
    }
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::One => write!(f, "One"),
            Self::Population => write!(f, "Population"),
            Self::Energy(p) => write!(f, "Energy(a={})", p.a()),
            Self::Seminorm(p) => write!(f, "Seminorm(a={})", p.a()),
            Self::ExpSeminorm { params, beta } => write!(f, "ExpSeminorm(a={}, beta={beta})", params.a()),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}
