use crate::error::{require_positive, Result};
use crate::kernels::distribution::InterpollingDistribution;
use crate::kernels::law::MixedPoisson;

/// Full model parameterisation: arrival rate `λ`, scan radius `r`,
/// circumference `ℓ` and interpolling distribution `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    lambda: f64,
    r: f64,
    circumference: f64,
    interpolling: InterpollingDistribution,
}

impl SystemParams {
    pub fn new(lambda: f64, r: f64, circumference: f64, interpolling: InterpollingDistribution) -> Result<Self> {
        require_positive("lambda", lambda)?;
        require_positive("r", r)?;
        require_positive("circumference", circumference)?;
        Ok(Self {
            lambda,
            r,
            circumference,
            interpolling,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    pub fn interpolling(&self) -> &InterpollingDistribution {
        &self.interpolling
    }

    /// Load `λs₁`; the system is stable iff it is below one.
    pub fn load(&self) -> f64 {
        self.lambda * self.interpolling.s1()
    }

    /// `m(B_r)`.
    pub fn ball_measure(&self) -> f64 {
        crate::geometry::ball_measure_unchecked(self.r, self.circumference)
    }

    /// Law of the number of arrivals in one interpolling time.
    pub fn count_law(&self) -> MixedPoisson<'_> {
        MixedPoisson::new(&self.interpolling, self.lambda)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.r, self.circumference, self.interpolling.clone())
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.lambda, r, self.circumference, self.interpolling.clone())
    }
}
