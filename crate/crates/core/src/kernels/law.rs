//! Laws of the arrival count `N` during one interpolling time, described by
//! their probability generating function `P(z) = E zᴺ` on `[0, 1]`.

use crate::kernels::distribution::InterpollingDistribution;

/// A count distribution accessed through its generating function.
pub trait CountLaw {
    /// `P(z)`.
    fn pgf(&self, z: f64) -> f64;
    /// `P′(z)`.
    fn pgf_d1(&self, z: f64) -> f64;
    /// `P″(z)`.
    fn pgf_d2(&self, z: f64) -> f64;
    /// `∫_{lo}^{hi} P(z) dz`.
    fn pgf_integral(&self, lo: f64, hi: f64) -> f64;
    /// `E N`.
    fn mean(&self) -> f64;
    /// `E N(N−1)`.
    fn factorial_moment2(&self) -> f64;
}

/// Poisson count with rate `λS`, `S ~ G`: `P(z) = Ĝ(λ(1−z))`.
#[derive(Debug, Clone, Copy)]
pub struct MixedPoisson<'a> {
    g: &'a InterpollingDistribution,
    lambda: f64,
}

impl<'a> MixedPoisson<'a> {
    pub fn new(g: &'a InterpollingDistribution, lambda: f64) -> Self {
        Self { g, lambda }
    }
}

impl CountLaw for MixedPoisson<'_> {
    fn pgf(&self, z: f64) -> f64 {
        self.g.laplace(self.lambda * (1.0 - z))
    }

    fn pgf_d1(&self, z: f64) -> f64 {
        self.lambda * self.g.laplace_d1(self.lambda * (1.0 - z))
    }

    fn pgf_d2(&self, z: f64) -> f64 {
        self.lambda * self.lambda * self.g.laplace_d2(self.lambda * (1.0 - z))
    }

    fn pgf_integral(&self, lo: f64, hi: f64) -> f64 {
        let t_lo = self.lambda * (1.0 - lo);
        let t_hi = self.lambda * (1.0 - hi);
        (self.g.laplace_integral(t_lo) - self.g.laplace_integral(t_hi)) / self.lambda
    }

    fn mean(&self) -> f64 {
        self.lambda * self.g.s1()
    }

    fn factorial_moment2(&self) -> f64 {
        self.lambda * self.lambda * self.g.s2()
    }
}

/// A count law with finite support, given by its probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw {
    pmf: Vec<f64>,
}

impl FiniteLaw {
    pub fn new(pmf: Vec<f64>) -> Self {
        Self { pmf }
    }

    /// Point mass at `n`.
    pub fn fixed(n: usize) -> Self {
        let mut pmf = vec![0.0; n + 1];
        pmf[n] = 1.0;
        Self { pmf }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }
}

impl CountLaw for FiniteLaw {
    fn pgf(&self, z: f64) -> f64 {
        self.pmf.iter().rev().fold(0.0, |acc, p| acc * z + p)
    }

    fn pgf_d1(&self, z: f64) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (n, p)| acc * z + n as f64 * p)
    }

    fn pgf_d2(&self, z: f64) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (n, p)| acc * z + (n * (n - 1)) as f64 * p)
    }

    fn pgf_integral(&self, lo: f64, hi: f64) -> f64 {
        let prim = |z: f64| {
            self.pmf
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (n, p)| acc * z + p / (n + 1) as f64)
                * z
        };
        prim(hi) - prim(lo)
    }

    fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    fn factorial_moment2(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
            .sum()
    }
}
