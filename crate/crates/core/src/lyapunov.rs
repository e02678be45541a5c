//! The quadratic energy `⟨ζ,η⟩ₐ`, its seminorm, nearest-neighbour
//! interpolation and the drift constants of the energy functional.
//!
//! All normalised measures use the probability measure `m` on the circle, so
//! closed forms that integrate the kernel against `m` carry a factor `1/ℓ`:
//! `∫ (a − d(x,y))₊ m(dy) = a²/ℓ`.

use crate::configuration::{check_same_circle, Configuration, SignedConfiguration};
use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::{arc_distance_unchecked, cell_ball_length, neighbor_gaps, wrap};

/// Shape of the pair kernel. Only `Triangular` is meaningful; `Unclamped`
/// drops the positive part and exists so the verification harness can be
/// checked against a corrupted kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Triangular,
    Unclamped,
}

/// Kernel width `a` on a circle of circumference `ℓ`, with `0 < a ≤ ℓ/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    a: f64,
    circumference: f64,
    kernel: Kernel,
}

impl EnergyParams {
    pub fn new(a: f64, circumference: f64) -> Result<Self> {
        require_positive("a", a)?;
        require_positive("circumference", circumference)?;
        if a > 0.5 * circumference {
            return Err(invalid(
                "a",
                format!("must satisfy a <= circumference/2 = {}, got {a}", 0.5 * circumference),
            ));
        }
        Ok(Self {
            a,
            circumference,
            kernel: Kernel::Triangular,
        })
    }

    /// The default width `min(ℓ/2, 2r)`.
    pub fn auto(r: f64, circumference: f64) -> Result<Self> {
        require_positive("r", r)?;
        Self::new((0.5 * circumference).min(2.0 * r), circumference)
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// `(a − d)₊` (or `a − d` for the corrupted kernel).
    #[inline]
    pub fn kernel_at(&self, d: f64) -> f64 {
        match self.kernel {
            Kernel::Triangular => (self.a - d).max(0.0),
            Kernel::Unclamped => self.a - d,
        }
    }

    #[inline]
    fn k(&self, x: f64, y: f64) -> f64 {
        self.kernel_at(arc_distance_unchecked(x, y, self.circumference))
    }
}

/// Constants of the quadratic drift bound `Dh(ζ) ≤ −c₁‖ζ‖ + c₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConstants {
    pub c1: f64,
    pub c2: f64,
}

impl DriftConstants {
    /// Right-hand side `−c₁ n + c₂` for a population of size `n`.
    pub fn bound(&self, population: u64) -> f64 {
        -self.c1 * population as f64 + self.c2
    }
}

/// `⟨ζ,η⟩ₐ = Σ_x Σ_y (a − d(x,y))₊ ζ(x) η(y)`.
pub fn inner_product(zeta: &SignedConfiguration, eta: &SignedConfiguration, p: &EnergyParams) -> Result<f64> {
    check_same_circle(zeta.circumference(), p.circumference)?;
    check_same_circle(eta.circumference(), p.circumference)?;
    let mut total = 0.0;
    for x in zeta.atoms() {
        let xp = x.location.position();
        let mut row = 0.0;
        for y in eta.atoms() {
            row += p.k(xp, y.location.position()) * y.weight as f64;
        }
        total += row * x.weight as f64;
    }
    Ok(total)
}

/// Energy `h(ζ) = ⟨ζ,ζ⟩ₐ` of a positive configuration.
pub fn energy(zeta: &Configuration, p: &EnergyParams) -> Result<f64> {
    check_same_circle(zeta.circumference(), p.circumference)?;
    let atoms = zeta.atoms();
    let mut total = 0.0;
    for (i, x) in atoms.iter().enumerate() {
        let cx = x.count as f64;
        total += p.kernel_at(0.0) * cx * cx;
        for y in &atoms[i + 1..] {
            total += 2.0 * p.k(x.location.position(), y.location.position()) * cx * y.count as f64;
        }
    }
    Ok(total)
}

/// `⟨ζ, δ_u⟩ₐ = Σ_y (a − d(u,y))₊ ζ(y)` for a positive configuration.
pub fn potential(zeta: &Configuration, u: f64, p: &EnergyParams) -> f64 {
    zeta.atoms()
        .iter()
        .map(|y| p.k(u, y.location.position()) * y.count as f64)
        .sum()
}

/// `‖ζ‖ₐ = √⟨ζ,ζ⟩ₐ`.
///
/// # Panics
/// If the quadratic form is below `−1e−12`, which cannot happen for the
/// triangular kernel.
pub fn seminorm(zeta: &SignedConfiguration, p: &EnergyParams) -> Result<f64> {
    let q = inner_product(zeta, zeta, p)?;
    assert!(q >= -1e-12, "negative energy {q}: kernel is not positive semidefinite");
    Ok(q.max(0.0).sqrt())
}

/// `‖ζ‖ₐ` for a positive configuration.
pub fn seminorm_of(zeta: &Configuration, p: &EnergyParams) -> Result<f64> {
    let q = energy(zeta, p)?;
    assert!(q >= -1e-12, "negative energy {q}: kernel is not positive semidefinite");
    Ok(q.max(0.0).sqrt())
}

/// `ℓ · E ζ(B_{a/2}(U))²` with `U` uniform, i.e. the arc-length integral of the
/// squared ball count. Equals `⟨ζ,ζ⟩ₐ` for the triangular kernel.
///
/// The integrand is piecewise constant with jumps at `x ± a/2`; the grid is the
/// union of those breakpoints and `grid_n` uniform points, and the value on
/// each piece is read at its midpoint, which makes the sum exact.
pub fn ball_count_representation(zeta: &SignedConfiguration, p: &EnergyParams, grid_n: usize) -> Result<f64> {
    check_same_circle(zeta.circumference(), p.circumference)?;
    if grid_n == 0 {
        return Err(invalid("grid_n", "must be at least 1"));
    }
    let ell = p.circumference;
    let half = 0.5 * p.a;
    let mut cuts: Vec<f64> = (0..grid_n).map(|i| ell * i as f64 / grid_n as f64).collect();
    for x in zeta.atoms() {
        let c = x.location.position();
        cuts.push(wrap(c - half, ell));
        cuts.push(wrap(c + half, ell));
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup();
    let mut total = 0.0;
    for i in 0..cuts.len() {
        let lo = cuts[i];
        let hi = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + ell };
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        let mid = lo + 0.5 * len;
        let count: i64 = zeta
            .atoms()
            .iter()
            .filter(|x| arc_distance_unchecked(mid, x.location.position(), ell) < half)
            .map(|x| x.weight)
            .sum();
        total += len * (count * count) as f64;
    }
    Ok(total)
}

/// Nearest-neighbour interpolant of `f` on the atoms of `ζ`, evaluated at `z`.
/// On a cell boundary the clockwise atom wins.
pub fn nn_interpolant(f: impl Fn(f64) -> f64, zeta: &Configuration, z: f64) -> Result<f64> {
    let nearest = zeta.nearest(z).ok_or(Error::EmptyConfiguration)?;
    let idx = nearest.tie.unwrap_or(nearest.index);
    Ok(f(zeta.atoms()[idx].location.position()))
}

/// `g(x,ζ) = Σ_y (a − d(x,y))₊ w(y)` over distinct atoms `y`, where `w(y)` is
/// the cell measure `m(Γ_ζ(y))`, or `m(B_r(y) ∩ Γ_ζ(y))` when `r` is given.
///
/// With atoms at `x` and `x ± a` and no radius the value is exactly `a²/ℓ`;
/// with `x ∈ ζ` and `a ≤ min(ℓ/2, 2r)` it is at least `a²/ℓ`.
pub fn interpolation_sum(x: f64, zeta: &Configuration, p: &EnergyParams, r: Option<f64>) -> Result<f64> {
    check_same_circle(zeta.circumference(), p.circumference)?;
    if zeta.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let ell = p.circumference;
    if let Some(r) = r {
        require_positive("r", r)?;
        if p.a > 2.0 * r {
            return Err(Error::Precondition(format!(
                "kernel width a = {} exceeds min(l/2, 2r) = {}",
                p.a,
                (0.5 * ell).min(2.0 * r)
            )));
        }
    }
    let pos: Vec<f64> = zeta.positions().collect();
    let mut total = 0.0;
    for (i, &y) in pos.iter().enumerate() {
        let k = p.k(x, y);
        if k == 0.0 {
            continue;
        }
        let (gl, gr) = neighbor_gaps(&pos, i, ell);
        let len = match r {
            Some(r) => cell_ball_length(gl, gr, r),
            None if pos.len() == 1 => ell,
            None => 0.5 * (gl + gr),
        };
        total += k * len / ell;
    }
    Ok(total)
}

/// Drift constants `c₁ = (2a²/ℓ)(1 − λs₁)` and
/// `c₂ = a(1 + λs₁) + (a²/ℓ)(λ²s₂ − 2λs₁)`.
///
/// `λ = 0` is accepted and gives the poll-only constants.
pub fn drift_constants(lambda: f64, s1: f64, s2: f64, p: &EnergyParams) -> Result<DriftConstants> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid("lambda", format!("must be nonnegative and finite, got {lambda}")));
    }
    require_positive("s1", s1)?;
    if !(s2.is_finite() && s2 >= s1 * s1 * (1.0 - 1e-12)) {
        return Err(invalid("s2", format!("must satisfy s2 >= s1^2, got s1={s1}, s2={s2}")));
    }
    let a = p.a;
    let q = a * a / p.circumference;
    let rho = lambda * s1;
    Ok(DriftConstants {
        c1: 2.0 * q * (1.0 - rho),
        c2: a * (1.0 + rho) + q * (lambda * lambda * s2 - 2.0 * rho),
    })
}

/// Largest customer count in one of `n` closed covering balls of diameter
/// `ℓ/n` centred at `(i + ½)ℓ/n`.
pub fn covering_ball_max(zeta: &Configuration, n: usize) -> Result<u64> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let ell = zeta.circumference();
    let radius = 0.5 * ell / n as f64;
    Ok((0..n)
        .map(|i| {
            let c = (i as f64 + 0.5) * ell / n as f64;
            zeta.atoms()
                .iter()
                .filter(|x| arc_distance_unchecked(c, x.location.position(), ell) <= radius * (1.0 + 1e-12))
                .map(|x| x.count as u64)
                .sum::<u64>()
        })
        .max()
        .unwrap_or(0))
}

/// Lower constant in `κ‖ζ‖ ≤ ‖ζ‖ₐ` for positive `ζ`: `√(a/2) / (1 + 2ℓ/a)`.
pub fn positive_norm_lower_constant(p: &EnergyParams) -> f64 {
    (0.5 * p.a).sqrt() / (1.0 + 2.0 * p.circumference / p.a)
}

/// Population threshold `n` and margin `α` for the seminorm drift
/// `D‖·‖ₐ(ζ) ≤ −α` whenever `‖ζ‖ > n`, derived from the quadratic constants.
///
/// Above `2c₂/c₁` the energy drift is at most `−(c₁/2)‖ζ‖ ≤ −c′v` with
/// `c′ = c₁/(2√a)`, and `√(v² − c′v) − v ≤ −c′/2` once `c′/v ≤ 1`.
pub fn seminorm_drift_threshold(constants: &DriftConstants, p: &EnergyParams) -> Result<(u64, f64)> {
    if constants.c1 <= 0.0 {
        return Err(Error::Precondition("c1 must be positive (lambda * s1 < 1)".into()));
    }
    let c_prime = constants.c1 / (2.0 * p.a.sqrt());
    let kappa = positive_norm_lower_constant(p);
    let n = (2.0 * constants.c2 / constants.c1).max(2.0 * c_prime / kappa).ceil();
    Ok((n as u64, 0.25 * c_prime))
}
