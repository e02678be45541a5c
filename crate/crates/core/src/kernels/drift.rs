//! Exact one-step drifts of the population and the energy under `A = Aₐ∘Aₚ`.
//!
//! A step first adds a batch of `N` uniform customers and then polls the
//! enlarged configuration `ξ = ζ + η`. Conditioning on the scan point `u`, only
//! two things matter: the distance `d₀` from `u` to the nearest old atom `y₀`
//! and the distance `T` from `u` to the nearest new arrival. Given `N = n` the
//! new distances are i.i.d. uniform on `[0, ℓ/2]`, so `P(T > t) = z_tⁿ` with
//! `z_t = 1 − 2t/ℓ`, and averaging over `n` turns every term into the count
//! generating function `P` or one of its derivatives evaluated at `z_t`.
//!
//! Writing `h = ℓ/2`, `ρ = min(d₀, r, h)` and `F(x) = ⟨ζ, δ_x⟩ₐ`, the expected
//! energy change caused by a poll at `u` is
//!
//! ```text
//! q(u) = (1/h)[−a I₁(ρ) − Ψ(u,ρ) − I₂(ρ)/h]
//!      + [d₀ < r] (P(z₀)(a − 2F(y₀)) − (a² − J₀(d₀)) P′(z₀)/h)
//! ```
//!
//! where `I₁(ρ) = ∫₀^ρ P′(z_t) dt`, `Ψ(u,ρ) = ∫₀^ρ P′(z_t)(F(u+t) + F(u−t)) dt`,
//! `I₂(ρ) = ∫₀^ρ (a² − J₀(t)) P″(z_t) dt`, and `J₀(t)` is the kernel mass of
//! the arc of length `2t` seen from one of its endpoints. The first line is
//! service of the nearest new arrival, the second service of `y₀`. Every
//! inner integral has a closed form through `P`, `P′` and `Q(t) = ∫₀ᵗ P(z_s) ds`
//! because `F` is piecewise linear; the outer integral over `u` is done by
//! Gauss–Legendre between all points where the integrand is not smooth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::configuration::{check_same_circle, Configuration};
use crate::error::{Error, Result};
use crate::geometry::{arc_distance_unchecked, scan_success_unchecked, wrap};
use crate::kernels::arrivals::{sample_interarrival_batch, Estimate, OperatorSettings};
use crate::kernels::functional::Functional;
use crate::kernels::law::CountLaw;
use crate::kernels::params::SystemParams;
use crate::kernels::polling::apply_polling_operator;
use crate::lyapunov::{energy, potential, EnergyParams, Kernel};
use crate::quadrature::gl12;

/// Poll-stage averages after a batch of arrivals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PollStage {
    /// Probability that the poll serves someone, `Aₐk_r(ζ)`.
    pub served: f64,
    /// Expected energy change caused by the poll (zero when not requested).
    pub energy_change: f64,
}

/// Sorted positions with counts, the kernel's slope changes and `F` at atoms.
struct Layout {
    ell: f64,
    pos: Vec<f64>,
    cnt: Vec<f64>,
    /// `(location, slope jump of F)`, sorted by location.
    kinks: Vec<(f64, f64)>,
    f_at_atom: Vec<f64>,
}

impl Layout {
    fn new(zeta: &Configuration, a: Option<f64>) -> Self {
        let ell = zeta.circumference();
        let pos: Vec<f64> = zeta.positions().collect();
        let cnt: Vec<f64> = zeta.atoms().iter().map(|x| x.count as f64).collect();
        let mut kinks = Vec::new();
        let mut f_at_atom = Vec::new();
        if let Some(a) = a {
            for (&y, &c) in pos.iter().zip(&cnt) {
                kinks.push((wrap(y - a, ell), c));
                kinks.push((y, -2.0 * c));
                kinks.push((wrap(y + a, ell), c));
            }
            kinks.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
            let mut layout = Self {
                ell,
                pos,
                cnt,
                kinks,
                f_at_atom: Vec::new(),
            };
            f_at_atom = layout.pos.iter().map(|&y| layout.f(y, a)).collect();
            layout.f_at_atom = f_at_atom;
            return layout;
        }
        Self {
            ell,
            pos,
            cnt,
            kinks,
            f_at_atom,
        }
    }

    /// Indices of sorted `xs` within distance `w` of `u` (`w < ℓ/2`), as at
    /// most two index ranges.
    fn window(xs: &[f64], u: f64, w: f64, ell: f64) -> [(usize, usize); 2] {
        let n = xs.len();
        if 2.0 * w >= ell {
            return [(0, n), (0, 0)];
        }
        let lo = u - w;
        let hi = u + w;
        let idx = |x: f64| xs.partition_point(|&y| y < x);
        if lo < 0.0 {
            [(idx(lo + ell), n), (0, idx(hi))]
        } else if hi >= ell {
            [(idx(lo), n), (0, idx(hi - ell))]
        } else {
            [(idx(lo), idx(hi)), (0, 0)]
        }
    }

    /// `F(x) = Σ_j c_j (a − d(x, y_j))₊`.
    fn f(&self, x: f64, a: f64) -> f64 {
        let mut s = 0.0;
        for (i0, i1) in Self::window(&self.pos, x, a, self.ell) {
            for i in i0..i1 {
                s += self.cnt[i] * (a - arc_distance_unchecked(x, self.pos[i], self.ell)).max(0.0);
            }
        }
        s
    }

    /// Nearest atom index and distance.
    fn nearest(&self, u: f64) -> (usize, f64) {
        let k = self.pos.len();
        let right = self.pos.partition_point(|&y| y < u) % k;
        let left = (right + k - 1) % k;
        let dr = arc_distance_unchecked(u, self.pos[right], self.ell);
        let dl = arc_distance_unchecked(u, self.pos[left], self.ell);
        if dl < dr {
            (left, dl)
        } else {
            (right, dr)
        }
    }
}

/// `a² − J₀(t)`: kernel mass outside an arc of length `2t` that has the
/// kernel centre at one end, with its first two derivatives.
fn outside_mass(t: f64, a: f64, ell: f64) -> (f64, f64, f64) {
    let two_t = 2.0 * t;
    if two_t <= a {
        (a * a - 2.0 * a * t + 2.0 * t * t, -2.0 * a + 4.0 * t, 4.0)
    } else if two_t <= ell - a {
        (0.5 * a * a, 0.0, 0.0)
    } else {
        let s = two_t - ell + a;
        (0.5 * a * a - 0.5 * s * s, -2.0 * s, -4.0)
    }
}

struct Stage<'a, L: CountLaw> {
    law: &'a L,
    layout: &'a Layout,
    a: Option<f64>,
    r: f64,
    h: f64,
    rho_max: f64,
}

impl<L: CountLaw> Stage<'_, L> {
    fn z(&self, t: f64) -> f64 {
        1.0 - t / self.h
    }

    /// `Q(t) = ∫₀ᵗ P(z_s) ds`.
    fn q(&self, t: f64) -> f64 {
        self.h * self.law.pgf_integral(self.z(t), 1.0)
    }

    /// `∫₀^ρ (a² − J₀(t)) P″(z_t) dt`, by parts twice.
    fn i2(&self, rho: f64, a: f64) -> f64 {
        let h = self.h;
        let ell = self.layout.ell;
        let (p_r, dp_r, _) = outside_mass(rho, a, ell);
        let zr = self.z(rho);
        let boundary1 = -h * (p_r * self.law.pgf_d1(zr) - a * a * self.law.pgf_d1(1.0));
        let boundary2 = -h * (dp_r * self.law.pgf(zr) + 2.0 * a);
        // p″ is 4 on [0, a/2], 0 in the middle and −4 beyond (ℓ − a)/2
        let mut curv = 4.0 * self.q(rho.min(0.5 * a));
        let far = 0.5 * (ell - a);
        if rho > far {
            curv -= 4.0 * (self.q(rho) - self.q(far));
        }
        boundary1 + h * (boundary2 + h * curv)
    }

    /// `Ψ(u,ρ) = ∫₀^ρ P′(z_t)(F(u+t) + F(u−t)) dt`.
    fn psi(&self, u: f64, rho: f64, a: f64) -> f64 {
        let h = self.h;
        let ell = self.layout.ell;
        let zr = self.z(rho);
        let fu = self.layout.f(u, a);
        let fp = self.layout.f(wrap(u + rho, ell), a);
        let fm = self.layout.f(wrap(u - rho, ell), a);
        let q_rho = self.q(rho);
        let mut jumps = 0.0;
        let xs = &self.layout.kinks;
        for (i0, i1) in Layout::window_pairs(xs, u, rho, ell) {
            for &(x, beta) in &xs[i0..i1] {
                let d = arc_distance_unchecked(u, x, ell);
                if d < rho {
                    jumps += beta * (q_rho - self.q(d));
                }
            }
        }
        -h * ((fp + fm) * self.law.pgf(zr) - 2.0 * fu) + h * jumps
    }

    /// `(served probability, energy change)` for a poll at `u`.
    fn at(&self, u: f64) -> (f64, f64) {
        let (idx, d0) = if self.layout.pos.is_empty() {
            (usize::MAX, f64::INFINITY)
        } else {
            self.layout.nearest(u)
        };
        let rho = d0.min(self.rho_max);
        let zr = self.z(rho);
        let p_rho = self.law.pgf(zr);
        let old = d0 < self.r;
        let z0 = if old { self.z(d0) } else { 0.0 };
        let p0 = if old { self.law.pgf(z0) } else { 0.0 };
        let served = 1.0 - p_rho + p0;
        let Some(a) = self.a else {
            return (served, 0.0);
        };
        let h = self.h;
        let i1 = h * (1.0 - p_rho);
        let psi = if self.layout.pos.is_empty() { 0.0 } else { self.psi(u, rho, a) };
        let mut q = (-a * i1 - psi - self.i2(rho, a) / h) / h;
        if old {
            let (outside, _, _) = outside_mass(d0, a, self.layout.ell);
            q += p0 * (a - 2.0 * self.layout.f_at_atom[idx]) - outside * self.law.pgf_d1(z0) / h;
        }
        (served, q)
    }

    /// Points in `[0, ℓ)` where `u ↦ at(u)` may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        let l = self.layout;
        let ell = l.ell;
        let k = l.pos.len();
        let mut out = Vec::new();
        if k == 0 {
            return out;
        }
        let tol = 1e-12 * ell;
        let in_cell = |u: f64, i: usize, reach: f64| {
            let (j, d) = l.nearest(wrap(u, ell));
            (j == i || (d - arc_distance_unchecked(u, l.pos[i], ell)).abs() <= tol) && d <= reach + tol
        };
        let mut offsets = vec![0.0, self.rho_max, self.r.min(0.5 * ell)];
        if let Some(a) = self.a {
            offsets.push(0.5 * a);
            offsets.push(0.5 * (ell - a));
        }
        for i in 0..k {
            let y = l.pos[i];
            let next = if i + 1 < k { l.pos[i + 1] } else { l.pos[0] + ell };
            out.push(wrap(0.5 * (y + next), ell));
            for &o in &offsets {
                for cand in [y - o, y + o] {
                    if in_cell(cand, i, ell) {
                        out.push(wrap(cand, ell));
                    }
                }
            }
        }
        if self.a.is_some() {
            for &(x, _) in &l.kinks {
                out.push(x);
                for cand in [x - self.rho_max, x + self.rho_max] {
                    let c = wrap(cand, ell);
                    if l.nearest(c).1 >= self.rho_max - tol {
                        out.push(c);
                    }
                }
            }
            // where u ± d₀(u) crosses a kink while y_i is the nearest atom
            for i in 0..k {
                let y = l.pos[i];
                let prev = if i > 0 { l.pos[i - 1] } else { l.pos[k - 1] - ell };
                let next = if i + 1 < k { l.pos[i + 1] } else { l.pos[0] + ell };
                let half_cell = if k == 1 { 0.5 * ell } else { 0.5 * (y - prev).max(next - y) };
                let reach = self.rho_max.min(half_cell);
                for (i0, i1) in Layout::window_pairs(&l.kinks, y, (2.0 * reach + tol).min(0.5 * ell), ell) {
                    for &(x, _) in &l.kinks[i0..i1] {
                        let mut delta = wrap(x - y, ell);
                        if delta > 0.5 * ell {
                            delta -= ell;
                        }
                        for cand in [y + 0.5 * delta, y + 0.5 * delta + 0.5 * ell] {
                            if in_cell(cand, i, reach) {
                                out.push(wrap(cand, ell));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn integrate(&self) -> PollStage {
        let ell = self.layout.ell;
        if self.layout.pos.is_empty() {
            let (served, q) = self.at(0.0);
            return PollStage {
                served,
                energy_change: q,
            };
        }
        let mut cuts = self.breakpoints();
        cuts.push(0.0);
        cuts.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
        cuts.dedup();
        let (xs, ws) = gl12();
        let mut served = 0.0;
        let mut change = 0.0;
        for i in 0..cuts.len() {
            let lo = cuts[i];
            let hi = if i + 1 < cuts.len() { cuts[i + 1] } else { ell };
            let half = 0.5 * (hi - lo);
            if half <= 0.0 {
                continue;
            }
            let mid = 0.5 * (hi + lo);
            for (x, w) in xs.iter().zip(ws) {
                let (s, q) = self.at(mid + half * x);
                served += w * half * s;
                change += w * half * q;
            }
        }
        PollStage {
            served: served / ell,
            energy_change: change / ell,
        }
    }
}
impl Layout {
    fn window_pairs(xs: &[(f64, f64)], u: f64, w: f64, ell: f64) -> [(usize, usize); 2] {
        let n = xs.len();
        if 2.0 * w >= ell {
            return [(0, n), (0, 0)];
        }
        let lo = u - w;
        let hi = u + w;
        let idx = |x: f64| xs.partition_point(|&(y, _)| y < x);
        if lo < 0.0 {
            [(idx(lo + ell), n), (0, idx(hi))]
        } else if hi >= ell {
            [(idx(lo), n), (0, idx(hi - ell))]
        } else {
            [(idx(lo), idx(hi)), (0, 0)]
        }
    }
}

/// Poll-stage averages for an arbitrary arrival-count law.
///
/// `energy` requests the expected energy change of the poll as well; the
/// kernel must be triangular.
pub fn poll_stage<L: CountLaw>(zeta: &Configuration, law: &L, r: f64, energy: Option<&EnergyParams>) -> PollStage {
    let ell = zeta.circumference();
    let a = energy.map(|p| {
        debug_assert_eq!(p.kernel(), Kernel::Triangular);
        p.a()
    });
    let layout = Layout::new(zeta, a);
    let stage = Stage {
        law,
        layout: &layout,
        a,
        r,
        h: 0.5 * ell,
        rho_max: r.min(0.5 * ell),
    };
    stage.integrate()
}

/// Exact energy drift `Aₐ(Aₚh)(ζ) − h(ζ)` for any count law.
pub fn energy_drift_with_law<L: CountLaw>(zeta: &Configuration, law: &L, r: f64, p: &EnergyParams) -> f64 {
    let q = p.a() * p.a() / p.circumference();
    let n = zeta.total_variation() as f64;
    let arrivals = 2.0 * law.mean() * q * n + law.mean() * p.a() + law.factorial_moment2() * q;
    arrivals + poll_stage(zeta, law, r, Some(p)).energy_change
}

/// `Aₐk_r(ζ)`: probability that the poll after one batch serves someone.
pub fn scan_success_after_arrivals(zeta: &Configuration, params: &SystemParams) -> f64 {
    poll_stage(zeta, &params.count_law(), params.r(), None).served
}

/// Exact population drift `λs₁ − Aₐk_r(ζ)`.
pub fn population_drift(zeta: &Configuration, params: &SystemParams) -> Result<f64> {
    check_same_circle(zeta.circumference(), params.circumference())?;
    Ok(params.load() - scan_success_after_arrivals(zeta, params))
}

/// Exact energy drift `Dh(ζ) = Aₐ(Aₚh)(ζ) − h(ζ)`.
///
/// Requires `a ≤ min(ℓ/2, 2r)`, under which `Dh(ζ) ≤ −c₁‖ζ‖ + c₂`.
pub fn energy_drift(zeta: &Configuration, params: &SystemParams, p: &EnergyParams) -> Result<f64> {
    check_same_circle(zeta.circumference(), params.circumference())?;
    check_same_circle(p.circumference(), params.circumference())?;
    if p.a() > 2.0 * params.r() {
        return Err(Error::Precondition(format!(
            "kernel width a = {} exceeds 2r = {}",
            p.a(),
            2.0 * params.r()
        )));
    }
    if p.kernel() != Kernel::Triangular {
        return Err(Error::Precondition("energy drift needs the triangular kernel".into()));
    }
    Ok(energy_drift_with_law(zeta, &params.count_law(), params.r(), p))
}

/// Energy drift of a poll alone (no arrivals): `Aₚh(ζ) − h(ζ)`.
pub fn poll_only_energy_drift(zeta: &Configuration, r: f64, p: &EnergyParams) -> f64 {
    let ell = zeta.circumference();
    let pos: Vec<f64> = zeta.positions().collect();
    crate::geometry::cell_ball_measures(&pos, r, ell)
        .zip(&pos)
        .map(|(w, &x)| w * (p.a() - 2.0 * potential(zeta, x, p)))
        .sum()
}

/// Poll-only population drift `−k_r(ζ)`.
pub fn poll_only_population_drift(zeta: &Configuration, r: f64) -> f64 {
    -scan_success_unchecked(zeta, r)
}

/// `A f(ζ) = Aₐ(Aₚ f)(ζ)`: expected value of `f` one step ahead.
///
/// Exact for `1`, population and energy. For other functionals the arrival
/// batch is sampled while the poll is averaged exactly over its outcomes.
pub fn one_step_expectation(
    f: &Functional,
    zeta: &Configuration,
    params: &SystemParams,
    settings: &OperatorSettings,
) -> Result<Estimate> {
    check_same_circle(zeta.circumference(), params.circumference())?;
    match f {
        Functional::One => Ok(Estimate::exact(1.0)),
        Functional::Population => Ok(Estimate::exact(
            zeta.total_variation() as f64 + population_drift(zeta, params)?,
        )),
        Functional::Energy(p) => {
            check_same_circle(p.circumference(), params.circumference())?;
            if p.kernel() != Kernel::Triangular {
                return rao_blackwell(f, zeta, params, settings);
            }
            Ok(Estimate::exact(
                energy(zeta, p)? + energy_drift_with_law(zeta, &params.count_law(), params.r(), p),
            ))
        }
        _ => rao_blackwell(f, zeta, params, settings),
    }
}

/// Expected energy-derived functional after an exact poll of `xi`, using
/// `h(ξ − δ_x) = h(ξ) − 2F_ξ(x) + a`.
fn polled_energy_average(f: &Functional, xi: &Configuration, r: f64, p: &EnergyParams) -> f64 {
    let h = energy(xi, p).expect("same circle");
    let ell = xi.circumference();
    let pos: Vec<f64> = xi.positions().collect();
    let mut total = 0.0;
    let mut served = 0.0;
    for (w, &x) in crate::geometry::cell_ball_measures(&pos, r, ell).zip(&pos) {
        served += w;
        total += w * f.value_at_energy(h - 2.0 * potential(xi, x, p) + p.a()).expect("energy functional");
    }
    total + (1.0 - served).max(0.0) * f.value_at_energy(h).expect("energy functional")
}

fn rao_blackwell(
    f: &Functional,
    zeta: &Configuration,
    params: &SystemParams,
    settings: &OperatorSettings,
) -> Result<Estimate> {
    let reps = settings.mc_reps.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..reps {
        let batch = sample_interarrival_batch(params, &mut rng);
        let mut xi = zeta.clone();
        for &x in &batch.locations {
            xi.insert(x);
        }
        let v = match f.energy_params() {
            Some(p) if f.value_at_energy(0.0).is_some() => polled_energy_average(f, &xi, params.r(), p),
            _ => apply_polling_operator(f, &xi, params),
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::distribution::InterpollingDistribution;
    use crate::kernels::law::FiniteLaw;
    use crate::kernels::polling::poll_at;
    use crate::lyapunov::drift_constants;
    use crate::quadrature::{gauss_legendre, integrate_interval};
    use rand::Rng;

    fn poll_energy(xi: &Configuration, p: &EnergyParams, params: &SystemParams) -> f64 {
        apply_polling_operator(&Functional::Energy(*p), xi, params)
    }

    fn dummy(r: f64, ell: f64) -> SystemParams {
        SystemParams::new(1.0, r, ell, InterpollingDistribution::exponential(1.0).unwrap()).unwrap()
    }

    fn cuts_for(c: &Configuration, r: f64, a: f64, refine: usize) -> Vec<f64> {
        let ell = c.circumference();
        let mut cuts: Vec<f64> = (0..refine).map(|i| ell * i as f64 / refine as f64).collect();
        for y in c.positions() {
            for o in [0.0, a, -a, 2.0 * r, -2.0 * r, 0.5 * ell] {
                cuts.push(wrap(y + o, ell));
            }
        }
        cuts
    }

    fn integrate_circle(ell: f64, mut cuts: Vec<f64>, mut f: impl FnMut(f64) -> f64) -> f64 {
        let rule = gauss_legendre(12);
        cuts.push(0.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut total = 0.0;
        for i in 0..cuts.len() {
            let hi = if i + 1 < cuts.len() { cuts[i + 1] } else { ell };
            total += integrate_interval(&rule, cuts[i], hi, &mut f);
        }
        total / ell
    }

    /// `E h(poll(ζ + δ_X)) − h(ζ)` by integrating the enumerated poll over `X`.
    fn oracle_one(c: &Configuration, r: f64, p: &EnergyParams) -> f64 {
        let params = dummy(r, c.circumference());
        let h0 = energy(c, p).unwrap();
        integrate_circle(c.circumference(), cuts_for(c, r, p.a(), 16), |x| {
            poll_energy(&c.add_atom(x), p, &params)
        }) - h0
    }

    fn oracle_two(c: &Configuration, r: f64, p: &EnergyParams) -> f64 {
        let params = dummy(r, c.circumference());
        let ell = c.circumference();
        let h0 = energy(c, p).unwrap();
        let offs = [0.0, p.a(), -p.a(), 2.0 * r, -2.0 * r, 0.5 * ell];
        let mut outer: Vec<f64> = (0..48).map(|i| ell * i as f64 / 48.0).collect();
        for y in c.positions() {
            for o1 in offs {
                for o2 in offs {
                    outer.push(wrap(y + o1 - o2, ell));
                }
            }
        }
        integrate_circle(ell, outer, |x1| {
            let c1 = c.add_atom(x1);
            integrate_circle(ell, cuts_for(&c1, r, p.a(), 8), |x2| poll_energy(&c1.add_atom(x2), p, &params))
        }) - h0
    }

    fn corpus() -> Vec<(Configuration, f64, EnergyParams)> {
        let e = |a, ell| EnergyParams::new(a, ell).unwrap();
        vec![
            (Configuration::from_counts(1.0, [(0.3, 2)]).unwrap(), 0.1, e(0.2, 1.0)),
            (Configuration::from_counts(1.0, [(0.1, 1), (0.17, 2), (0.6, 1)]).unwrap(), 0.1, e(0.2, 1.0)),
            (Configuration::from_counts(1.0, [(0.1, 1), (0.5, 3), (0.93, 1)]).unwrap(), 0.3, e(0.5, 1.0)),
            (Configuration::from_counts(1.0, [(0.0, 1), (0.05, 1), (0.4, 2)]).unwrap(), 0.6, e(0.35, 1.0)),
            (Configuration::from_counts(2.0, [(0.2, 1), (1.1, 2), (1.3, 1)]).unwrap(), 0.15, e(0.25, 2.0)),
            (Configuration::empty(1.0).unwrap(), 0.1, e(0.2, 1.0)),
        ]
    }

    #[test]
    fn no_arrivals_reduces_to_the_poll() {
        for (c, r, p) in corpus() {
            let law = FiniteLaw::fixed(0);
            let d = energy_drift_with_law(&c, &law, r, &p);
            assert!((d - poll_only_energy_drift(&c, r, &p)).abs() < 1e-12);
            let s = poll_stage(&c, &law, r, None).served;
            assert!((s - scan_success_unchecked(&c, r)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_arrival_matches_enumeration() {
        for (c, r, p) in corpus() {
            let law = FiniteLaw::fixed(1);
            let d = energy_drift_with_law(&c, &law, r, &p);
            let o = oracle_one(&c, r, &p);
            assert!((d - o).abs() < 1e-11, "{c:?} r={r}: {d} vs {o}");
            let ell = c.circumference();
            let served = integrate_circle(ell, cuts_for(&c, r, p.a(), 16), |x| {
                scan_success_unchecked(&c.add_atom(x), r)
            });
            let s = poll_stage(&c, &law, r, None).served;
            assert!((s - served).abs() < 1e-12, "{s} vs {served}");
        }
    }

    #[test]
    fn mixture_of_zero_one_two_arrivals() {
        let pmf = vec![0.25, 0.35, 0.4];
        for (c, r, p) in corpus().into_iter().take(4) {
            let law = FiniteLaw::new(pmf.clone());
            let d = energy_drift_with_law(&c, &law, r, &p);
            let o = pmf[0] * poll_only_energy_drift(&c, r, &p)
                + pmf[1] * oracle_one(&c, r, &p)
                + pmf[2] * oracle_two(&c, r, &p);
            assert!((d - o).abs() < 1e-12, "{c:?}: {d} vs {o}");
        }
    }

    #[test]
    fn mixed_poisson_matches_sampling() {
        let g = InterpollingDistribution::exponential(1.0).unwrap();
        let params = SystemParams::new(0.6, 0.1, 1.0, g.clone()).unwrap();
        let p = EnergyParams::new(0.2, 1.0).unwrap();
        let c = Configuration::from_counts(1.0, [(0.1, 3), (0.16, 1), (0.5, 2)]).unwrap();
        let exact = energy_drift(&c, &params, &p).unwrap();
        let pop = population_drift(&c, &params).unwrap();
        let h0 = energy(&c, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 200_000;
        let (mut s, mut s2, mut ps, mut ps2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let batch = sample_interarrival_batch(&params, &mut rng);
            let mut xi = c.clone();
            for &x in &batch.locations {
                xi.insert(x);
            }
            let before = xi.total_variation() as f64;
            poll_at(&mut xi, 0.1, rng.random::<f64>(), rng.random());
            let v = energy(&xi, &p).unwrap() - h0;
            s += v;
            s2 += v * v;
            let dp = xi.total_variation() as f64 - before + batch.count() as f64;
            ps += dp;
            ps2 += dp * dp;
        }
        let nf = n as f64;
        let mean = s / nf;
        let se = ((s2 / nf - mean * mean) / nf).sqrt();
        assert!((mean - exact).abs() < 4.0 * se, "{mean} ± {se} vs {exact}");
        let pm = ps / nf;
        let pse = ((ps2 / nf - pm * pm) / nf).sqrt();
        assert!((pm - pop).abs() < 4.0 * pse, "{pm} ± {pse} vs {pop}");
    }

    #[test]
    fn cluster_counterexample() {
        let g = InterpollingDistribution::deterministic(1.0).unwrap();
        let params = SystemParams::new(0.95, 0.05, 1.0, g).unwrap();
        let c = Configuration::cluster(1.0, 0.0, 100).unwrap();
        let d = population_drift(&c, &params).unwrap();
        let bound = 0.95 - 1.0 + (-0.95f64).exp() * 0.9;
        assert!(d >= bound - 1e-12 && bound > 0.29, "{d} vs {bound}");
    }

    #[test]
    fn quadratic_bound_on_clusters() {
        let g = InterpollingDistribution::exponential(1.0).unwrap();
        let params = SystemParams::new(0.5, 0.1, 1.0, g).unwrap();
        let p = EnergyParams::new(0.2, 1.0).unwrap();
        let k = drift_constants(0.5, 1.0, 2.0, &p).unwrap();
        for n in [1u32, 10, 100, 1000] {
            let c = Configuration::cluster(1.0, 0.42, n).unwrap();
            let d = energy_drift(&c, &params, &p).unwrap();
            assert!(d <= k.bound(n as u64) + 1e-10, "n={n}: {d} vs {}", k.bound(n as u64));
        }
        let wide = EnergyParams::new(0.3, 1.0).unwrap();
        assert!(energy_drift(&Configuration::empty(1.0).unwrap(), &params, &wide).is_err());
    }

    #[test]
    fn one_step_expectations() {
        let g = InterpollingDistribution::deterministic(1.0).unwrap();
        let params = SystemParams::new(0.5, 0.1, 1.0, g).unwrap();
        let c = Configuration::from_locations(1.0, [0.2, 0.25, 0.7]).unwrap();
        let s = OperatorSettings::default();
        assert_eq!(one_step_expectation(&Functional::One, &c, &params, &s).unwrap().value, 1.0);
        let p = EnergyParams::new(0.2, 1.0).unwrap();
        let exact = one_step_expectation(&Functional::Energy(p), &c, &params, &s).unwrap();
        let custom = Functional::custom(move |z| energy(z, &p).unwrap());
        let s = OperatorSettings { mc_reps: 50_000, seed: 4, ..s };
        let rb = one_step_expectation(&custom, &c, &params, &s).unwrap();
        assert!((exact.value - rb.value).abs() < 4.0 * rb.stderr, "{exact:?} vs {rb:?}");
        let semi = one_step_expectation(&Functional::Seminorm(p), &c, &params, &s).unwrap();
        assert!(semi.value <= exact.value.sqrt() + 4.0 * semi.stderr);
    }
}
