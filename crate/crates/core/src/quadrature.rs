//! Gauss–Legendre rules and piecewise integration over the circle.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// 12-point rule, shared by the exact drift integrals.
pub(crate) fn gl12() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(12))
}

/// Integrates `f` over `[lo, hi]` with the given rule.
pub fn integrate_interval(rule: &(Vec<f64>, Vec<f64>), lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (hi - lo);
    if half <= 0.0 {
        return 0.0;
    }
    let mid = 0.5 * (hi + lo);
    let (xs, ws) = rule;
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrates `f` once around the circle `[0, ℓ)`, applying the rule on each
/// arc between consecutive breakpoints. Breakpoints may be in any order and
/// need not be reduced modulo `ℓ`.
pub fn integrate_circle(
    rule: &(Vec<f64>, Vec<f64>),
    ell: f64,
    breakpoints: &mut Vec<f64>,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    for b in breakpoints.iter_mut() {
        *b = crate::geometry::wrap(*b, ell);
    }
    breakpoints.push(0.0);
    breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breakpoints.dedup();
    let n = breakpoints.len();
    let mut total = 0.0;
    for i in 0..n {
        let lo = breakpoints[i];
        let hi = if i + 1 < n { breakpoints[i + 1] } else { ell };
        total += integrate_interval(rule, lo, hi, &mut f);
    }
    total
}
