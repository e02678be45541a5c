//! The property corpus for the quadratic form: semidefiniteness, the
//! ball-count representation, seminorm and norm bounds, the cluster ball and
//! the interpolation identity and inequality.

use rand::Rng;

use crate::configuration::{Configuration, SignedConfiguration};
use crate::error::{Error, Result};
use crate::experiments::config::ScenarioConfig;
use crate::experiments::corpus::{random_positive, random_signed};
use crate::lyapunov::{
    ball_count_representation, covering_ball_max, inner_product, interpolation_sum, positive_norm_lower_constant,
    EnergyParams, Kernel,
};
use crate::simulator::step::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not evaluated because the scenario violates the check's hypothesis.
    Precondition,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Precondition => "SKIP (precondition)",
        }
    }
}

/// Outcome of one property over the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    pub instances: usize,
    pub violations: usize,
    /// Largest violation margin seen (0 when none).
    pub worst: f64,
    /// First failing instance, in text form.
    pub counterexample: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub checks: Vec<CheckResult>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{:<28} {:<20} instances={} violations={} worst={:e}\n",
                c.name,
                c.status.label(),
                c.instances,
                c.violations,
                c.worst
            ));
            if let Some(n) = &c.note {
                s.push_str(&format!("    note: {n}\n"));
            }
            if let Some(ce) = &c.counterexample {
                s.push_str(&format!("    counterexample: {ce}\n"));
            }
        }
        s
    }
}

/// Harness controls. `kernel` replaces the triangular kernel in every check,
/// which lets the suite be run against a deliberately broken kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaOptions {
    pub instances: usize,
    pub kernel: Kernel,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        Self {
            instances: 1000,
            kernel: Kernel::Triangular,
        }
    }
}

struct Tally {
    name: &'static str,
    instances: usize,
    violations: usize,
    worst: f64,
    counterexample: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            instances: 0,
            violations: 0,
            worst: 0.0,
            counterexample: None,
        }
    }

    /// Records one instance; `excess > 0` is a violation.
    fn record(&mut self, excess: f64, dump: impl FnOnce() -> String) {
        self.instances += 1;
        if excess > 0.0 || excess.is_nan() {
            self.violations += 1;
            if excess > self.worst || excess.is_nan() {
                self.worst = excess;
            }
            if self.counterexample.is_none() {
                self.counterexample = Some(dump());
            }
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            status: if self.violations == 0 { CheckStatus::Pass } else { CheckStatus::Fail },
            instances: self.instances,
            violations: self.violations,
            worst: self.worst,
            counterexample: self.counterexample,
            note: None,
        }
    }
}

fn signed_text(z: &SignedConfiguration) -> String {
    z.atoms()
        .iter()
        .map(|a| format!("{}:{}", a.location.position(), a.weight))
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_width<R: Rng + ?Sized>(rng: &mut R, ell: f64, kernel: Kernel) -> EnergyParams {
    let a = (1.0 - rng.random::<f64>()) * 0.5 * ell;
    EnergyParams::new(a, ell).expect("a in (0, l/2]").with_kernel(kernel)
}

fn q(z: &SignedConfiguration, p: &EnergyParams) -> f64 {
    inner_product(z, z, p).expect("same circle")
}

/// Runs the full corpus. Instances are drawn from `config.seed`; the
/// inequality check uses the scenario's `r` and kernel width.
pub fn verify_lemmas(config: &ScenarioConfig, options: &LemmaOptions) -> Result<LemmaReport> {
    let ell = config.circumference;
    let mut rng = substream(config.seed, 0);
    let n = options.instances;
    let kernel = options.kernel;

    let mut psd = Tally::new("semidefinite");
    let mut oracle = Tally::new("ball-count-representation");
    let mut triangle = Tally::new("triangle-inequality");
    let mut norm = Tally::new("norm-upper-bound");
    for _ in 0..n {
        let p = random_width(&mut rng, ell, kernel);
        let z = random_signed(&mut rng, ell, 30, 5);
        let e = random_signed(&mut rng, ell, 30, 5);
        let qz = q(&z, &p);
        psd.record(-1e-12 - qz, || format!("a={} zeta=[{}] energy={qz}", p.a(), signed_text(&z)));
        let bc = ball_count_representation(&z, &p, 64)?;
        oracle.record((qz - bc).abs() - 1e-9, || {
            format!("a={} zeta=[{}] form={qz} integral={bc}", p.a(), signed_text(&z))
        });
        let sum = z.add(&e)?;
        let lhs = q(&sum, &p).max(0.0).sqrt();
        let rhs = qz.max(0.0).sqrt() + q(&e, &p).max(0.0).sqrt();
        triangle.record(lhs - rhs - 1e-9 * (1.0 + rhs), || {
            format!("a={} zeta=[{}] eta=[{}]", p.a(), signed_text(&z), signed_text(&e))
        });
        let tv = z.total_variation() as f64;
        let cap = if ell == 1.0 { tv } else { p.a().sqrt() * tv };
        norm.record(qz.max(0.0).sqrt() - cap - 1e-12 * (1.0 + cap), || {
            format!("a={} zeta=[{}]", p.a(), signed_text(&z))
        });
    }

    let mut two_sided = Tally::new("positive-two-sided-bound");
    let mut ball = Tally::new("cluster-ball");
    for _ in 0..n {
        let p = random_width(&mut rng, ell, kernel);
        let z = random_positive(&mut rng, ell, 30, 5);
        let tv = z.total_variation() as f64;
        let v = q(&z.to_signed(), &p).max(0.0).sqrt();
        let lo = positive_norm_lower_constant(&p) * tv;
        let hi = p.a().sqrt() * tv;
        two_sided.record((lo - v).max(v - hi) - 1e-12 * (1.0 + hi), || {
            format!("a={} zeta=[{}] seminorm={v} bounds=[{lo}, {hi}]", p.a(), z.to_text())
        });
        let k = rng.random_range(1..=20usize);
        let m = covering_ball_max(&z, k)? as f64;
        ball.record(tv / k as f64 - m, || format!("n={k} zeta=[{}] max={m}", z.to_text()));
    }

    let mut identity = Tally::new("interpolation-identity");
    for _ in 0..n {
        let p = random_width(&mut rng, ell, kernel);
        let a = p.a();
        let x = rng.random::<f64>() * ell;
        let extra = rng.random_range(0..=20usize);
        let locs: Vec<f64> = [x - a, x, x + a]
            .into_iter()
            .chain((0..extra).map(|_| rng.random::<f64>() * ell))
            .collect();
        let z = Configuration::from_locations(ell, locs)?;
        let g = interpolation_sum(x, &z, &p, None)?;
        let target = a * a / ell;
        identity.record((g - target).abs() - 1e-10, || {
            format!("a={a} x={x} zeta=[{}] value={g} target={target}", z.to_text())
        });
    }

    let mut checks: Vec<CheckResult> = [psd, oracle, triangle, norm, two_sided, ball, identity]
        .into_iter()
        .map(Tally::finish)
        .collect();
    checks.push(inequality_check(config, options, &mut rng)?);
    Ok(LemmaReport { checks })
}

fn inequality_check<R: Rng + ?Sized>(config: &ScenarioConfig, options: &LemmaOptions, rng: &mut R) -> Result<CheckResult> {
    let ell = config.circumference;
    let r = config.r;
    let a = config.a_value();
    let p = EnergyParams::new(a, ell)?.with_kernel(options.kernel);
    let mut t = Tally::new("interpolation-inequality");
    let target = a * a / ell;
    for _ in 0..options.instances {
        let x = rng.random::<f64>() * ell;
        let extra = rng.random_range(0..=30usize);
        let locs: Vec<f64> = std::iter::once(x)
            .chain((0..extra).map(|_| rng.random::<f64>() * ell))
            .collect();
        let z = Configuration::from_locations(ell, locs)?;
        match interpolation_sum(x, &z, &p, Some(r)) {
            Ok(g) => t.record(target - 1e-10 - g, || {
                format!("a={a} r={r} x={x} zeta=[{}] value={g}", z.to_text())
            }),
            Err(Error::Precondition(msg)) => {
                return Ok(CheckResult {
                    name: t.name,
                    status: CheckStatus::Precondition,
                    instances: 0,
                    violations: 0,
                    worst: 0.0,
                    counterexample: None,
                    note: Some(msg),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(t.finish())
}
