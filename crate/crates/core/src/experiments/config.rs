//! Scenario files: one flat TOML table per scenario, with `key=value`
//! overrides applied on top.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::distribution::InterpollingDistribution;
use crate::kernels::params::SystemParams;
use crate::lyapunov::EnergyParams;

/// Kernel width `a`: either fixed or `min(ℓ/2, 2r)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KernelWidth {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for KernelWidth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Fixed(a) => s.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for KernelWidth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(a) => Ok(Self::Fixed(a as f64)),
            Raw::Num(a) => Ok(Self::Fixed(a)),
            Raw::Text(t) if t == "auto" => Ok(Self::Auto),
            Raw::Text(t) => Err(de::Error::custom(format!("expected a number or \"auto\", got {t:?}"))),
        }
    }
}

mod as_text {
    use super::*;

    pub fn serialize<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}

/// A scenario: system parameters, kernel width, run lengths and output
/// location. Missing keys take the defaults below; unknown keys are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub lambda: f64,
    pub r: f64,
    pub circumference: f64,
    #[serde(with = "as_text")]
    pub interpolling: InterpollingDistribution,
    pub a: KernelWidth,
    /// Path length for path and growth runs.
    pub steps: u64,
    /// Corpus size for the property and certificate suites, and Monte Carlo
    /// repetitions for drift checks.
    pub replications: usize,
    pub min_cycles: usize,
    pub max_steps: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Arrival rates of the stability sweep.
    pub lambdas: Vec<f64>,
    /// Scan radii of the stability sweep.
    pub radii: Vec<f64>,
    /// Scan radii of the light-traffic sweep.
    pub sweep_radii: Vec<f64>,
    /// Arrival rates of the two example paths.
    pub path_lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `n` in the cluster `nδ₀` used for the population-drift counterexample.
    pub cluster_size: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: "default".into(),
            lambda: 0.1,
            r: 0.1,
            circumference: 1.0,
            interpolling: InterpollingDistribution::Exponential { mean: 1.0 },
            a: KernelWidth::Auto,
            steps: 100_000,
            replications: 1000,
            min_cycles: 1000,
            max_steps: 10_000_000,
            seed: 0,
            out_dir: PathBuf::from("out"),
            lambdas: vec![0.5, 0.8, 0.95, 1.0, 1.1, 1.2],
            radii: vec![0.05, 0.1, 0.25],
            sweep_radii: (1..=25).map(|i| f64::from(i) * 0.02).map(|r| (r * 100.0).round() / 100.0).collect(),
            path_lambdas: vec![0.1, 0.9],
            thetas: vec![0.5, 1.0, 2.0],
            cluster_size: 100,
        }
    }
}

fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

impl ScenarioConfig {
    /// Parses a scenario file's text.
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    /// Parses `text` and applies `key=value` overrides; overrides win.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("override {o:?} is not key=value")))?;
            table.insert(k.trim().to_string(), parse_value(v.trim()));
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_with(&text, overrides)
    }

    /// Canonical text: every key, in declaration order.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid("lambda", "must be nonnegative and finite"));
        }
        crate::error::require_positive("r", self.r)?;
        crate::error::require_positive("circumference", self.circumference)?;
        if let KernelWidth::Fixed(a) = self.a {
            EnergyParams::new(a, self.circumference)?;
        }
        for &l in &self.lambdas {
            crate::error::require_positive("lambdas", l)?;
        }
        for &r in self.radii.iter().chain(&self.sweep_radii) {
            crate::error::require_positive("radii", r)?;
        }
        for &l in &self.path_lambdas {
            crate::error::require_positive("path_lambdas", l)?;
        }
        for &t in &self.thetas {
            crate::error::require_positive("thetas", t)?;
        }
        if self.steps == 0 || self.max_steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }
        Ok(())
    }

    /// `λ·s₁`.
    pub fn load_factor(&self) -> f64 {
        self.lambda * self.interpolling.s1()
    }

    /// System parameters; needs `λ > 0`.
    pub fn system(&self) -> Result<SystemParams> {
        SystemParams::new(self.lambda, self.r, self.circumference, self.interpolling.clone())
    }

    pub fn system_with(&self, lambda: f64, r: f64) -> Result<SystemParams> {
        SystemParams::new(lambda, r, self.circumference, self.interpolling.clone())
    }

    /// The resolved kernel width.
    pub fn a_value(&self) -> f64 {
        match self.a {
            KernelWidth::Auto => (0.5 * self.circumference).min(2.0 * self.r),
            KernelWidth::Fixed(a) => a,
        }
    }

    pub fn energy(&self) -> Result<EnergyParams> {
        EnergyParams::new(self.a_value(), self.circumference)
    }
}
