//! Python bindings for the `spatial-polling` crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use spatial_polling as sp;
use spatial_polling::simulator;

fn to_py(e: sp::Error) -> PyErr {
    match e {
        sp::Error::InvalidParameter { .. }
        | sp::Error::CircumferenceMismatch(..)
        | sp::Error::NotAnAtom(_)
        | sp::Error::EmptyConfiguration
        | sp::Error::Precondition(_)
        | sp::Error::Unstable(_)
        | sp::Error::Parse(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A finite counting measure on a circle.
#[pyclass(name = "Configuration", module = "spatial_polling", frozen)]
struct PyConfiguration {
    inner: sp::Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    #[pyo3(signature = (locations = Vec::new(), circumference = 1.0))]
    fn new(locations: Vec<f64>, circumference: f64) -> PyResult<Self> {
        let inner = sp::Configuration::from_locations(circumference, locations).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (pairs, circumference = 1.0))]
    fn from_counts(pairs: Vec<(f64, u32)>, circumference: f64) -> PyResult<Self> {
        let inner = sp::Configuration::from_counts(circumference, pairs).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (location, n, circumference = 1.0))]
    fn cluster(location: f64, n: u32, circumference: f64) -> PyResult<Self> {
        let inner = sp::Configuration::cluster(circumference, location, n).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn circumference(&self) -> f64 {
        self.inner.circumference()
    }

    /// `(location, count)` for each distinct atom, sorted by location.
    fn atoms(&self) -> Vec<(f64, u32)> {
        self.inner
            .atoms()
            .iter()
            .map(|a| (a.location.position(), a.count))
            .collect()
    }

    fn total_variation(&self) -> u64 {
        self.inner.total_variation()
    }

    fn distinct_len(&self) -> usize {
        self.inner.distinct_len()
    }

    fn add_atom(&self, x: f64) -> Self {
        Self {
            inner: self.inner.add_atom(x),
        }
    }

    fn remove_atom(&self, x: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.remove_atom(x).map_err(to_py)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.total_variation() as usize
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Configuration([{}], circumference={})",
            self.inner.to_text(),
            self.inner.circumference()
        )
    }
}

/// Law `G` of the interpolling times.
#[pyclass(name = "InterpollingDistribution", module = "spatial_polling", frozen)]
struct PyInterpolling {
    inner: sp::InterpollingDistribution,
}

#[pymethods]
impl PyInterpolling {
    #[staticmethod]
    fn exponential(mean: f64) -> PyResult<Self> {
        Ok(Self {
            inner: sp::InterpollingDistribution::exponential(mean).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn deterministic(value: f64) -> PyResult<Self> {
        Ok(Self {
            inner: sp::InterpollingDistribution::deterministic(value).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn gamma(shape: f64, scale: f64) -> PyResult<Self> {
        Ok(Self {
            inner: sp::InterpollingDistribution::gamma(shape, scale).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn empirical(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: sp::InterpollingDistribution::empirical(values).map_err(to_py)?,
        })
    }

    /// Parses `exponential:1`, `deterministic:1`, `gamma:2,0.5` and so on.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: text.parse().map_err(to_py)?,
        })
    }

    #[getter]
    fn s1(&self) -> f64 {
        self.inner.s1()
    }

    #[getter]
    fn s2(&self) -> f64 {
        self.inner.s2()
    }

    /// Laplace transform `E e^{−θS}`.
    fn laplace(&self, theta: f64) -> f64 {
        self.inner.laplace(theta)
    }

    fn mixed_poisson_pmf(&self, lam: f64, n: u64) -> PyResult<f64> {
        self.inner.mixed_poisson_pmf(lam, n).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("InterpollingDistribution('{}')", self.inner)
    }
}

#[pyclass(name = "SystemParams", module = "spatial_polling", frozen)]
struct PySystemParams {
    inner: sp::SystemParams,
}

#[pymethods]
impl PySystemParams {
    /// Defaults to exponential interpolling times with mean 1.
    #[new]
    #[pyo3(signature = (lam, r, circumference = 1.0, interpolling = None))]
    fn new(lam: f64, r: f64, circumference: f64, interpolling: Option<&PyInterpolling>) -> PyResult<Self> {
        let g = match interpolling {
            Some(g) => g.inner.clone(),
            None => sp::InterpollingDistribution::exponential(1.0).map_err(to_py)?,
        };
        Ok(Self {
            inner: sp::SystemParams::new(lam, r, circumference, g).map_err(to_py)?,
        })
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }

    #[getter]
    fn circumference(&self) -> f64 {
        self.inner.circumference()
    }

    #[getter]
    fn interpolling(&self) -> PyInterpolling {
        PyInterpolling {
            inner: self.inner.interpolling().clone(),
        }
    }

    /// `λs₁`.
    #[getter]
    fn load(&self) -> f64 {
        self.inner.load()
    }

    #[getter]
    fn ball_measure(&self) -> f64 {
        self.inner.ball_measure()
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemParams(lam={}, r={}, circumference={}, interpolling='{}')",
            self.inner.lambda(),
            self.inner.r(),
            self.inner.circumference(),
            self.inner.interpolling()
        )
    }
}

/// Triangular kernel `(a − d)₊` of width `a`.
#[pyclass(name = "EnergyParams", module = "spatial_polling", frozen)]
struct PyEnergyParams {
    inner: sp::EnergyParams,
}

#[pymethods]
impl PyEnergyParams {
    #[new]
    #[pyo3(signature = (a, circumference = 1.0))]
    fn new(a: f64, circumference: f64) -> PyResult<Self> {
        Ok(Self {
            inner: sp::EnergyParams::new(a, circumference).map_err(to_py)?,
        })
    }

    /// `a = min(ℓ/2, 2r)`.
    #[staticmethod]
    #[pyo3(signature = (r, circumference = 1.0))]
    fn auto(r: f64, circumference: f64) -> PyResult<Self> {
        Ok(Self {
            inner: sp::EnergyParams::auto(r, circumference).map_err(to_py)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    fn __repr__(&self) -> String {
        format!(
            "EnergyParams(a={}, circumference={})",
            self.inner.a(),
            self.inner.circumference()
        )
    }
}

#[pyclass(name = "DriftConstants", module = "spatial_polling", frozen, get_all)]
struct PyDriftConstants {
    c1: f64,
    c2: f64,
}

#[pymethods]
impl PyDriftConstants {
    /// `−c₁ n + c₂`.
    fn bound(&self, population: u64) -> f64 {
        sp::DriftConstants {
            c1: self.c1,
            c2: self.c2,
        }
        .bound(population)
    }

    fn __repr__(&self) -> String {
        format!("DriftConstants(c1={}, c2={})", self.c1, self.c2)
    }
}

#[pyclass(name = "Path", module = "spatial_polling", frozen)]
struct PyPath {
    inner: simulator::PathRecord,
}

#[pymethods]
impl PyPath {
    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn population(&self) -> Vec<u64> {
        self.inner.population.clone()
    }

    #[getter]
    fn arrivals(&self) -> Vec<u32> {
        self.inner.arrivals.clone()
    }

    #[getter]
    fn served(&self) -> Vec<bool> {
        self.inner.served.clone()
    }

    fn empty_fraction(&self) -> f64 {
        self.inner.empty_fraction()
    }

    /// Least-squares slope of the population from step `start` on.
    #[pyo3(signature = (start = 0))]
    fn growth_slope(&self, start: u64) -> f64 {
        self.inner.growth_slope(start)
    }

    fn __len__(&self) -> usize {
        self.inner.population.len()
    }
}

#[pyclass(name = "StationaryEstimate", module = "spatial_polling", frozen)]
struct PyStationaryEstimate {
    inner: simulator::StationaryEstimate,
}

#[pymethods]
impl PyStationaryEstimate {
    #[getter]
    fn mean_population(&self) -> f64 {
        self.inner.mean_population
    }

    #[getter]
    fn half_width_95(&self) -> f64 {
        self.inner.half_width_95
    }

    #[getter]
    fn mean_at_polls(&self) -> f64 {
        self.inner.mean_at_polls
    }

    #[getter]
    fn cycles(&self) -> usize {
        self.inner.cycles
    }

    #[getter]
    fn cycle_length_mean(&self) -> f64 {
        self.inner.cycle_length_mean
    }

    #[getter]
    fn polls(&self) -> u64 {
        self.inner.polls
    }

    #[getter]
    fn method(&self) -> &'static str {
        match self.inner.method {
            simulator::EstimateMethod::Regenerative => "regenerative",
            simulator::EstimateMethod::BatchMeans => "batch-means",
        }
    }

    #[getter]
    fn tail_histogram(&self) -> Vec<u64> {
        self.inner.tail_histogram.clone()
    }

    fn interval(&self) -> (f64, f64) {
        self.inner.interval()
    }

    fn agrees_with(&self, other: &Self) -> bool {
        self.inner.agrees_with(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "StationaryEstimate(mean_population={}, half_width_95={}, cycles={}, method='{}')",
            self.inner.mean_population,
            self.inner.half_width_95,
            self.inner.cycles,
            self.method()
        )
    }
}

#[pyclass(name = "TailFit", module = "spatial_polling", frozen, get_all)]
struct PyTailFit {
    rate: f64,
    r_squared: f64,
    points: Vec<(u64, f64)>,
}

#[pyclass(name = "LaplaceResidual", module = "spatial_polling", frozen, get_all)]
struct PyLaplaceResidual {
    theta: f64,
    lhs: f64,
    rhs: f64,
    residual: f64,
    stderr: f64,
}

#[pymethods]
impl PyLaplaceResidual {
    #[pyo3(signature = (z = 3.0))]
    fn within(&self, z: f64) -> bool {
        self.residual.abs() < z * self.stderr || self.residual == 0.0
    }
}

/// Energy `⟨ζ,ζ⟩ₐ`.
#[pyfunction]
fn energy(zeta: &PyConfiguration, p: &PyEnergyParams) -> PyResult<f64> {
    sp::lyapunov::energy(&zeta.inner, &p.inner).map_err(to_py)
}

/// Seminorm `‖ζ‖ₐ`.
#[pyfunction]
fn seminorm(zeta: &PyConfiguration, p: &PyEnergyParams) -> PyResult<f64> {
    sp::lyapunov::seminorm_of(&zeta.inner, &p.inner).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, zeta, p, r = None))]
fn interpolation_sum(x: f64, zeta: &PyConfiguration, p: &PyEnergyParams, r: Option<f64>) -> PyResult<f64> {
    sp::lyapunov::interpolation_sum(x, &zeta.inner, &p.inner, r).map_err(to_py)
}

#[pyfunction]
fn drift_constants(lam: f64, s1: f64, s2: f64, p: &PyEnergyParams) -> PyResult<PyDriftConstants> {
    let c = sp::lyapunov::drift_constants(lam, s1, s2, &p.inner).map_err(to_py)?;
    Ok(PyDriftConstants { c1: c.c1, c2: c.c2 })
}

/// Exact one-step drift of the energy.
#[pyfunction]
fn energy_drift(zeta: &PyConfiguration, params: &PySystemParams, p: &PyEnergyParams) -> PyResult<f64> {
    sp::kernels::energy_drift(&zeta.inner, &params.inner, &p.inner).map_err(to_py)
}

/// Exact one-step drift of the population size.
#[pyfunction]
fn population_drift(zeta: &PyConfiguration, params: &PySystemParams) -> PyResult<f64> {
    sp::kernels::population_drift(&zeta.inner, &params.inner).map_err(to_py)
}

/// Simulates `steps` polls; starts empty unless `initial` is given.
#[pyfunction]
#[pyo3(signature = (params, steps, seed = 0, initial = None))]
fn run_path(
    py: Python<'_>,
    params: &PySystemParams,
    steps: u64,
    seed: u64,
    initial: Option<&PyConfiguration>,
) -> PyResult<PyPath> {
    let init = match initial {
        Some(c) => c.inner.clone(),
        None => sp::Configuration::empty(params.inner.circumference()).map_err(to_py)?,
    };
    let params = params.inner.clone();
    let inner = py
        .detach(move || simulator::run_path(&params, steps, seed, &init))
        .map_err(to_py)?;
    Ok(PyPath { inner })
}

/// Regenerative estimate of the stationary mean population.
#[pyfunction]
#[pyo3(signature = (params, min_cycles = 1000, max_steps = 10_000_000, seed = 0, workers = 1))]
fn stationary_estimate(
    py: Python<'_>,
    params: &PySystemParams,
    min_cycles: usize,
    max_steps: u64,
    seed: u64,
    workers: usize,
) -> PyResult<PyStationaryEstimate> {
    let params = params.inner.clone();
    let options = simulator::StationaryOptions {
        min_cycles,
        max_steps,
        seed,
        workers,
    };
    let inner = py
        .detach(move || simulator::stationary_estimate_with(&params, &options))
        .map_err(to_py)?;
    Ok(PyStationaryEstimate { inner })
}

/// All regeneration cycles completed within `steps` polls.
#[pyfunction]
#[pyo3(signature = (params, steps, seed = 0))]
fn stationary_run(py: Python<'_>, params: &PySystemParams, steps: u64, seed: u64) -> PyResult<PyStationaryEstimate> {
    let params = params.inner.clone();
    let inner = py
        .detach(move || simulator::stationary_run(&params, steps, seed))
        .map_err(to_py)?;
    Ok(PyStationaryEstimate { inner })
}

/// Least-squares fit of the log-survival of the stationary population.
#[pyfunction]
fn tail_fit(estimate: &PyStationaryEstimate) -> PyResult<PyTailFit> {
    let fit = simulator::tail_geometric_fit(&estimate.inner).map_err(to_py)?;
    Ok(PyTailFit {
        rate: fit.rate,
        r_squared: fit.r_squared,
        points: fit.points,
    })
}

/// Laplace identity residuals at each `theta` from one `polls`-long run.
#[pyfunction]
#[pyo3(signature = (params, polls, thetas, seed = 0))]
fn laplace_check(
    py: Python<'_>,
    params: &PySystemParams,
    polls: u64,
    thetas: Vec<f64>,
    seed: u64,
) -> PyResult<Vec<PyLaplaceResidual>> {
    let params = params.inner.clone();
    let residuals = py
        .detach(move || {
            let sample = simulator::laplace_sample(&params, polls, seed)?;
            thetas
                .iter()
                .map(|&t| simulator::laplace_residual(&params, t, &sample))
                .collect::<sp::Result<Vec<_>>>()
        })
        .map_err(to_py)?;
    Ok(residuals
        .into_iter()
        .map(|l| PyLaplaceResidual {
            theta: l.theta,
            lhs: l.lhs,
            rhs: l.rhs,
            residual: l.residual,
            stderr: l.stderr,
        })
        .collect())
}

#[pymodule(name = "spatial_polling")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyInterpolling>()?;
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyEnergyParams>()?;
    m.add_class::<PyDriftConstants>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyStationaryEstimate>()?;
    m.add_class::<PyTailFit>()?;
    m.add_class::<PyLaplaceResidual>()?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(interpolation_sum, m)?)?;
    m.add_function(wrap_pyfunction!(drift_constants, m)?)?;
    m.add_function(wrap_pyfunction!(energy_drift, m)?)?;
    m.add_function(wrap_pyfunction!(population_drift, m)?)?;
    m.add_function(wrap_pyfunction!(run_path, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_run, m)?)?;
    m.add_function(wrap_pyfunction!(tail_fit, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_check, m)?)?;
    Ok(())
}
