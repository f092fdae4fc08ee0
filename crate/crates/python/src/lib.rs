// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Python bindings. States cross the boundary as 3-element lists; errors
//! become `ValueError` (bad input) or `RuntimeError` (integration failure).

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use quasilinear::dynamics::{integrate_bloch, integrate_density};
use quasilinear::geometry::{self, casimirs};
use quasilinear::measurement::{self, generator_branch};
use quasilinear::scenario::{LambdaChoice, Scenario as CoreScenario};
use quasilinear::state::born_probability;
use quasilinear::{
    BlochVector, Branch, ChartBranch, DeviceConfig, DeviceGeometry, DriveDirection, Error, IntegratorConfig,
    ObservableSpec, PotentialProfile,
};

fn err(e: Error) -> PyErr {
    match e {
        Error::Integration { .. } | Error::Overflow(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn branch(lambda: i32) -> PyResult<Branch> {
    Branch::try_from(lambda).map_err(err)
}

fn bloch(n: [f64; 3]) -> PyResult<BlochVector> {
    BlochVector::new(n).map_err(err)
}

/// Observable `omega_rate * omega_hat(alpha, beta_az) . sigma / 2`.
#[pyclass(name = "Observable", frozen, from_py_object)]
#[derive(Clone)]
struct PyObservable(ObservableSpec);

#[pymethods]
impl PyObservable {
    #[new]
    fn new(omega_rate: f64, alpha: f64, beta_az: f64) -> PyResult<Self> {
        ObservableSpec::new(omega_rate, alpha, beta_az).map(Self).map_err(err)
    }

    #[getter]
    fn omega_rate(&self) -> f64 {
        self.0.omega_rate
    }

    #[getter]
    fn unit_direction(&self) -> [f64; 3] {
        self.0.unit_direction()
    }

    fn eigenstate(&self, lambda: i32) -> PyResult<[f64; 3]> {
        Ok(self.0.eigenstate(branch(lambda)?).into_array())
    }

    fn born_probability(&self, n0: [f64; 3], lambda: i32) -> PyResult<f64> {
        born_probability(&bloch(n0)?, &self.0, branch(lambda)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Observable(omega_rate={}, alpha={}, beta_az={})", self.0.omega_rate, self.0.alpha, self.0.beta_az)
    }
}

/// Drive direction plus time profile.
#[pyclass(name = "Device", frozen, from_py_object)]
#[derive(Clone)]
struct PyDevice(DeviceConfig);

#[pymethods]
impl PyDevice {
    /// Chart device `(theta, Theta, chart_branch)` with an inverted Morse drive.
    #[staticmethod]
    fn inverted_morse(theta: f64, relative_angle: f64, chart_branch: i32, g0_rate: f64, kappa: f64) -> PyResult<Self> {
        let chart = ChartBranch::try_from(chart_branch).map_err(err)?;
        let profile = PotentialProfile::inverted_morse(g0_rate, kappa).map_err(err)?;
        Ok(Self(DeviceConfig::chart(DeviceGeometry::new(theta, relative_angle, chart), profile)))
    }

    /// Drive along `omega_hat` with an inverted Morse profile.
    #[staticmethod]
    fn parallel_morse(g0_rate: f64, kappa: f64) -> PyResult<Self> {
        let profile = PotentialProfile::inverted_morse(g0_rate, kappa).map_err(err)?;
        Ok(Self(DeviceConfig::new(DriveDirection::Parallel, profile)))
    }

    fn rate(&self, t: f64) -> f64 {
        self.0.profile.rate(t)
    }

    /// `Gamma(t) = int_0^t g`.
    fn gamma(&self, t: f64) -> PyResult<f64> {
        self.0.profile.gamma(t, quasilinear::potentials::GAMMA_REL_TOL).map_err(err)
    }

    fn g_unit(&self, observable: &PyObservable) -> PyResult<[f64; 3]> {
        self.0.g_unit(&observable.0).map_err(err)
    }
}

#[pyclass(name = "Integrator", frozen, from_py_object)]
#[derive(Clone)]
struct PyIntegrator(IntegratorConfig);

#[pymethods]
impl PyIntegrator {
    #[new]
    #[pyo3(signature = (t_final = 1e-3, rtol = 1e-9, atol = 1e-12, t_start = 1e-9, samples_per_decade = 200))]
    fn new(t_final: f64, rtol: f64, atol: f64, t_start: f64, samples_per_decade: u32) -> PyResult<Self> {
        let cfg = IntegratorConfig { t_final, rtol, atol, t_start, samples_per_decade, ..Default::default() };
        cfg.validate().map_err(err)?;
        Ok(Self(cfg))
    }
}

#[pyclass(name = "Trajectory", frozen, skip_from_py_object)]
struct PyTrajectory {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    states: Vec<[f64; 3]>,
    #[pyo3(get)]
    norms: Vec<f64>,
    #[pyo3(get)]
    rates: Vec<f64>,
}

impl From<&quasilinear::Trajectory> for PyTrajectory {
    fn from(t: &quasilinear::Trajectory) -> Self {
        Self {
            times: t.times(),
            states: t.states(),
            norms: t.samples.iter().map(|s| s.norm).collect(),
            rates: t.samples.iter().map(|s| s.rate).collect(),
        }
    }
}

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.times.len()
    }

    fn final_state(&self) -> Option<[f64; 3]> {
        self.states.last().copied()
    }
}

#[pyclass(name = "MeasurementRecord", frozen, skip_from_py_object)]
struct PyRecord {
    #[pyo3(get)]
    lambda_: i32,
    #[pyo3(get)]
    generator_lambda: i32,
    #[pyo3(get)]
    p_lambda: f64,
    #[pyo3(get)]
    final_state: [f64; 3],
    #[pyo3(get)]
    reference: [f64; 3],
    #[pyo3(get)]
    deviation: f64,
    #[pyo3(get)]
    trajectory: Py<PyTrajectory>,
}

impl PyRecord {
    fn new(py: Python<'_>, r: &measurement::MeasurementRecord) -> PyResult<Self> {
        Ok(Self {
            lambda_: r.lambda.into(),
            generator_lambda: r.generator_lambda.into(),
            p_lambda: r.p_lambda,
            final_state: r.final_n.into_array(),
            reference: r.vn_reference.into_array(),
            deviation: r.deviation,
            trajectory: Py::new(py, PyTrajectory::from(&r.trajectory))?,
        })
    }
}

/// A scenario loaded from a TOML file.
#[pyclass(name = "Scenario", frozen, skip_from_py_object)]
struct PyScenario(CoreScenario);

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        CoreScenario::load(&path).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        CoreScenario::from_toml(text).map(Self).map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.0.name
    }

    #[getter]
    fn observable(&self) -> PyObservable {
        PyObservable(self.0.spec)
    }

    #[getter]
    fn device(&self) -> PyDevice {
        PyDevice(self.0.device.clone())
    }

    #[getter]
    fn integrator(&self) -> PyIntegrator {
        PyIntegrator(self.0.integrator)
    }

    #[getter]
    fn n0(&self) -> [f64; 3] {
        self.0.n0.into_array()
    }

    /// Fixed outcome, or `None` when the scenario samples it.
    #[getter]
    fn lambda_(&self) -> Option<i32> {
        match self.0.lambda {
            LambdaChoice::Fixed(b) => Some(b.into()),
            LambdaChoice::Sample => None,
        }
    }

    /// Runs the branch for `lambda`, defaulting to the scenario's own.
    #[pyo3(signature = (lambda_ = None))]
    fn run(&self, py: Python<'_>, lambda_: Option<i32>) -> PyResult<PyRecord> {
        let lambda = match (lambda_, self.0.lambda) {
            (Some(l), _) => branch(l)?,
            (None, LambdaChoice::Fixed(b)) => b,
            (None, LambdaChoice::Sample) => {
                return Err(PyValueError::new_err("scenario samples lambda; pass lambda_ explicitly"))
            }
        };
        let s = &self.0;
        let rec =
            py.detach(|| measurement::run_branch(&s.n0, &s.spec, &s.device, lambda, &s.integrator)).map_err(err)?;
        PyRecord::new(py, &rec)
    }
}

/// Integrates the Bloch equation with drive sign `lambda`.
#[pyfunction]
#[pyo3(signature = (n0, observable, device, lambda_, integrator = None))]
fn simulate(
    py: Python<'_>,
    n0: [f64; 3],
    observable: &PyObservable,
    device: &PyDevice,
    lambda_: i32,
    integrator: Option<&PyIntegrator>,
) -> PyResult<PyTrajectory> {
    let (n0, b) = (bloch(n0)?, branch(lambda_)?);
    let cfg = integrator.map_or_else(IntegratorConfig::default, |c| c.0);
    let traj = py.detach(|| integrate_bloch(&n0, &observable.0, &device.0, b, &cfg)).map_err(err)?;
    Ok(PyTrajectory::from(&traj))
}

/// Same as `simulate` via the density-matrix equation. Returns the
/// trajectory and the largest trace drift.
#[pyfunction]
#[pyo3(signature = (n0, observable, device, lambda_, integrator = None))]
fn simulate_density(
    py: Python<'_>,
    n0: [f64; 3],
    observable: &PyObservable,
    device: &PyDevice,
    lambda_: i32,
    integrator: Option<&PyIntegrator>,
) -> PyResult<(PyTrajectory, f64)> {
    let (n0, b) = (bloch(n0)?, branch(lambda_)?);
    let cfg = integrator.map_or_else(IntegratorConfig::default, |c| c.0);
    let d = py.detach(|| integrate_density(&n0.to_density(), &observable.0, &device.0, b, &cfg)).map_err(err)?;
    Ok((PyTrajectory::from(&d.trajectory), d.max_trace_drift()))
}

/// Selective measurement ending in outcome `lambda`.
#[pyfunction]
#[pyo3(signature = (n0, observable, device, lambda_, integrator = None))]
fn measure(
    py: Python<'_>,
    n0: [f64; 3],
    observable: &PyObservable,
    device: &PyDevice,
    lambda_: i32,
    integrator: Option<&PyIntegrator>,
) -> PyResult<PyRecord> {
    let (n0, b) = (bloch(n0)?, branch(lambda_)?);
    let cfg = integrator.map_or_else(IntegratorConfig::default, |c| c.0);
    let rec = py.detach(|| measurement::run_branch(&n0, &observable.0, &device.0, b, &cfg)).map_err(err)?;
    PyRecord::new(py, &rec)
}

/// `(count_plus, count_minus)` of `n_runs` seeded Born draws.
#[pyfunction]
fn sample_counts(py: Python<'_>, p_plus: f64, n_runs: u64, seed: u64) -> PyResult<(u64, u64)> {
    if !(0.0..=1.0).contains(&p_plus) {
        return Err(PyValueError::new_err(format!("p_plus = {p_plus} is outside [0, 1]")));
    }
    Ok(py.detach(|| measurement::sample_counts(p_plus, n_runs, seed)))
}

/// Drive sign that realizes `outcome` when `g_hat . omega_hat = cos_relative`.
#[pyfunction]
fn drive_sign(outcome: i32, cos_relative: f64) -> PyResult<i32> {
    Ok(generator_branch(branch(outcome)?, cos_relative).into())
}

#[pyfunction]
fn is_admissible(alpha: f64, theta: f64, relative_angle: f64) -> PyResult<bool> {
    geometry::is_admissible(alpha, theta, relative_angle).map_err(err)
}

#[pyfunction]
fn g_direction(alpha: f64, beta_az: f64, theta: f64, relative_angle: f64, chart_branch: i32) -> PyResult<[f64; 3]> {
    let chart = ChartBranch::try_from(chart_branch).map_err(err)?;
    geometry::g_direction(alpha, beta_az, theta, relative_angle, chart).map_err(err)
}

/// `(C1, C2)` for rates `omega`, `g` at relative angle `Theta`.
#[pyfunction]
fn casimir_pair(omega_rate: f64, g_rate: f64, relative_angle: f64) -> (f64, f64) {
    let c = casimirs(omega_rate, g_rate, relative_angle);
    (c.c1, c.c2)
}

#[pymodule]
mod quasilinear_py {
    #[pymodule_export]
    use super::{
        casimir_pair, drive_sign, g_direction, is_admissible, measure, sample_counts, simulate, simulate_density,
        PyDevice, PyIntegrator, PyObservable, PyRecord, PyScenario, PyTrajectory,
    };
}
