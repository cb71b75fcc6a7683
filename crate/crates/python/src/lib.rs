//! Python bindings: parameters and constants, simulation, Harnack
//! verification reports and the one-dimensional wave tools.

use ::ac_harnack as core;
use core::ac_solver::{self, SchemeConfig, SchemeKind, TimeStep};
use core::harnack_params;
use core::harnack_verify::{self, ClassicalOptions};
use core::torus_grid;
use core::wave_tools;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::ConfinementBreach { .. }
        | core::Error::FloorBreach { .. }
        | core::Error::NoConvergence(_) => PyRuntimeError::new_err(e.to_string()),
        core::Error::Index { .. } => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "HarnackParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHarnackParams {
    inner: harnack_params::HarnackParams,
}

#[pymethods]
impl PyHarnackParams {
    #[new]
    #[pyo3(signature = (alpha, beta, n, k = 0.0, d = 0.0))]
    fn new(alpha: f64, beta: f64, n: u32, k: f64, d: f64) -> PyResult<Self> {
        let inner = harnack_params::HarnackParams::new(alpha, beta, n, k)
            .and_then(|p| p.with_shift(d))
            .map_err(to_py)?;
        Ok(PyHarnackParams { inner })
    }

    /// `α = ½, β = -n, k = 0`.
    #[staticmethod]
    fn ricci_flat(n: u32) -> PyResult<Self> {
        let inner = harnack_params::HarnackParams::ricci_flat(n);
        inner.validate().map_err(to_py)?;
        Ok(PyHarnackParams { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }

    fn constants(&self) -> PyResult<PyDerivedConstants> {
        let inner = harnack_params::derive_constants(&self.inner).map_err(to_py)?;
        Ok(PyDerivedConstants { inner })
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "HarnackParams(alpha={}, beta={}, n={}, k={}, d={})",
            p.alpha, p.beta, p.n, p.k, p.d
        )
    }
}

#[pyclass(name = "DerivedConstants", frozen)]
struct PyDerivedConstants {
    inner: harnack_params::DerivedConstants,
}

#[pymethods]
impl PyDerivedConstants {
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    fn phi(&self, t: f64) -> PyResult<f64> {
        self.inner.phi(t).map_err(to_py)
    }

    fn phi_dot(&self, t: f64) -> PyResult<f64> {
        self.inner.phi_dot(t).map_err(to_py)
    }

    fn phi_integral(&self, t1: f64, t2: f64) -> PyResult<f64> {
        self.inner.phi_integral(t1, t2).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!("DerivedConstants(a={}, b={}, c={}, q={})", c.a, c.b, c.c, c.q)
    }
}

#[pyfunction]
fn beta_admissible_max(alpha: f64, n: u32, k: f64) -> PyResult<f64> {
    harnack_params::beta_admissible_max(alpha, n, k).map_err(to_py)
}

#[pyclass(name = "TorusGrid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTorusGrid {
    inner: torus_grid::TorusGrid,
}

#[pymethods]
impl PyTorusGrid {
    #[new]
    fn new(lengths: Vec<f64>, points: Vec<usize>) -> PyResult<Self> {
        let inner = torus_grid::TorusGrid::new(&lengths, &points).map_err(to_py)?;
        Ok(PyTorusGrid { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn points(&self) -> Vec<usize> {
        self.inner.points().to_vec()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn coords(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner.check_index(index).map_err(to_py)?;
        Ok(self.inner.coords(index))
    }
}

#[pyfunction]
#[pyo3(signature = (grid, seed, fmin = 0.1, fmax = 0.9, modes = 4))]
fn generate_ic(grid: &PyTorusGrid, seed: u64, fmin: f64, fmax: f64, modes: u32) -> PyResult<Vec<f64>> {
    let f = ac_solver::generate_ic(&grid.inner, seed, fmin, fmax, modes).map_err(to_py)?;
    Ok(f.into_values())
}

#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    inner: ac_solver::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn grid(&self) -> PyTorusGrid {
        PyTorusGrid {
            inner: *self.inner.grid(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn snapshot(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner
            .snapshots()
            .get(index)
            .map(|s| s.field.values().to_vec())
            .ok_or_else(|| PyIndexError::new_err(format!("snapshot {index} out of range")))
    }

    /// `(steps, min_seen, max_seen, breaches)` from the confinement monitor.
    fn confinement(&self) -> Option<(usize, f64, f64, usize)> {
        self.inner
            .confinement()
            .map(|c| (c.steps, c.min_seen, c.max_seen, c.breaches))
    }
}

/// Evolves `values` on `grid` to `t_end`; `scheme` is `"explicit_euler"`
/// or `"imex"`, and `dt = None` picks the automatic step.
#[pyfunction]
#[pyo3(signature = (grid, values, t_end, snapshot_every, scheme = "explicit_euler", dt = None, sigma = 0.8))]
fn evolve(
    py: Python<'_>,
    grid: &PyTorusGrid,
    values: Vec<f64>,
    t_end: f64,
    snapshot_every: f64,
    scheme: &str,
    dt: Option<f64>,
    sigma: f64,
) -> PyResult<PyTrajectory> {
    let kind = match scheme {
        "explicit_euler" => SchemeKind::ExplicitEuler,
        "imex" => SchemeKind::Imex,
        other => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    };
    let config = SchemeConfig {
        kind,
        dt: dt.map_or(TimeStep::Auto, TimeStep::Fixed),
        sigma,
    };
    let f0 = torus_grid::ScalarField::new(grid.inner, values).map_err(to_py)?;
    let inner = py
        .detach(|| ac_solver::evolve(&f0, t_end, config, snapshot_every))
        .map_err(to_py)?;
    Ok(PyTrajectory { inner })
}

#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: harnack_verify::VerificationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed()
    }

    #[getter]
    fn config_error(&self) -> Option<String> {
        self.inner.config_error.clone()
    }

    #[getter]
    fn skipped(&self) -> Vec<String> {
        self.inner.skipped.clone()
    }

    /// `(name, passed, value, threshold, margin)` per check.
    fn checks(&self) -> Vec<(String, bool, f64, f64, f64)> {
        self.inner
            .checks
            .iter()
            .map(|c| (c.name.clone(), c.passed, c.value, c.threshold, c.margin))
            .collect()
    }

    /// `(t, h_min, p2_min, p3_min)` per snapshot.
    fn series(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner
            .series
            .iter()
            .map(|r| (r.t, r.h_min, r.p2_min, r.p3_min))
            .collect()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Report({}, {} checks, passed={})",
            self.inner.title,
            self.inner.checks.len(),
            self.inner.passed()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (trajectory, params, t_min = 0.05, tol = 1e-2))]
fn verify_differential(
    trajectory: &PyTrajectory,
    params: &PyHarnackParams,
    t_min: f64,
    tol: f64,
) -> PyResult<PyReport> {
    let inner = harnack_verify::verify_differential(&trajectory.inner, &params.inner, t_min, tol)
        .map_err(to_py)?;
    Ok(PyReport { inner })
}

#[pyfunction]
#[pyo3(signature = (trajectory, params, pairs = 100, seed = 7, t_min = 0.05, tol = 0.0))]
fn verify_classical(
    trajectory: &PyTrajectory,
    params: &PyHarnackParams,
    pairs: usize,
    seed: u64,
    t_min: f64,
    tol: f64,
) -> PyResult<PyReport> {
    let opts = ClassicalOptions {
        pairs,
        seed,
        t_min,
        tol,
    };
    let inner =
        harnack_verify::verify_classical(&trajectory.inner, &params.inner, &opts).map_err(to_py)?;
    Ok(PyReport { inner })
}

#[pyfunction]
fn classical_rhs_paper(params: &PyHarnackParams, d_geo: f64, t1: f64, t2: f64) -> PyResult<f64> {
    let dc = harnack_params::derive_constants(&params.inner).map_err(to_py)?;
    harnack_verify::classical_harnack_rhs_paper(&params.inner, &dc, d_geo, t1, t2).map_err(to_py)
}

#[pyfunction]
fn classical_rhs_tight(params: &PyHarnackParams, d_geo: f64, t1: f64, t2: f64) -> PyResult<f64> {
    let dc = harnack_params::derive_constants(&params.inner).map_err(to_py)?;
    harnack_verify::classical_harnack_rhs_tight(&params.inner, &dc, d_geo, t1, t2).map_err(to_py)
}

/// `(ps, slope)` of `tanh(x/√2)`.
#[pyfunction]
fn tanh_profile(xs: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let w = wave_tools::tanh_profile(&xs).map_err(to_py)?;
    let slope = w.slope();
    Ok((w.ps().to_vec(), slope))
}

fn profile(xs: Vec<f64>, ps: Vec<f64>, slope: Option<Vec<f64>>) -> PyResult<wave_tools::WaveProfile> {
    let w = wave_tools::WaveProfile::new(xs, ps, 0.0).map_err(to_py)?;
    match slope {
        Some(s) => w.with_slope(s).map_err(to_py),
        None => Ok(w),
    }
}

/// `½(p²-1)² - |p'|²`; without `slope`, `p'` comes from differences.
#[pyfunction]
#[pyo3(signature = (xs, ps, slope = None))]
fn modica_bound_gap(xs: Vec<f64>, ps: Vec<f64>, slope: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(wave_tools::modica_bound_gap(&profile(xs, ps, slope)?))
}

/// `p²[(2n-1) - (n-1)p²] - |p'|²`.
#[pyfunction]
#[pyo3(signature = (xs, ps, n, slope = None))]
fn corollary_bound_gap(
    xs: Vec<f64>,
    ps: Vec<f64>,
    n: u32,
    slope: Option<Vec<f64>>,
) -> PyResult<Vec<f64>> {
    Ok(wave_tools::corollary_bound_gap(&profile(xs, ps, slope)?, n))
}

#[pyfunction]
#[pyo3(signature = (xs, ps, c = 0.0))]
fn traveling_wave_residual(xs: Vec<f64>, ps: Vec<f64>, c: f64) -> PyResult<f64> {
    let w = wave_tools::WaveProfile::new(xs, ps, c).map_err(to_py)?;
    wave_tools::traveling_wave_residual(&w).map_err(to_py)
}

/// `(xs, ps, slope_at_zero)` of the shooting solution on `[-X, X]`.
#[pyfunction]
#[pyo3(signature = (half_width = 8.0, h = 0.01))]
fn shoot_standing_wave(half_width: f64, h: f64) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let sw = wave_tools::shoot_standing_wave(half_width, h).map_err(to_py)?;
    Ok((sw.profile.xs().to_vec(), sw.profile.ps().to_vec(), sw.slope_at_zero))
}

/// `(xs, g1, g2, crossings)` on `[-1, 1]`.
#[pyfunction]
#[pyo3(signature = (n, samples = 2001))]
fn polynomial_comparison(n: u32, samples: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let c = wave_tools::polynomial_comparison(n, samples).map_err(to_py)?;
    Ok((c.xs, c.g1, c.g2, c.crossings))
}

#[pymodule(name = "ac_harnack")]
fn ac_harnack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHarnackParams>()?;
    m.add_class::<PyDerivedConstants>()?;
    m.add_class::<PyTorusGrid>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(beta_admissible_max, m)?)?;
    m.add_function(wrap_pyfunction!(generate_ic, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(verify_differential, m)?)?;
    m.add_function(wrap_pyfunction!(verify_classical, m)?)?;
    m.add_function(wrap_pyfunction!(classical_rhs_paper, m)?)?;
    m.add_function(wrap_pyfunction!(classical_rhs_tight, m)?)?;
    m.add_function(wrap_pyfunction!(tanh_profile, m)?)?;
    m.add_function(wrap_pyfunction!(modica_bound_gap, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_bound_gap, m)?)?;
    m.add_function(wrap_pyfunction!(traveling_wave_residual, m)?)?;
    m.add_function(wrap_pyfunction!(shoot_standing_wave, m)?)?;
    m.add_function(wrap_pyfunction!(polynomial_comparison, m)?)?;
    Ok(())
}
