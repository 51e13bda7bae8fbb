//! Python bindings for `polyface`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use polyface::ensembles::{sample_matrix, EnsembleKind, EnsembleSpec};
use polyface::experiments::{self, PinPolicy, PlantedKind};
use polyface::geometry::{self, FaceSpec, DEFAULT_TOL};
use polyface::probcalc::{self, Curve, PhaseParams};
use polyface::{DimensionSpec, Matrix, Shape};

fn value_error(e: polyface::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = polyface::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(value_error)
}

/// Converts any serialisable report into plain Python dicts and lists.
fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// P_{m,M} as a float.
#[pyfunction]
#[pyo3(signature = (m, points))]
fn wendel_probability(m: usize, points: usize) -> PyResult<f64> {
    Ok(probcalc::wendel_probability(m, points).map_err(value_error)?.value())
}

/// P_{m,M} as an exact "p/q" string (M up to 10^4).
#[pyfunction]
fn wendel_probability_exact(m: usize, points: usize) -> PyResult<String> {
    let w = probcalc::wendel_probability(m, points).map_err(value_error)?;
    w.exact
        .as_ref()
        .map(probcalc::format_rational)
        .ok_or_else(|| PyValueError::new_err("exact value unavailable at this size"))
}

#[pyfunction]
#[pyo3(signature = (k, n, big_n, shape = "orthant"))]
fn expected_face_ratio(k: usize, n: usize, big_n: usize, shape: &str) -> PyResult<f64> {
    let dims = DimensionSpec::new(k, n, big_n).map_err(value_error)?;
    probcalc::expected_face_ratio_f64(dims, parse(shape)?).map_err(value_error)
}

#[pyfunction]
fn psi_weak(delta: f64, rho: f64) -> PyResult<f64> {
    Ok(probcalc::psi_weak(PhaseParams::new(delta, rho).map_err(value_error)?))
}

#[pyfunction]
fn psi_strong(delta: f64, rho: f64) -> PyResult<f64> {
    Ok(probcalc::psi_strong(PhaseParams::new(delta, rho).map_err(value_error)?))
}

#[pyfunction]
#[pyo3(signature = (delta, shape = "orthant"))]
fn rho_weak(delta: f64, shape: &str) -> PyResult<f64> {
    probcalc::rho_weak(delta, parse(shape)?).map_err(value_error)
}

#[pyfunction]
fn rho_strong(delta: f64) -> PyResult<f64> {
    probcalc::rho_strong(delta).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (quad_points = 10_000))]
fn curve_area(quad_points: usize) -> PyResult<f64> {
    probcalc::curve_area(Curve::WeakHypercube, quad_points).map_err(value_error)
}

/// One draw from a named ensemble, as a list of rows.
#[pyfunction]
#[pyo3(signature = (ensemble, rows, cols, seed, trial = 0))]
fn sample(ensemble: &str, rows: usize, cols: usize, seed: u64, trial: u64) -> PyResult<Vec<Vec<f64>>> {
    let spec = EnsembleSpec::new(parse::<EnsembleKind>(ensemble)?, rows, cols, seed).map_err(value_error)?;
    Ok(sample_matrix(&spec, trial).map_err(value_error)?.to_rows())
}

/// Survival verdict of one face of `shape` under the matrix `a`.
#[pyfunction]
#[pyo3(signature = (a, shape, support, upper = Vec::new(), tol = DEFAULT_TOL))]
fn face_survives<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    shape: &str,
    support: Vec<usize>,
    upper: Vec<usize>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let a = Matrix::from_rows(&a).map_err(value_error)?;
    let basis = geometry::nullspace_basis(&a).map_err(value_error)?;
    let face = FaceSpec::new(parse(shape)?, support, upper).map_err(value_error)?;
    let verdict = geometry::face_survives(&basis, &face, tol).map_err(value_error)?;
    to_python(py, &verdict)
}

#[pyfunction]
#[pyo3(signature = (k, n, big_n, shape = "orthant", ensemble = "gaussian", trials = 1000, seed = 0x5EED, tol = DEFAULT_TOL))]
#[allow(clippy::too_many_arguments)]
fn mc_face_ratio<'py>(
    py: Python<'py>,
    k: usize,
    n: usize,
    big_n: usize,
    shape: &str,
    ensemble: &str,
    trials: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let dims = DimensionSpec::new(k, n, big_n).map_err(value_error)?;
    let spec = EnsembleSpec::new(parse::<EnsembleKind>(ensemble)?, n, big_n, seed).map_err(value_error)?;
    let shape: Shape = parse(shape)?;
    let report = py
        .detach(|| experiments::mc_face_ratio(dims, shape, &spec, trials, seed, PinPolicy::Random, tol))
        .map_err(value_error)?;
    to_python(py, &report)
}

/// Phase table as CSV text; `trials = 0` evaluates the formula only.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (big_n, grid, trials = 0, shape = "orthant", ensemble = "gaussian", seed = 0x5EED, tol = DEFAULT_TOL))]
fn phase_diagram(
    py: Python<'_>,
    big_n: usize,
    grid: usize,
    trials: usize,
    shape: &str,
    ensemble: &str,
    seed: u64,
    tol: f64,
) -> PyResult<String> {
    let kind = parse::<EnsembleKind>(ensemble)?;
    let shape: Shape = parse(shape)?;
    let table = py
        .detach(|| experiments::phase_diagram(big_n, grid, trials, shape, &kind, seed, tol))
        .map_err(value_error)?;
    Ok(table.to_csv())
}

#[pyfunction]
#[pyo3(signature = (n, big_n, max_k = None, tol = DEFAULT_TOL))]
fn fourier_neighborliness<'py>(
    py: Python<'py>,
    n: usize,
    big_n: usize,
    max_k: Option<usize>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let max_k = max_k.unwrap_or(n.saturating_sub(1) / 2);
    let report = py
        .detach(|| experiments::fourier_neighborliness(n, big_n, max_k, tol))
        .map_err(value_error)?;
    to_python(py, &report)
}

#[pyfunction]
#[pyo3(signature = (kind, k, n, big_n, ensemble = "gaussian", trials = 100, seed = 0x5EED, tol = DEFAULT_TOL))]
#[allow(clippy::too_many_arguments)]
fn recovery_trial<'py>(
    py: Python<'py>,
    kind: &str,
    k: usize,
    n: usize,
    big_n: usize,
    ensemble: &str,
    trials: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: PlantedKind = parse(kind)?;
    let dims = DimensionSpec::new(k, n, big_n).map_err(value_error)?;
    let spec = EnsembleSpec::new(parse::<EnsembleKind>(ensemble)?, n, big_n, seed).map_err(value_error)?;
    let report = py
        .detach(|| experiments::recovery_trial(dims, &spec, kind, trials, seed, tol))
        .map_err(value_error)?;
    to_python(py, &report)
}

#[pymodule]
#[pyo3(name = "polyface")]
fn polyface_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(wendel_probability, m)?)?;
    m.add_function(wrap_pyfunction!(wendel_probability_exact, m)?)?;
    m.add_function(wrap_pyfunction!(expected_face_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(psi_weak, m)?)?;
    m.add_function(wrap_pyfunction!(psi_strong, m)?)?;
    m.add_function(wrap_pyfunction!(rho_weak, m)?)?;
    m.add_function(wrap_pyfunction!(rho_strong, m)?)?;
    m.add_function(wrap_pyfunction!(curve_area, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(face_survives, m)?)?;
    m.add_function(wrap_pyfunction!(mc_face_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(phase_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_neighborliness, m)?)?;
    m.add_function(wrap_pyfunction!(recovery_trial, m)?)?;
    Ok(())
}
