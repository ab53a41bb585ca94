// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Python module `torpsido_py`. Structured results cross the boundary as
//! JSON strings; matrices as nested lists of complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use torpsido::error::Error;
use torpsido::harness::{self, Command, ExperimentConfig};
use torpsido::index::{self, DEFAULT_MS_GRID, DEFAULT_RANK_TOL};
use torpsido::linalg::CMatrix;
use torpsido::nuclearity;
use torpsido::quantization::assemble_matrix;
use torpsido::symbol::{self, BisymbolKind, FamilyFrame, FamilySpec, ScalarBisymbol, SymbolTable};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Format(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// A symbol table built from a named family.
#[pyclass(name = "Symbol", module = "torpsido_py")]
struct PySymbol {
    inner: SymbolTable,
}

#[pymethods]
impl PySymbol {
    /// `family_json` is e.g. `{"name": "bessel", "order": -2}`.
    #[new]
    #[pyo3(signature = (family_json, n=1, radius=2, d_out=1, d_in=1, grid_size=None))]
    fn new(
        family_json: &str,
        n: usize,
        radius: usize,
        d_out: usize,
        d_in: usize,
        grid_size: Option<usize>,
    ) -> PyResult<Self> {
        let spec: FamilySpec = serde_json::from_str(family_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let frame = FamilyFrame { n, radius, d_out, d_in, grid_size: Some(grid_size.unwrap_or(4 * radius + 1)) };
        let inner = symbol::make_family(&spec, &frame).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.window().dim()
    }

    #[getter]
    fn radius(&self) -> usize {
        self.inner.window().radius()
    }

    #[getter]
    fn d_out(&self) -> usize {
        self.inner.d_out()
    }

    #[getter]
    fn d_in(&self) -> usize {
        self.inner.d_in()
    }

    #[getter]
    fn is_multiplier(&self) -> bool {
        self.inner.is_multiplier()
    }

    #[getter]
    fn tail(&self) -> PyResult<String> {
        to_json(&self.inner.tail()).map(|s| s.trim_matches('"').to_owned())
    }

    /// Frequencies of the window in storage order.
    fn frequencies(&self) -> Vec<Vec<i64>> {
        self.inner.window().iter().collect()
    }

    /// Block `sigma(xi)` of a multiplier at window position `w`.
    fn value(&self, w: usize) -> PyResult<Vec<Vec<Complex64>>> {
        if w >= self.inner.window().len() {
            return Err(PyValueError::new_err(format!("window position {w} out of range")));
        }
        Ok(matrix_to_rows(self.inner.multiplier_value(w).map_err(py_err)?))
    }

    /// Dense matrix of the truncated operator on Fourier coefficients.
    fn assemble(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let op = assemble_matrix(&self.inner).map_err(py_err)?;
        Ok(matrix_to_rows(op.matrix()))
    }

    fn compose(&self, other: &PySymbol) -> PyResult<PySymbol> {
        let inner = symbol::compose_multipliers(&self.inner, &other.inner).map_err(py_err)?;
        Ok(PySymbol { inner })
    }

    fn adjoint(&self) -> PyResult<PySymbol> {
        Ok(PySymbol { inner: symbol::adjoint_multiplier(&self.inner).map_err(py_err)? })
    }

    /// Nuclear trace report as JSON.
    fn trace(&self) -> PyResult<String> {
        let report = if self.inner.is_multiplier() {
            nuclearity::nuclear_trace_multiplier(&self.inner)
        } else {
            nuclearity::nuclear_trace_pdo(&self.inner)
        };
        to_json(&report.map_err(py_err)?)
    }

    /// Fredholm index report as JSON.
    #[pyo3(signature = (tol=DEFAULT_RANK_TOL, t_grid=None))]
    fn index(&self, tol: f64, t_grid: Option<Vec<f64>>) -> PyResult<String> {
        let grid = t_grid.unwrap_or_else(|| DEFAULT_MS_GRID.to_vec());
        to_json(&index::multiplier_index(&self.inner, tol, &grid).map_err(py_err)?)
    }

    fn heat_trace(&self, t: f64) -> PyResult<String> {
        to_json(&index::heat_trace_sum(&self.inner, t).map_err(py_err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "Symbol(n={}, radius={}, d_out={}, d_in={}, multiplier={})",
            self.dim(),
            self.radius(),
            self.d_out(),
            self.d_in(),
            self.is_multiplier()
        )
    }
}

/// Kernel and cokernel dimensions of a matrix, as JSON.
#[pyfunction]
#[pyo3(signature = (rows, tol=DEFAULT_RANK_TOL))]
fn matrix_index(rows: Vec<Vec<Complex64>>, tol: f64) -> PyResult<String> {
    to_json(&index::matrix_index(&matrix_from_rows(rows)?, tol).map_err(py_err)?)
}

/// `tr exp(-t T*T) - tr exp(-t T T*)` over `t_grid`, as JSON.
#[pyfunction]
fn mckean_singer(rows: Vec<Vec<Complex64>>, t_grid: Vec<f64>) -> PyResult<String> {
    to_json(&index::mckean_singer(&matrix_from_rows(rows)?, &t_grid).map_err(py_err)?)
}

#[pyfunction]
fn schatten_norm(rows: Vec<Vec<Complex64>>, s: f64) -> PyResult<f64> {
    nuclearity::schatten_norm(&matrix_from_rows(rows)?, s).map_err(py_err)
}

/// Index of a built-in bisymbol realized as a multiplier, as JSON.
/// `kind_json` is e.g. `{"kind": "bracket_cosine"}`.
#[pyfunction]
#[pyo3(signature = (kind_json, xi_radius, eta_radius, n=1, m=1, y_size=None, tol=DEFAULT_RANK_TOL))]
#[allow(clippy::too_many_arguments)]
fn hoermander_experiment(
    kind_json: &str,
    xi_radius: usize,
    eta_radius: usize,
    n: usize,
    m: usize,
    y_size: Option<usize>,
    tol: f64,
) -> PyResult<String> {
    let kind: BisymbolKind = serde_json::from_str(kind_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let y = y_size.unwrap_or(2 * eta_radius + 2);
    let b = ScalarBisymbol::builtin(&kind, n, m, xi_radius, eta_radius, y, 1.0, 1.0, 0.0).map_err(py_err)?;
    to_json(&index::periodic_index_experiment(&b, tol, &DEFAULT_MS_GRID).map_err(py_err)?)
}

/// Run a harness command in memory and return the report JSON.
#[pyfunction]
fn run_experiment(command: &str, config_json: &str) -> PyResult<String> {
    let command: Command = command.parse().map_err(py_err)?;
    let cfg = ExperimentConfig::from_json(config_json).map_err(py_err)?;
    let diagnostics = harness::validate(command, &cfg);
    if !diagnostics.is_empty() {
        let text: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
        return Err(PyValueError::new_err(text.join("; ")));
    }
    let report = harness::execute(command, &cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    report.to_json().map_err(py_err)
}

#[pymodule]
pub fn torpsido_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymbol>()?;
    m.add_function(wrap_pyfunction!(matrix_index, m)?)?;
    m.add_function(wrap_pyfunction!(mckean_singer, m)?)?;
    m.add_function(wrap_pyfunction!(schatten_norm, m)?)?;
    m.add_function(wrap_pyfunction!(hoermander_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
