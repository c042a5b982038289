//! Python bindings: `pymorse.MorseState` wraps a complex with its discrete
//! Morse function and the incremental reduction; structured results come
//! back as plain Python objects.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use morse_simplify::cli_io::{self, ComplexDocument, DiagramDocument, ExperimentOptions, Format};
use morse_simplify::simplification::{self, Policy, SimplifyOptions, TraceOptions};
use morse_simplify::Error;

fn py_err(e: Error) -> PyErr {
    if e.is_internal() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_policy(name: &str) -> PyResult<Policy> {
    match name {
        "shallow-first-then-regions" => Ok(Policy::ShallowFirstThenRegions),
        "regions-only" => Ok(Policy::RegionsOnly),
        _ => Err(PyValueError::new_err(format!("unknown policy `{name}`"))),
    }
}

#[pyclass(name = "MorseState")]
struct PyMorseState {
    inner: simplification::MorseState,
}

#[pymethods]
impl PyMorseState {
    /// Reads a complex document; a missing function is generated from `seed`.
    #[staticmethod]
    #[pyo3(signature = (text, seed = 0))]
    fn from_json(text: &str, seed: u64) -> PyResult<Self> {
        let (x, h) = cli_io::parse_complex(text).map_err(py_err)?;
        let h = h.unwrap_or_else(|| cli_io::random_dmf(&x, seed));
        let inner = simplification::MorseState::new(Arc::new(x), h).map_err(py_err)?;
        Ok(PyMorseState { inner })
    }

    /// The full `d`-simplex with a random function, banded by dimension
    /// when `banded` is true.
    #[staticmethod]
    #[pyo3(signature = (d, seed = 0, banded = true))]
    fn simplex(d: usize, seed: u64, banded: bool) -> PyResult<Self> {
        let x = Arc::new(cli_io::simplex_skeleton(d).map_err(py_err)?);
        let h = cli_io::random_dmf(&x, seed);
        let h = if banded { cli_io::banded(&x, &h) } else { h };
        let inner = simplification::MorseState::new(x, h).map_err(py_err)?;
        Ok(PyMorseState { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.complex().len()
    }

    /// Cell names in id order.
    fn cells(&self) -> Vec<String> {
        let x = self.inner.complex();
        x.cells().map(|c| x.name(c).to_string()).collect()
    }

    /// Function values in cell id order.
    fn values(&self) -> Vec<f64> {
        self.inner.function().values().to_vec()
    }

    /// All pairs, relations and (optionally) forbidden regions.
    #[pyo3(signature = (regions = false))]
    fn diagram<'py>(&self, py: Python<'py>, regions: bool) -> PyResult<Bound<'py, PyAny>> {
        to_py(
            py,
            &DiagramDocument::of(&self.inner, regions).map_err(py_err)?,
        )
    }

    /// `(birth, death, dim, birth value, death value)` per off-diagonal pair.
    fn off_diagonal(&self) -> Vec<(String, String, usize, f64, f64)> {
        let x = self.inner.complex();
        let h = self.inner.function();
        self.inner
            .off_diagonal()
            .into_iter()
            .map(|p| {
                let d = p.death.expect("off-diagonal pairs have a death");
                (
                    x.name(p.birth).to_string(),
                    x.name(d).to_string(),
                    p.dim,
                    h.value(p.birth),
                    h.value(d),
                )
            })
            .collect()
    }

    /// Forbidden regions of the pair containing `cell`.
    fn regions<'py>(&self, py: Python<'py>, cell: &str) -> PyResult<Bound<'py, PyAny>> {
        let alpha = self.inner.pair_by_name(cell).map_err(py_err)?;
        to_py(py, &self.inner.regions(&alpha).map_err(py_err)?)
    }

    fn eligible(&self, cell: &str) -> PyResult<bool> {
        let alpha = self.inner.pair_by_name(cell).map_err(py_err)?;
        Ok(self.inner.eligibility(&alpha).map_err(py_err)?.eligible)
    }

    fn eligibility<'py>(&self, py: Python<'py>, cell: &str) -> PyResult<Bound<'py, PyAny>> {
        let alpha = self.inner.pair_by_name(cell).map_err(py_err)?;
        to_py(py, &self.inner.eligibility(&alpha).map_err(py_err)?)
    }

    /// Cancels the pair containing `cell`; returns the move count and the
    /// largest value change.
    #[pyo3(signature = (cell, verify = false))]
    fn cancel<'py>(
        &mut self,
        py: Python<'py>,
        cell: &str,
        verify: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let alpha = self.inner.pair_by_name(cell).map_err(py_err)?;
        let opts = TraceOptions {
            verify,
            ..Default::default()
        };
        let trace = simplification::cancel_pair(&mut self.inner, &alpha, &opts).map_err(py_err)?;
        let out = PyDict::new(py);
        out.set_item("moves", trace.moves())?;
        out.set_item("steps", trace.steps.len())?;
        out.set_item("max_change", trace.max_change)?;
        out.set_item("lifetime", trace.lifetime)?;
        Ok(out)
    }

    /// Cancels every pair it can and returns the report.
    #[pyo3(signature = (policy = "shallow-first-then-regions", verify = false))]
    fn simplify<'py>(
        &mut self,
        py: Python<'py>,
        policy: &str,
        verify: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = SimplifyOptions {
            policy: parse_policy(policy)?,
            verify,
            budget: None,
        };
        to_py(
            py,
            &simplification::simplify_all(&mut self.inner, opts).map_err(py_err)?,
        )
    }

    /// Number of differences between the engine and a reduction from scratch.
    fn verify(&self) -> PyResult<usize> {
        Ok(self.inner.verify().map_err(py_err)?.len())
    }

    fn to_json(&self) -> String {
        ComplexDocument::of(self.inner.complex(), Some(self.inner.function())).to_json()
    }

    /// The diagram as `json`, `csv` or `svg` text.
    #[pyo3(signature = (format = "json", regions = false))]
    fn render(&self, format: &str, regions: bool) -> PyResult<String> {
        let format: Format = format.parse().map_err(py_err)?;
        cli_io::emit_diagram(&self.inner, format, regions).map_err(py_err)
    }
}

/// Simplifies a banded random function on the `d`-simplex and classifies
/// its pairs.
#[pyfunction]
#[pyo3(signature = (d, seed = 0, verify = false, policy = "shallow-first-then-regions"))]
fn experiment<'py>(
    py: Python<'py>,
    d: usize,
    seed: u64,
    verify: bool,
    policy: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = ExperimentOptions {
        d,
        seed,
        verify,
        policy: parse_policy(policy)?,
        budget: None,
    };
    to_py(py, &cli_io::run_experiment(&opts).map_err(py_err)?)
}

#[pymodule]
fn pymorse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMorseState>()?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    Ok(())
}
