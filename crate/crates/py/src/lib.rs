//! Python bindings: matrices over Z/p, the multiply entry point, schedule
//! validation, cost models and the pebble search.

use std::time::Duration;

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use winomem::algorithm::Algorithm;
use winomem::exec::{self, MulOptions};
use winomem::meter::models;
use winomem::meter::CostReport;
use winomem::pebble::{self, Game, Limits, Outcome, TaskGraph};
use winomem::ring::{self, Modulus};
use winomem::schedule::{self, OverwritePolicy, ScheduleId};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn modulus(p: u64) -> PyResult<Modulus> {
    Modulus::new(p).map_err(value_err)
}

fn algorithm(variant: &str) -> PyResult<Algorithm> {
    Algorithm::parse(variant).map_err(value_err)
}

fn report_dict<'py>(py: Python<'py>, r: &CostReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("variant", &r.algorithm)?;
    d.set_item("m", r.m)?;
    d.set_item("k", r.k)?;
    d.set_item("n", r.n)?;
    d.set_item("cutoff", r.cutoff)?;
    d.set_item("mults", r.mults)?;
    d.set_item("adds", r.adds)?;
    d.set_item("peak_extra", r.peak_extra_words)?;
    d.set_item("total_alloc", r.total_alloc_words)?;
    Ok(d)
}

/// Dense row-major matrix over Z/p.
#[pyclass(module = "winomem_py", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Matrix {
    inner: ring::Matrix,
}

#[pymethods]
impl Matrix {
    /// Entries are reduced mod p, so negative values are fine.
    #[new]
    #[pyo3(signature = (rows, cols, values, modulus = 65521))]
    fn new(rows: usize, cols: usize, values: Vec<i64>, modulus: u64) -> PyResult<Self> {
        let p = self::modulus(modulus)?;
        let inner = ring::Matrix::from_i64(rows, cols, &values, p).map_err(value_err)?;
        Ok(Matrix { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (rows, cols, modulus = 65521, seed = 0))]
    fn random(rows: usize, cols: usize, modulus: u64, seed: u64) -> PyResult<Self> {
        Ok(Matrix { inner: ring::Matrix::random(rows, cols, self::modulus(modulus)?, seed) })
    }

    #[staticmethod]
    #[pyo3(signature = (rows, cols, modulus = 65521))]
    fn zeros(rows: usize, cols: usize, modulus: u64) -> PyResult<Self> {
        Ok(Matrix { inner: ring::Matrix::zeros(rows, cols, self::modulus(modulus)?) })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    #[getter]
    fn modulus(&self) -> u32 {
        self.inner.modulus().value()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<u32> {
        if i >= self.inner.rows() || j >= self.inner.cols() {
            return Err(PyIndexError::new_err(format!("({i}, {j}) out of range")));
        }
        Ok(self.inner.get(i, j))
    }

    fn to_list(&self) -> Vec<Vec<u32>> {
        self.inner.data().chunks(self.inner.cols().max(1)).map(<[u32]>::to_vec).collect()
    }

    /// Classical product, for reference.
    fn matmul(&self, other: &Matrix) -> PyResult<Matrix> {
        Ok(Matrix { inner: self.inner.naive_product(&other.inner).map_err(value_err)? })
    }

    fn __matmul__(&self, other: &Matrix) -> PyResult<Matrix> {
        self.matmul(other)
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn to_text(&self) -> PyResult<String> {
        let mut out = Vec::new();
        self.inner.write_text(&mut out).map_err(value_err)?;
        String::from_utf8(out).map_err(value_err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Matrix> {
        Ok(Matrix { inner: ring::Matrix::read_text(text).map_err(value_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{} mod {})", self.inner.rows(), self.inner.cols(), self.inner.modulus().value())
    }
}

/// Runs `variant` on `a`, `b`, `c` in place and returns the measured costs.
///
/// Accumulating variants compute `C <- alpha*A*B + beta*C`, the others
/// `C <- alpha*A*B`. Operands the variant may overwrite are left in an
/// unspecified state.
#[pyfunction]
#[pyo3(signature = (variant, a, b, c, alpha = 1, beta = 1, cutoff = 1))]
fn multiply<'py>(
    py: Python<'py>,
    variant: &str,
    mut a: PyRefMut<'py, Matrix>,
    mut b: PyRefMut<'py, Matrix>,
    mut c: PyRefMut<'py, Matrix>,
    alpha: u64,
    beta: u64,
    cutoff: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let alg = algorithm(variant)?;
    let p = a.inner.modulus();
    let opts = MulOptions { alpha: p.reduce(alpha), beta: p.reduce(beta), cutoff };
    let report = exec::multiply(&alg, &mut a.inner, &mut b.inner, &mut c.inner, &opts).map_err(value_err)?;
    report_dict(py, &report)
}

/// Costs predicted by the closed-form models.
#[pyfunction]
#[pyo3(signature = (variant, m, k, n, cutoff = 1))]
fn expected_costs<'py>(
    py: Python<'py>,
    variant: &str,
    m: usize,
    k: usize,
    n: usize,
    cutoff: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let report = models::expected_costs(&algorithm(variant)?, m, k, n, cutoff).map_err(value_err)?;
    report_dict(py, &report)
}

/// Whether `(m, k, n)` at this cutoff can be run by `variant`.
#[pyfunction]
#[pyo3(signature = (variant, m, k, n, cutoff = 1))]
fn supported(variant: &str, m: usize, k: usize, n: usize, cutoff: usize) -> PyResult<bool> {
    Ok(exec::check_supported(&algorithm(variant)?, m, k, n, cutoff).is_ok())
}

#[pyfunction]
fn builtin_schedule(name: &str) -> PyResult<String> {
    let id = ScheduleId::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown schedule {name}")))?;
    Ok(schedule::builtin_text(id).to_string())
}

/// Parses and symbolically checks a schedule; returns `(ok, report)`.
#[pyfunction]
fn validate_schedule(text: &str) -> PyResult<(bool, String)> {
    let s = schedule::parse_schedule(text).map_err(value_err)?;
    let r = schedule::validate(&s);
    Ok((r.ok(), r.to_string()))
}

/// Pebble search. `graph` is `builtin:<name>` or graph text. Returns a dict
/// with `outcome` ("found", "exhausted" or "timed_out"), `states`, and for
/// found traces `trace` (rendered) and `schedule` (schedule text).
#[pyfunction]
#[pyo3(signature = (graph = "builtin:winograd", pebbles = 0, overwrite = "none", copy_budget = 2, state_cap = 20_000_000, time_budget = None))]
fn search<'py>(
    py: Python<'py>,
    graph: &str,
    pebbles: usize,
    overwrite: &str,
    copy_budget: usize,
    state_cap: usize,
    time_budget: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let g = if graph.starts_with("builtin:") { TaskGraph::load(graph) } else { TaskGraph::parse(graph) }.map_err(value_err)?;
    let policy = OverwritePolicy::parse(overwrite)
        .ok_or_else(|| PyValueError::new_err(format!("unknown overwrite policy {overwrite}")))?;
    let limits = Limits {
        copy_budget,
        time_budget: time_budget.map(Duration::from_secs_f64),
        state_cap,
        ..Limits::default()
    };
    let res = py.detach(|| pebble::search(&g, pebbles, policy, &limits));
    let d = PyDict::new(py);
    d.set_item("states", res.states)?;
    match res.outcome {
        Outcome::Found(t) => {
            d.set_item("outcome", "found")?;
            d.set_item("trace", Game::for_trace(&g, &t).render(&t.steps))?;
            let s = pebble::trace_to_schedule(&g, &t).map_err(value_err)?;
            d.set_item("schedule", schedule::render_schedule(&s))?;
        }
        Outcome::Exhausted => d.set_item("outcome", "exhausted")?,
        Outcome::TimedOut => d.set_item("outcome", "timed_out")?,
    }
    Ok(d)
}

#[pymodule]
pub fn winomem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Matrix>()?;
    m.add_function(wrap_pyfunction!(multiply, m)?)?;
    m.add_function(wrap_pyfunction!(expected_costs, m)?)?;
    m.add_function(wrap_pyfunction!(supported, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(validate_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    Ok(())
}
