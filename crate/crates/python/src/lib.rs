//! Python bindings: operators, vectors as term expressions or JSON text,
//! witness searches and the certificate suite.

use orbitscope::certificates::{run_all as run_suite, run_certificate as run_one, SuiteConfig, CERTIFICATE_NAMES};
use orbitscope::limit_sets::{d_witness, jmix_witness, search_j_witness, EpsSchedule, SearchConfig};
use orbitscope::operators::{operator_from_json, ShiftOperator};
use orbitscope::orbits::{coarse_orbit_contains, orbit};
use orbitscope::scalar::{parse_ratio, Magnitude, Real, Scalar};
use orbitscope::spaces::{IndexSet, NormTag, OpenCone, SeqVector};
use orbitscope::{Error, Exact, Float, NumericMode};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn found_or_none(r: orbitscope::Result<Value>) -> PyResult<Option<String>> {
    match r {
        Ok(v) => Ok(Some(v.to_string())),
        Err(e) if e.is_not_found() => Ok(None),
        Err(e) => Err(py_err(e)),
    }
}

fn mode_of(text: &str) -> PyResult<NumericMode> {
    text.parse().map_err(py_err)
}

fn norm_of(text: &str) -> PyResult<NormTag> {
    text.parse().map_err(py_err)
}

fn vector<S: Scalar>(text: &str, index_set: IndexSet) -> orbitscope::Result<SeqVector<S>> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let v = SeqVector::from_json(&serde_json::from_str(trimmed)?)?;
        v.ensure_same_index_set(&SeqVector::zero(index_set))?;
        Ok(v)
    } else {
        SeqVector::parse_terms(index_set, trimmed)
    }
}

fn real<S: Scalar>(text: &str) -> orbitscope::Result<S::Real> {
    Ok(S::Real::from_ratio(&parse_ratio(text)?))
}

#[derive(Clone)]
enum AnyOperator {
    Exact(ShiftOperator<Exact>),
    Float(ShiftOperator<Float>),
}

macro_rules! with_operator {
    ($op:expr, $t:ident => $body:expr) => {
        match &$op.inner {
            AnyOperator::Exact($t) => $body,
            AnyOperator::Float($t) => $body,
        }
    };
}

/// Search limits shared by the limit-set methods.
struct Limits {
    m: usize,
    k_cap: u64,
    budget: u64,
    seed: u64,
    norm: NormTag,
}

impl Limits {
    fn search(&self) -> SearchConfig {
        SearchConfig { k_cap: self.k_cap, budget: self.budget, seed: self.seed, ..SearchConfig::default() }
    }
}

fn j_search<S: Scalar>(t: &ShiftOperator<S>, x: &str, y: &str, d: &str, lim: &Limits, mix: bool) -> orbitscope::Result<Value> {
    let (x, y) = (vector::<S>(x, t.index_set())?, vector::<S>(y, t.index_set())?);
    let d = real::<S>(d)?;
    let schedule = EpsSchedule::<S::Real>::harmonic(lim.m);
    let w = if mix {
        jmix_witness(t, &x, &y, &d, &schedule, 1, &lim.search(), lim.norm)?
    } else {
        search_j_witness(t, &x, &y, &d, &schedule, &lim.search(), lim.norm)?
    };
    Ok(w.to_json())
}

fn d_search<S: Scalar>(t: &ShiftOperator<S>, x: &str, y: &str, d: &str, horizon: u64, lim: &Limits) -> orbitscope::Result<Value> {
    let (x, y) = (vector::<S>(x, t.index_set())?, vector::<S>(y, t.index_set())?);
    let d = real::<S>(d)?;
    let schedule = EpsSchedule::<S::Real>::harmonic(lim.m);
    Ok(d_witness(t, &x, &y, &d, horizon, &schedule, &lim.search(), lim.norm)?.to_json())
}

fn coarse_search<S: Scalar>(t: &ShiftOperator<S>, x: &str, y: &str, d: &str, horizon: u64, p: NormTag) -> orbitscope::Result<Value> {
    let (x, y) = (vector::<S>(x, t.index_set())?, vector::<S>(y, t.index_set())?);
    coarse_orbit_contains(t, &x, &real::<S>(d)?, &y, horizon, p)?
        .map(|w| w.to_json())
        .ok_or_else(|| Error::NotFound(format!("no orbit point within {horizon} steps")))
}

/// A weighted shift, block direct sum or diagonal operator in exact or
/// float arithmetic.
#[pyclass(name = "Operator", module = "orbitscope_py", frozen)]
struct PyOperator {
    inner: AnyOperator,
}

impl PyOperator {
    fn build(config: &Value, mode: &str) -> PyResult<Self> {
        let inner = match mode_of(mode)? {
            NumericMode::Exact => AnyOperator::Exact(operator_from_json(config).map_err(py_err)?),
            NumericMode::Float => AnyOperator::Float(operator_from_json(config).map_err(py_err)?),
        };
        Ok(PyOperator { inner })
    }
}

#[pymethods]
impl PyOperator {
    #[staticmethod]
    #[pyo3(signature = (name, mode = "exact"))]
    fn preset(name: &str, mode: &str) -> PyResult<Self> {
        Self::build(&Value::String(name.to_string()), mode)
    }

    #[staticmethod]
    #[pyo3(signature = (text, mode = "exact"))]
    fn from_json(text: &str, mode: &str) -> PyResult<Self> {
        let config: Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::build(&config, mode)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        match self.inner {
            AnyOperator::Exact(_) => "exact",
            AnyOperator::Float(_) => "float",
        }
    }

    #[getter]
    fn index_set(&self) -> &'static str {
        with_operator!(self, t => t.index_set().tag())
    }

    fn to_json(&self) -> String {
        with_operator!(self, t => t.to_json().to_string())
    }

    /// `T^n x` as vector JSON.
    #[pyo3(signature = (x, n = 1))]
    fn apply_power(&self, x: &str, n: u64) -> PyResult<String> {
        with_operator!(self, t => {
            let v = vector(x, t.index_set()).map_err(py_err)?;
            Ok(t.apply_power(n, &v).map_err(py_err)?.to_json().to_string())
        })
    }

    /// `||T^n x||` for `n = 0..=horizon`.
    #[pyo3(signature = (x, horizon, norm = "inf"))]
    fn orbit_norms(&self, x: &str, horizon: u64, norm: &str) -> PyResult<Vec<f64>> {
        let p = norm_of(norm)?;
        with_operator!(self, t => {
            let v = vector(x, t.index_set()).map_err(py_err)?;
            let trace = orbit(t, &v, horizon, p).map_err(py_err)?;
            Ok(trace.norms.iter().map(Magnitude::to_f64).collect())
        })
    }

    /// Gelfand estimate `||T^n||^{1/n}` at `n_max` over basis vectors in `[lo, hi]`.
    fn spectral_radius(&self, n_max: u64, lo: i64, hi: i64) -> PyResult<f64> {
        let band = orbitscope::spaces::Band::finite(lo, hi);
        with_operator!(self, t => Ok(t.spectral_radius_estimate(n_max, band).map_err(py_err)?.estimate))
    }

    /// Coarse orbit witness as JSON, or `None` within the horizon.
    #[pyo3(signature = (x, y, d, horizon = 10_000, norm = "inf"))]
    fn coarse_witness(&self, x: &str, y: &str, d: &str, horizon: u64, norm: &str) -> PyResult<Option<String>> {
        let p = norm_of(norm)?;
        with_operator!(self, t => found_or_none(coarse_search(t, x, y, d, horizon, p)))
    }

    /// J-set witness with the `1/i` schedule of depth `m`, or `None`.
    #[pyo3(signature = (x, y, d, m = 5, k_cap = 10_000, budget = 1_000_000, seed = 0, norm = "inf", mix = false))]
    #[allow(clippy::too_many_arguments)]
    fn j_witness(&self, x: &str, y: &str, d: &str, m: usize, k_cap: u64, budget: u64, seed: u64, norm: &str, mix: bool) -> PyResult<Option<String>> {
        let lim = Limits { m, k_cap, budget, seed, norm: norm_of(norm)? };
        with_operator!(self, t => found_or_none(j_search(t, x, y, d, &lim, mix)))
    }

    /// Witness for `D(x,T,d)`, orbit branch first, or `None`.
    #[pyo3(signature = (x, y, d, horizon = 10_000, m = 5, k_cap = 10_000, budget = 1_000_000, seed = 0, norm = "inf"))]
    #[allow(clippy::too_many_arguments)]
    fn d_witness(&self, x: &str, y: &str, d: &str, horizon: u64, m: usize, k_cap: u64, budget: u64, seed: u64, norm: &str) -> PyResult<Option<String>> {
        let lim = Limits { m, k_cap, budget, seed, norm: norm_of(norm)? };
        with_operator!(self, t => found_or_none(d_search(t, x, y, d, horizon, &lim)))
    }

    fn __repr__(&self) -> String {
        format!("Operator({}, mode={})", self.to_json(), self.mode())
    }
}

/// Exact membership of `x` in the cone generated by the open ball
/// `B(center, radius)`.
#[pyfunction]
#[pyo3(signature = (center, radius, x, norm = "2", index_set = "Z"))]
fn cone_contains(center: &str, radius: &str, x: &str, norm: &str, index_set: &str) -> PyResult<bool> {
    let set: IndexSet = index_set.parse().map_err(py_err)?;
    let c = vector::<Exact>(center, set).map_err(py_err)?;
    let cone = OpenCone::new(c, parse_ratio(radius).map_err(py_err)?, norm_of(norm)?).map_err(py_err)?;
    cone.contains(&vector::<Exact>(x, set).map_err(py_err)?).map_err(py_err)
}

#[pyfunction]
fn certificate_names() -> Vec<&'static str> {
    CERTIFICATE_NAMES.to_vec()
}

/// Report JSON of one certificate.
#[pyfunction]
#[pyo3(signature = (name, mode = "exact", seed = 0, overrides = None))]
fn run_certificate(py: Python<'_>, name: &str, mode: &str, seed: u64, overrides: Option<&str>) -> PyResult<String> {
    let mode = mode_of(mode)?;
    let overrides: Option<Value> =
        overrides.map(serde_json::from_str).transpose().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py.detach(|| run_one(name, mode, overrides.as_ref(), seed)).map_err(py_err)?;
    Ok(report.to_json().to_string())
}

/// `(name, verdict)` for every certificate.
#[pyfunction]
#[pyo3(signature = (seed = 0, mode = "exact"))]
fn run_all(py: Python<'_>, seed: u64, mode: &str) -> PyResult<Vec<(String, String)>> {
    let cfg = SuiteConfig { seed, mode: mode_of(mode)?, ..SuiteConfig::default() };
    let reports = py.detach(|| run_suite(&cfg)).map_err(py_err)?;
    Ok(reports.into_iter().map(|r| (r.name, r.verdict.as_str().to_string())).collect())
}

#[pymodule]
fn orbitscope_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(cone_contains, m)?)?;
    m.add_function(wrap_pyfunction!(certificate_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(run_all, m)?)?;
    Ok(())
}
