//! Python bindings for `condind`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use condind::harness::{self, ExperimentPlan, MinMOptions};
use condind::instances::{self, EnsembleSpec, Family};
use condind::{io, testers, Error, Mode, TesterConfig, TesterInput};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExhausted(_) | Error::EnumerationBudget(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// A joint distribution over `X × Y × Z`.
#[pyclass(name = "JointDistribution", module = "pycondind", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyJoint {
    inner: condind::JointDistribution,
}

#[pymethods]
impl PyJoint {
    /// `mass` is indexed `(z * l1 + x) * l2 + y`.
    #[new]
    fn new(l1: usize, l2: usize, n: usize, mass: Vec<f64>) -> PyResult<Self> {
        let dims = condind::Dims::new(l1, l2, n).map_err(to_py)?;
        Ok(PyJoint { inner: condind::JointDistribution::new(dims, mass).map_err(to_py)? })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(|e| to_py(e.into()))?;
        Ok(PyJoint { inner: io::read_distribution(std::io::BufReader::new(f)).map_err(to_py)? })
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        let d = self.inner.dims();
        (d.l1, d.l2, d.n)
    }

    #[getter]
    fn mass(&self) -> Vec<f64> {
        self.inner.mass().to_vec()
    }

    #[getter]
    fn is_normalized(&self) -> bool {
        self.inner.is_normalized()
    }

    fn normalize(&self) -> PyResult<(Self, f64)> {
        let (d, t) = self.inner.normalize().map_err(to_py)?;
        Ok((PyJoint { inner: d }, t))
    }

    fn ci_distance_proxy(&self) -> f64 {
        condind::ci_distance_proxy(&self.inner)
    }

    /// `I(X; Y | Z)` in bits.
    fn cmi(&self) -> f64 {
        condind::conditional_mutual_information(&self.inner)
    }

    fn mixture_q(&self) -> Self {
        PyJoint { inner: condind::mixture_q(&self.inner) }
    }

    /// `count` i.i.d. samples as 0-based `(x, y, z)` tuples.
    fn sample(&self, count: usize, seed: u64) -> PyResult<Vec<(usize, usize, usize)>> {
        let s = condind::sample_fixed(&self.inner, count, seed).map_err(to_py)?;
        Ok(s.into_iter().map(|t| (t.x, t.y, t.z)).collect())
    }

    fn sample_poissonized(&self, m: f64, seed: u64) -> PyResult<Vec<(usize, usize, usize)>> {
        let s = condind::sample_poissonized(&self.inner, m, seed).map_err(to_py)?;
        Ok(s.into_iter().map(|t| (t.x, t.y, t.z)).collect())
    }

    fn write(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(|e| to_py(e.into()))?;
        io::write_distribution(std::io::BufWriter::new(f), &self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let (l1, l2, n) = self.dims();
        format!("JointDistribution(l1={l1}, l2={l2}, n={n})")
    }
}

#[pyclass(name = "Verdict", module = "pycondind", frozen, get_all)]
struct PyVerdict {
    accept: bool,
    statistic_a: f64,
    threshold_tau: f64,
    m_used: u64,
    samples_drawn: u64,
    /// `(z, sigma, omega, a_z)` for each bin that contributed.
    per_bin: Vec<(usize, u64, f64, f64)>,
}

#[pymethods]
impl PyVerdict {
    fn __repr__(&self) -> String {
        format!(
            "Verdict(accept={}, statistic_a={}, threshold_tau={}, m_used={})",
            self.accept, self.statistic_a, self.threshold_tau, self.m_used
        )
    }
}

impl From<condind::Verdict> for PyVerdict {
    fn from(v: condind::Verdict) -> Self {
        PyVerdict {
            accept: v.accept,
            statistic_a: v.statistic_a,
            threshold_tau: v.threshold_tau,
            m_used: v.m_used,
            samples_drawn: v.samples_drawn,
            per_bin: v.per_bin.iter().map(|b| (b.z, b.sigma, b.omega, b.a_z)).collect(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn config(mode: &str, eps: f64, m: Option<u64>, tau: Option<f64>, beta: f64, zeta: f64, seed: u64) -> PyResult<TesterConfig> {
    let mut cfg = TesterConfig { beta, zeta, ..TesterConfig::new(parse::<Mode>(mode)?, eps) }.with_seed(seed);
    cfg.m_override = m;
    cfg.tau_override = tau;
    Ok(cfg)
}

/// Runs a tester on a distribution (Poissonized sampling).
#[pyfunction]
#[pyo3(signature = (dist, mode, eps, m=None, tau=None, beta=2.0, zeta=2.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn test(
    dist: &PyJoint,
    mode: &str,
    eps: f64,
    m: Option<u64>,
    tau: Option<f64>,
    beta: f64,
    zeta: f64,
    seed: u64,
) -> PyResult<PyVerdict> {
    let cfg = config(mode, eps, m, tau, beta, zeta, seed)?;
    Ok(testers::run_tester(TesterInput::Distribution(&dist.inner), &cfg).map_err(to_py)?.into())
}

/// Runs a tester on a fixed sample of 0-based `(x, y, z)` triples.
#[pyfunction]
#[pyo3(signature = (samples, dims, mode, eps, m=None, tau=None, beta=2.0, zeta=2.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn test_samples(
    samples: Vec<(usize, usize, usize)>,
    dims: (usize, usize, usize),
    mode: &str,
    eps: f64,
    m: Option<u64>,
    tau: Option<f64>,
    beta: f64,
    zeta: f64,
    seed: u64,
) -> PyResult<PyVerdict> {
    let d = condind::Dims::new(dims.0, dims.1, dims.2).map_err(to_py)?;
    let triples = samples.into_iter().map(|(x, y, z)| condind::SampleTriple { x, y, z }).collect();
    let set = condind::SampleSet::new(d, triples).map_err(to_py)?;
    let cfg = config(mode, eps, m, tau, beta, zeta, seed)?;
    Ok(testers::run_tester(TesterInput::Samples(&set), &cfg).map_err(to_py)?.into())
}

#[pyfunction]
#[pyo3(signature = (family, n, eps, m=1.0, l1=2, l2=2, seed=0))]
fn generate(family: &str, n: usize, eps: f64, m: f64, l1: usize, l2: usize, seed: u64) -> PyResult<(PyJoint, f64)> {
    let spec = EnsembleSpec::new(parse::<Family>(family)?, n, eps, seed).with_m(m).with_sides(l1, l2);
    let inst = instances::generate(&spec).map_err(to_py)?;
    Ok((PyJoint { inner: inst.dist }, inst.raw_total))
}

#[pyfunction]
fn families() -> Vec<&'static str> {
    Family::ALL.iter().map(|f| f.name()).collect()
}

#[pyfunction]
#[pyo3(signature = (n, eps, beta=2.0))]
fn sample_complexity_binary(n: usize, eps: f64, beta: f64) -> u64 {
    testers::sample_complexity_binary(n, eps, beta)
}

/// `(full, simplified)`.
#[pyfunction]
#[pyo3(signature = (n, l1, l2, eps, zeta=2.0))]
fn sample_complexity_general(n: usize, l1: usize, l2: usize, eps: f64, zeta: f64) -> (u64, u64) {
    let c = testers::sample_complexity_general(n, l1, l2, eps, zeta);
    (c.full, c.simplified)
}

/// The weighted ℓ₂ estimator on a row-major count table.
#[pyfunction]
#[pyo3(signature = (counts, l1, l2, weights=None))]
fn l2_estimator(counts: Vec<u64>, l1: usize, l2: usize, weights: Option<Vec<f64>>) -> PyResult<f64> {
    let w = weights.unwrap_or_else(|| vec![1.0; l1 * l2]);
    condind::l2_estimator(&counts, l1, l2, &w).map_err(to_py)
}

/// Exact unbiased estimate of a polynomial in the text format, returned as
/// a rational string.
#[pyfunction]
fn unbiased_estimate(poly: &str, num_vars: usize, counts: Vec<u64>) -> PyResult<String> {
    let q = io::parse_polynomial(poly, num_vars).map_err(to_py)?;
    let v = condind::unbiased_estimate(&q, &condind::Fingerprint::new(counts)).map_err(to_py)?;
    Ok(v.to_string())
}

/// Row-major `a` grid from the first `t1` (rows) and next `t2` (columns)
/// samples of one bin.
#[pyfunction]
fn flattening_grid(samples: Vec<(usize, usize)>, l1: usize, l2: usize, t1: usize, t2: usize) -> PyResult<Vec<u64>> {
    Ok(condind::implicit_flattening(&samples, l1, l2, t1, t2).map_err(to_py)?.grid())
}

#[pyfunction]
fn moment_match_check() -> bool {
    instances::moment_match_check(3).passed()
}

/// Runs a plan given as `key=value` text and returns the CSV.
#[pyfunction]
fn power_experiment(py: Python<'_>, plan: &str) -> PyResult<String> {
    let plan = ExperimentPlan::parse(plan).map_err(to_py)?;
    let rows = py.detach(|| harness::run_power_experiment(&plan)).map_err(to_py)?;
    Ok(harness::to_csv(&rows))
}

#[pyfunction]
#[pyo3(signature = (n, eps, null, alt, target=0.75, seed=0, mode="binary", trials=100))]
#[allow(clippy::too_many_arguments)]
fn find_min_m(
    py: Python<'_>,
    n: usize,
    eps: f64,
    null: &str,
    alt: &str,
    target: f64,
    seed: u64,
    mode: &str,
    trials: usize,
) -> PyResult<u64> {
    let pair = (parse::<Family>(null)?, parse::<Family>(alt)?);
    let opts = MinMOptions { mode: parse(mode)?, trials, ..MinMOptions::default() };
    py.detach(|| harness::find_min_m(n, eps, pair, target, seed, &opts)).map_err(to_py)
}

#[pymodule]
fn pycondind(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJoint>()?;
    m.add_class::<PyVerdict>()?;
    m.add_function(wrap_pyfunction!(test, m)?)?;
    m.add_function(wrap_pyfunction!(test_samples, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(sample_complexity_binary, m)?)?;
    m.add_function(wrap_pyfunction!(sample_complexity_general, m)?)?;
    m.add_function(wrap_pyfunction!(l2_estimator, m)?)?;
    m.add_function(wrap_pyfunction!(unbiased_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(flattening_grid, m)?)?;
    m.add_function(wrap_pyfunction!(moment_match_check, m)?)?;
    m.add_function(wrap_pyfunction!(power_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(find_min_m, m)?)?;
    Ok(())
}
