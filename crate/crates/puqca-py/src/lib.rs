//! Python bindings for the puqca toolkit.
//!
//! The module mirrors the Rust surface: `Gate`/`Rule` for the general
//! brick-wall automaton, `FermionRule` for the six-angle simulable regime,
//! `Configuration` for ring states, and free functions for fitness,
//! profiles, the classical bound, and the seeded search.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use puqca::dct::{self, Backend, ClassifierSpec};
use puqca::fermion::{self, Boundary, OccupationSet};
use puqca::ga::{self, Aggregation, GAConfig, ObjectiveSpec, RuleMode};
use puqca::model::{self, gate_matrix, GateParams, PUQCARule, RuleSpec};
use puqca::statevector;

fn err(e: puqca::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_boundary(s: &str) -> PyResult<Boundary> {
    match s {
        "weight-parity" => Ok(Boundary::WeightParity),
        "periodic" => Ok(Boundary::Periodic),
        "antiperiodic" => Ok(Boundary::Antiperiodic),
        other => Err(PyValueError::new_err(format!(
            "unknown boundary {other:?} (expected weight-parity, periodic, or antiperiodic)"
        ))),
    }
}

fn parse_backend(s: &str) -> PyResult<Backend> {
    match s {
        "sector" => Ok(Backend::Sector),
        "dense" => Ok(Backend::Dense),
        other => Err(PyValueError::new_err(format!(
            "unknown backend {other:?} (expected sector or dense)"
        ))),
    }
}

/// One two-qubit gate in the five-angle parametrization.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Gate {
    inner: GateParams,
}

#[pymethods]
impl Gate {
    #[new]
    #[pyo3(signature = (theta, alpha, gamma, xi, phi = 0.0))]
    fn new(theta: f64, alpha: f64, gamma: f64, xi: f64, phi: f64) -> Self {
        Self {
            inner: GateParams::new(theta, alpha, gamma, xi, phi),
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: GateParams::identity(),
        }
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }

    #[pyo3(signature = (tol = 1e-12))]
    fn is_simulable(&self, tol: f64) -> bool {
        self.inner.is_simulable(tol)
    }

    /// The 4x4 unitary in the |00>, |01>, |10>, |11> basis.
    fn unitary(&self) -> Vec<Vec<Complex64>> {
        gate_matrix(&self.inner).iter().map(|row| row.to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        let g = &self.inner;
        format!(
            "Gate(theta={}, alpha={}, gamma={}, xi={}, phi={})",
            g.theta, g.alpha, g.gamma, g.xi, g.phi
        )
    }
}

/// A brick-wall update rule: `w0` on even bonds, then `w1` on odd bonds.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Rule {
    inner: PUQCARule,
}

#[pymethods]
impl Rule {
    #[new]
    fn new(w0: Gate, w1: Gate) -> Self {
        Self {
            inner: PUQCARule::new(w0.inner, w1.inner),
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: PUQCARule::identity(),
        }
    }

    #[getter]
    fn w0(&self) -> Gate {
        Gate { inner: self.inner.w0 }
    }

    #[getter]
    fn w1(&self) -> Gate {
        Gate { inner: self.inner.w1 }
    }

    #[pyo3(signature = (tol = 1e-12))]
    fn is_simulable(&self, tol: f64) -> bool {
        self.inner.is_simulable(tol)
    }

    #[pyo3(signature = (label = None))]
    fn to_json(&self, label: Option<&str>) -> String {
        model::serialize_rule(&RuleSpec::Full(self.inner), label)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match model::parse_rule(text).map_err(err)? {
            RuleSpec::Full(inner) => Ok(Self { inner }),
            RuleSpec::Fermionic(_) => Err(PyValueError::new_err(
                "file holds a fermionic rule; use FermionRule.from_json",
            )),
        }
    }

    fn __repr__(&self) -> String {
        format!("Rule(w0={}, w1={})", Gate { inner: self.inner.w0 }.__repr__(), Gate { inner: self.inner.w1 }.__repr__())
    }
}

/// A six-angle rule in the number-conserving simulable regime.
#[pyclass(frozen, from_py_object, name = "FermionRule")]
#[derive(Clone)]
struct PyFermionRule {
    inner: model::FermionRule,
}

#[pymethods]
impl PyFermionRule {
    #[new]
    fn new(theta1: f64, xi1: f64, gamma1: f64, theta2: f64, xi2: f64, gamma2: f64) -> Self {
        Self {
            inner: model::FermionRule::new(theta1, xi1, gamma1, theta2, xi2, gamma2),
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: model::FermionRule::identity(),
        }
    }

    fn to_full_rule(&self) -> Rule {
        Rule {
            inner: self.inner.to_full_rule(),
        }
    }

    #[pyo3(signature = (label = None))]
    fn to_json(&self, label: Option<&str>) -> String {
        model::serialize_rule(&RuleSpec::Fermionic(self.inner), label)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match model::parse_rule(text).map_err(err)? {
            RuleSpec::Fermionic(inner) => Ok(Self { inner }),
            RuleSpec::Full(_) => Err(PyValueError::new_err(
                "file holds a full rule; use Rule.from_json",
            )),
        }
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!(
            "FermionRule(theta1={}, xi1={}, gamma1={}, theta2={}, xi2={}, gamma2={})",
            r.theta1, r.xi1, r.gamma1, r.theta2, r.xi2, r.gamma2
        )
    }
}

/// A ring configuration; site 0 is the leftmost character of the bit string.
#[pyclass(frozen, from_py_object, name = "Configuration")]
#[derive(Clone)]
struct PyConfiguration {
    inner: model::Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(bits: &str) -> PyResult<Self> {
        Ok(Self {
            inner: model::Configuration::parse_bits(bits).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_word(word: u64, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: model::Configuration::from_word(word, n).map_err(err)?,
        })
    }

    fn weight(&self) -> u32 {
        self.inner.weight()
    }

    fn word(&self) -> u64 {
        self.inner.index()
    }

    fn occupied_sites(&self) -> Vec<usize> {
        self.inner.occupied_sites()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Configuration(\"{}\")", self.inner)
    }
}

/// Exact classification fitness over all valid inputs of size n.
#[pyfunction]
#[pyo3(signature = (rule, n, t, p, delta = 0.0, backend = "sector"))]
fn fitness<'py>(
    py: Python<'py>,
    rule: Rule,
    n: usize,
    t: usize,
    p: usize,
    delta: f64,
    backend: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = ClassifierSpec::new(n, t, p, delta).map_err(err)?;
    let valid = dct::enumerate_valid(n).map_err(err)?;
    let rep = dct::fitness(&rule.inner, &spec, &valid, parse_backend(backend)?).map_err(err)?;
    report_dict(py, &rep)
}

/// Exact fitness through the momentum-space fermionic path.
#[pyfunction]
#[pyo3(signature = (rule, n, t, p, delta = 0.0, boundary = "weight-parity"))]
fn fermion_fitness<'py>(
    py: Python<'py>,
    rule: PyFermionRule,
    n: usize,
    t: usize,
    p: usize,
    delta: f64,
    boundary: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = ClassifierSpec::new(n, t, p, delta).map_err(err)?;
    let rep = fermion::fermion_fitness_with(&rule.inner, &spec, parse_boundary(boundary)?)
        .map_err(err)?;
    report_dict(py, &rep)
}

fn report_dict<'py>(py: Python<'py>, rep: &dct::FitnessReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("fitness", rep.fitness)?;
    d.set_item("wrong", rep.wrong_count)?;
    d.set_item("half", rep.half_error_count)?;
    d.set_item("total", rep.total)?;
    Ok(d)
}

/// Per-site excitation probabilities after t steps (statevector path).
#[pyfunction]
fn profile(rule: Rule, bits: &str, t: usize) -> PyResult<Vec<f64>> {
    let b = model::Configuration::parse_bits(bits).map_err(err)?;
    Ok(statevector::marginal_profile(&statevector::evolve(
        &b, &rule.inner, t,
    )))
}

/// Per-site excitation probabilities after t steps (momentum path).
#[pyfunction]
#[pyo3(signature = (rule, bits, t, boundary = "weight-parity"))]
fn fermion_profile(rule: PyFermionRule, bits: &str, t: usize, boundary: &str) -> PyResult<Vec<f64>> {
    let b = model::Configuration::parse_bits(bits).map_err(err)?;
    let set = OccupationSet::from_configuration(&b);
    let boundary = parse_boundary(boundary)?;
    (0..b.n())
        .map(|site| {
            fermion::occupation_probability_with(
                &rule.inner,
                b.n(),
                t,
                &set,
                fermion::site_label(site),
                boundary,
            )
            .map_err(err)
        })
        .collect()
}

/// Best fitness any site-measured permutation rule can reach on n cells.
#[pyfunction]
fn classical_bound(n: usize) -> PyResult<f64> {
    dct::classical_bound(n).map_err(err)
}

/// Single-site marginal of the weight-i uniform superposition: i/n.
#[pyfunction]
fn dicke_marginal(n: usize, i: usize, p: usize) -> PyResult<f64> {
    puqca::dicke::dicke_marginal(n, i, p).map_err(err)
}

/// Seeded roulette/mutation search. Returns a dict with the best rule,
/// its fitness, whether the run solved the task, and generations used.
#[pyfunction]
#[pyo3(signature = (
    n, t, p = 1, delta = 0.0, pop = 100, gens = 100, pm = 0.36, sigma = 0.45,
    seed = 1, fermion = false, elitism = false, boundary = "weight-parity"
))]
#[allow(clippy::too_many_arguments)]
fn search<'py>(
    py: Python<'py>,
    n: usize,
    t: usize,
    p: usize,
    delta: f64,
    pop: usize,
    gens: usize,
    pm: f64,
    sigma: f64,
    seed: u64,
    fermion: bool,
    elitism: bool,
    boundary: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = if fermion { RuleMode::Fermionic } else { RuleMode::Full };
    let cfg = GAConfig {
        population_size: pop,
        max_generations: gens,
        p_m: pm,
        sigma,
        seed,
        elitism,
        objective: ObjectiveSpec {
            mode,
            sizes: vec![(n, t)],
            p,
            delta,
            aggregation: Aggregation::Mean,
            boundary: parse_boundary(boundary)?,
        },
    };
    let out = ga::evolve_search(&cfg).map_err(err)?;
    let d = PyDict::new(py);
    match out.best.to_rule(mode).map_err(err)? {
        RuleSpec::Full(inner) => d.set_item("rule", Rule { inner })?,
        RuleSpec::Fermionic(inner) => d.set_item("rule", PyFermionRule { inner })?,
    }
    d.set_item("fitness", out.best.fitness)?;
    d.set_item("solved", out.solved)?;
    d.set_item("generations", out.generations_run)?;
    Ok(d)
}

pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Gate>()?;
    m.add_class::<Rule>()?;
    m.add_class::<PyFermionRule>()?;
    m.add_class::<PyConfiguration>()?;
    m.add_function(wrap_pyfunction!(fitness, m)?)?;
    m.add_function(wrap_pyfunction!(fermion_fitness, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(fermion_profile, m)?)?;
    m.add_function(wrap_pyfunction!(classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dicke_marginal, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    Ok(())
}

#[pymodule]
fn puqca_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
