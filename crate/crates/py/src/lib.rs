//! Python bindings: weight generation and aggregation, the
//! location-transportation generator, two-stage problems and the three
//! solvers.

use std::time::Duration;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::wowa::loctrans::{self, WeightChoice};
use ::wowa::{DecompositionParams, Method, ModelError, SolveError, WeightKind, WeightVector};

create_exception!(wowa_py, SolverError, PyRuntimeError);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solver_err(e: SolveError) -> PyErr {
    match e {
        SolveError::Model(m) => value_err(m),
        other => SolverError::new_err(other.to_string()),
    }
}

fn preferential(w: Vec<f64>) -> PyResult<WeightVector> {
    WeightVector::new(w, WeightKind::Preferential).map_err(value_err)
}

fn importance(p: Vec<f64>) -> PyResult<WeightVector> {
    WeightVector::new(p, WeightKind::Importance).map_err(value_err)
}

/// Preferential weights `w_j = g_α(j/K) - g_α((j-1)/K)`.
#[pyfunction]
fn generate_weights_galpha(alpha: f64, k: usize) -> PyResult<Vec<f64>> {
    ::wowa::generate_weights_galpha(alpha, k)
        .map(WeightVector::into_entries)
        .map_err(value_err)
}

/// Weighted OWA of `a` under preferential `w` and importance `p`.
#[pyfunction(name = "wowa")]
fn py_wowa(w: Vec<f64>, p: Vec<f64>, a: Vec<f64>) -> PyResult<f64> {
    ::wowa::wowa(&preferential(w)?, &importance(p)?, &a).map_err(value_err)
}

#[pyfunction]
fn owa(w: Vec<f64>, a: Vec<f64>) -> PyResult<f64> {
    ::wowa::owa(&preferential(w)?, &a).map_err(value_err)
}

/// Maximum over all orderings; `w` must be nonincreasing and `K ≤ 7`.
#[pyfunction]
fn wowa_bruteforce(w: Vec<f64>, p: Vec<f64>, a: Vec<f64>) -> PyResult<f64> {
    ::wowa::wowa_bruteforce_permutations(&preferential(w)?, &importance(p)?, &a).map_err(value_err)
}

/// WOWA of `q` computed by linear programming.
#[pyfunction]
fn wowa_lp_value(q: Vec<f64>, w: Vec<f64>, p: Vec<f64>) -> PyResult<f64> {
    ::wowa::direct::wowa_lp_value(&q, &preferential(w)?, &importance(p)?).map_err(value_err)
}

fn weight_choice(weights: &str, alpha: f64) -> PyResult<WeightChoice> {
    match weights {
        "galpha" => Ok(WeightChoice::GAlpha(alpha)),
        "uniform" | "riskneutral" => Ok(WeightChoice::RiskNeutral),
        "robust" => Ok(WeightChoice::Robust),
        other => Err(PyValueError::new_err(format!(
            "unknown weights `{other}`; expected galpha, uniform, riskneutral or robust"
        ))),
    }
}

#[pyclass(name = "SolveReport", module = "wowa_py", frozen)]
struct PySolveReport {
    inner: ::wowa::SolveReport,
}

#[pymethods]
impl PySolveReport {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn lower_bound(&self) -> f64 {
        self.inner.lower_bound
    }

    #[getter]
    fn first_stage(&self) -> Vec<f64> {
        self.inner.first_stage.clone()
    }

    #[getter]
    fn recourse(&self) -> Vec<f64> {
        self.inner.recourse.clone()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn feasibility_cuts(&self) -> usize {
        self.inner.feasibility_cuts
    }

    #[getter]
    fn optimality_cuts(&self) -> usize {
        self.inner.optimality_cuts
    }

    #[getter]
    fn wall_time_s(&self) -> f64 {
        self.inner.wall_time_s
    }

    #[getter]
    fn master_pct(&self) -> f64 {
        self.inner.master_pct()
    }

    #[getter]
    fn sub_pct(&self) -> f64 {
        self.inner.sub_pct()
    }

    #[getter]
    fn final_gap(&self) -> f64 {
        self.inner.final_gap
    }

    /// `"gap_closed"`, `"iter_limit"`, `"time_limit"` or `"infeasible"`.
    #[getter]
    fn termination(&self) -> &'static str {
        match self.inner.termination {
            ::wowa::Termination::GapClosed => "gap_closed",
            ::wowa::Termination::IterLimit => "iter_limit",
            ::wowa::Termination::TimeLimit => "time_limit",
            ::wowa::Termination::Infeasible => "infeasible",
        }
    }

    /// Per-iteration `(lower_bound, best_upper_bound)` pairs.
    #[getter]
    fn trace(&self) -> Vec<(f64, f64)> {
        self.inner
            .trace
            .iter()
            .map(|t| (t.lower_bound, t.best_upper_bound))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ::wowa::SolveReport::from_json(text)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveReport(method={}, objective={}, iterations={}, termination={})",
            self.method(),
            self.inner.objective,
            self.inner.iterations,
            self.termination()
        )
    }
}

#[pyclass(name = "TwoStageProblem", module = "wowa_py", frozen)]
struct PyTwoStageProblem {
    inner: ::wowa::TwoStageProblem,
}

#[pymethods]
impl PyTwoStageProblem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ::wowa::TwoStageProblem::from_json(text)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        ::wowa::model::load_instance(path)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        ::wowa::model::save_instance(&self.inner, path).map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n1(&self) -> usize {
        self.inner.n1()
    }

    #[getter]
    fn n2(&self) -> usize {
        self.inner.n2()
    }

    #[getter]
    fn num_scenarios(&self) -> usize {
        self.inner.num_scenarios()
    }

    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w().entries().to_vec()
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.p().entries().to_vec()
    }

    /// Copy with new preferential and importance weights.
    fn with_weights(&self, w: Vec<f64>, p: Vec<f64>) -> PyResult<Self> {
        self.inner
            .with_weights(preferential(w)?, importance(p)?)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    /// `Q_1(x), ..., Q_K(x)`.
    fn recourse_values(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.recourse_values(&x).map_err(value_err)
    }

    /// `c'x + wowa(Q(x))`.
    fn eval_objective(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval_objective(&x).map_err(value_err)
    }

    /// Solves with `"direct"`, `"benders"` or `"subgradient"`. A solve that
    /// stops at a limit returns its partial report; check `termination`.
    #[pyo3(signature = (method = "benders", epsilon = 1e-6, max_iter = 10_000, time_limit = 3600.0, theta_floor = None, parallel = false))]
    fn solve(
        &self,
        py: Python<'_>,
        method: &str,
        epsilon: f64,
        max_iter: usize,
        time_limit: f64,
        theta_floor: Option<f64>,
        parallel: bool,
    ) -> PyResult<PySolveReport> {
        let method: Method = method.parse().map_err(PyValueError::new_err)?;
        if !(time_limit > 0.0) || !time_limit.is_finite() {
            return Err(PyValueError::new_err("time_limit must be positive"));
        }
        let params = DecompositionParams {
            epsilon,
            max_iter,
            time_limit: Duration::from_secs_f64(time_limit),
            theta_floor,
            parallel,
        };
        let problem = &self.inner;
        let outcome = py.detach(|| ::wowa::solve(problem, method, &params));
        match outcome {
            Ok(inner) => Ok(PySolveReport { inner }),
            Err(e) => match e.report() {
                Some(r) if !matches!(e, SolveError::Infeasible(_)) => {
                    Ok(PySolveReport { inner: r.clone() })
                }
                _ => Err(solver_err(e)),
            },
        }
    }
}

#[pyclass(name = "LocTransInstance", module = "wowa_py", frozen)]
struct PyLocTransInstance {
    inner: loctrans::LocTransInstance,
}

#[pymethods]
impl PyLocTransInstance {
    /// Deterministic instance with `n` customers, `m` sites and `k`
    /// scenarios.
    #[staticmethod]
    #[pyo3(signature = (n, m, k, seed = 0))]
    fn generate(n: usize, m: usize, k: usize, seed: u64) -> PyResult<Self> {
        if n == 0 || m == 0 || k == 0 {
            return Err(PyValueError::new_err("n, m and k must be positive"));
        }
        Ok(Self {
            inner: loctrans::generate(n, m, k, seed),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        loctrans::LocTransInstance::from_json(text)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        loctrans::LocTransInstance::load(path)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn capacity(&self) -> Vec<f64> {
        self.inner.capacity.clone()
    }

    #[getter]
    fn probability(&self) -> Vec<f64> {
        self.inner.probability.clone()
    }

    /// The two-stage problem under `"galpha"` (with `alpha`), `"uniform"`,
    /// `"riskneutral"` or `"robust"` weights.
    #[pyo3(signature = (weights = "galpha", alpha = 0.1))]
    fn problem(&self, weights: &str, alpha: f64) -> PyResult<PyTwoStageProblem> {
        loctrans::problem_for(&self.inner, weight_choice(weights, alpha)?)
            .map(|inner| PyTwoStageProblem { inner })
            .map_err(|e: ModelError| value_err(e))
    }

    /// First-stage, expected and worst-case cost of a first-stage vector.
    fn evaluate<'py>(&self, py: Python<'py>, first_stage: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let e = loctrans::evaluate_solution(&self.inner, &first_stage).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("first_stage_cost", e.first_stage_cost)?;
        d.set_item("expected_cost", e.expected_cost)?;
        d.set_item("worst_case_cost", e.worst_case_cost)?;
        Ok(d)
    }
}

#[pymodule]
fn wowa_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(generate_weights_galpha, m)?)?;
    m.add_function(wrap_pyfunction!(py_wowa, m)?)?;
    m.add_function(wrap_pyfunction!(owa, m)?)?;
    m.add_function(wrap_pyfunction!(wowa_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(wowa_lp_value, m)?)?;
    m.add_class::<PySolveReport>()?;
    m.add_class::<PyTwoStageProblem>()?;
    m.add_class::<PyLocTransInstance>()?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    Ok(())
}
