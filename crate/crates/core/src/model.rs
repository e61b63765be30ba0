//! The two-stage problem
//!
//! ```text
//! min  c'x + wowa_(w,p)(Q_1(x), ..., Q_K(x))
//! s.t. x ∈ X, x ≥ 0
//! Q_k(x) = min { d_k'y : B_k y = h_k - A_k x, y ≥ 0 }
//! ```
//!
//! and its recourse evaluation. `Q_k(x)` is always computed through the dual
//! `max { λ'(h_k - A_k x) : B_k'λ ≤ d_k }` so that a single solve yields the
//! value, the cut multipliers, or an infeasibility ray.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{wowa, WeightError, WeightKind, WeightVector};
use crate::lp::{
    LpEngine, LpError, LpModel, LpOutcome, Relation, Sense, SimplexEngine, FEASIBILITY_TOL,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{location}: {message}")]
    Schema { location: String, message: String },
    #[error("{location}: {source}")]
    Weights {
        location: String,
        source: WeightError,
    },
    #[error("scenario index {index} out of range (K = {k})")]
    ScenarioIndex { index: usize, k: usize },
    #[error("first-stage vector has length {got}, expected {expected}")]
    FirstStageLength { expected: usize, got: usize },
    #[error("recourse problem of scenario {scenario} is unbounded below")]
    RecourseUnbounded { scenario: usize },
    #[error("first-stage decision leaves scenario {scenario} without a feasible recourse")]
    InfeasibleFirstStage { scenario: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
}

fn schema(location: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Schema {
        location: location.into(),
        message: message.into(),
    }
}

/// One row of the first-stage system `coeffs · x  rel  rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStageRow {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// Scenario data `(d_k, A_k, B_k, h_k)`, matrices stored as dense row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub d: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

impl Scenario {
    pub fn rows(&self) -> usize {
        self.h.len()
    }

    /// `h - A x`.
    pub fn residual_rhs(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.h)
            .map(|(row, h)| h - dot(row, x))
            .collect()
    }

    /// `λ'A`, a vector over the first-stage variables.
    pub fn mul_a_transpose(&self, lambda: &[f64], n1: usize) -> Vec<f64> {
        let mut out = vec![0.0; n1];
        for (row, &l) in self.a.iter().zip(lambda) {
            if l != 0.0 {
                for (o, a) in out.iter_mut().zip(row) {
                    *o += l * a;
                }
            }
        }
        out
    }

    /// `λ'B`, a vector over the second-stage variables.
    pub fn mul_b_transpose(&self, lambda: &[f64], n2: usize) -> Vec<f64> {
        let mut out = vec![0.0; n2];
        for (row, &l) in self.b.iter().zip(lambda) {
            if l != 0.0 {
                for (o, b) in out.iter_mut().zip(row) {
                    *o += l * b;
                }
            }
        }
        out
    }

    /// Largest component of `λ'B - d`; nonpositive for dual-feasible `λ`.
    pub fn dual_residual(&self, lambda: &[f64]) -> f64 {
        self.mul_b_transpose(lambda, self.d.len())
            .iter()
            .zip(&self.d)
            .map(|(lb, d)| lb - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecourseResult {
    Finite {
        value: f64,
        /// Optimal dual multipliers, one per scenario row.
        lambda: Vec<f64>,
        /// Optimal second-stage decision.
        y: Vec<f64>,
    },
    /// `γ'B ≤ 0` and `margin = γ'(h - A x) > 0`.
    InfeasibleWithRay { ray: Vec<f64>, margin: f64 },
}

impl RecourseResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            RecourseResult::Finite { value, .. } => Some(*value),
            RecourseResult::InfeasibleWithRay { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, RecourseResult::Finite { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageProblem {
    c: Vec<f64>,
    first_stage_rows: Vec<FirstStageRow>,
    binary_mask: Vec<bool>,
    scenarios: Vec<Scenario>,
    p: WeightVector,
    w: WeightVector,
}

impl TwoStageProblem {
    pub fn new(
        c: Vec<f64>,
        first_stage_rows: Vec<FirstStageRow>,
        binary_mask: Vec<bool>,
        scenarios: Vec<Scenario>,
        p: WeightVector,
        w: WeightVector,
    ) -> Result<Self, ModelError> {
        let problem = Self {
            c,
            first_stage_rows,
            binary_mask,
            scenarios,
            p,
            w,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let n1 = self.c.len();
        if n1 == 0 {
            return Err(schema("c", "at least one first-stage variable is required"));
        }
        check_finite("c", &self.c)?;
        if self.binary_mask.len() != n1 {
            return Err(schema(
                "binary_mask",
                format!("expected {n1} entries, got {}", self.binary_mask.len()),
            ));
        }
        for (i, row) in self.first_stage_rows.iter().enumerate() {
            let loc = format!("first_stage_rows[{i}]");
            if row.coeffs.len() != n1 {
                return Err(schema(
                    format!("{loc}.coeffs"),
                    format!("expected {n1} columns, got {}", row.coeffs.len()),
                ));
            }
            check_finite(&format!("{loc}.coeffs"), &row.coeffs)?;
            if !row.rhs.is_finite() {
                return Err(schema(format!("{loc}.rhs"), "value is not finite"));
            }
        }
        let k = self.scenarios.len();
        if k == 0 {
            return Err(schema("scenarios", "at least one scenario is required"));
        }
        let n2 = self.scenarios[0].d.len();
        for (s, sc) in self.scenarios.iter().enumerate() {
            let loc = format!("scenarios[{s}]");
            if sc.d.len() != n2 {
                return Err(schema(
                    format!("{loc}.d"),
                    format!("expected {n2} entries, got {}", sc.d.len()),
                ));
            }
            check_finite(&format!("{loc}.d"), &sc.d)?;
            check_finite(&format!("{loc}.h"), &sc.h)?;
            let rows = sc.h.len();
            for (name, mat, cols) in [("A", &sc.a, n1), ("B", &sc.b, n2)] {
                if mat.len() != rows {
                    return Err(schema(
                        format!("{loc}.{name}"),
                        format!("expected {rows} rows to match h, got {}", mat.len()),
                    ));
                }
                for (r, row) in mat.iter().enumerate() {
                    if row.len() != cols {
                        return Err(schema(
                            format!("{loc}.{name}[{r}]"),
                            format!("expected {cols} columns, got {}", row.len()),
                        ));
                    }
                    check_finite(&format!("{loc}.{name}[{r}]"), row)?;
                }
            }
        }
        for (name, vec) in [("p", &self.p), ("w", &self.w)] {
            if vec.len() != k {
                return Err(schema(
                    name,
                    format!("expected {k} entries (one per scenario), got {}", vec.len()),
                ));
            }
        }
        if !self.w.is_nonincreasing() {
            return Err(ModelError::Weights {
                location: "w".into(),
                source: WeightError::NotNonincreasing,
            });
        }
        Ok(())
    }

    pub fn n1(&self) -> usize {
        self.c.len()
    }

    pub fn n2(&self) -> usize {
        self.scenarios[0].d.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn first_stage_rows(&self) -> &[FirstStageRow] {
        &self.first_stage_rows
    }

    pub fn binary_mask(&self) -> &[bool] {
        &self.binary_mask
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn scenario(&self, k: usize) -> Result<&Scenario, ModelError> {
        self.scenarios.get(k).ok_or(ModelError::ScenarioIndex {
            index: k,
            k: self.scenarios.len(),
        })
    }

    pub fn p(&self) -> &WeightVector {
        &self.p
    }

    pub fn w(&self) -> &WeightVector {
        &self.w
    }

    /// The same problem under different weights.
    pub fn with_weights(&self, w: WeightVector, p: WeightVector) -> Result<Self, ModelError> {
        Self::new(
            self.c.clone(),
            self.first_stage_rows.clone(),
            self.binary_mask.clone(),
            self.scenarios.clone(),
            p,
            w,
        )
    }

    /// True when every `d_k ≥ 0`, which makes `Q_k ≥ 0` wherever finite.
    pub fn has_nonnegative_recourse_costs(&self) -> bool {
        self.scenarios.iter().all(|s| s.d.iter().all(|&d| d >= 0.0))
    }

    pub fn first_stage_cost(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    /// Adds `x`, the first-stage rows and binaries to `model`; returns the
    /// index of the first `x` column.
    pub(crate) fn add_first_stage(&self, model: &mut LpModel) -> usize {
        let start = model.num_vars();
        for (&cost, &binary) in self.c.iter().zip(&self.binary_mask) {
            if binary {
                model.add_binary(cost);
            } else {
                model.add_var(0.0, f64::INFINITY, cost);
            }
        }
        for row in &self.first_stage_rows {
            let entries: Vec<(usize, f64)> = row
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, &a)| (start + j, a))
                .collect();
            model.add_sparse_constraint(&entries, row.rel, row.rhs);
        }
        start
    }

    /// Largest violation of `x ≥ 0`, binary bounds and the first-stage rows.
    pub fn first_stage_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (&v, &binary) in x.iter().zip(&self.binary_mask) {
            worst = worst.max(-v);
            if binary {
                worst = worst.max(v - 1.0).max((v - v.round()).abs());
            }
        }
        for row in &self.first_stage_rows {
            let lhs = dot(&row.coeffs, x);
            let v = match row.rel {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    fn check_x(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.n1() {
            return Err(ModelError::FirstStageLength {
                expected: self.n1(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// The dual recourse LP `max λ'(h_k - A_k x)  s.t.  B_k'λ ≤ d_k`.
    pub fn dual_recourse_model(&self, k: usize, x: &[f64]) -> Result<LpModel, ModelError> {
        self.check_x(x)?;
        let sc = self.scenario(k)?;
        let mut model = LpModel::new(Sense::Maximize);
        for r in sc.residual_rhs(x) {
            model.add_free_var(r);
        }
        for (j, &dj) in sc.d.iter().enumerate() {
            let entries: Vec<(usize, f64)> = sc
                .b
                .iter()
                .enumerate()
                .filter(|(_, row)| row[j] != 0.0)
                .map(|(r, row)| (r, row[j]))
                .collect();
            model.add_sparse_constraint(&entries, Relation::Le, dj);
        }
        Ok(model)
    }

    /// The primal recourse LP `min d_k'y  s.t.  B_k y = h_k - A_k x, y ≥ 0`.
    pub fn primal_recourse_model(&self, k: usize, x: &[f64]) -> Result<LpModel, ModelError> {
        self.check_x(x)?;
        let sc = self.scenario(k)?;
        let mut model = LpModel::new(Sense::Minimize);
        for &dj in &sc.d {
            model.add_var(0.0, f64::INFINITY, dj);
        }
        for (row, rhs) in sc.b.iter().zip(sc.residual_rhs(x)) {
            model.add_constraint(row.clone(), Relation::Eq, rhs);
        }
        Ok(model)
    }

    pub fn eval_recourse(&self, k: usize, x: &[f64]) -> Result<RecourseResult, ModelError> {
        self.eval_recourse_with(&SimplexEngine, k, x)
    }

    pub fn eval_recourse_with(
        &self,
        engine: &dyn LpEngine,
        k: usize,
        x: &[f64],
    ) -> Result<RecourseResult, ModelError> {
        let sc = self.scenario(k)?;
        if sc.rows() == 0 {
            // No linking rows: y = 0 is optimal unless some cost is negative.
            if sc.d.iter().any(|&d| d < 0.0) {
                return Err(ModelError::RecourseUnbounded { scenario: k });
            }
            return Ok(RecourseResult::Finite {
                value: 0.0,
                lambda: Vec::new(),
                y: vec![0.0; sc.d.len()],
            });
        }
        let model = self.dual_recourse_model(k, x)?;
        match engine.solve_lp(&model)? {
            LpOutcome::Optimal(s) => Ok(RecourseResult::Finite {
                value: s.objective,
                // Duals of `B'λ ≤ d` in a maximization are the primal `y ≥ 0`.
                y: s.duals.iter().map(|&v| v.max(0.0)).collect(),
                lambda: s.x,
            }),
            LpOutcome::Unbounded { ray } => {
                let margin = dot(&ray, &sc.residual_rhs(x));
                Ok(RecourseResult::InfeasibleWithRay { ray, margin })
            }
            LpOutcome::Infeasible { .. } => Err(ModelError::RecourseUnbounded { scenario: k }),
        }
    }

    /// Evaluates every scenario, optionally on scoped worker threads. The
    /// result is ordered by scenario and does not depend on scheduling.
    pub fn eval_all_recourse(
        &self,
        engine: &dyn LpEngine,
        x: &[f64],
        parallel: bool,
    ) -> Result<Vec<RecourseResult>, ModelError> {
        let k = self.num_scenarios();
        let workers = if parallel {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
                .min(k)
        } else {
            1
        };
        if workers <= 1 {
            return (0..k).map(|s| self.eval_recourse_with(engine, s, x)).collect();
        }
        let chunk = k.div_ceil(workers);
        let parts: Vec<Vec<Result<RecourseResult, ModelError>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..k)
                .step_by(chunk)
                .map(|start| {
                    scope.spawn(move || {
                        (start..(start + chunk).min(k))
                            .map(|s| self.eval_recourse_with(engine, s, x))
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("recourse worker panicked"))
                .collect()
        });
        parts.into_iter().flatten().collect()
    }

    /// `Q_1(x), ..., Q_K(x)`, failing on the first infeasible scenario.
    pub fn recourse_values(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        (0..self.num_scenarios())
            .map(|k| {
                self.eval_recourse(k, x)?
                    .value()
                    .ok_or(ModelError::InfeasibleFirstStage { scenario: k })
            })
            .collect()
    }

    /// `c'x + wowa_(w,p)(Q_1(x), ..., Q_K(x))`.
    pub fn eval_objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        let q = self.recourse_values(x)?;
        Ok(self.first_stage_cost(x) + self.wowa_of(&q)?)
    }

    pub fn wowa_of(&self, q: &[f64]) -> Result<f64, ModelError> {
        wowa(&self.w, &self.p, q).map_err(|source| ModelError::Weights {
            location: "recourse values".into(),
            source,
        })
    }

    /// Scenario-wise feasibility of `x` within the kernel tolerance.
    pub fn is_recourse_feasible(&self, x: &[f64]) -> Result<bool, ModelError> {
        for k in 0..self.num_scenarios() {
            if !self.eval_recourse(k, x)?.is_finite() {
                return Ok(false);
            }
        }
        Ok(self.first_stage_violation(x) <= FEASIBILITY_TOL)
    }
}

fn check_finite(location: &str, values: &[f64]) -> Result<(), ModelError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(schema(format!("{location}[{i}]"), "value is not finite")),
        None => Ok(()),
    }
}

/// On-disk layout of a [`TwoStageProblem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ProblemFile {
    pub n1: usize,
    pub n2: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub c: Vec<f64>,
    pub first_stage_rows: Vec<FirstStageRow>,
    pub binary_mask: Vec<bool>,
    pub scenarios: Vec<Scenario>,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
}

impl From<&TwoStageProblem> for ProblemFile {
    fn from(p: &TwoStageProblem) -> Self {
        Self {
            n1: p.n1(),
            n2: p.n2(),
            k: p.num_scenarios(),
            c: p.c.clone(),
            first_stage_rows: p.first_stage_rows.clone(),
            binary_mask: p.binary_mask.clone(),
            scenarios: p.scenarios.clone(),
            p: p.p.entries().to_vec(),
            w: p.w.entries().to_vec(),
        }
    }
}

impl TryFrom<ProblemFile> for TwoStageProblem {
    type Error = ModelError;

    fn try_from(f: ProblemFile) -> Result<Self, ModelError> {
        if f.c.len() != f.n1 {
            return Err(schema("c", format!("expected n1 = {} entries, got {}", f.n1, f.c.len())));
        }
        if f.scenarios.len() != f.k {
            return Err(schema(
                "scenarios",
                format!("expected K = {} blocks, got {}", f.k, f.scenarios.len()),
            ));
        }
        if let Some((s, sc)) = f.scenarios.iter().enumerate().find(|(_, s)| s.d.len() != f.n2) {
            return Err(schema(
                format!("scenarios[{s}].d"),
                format!("expected n2 = {} entries, got {}", f.n2, sc.d.len()),
            ));
        }
        let weights = |name: &str, v: Vec<f64>, kind| {
            WeightVector::new(v, kind).map_err(|source| ModelError::Weights {
                location: name.into(),
                source,
            })
        };
        let p = weights("p", f.p, WeightKind::Importance)?;
        let w = weights("w", f.w, WeightKind::Preferential)?;
        TwoStageProblem::new(f.c, f.first_stage_rows, f.binary_mask, f.scenarios, p, w)
    }
}

impl TwoStageProblem {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile::from(self)).expect("problem serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        parse_json::<ProblemFile>(text, Path::new("<string>"))?.try_into()
    }
}

pub(crate) fn parse_json<T: for<'de> Deserialize<'de>>(
    text: &str,
    path: &Path,
) -> Result<T, ModelError> {
    serde_json::from_str(text).map_err(|e| ModelError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub(crate) fn read_file(path: &Path) -> Result<String, ModelError> {
    fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), ModelError> {
    fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<TwoStageProblem, ModelError> {
    let path = path.as_ref();
    parse_json::<ProblemFile>(&read_file(path)?, path)?.try_into()
}

pub fn save_instance(problem: &TwoStageProblem, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let mut text = problem.to_json();
    text.push('\n');
    write_file(path.as_ref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One supplier, one customer: `y + s = x`, `y - t = demand`.
    fn transport(demand: f64, cost: f64) -> TwoStageProblem {
        let sc = Scenario {
            d: vec![cost, 0.0, 0.0],
            a: vec![vec![-1.0], vec![0.0]],
            b: vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, -1.0]],
            h: vec![0.0, demand],
        };
        TwoStageProblem::new(
            vec![1.0],
            vec![],
            vec![false],
            vec![sc],
            WeightVector::uniform(1, WeightKind::Importance).unwrap(),
            WeightVector::uniform(1, WeightKind::Preferential).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_scenario_has_zero_recourse() {
        let sc = Scenario {
            d: vec![1.0, 2.0],
            a: vec![vec![0.0]],
            b: vec![vec![1.0, 1.0]],
            h: vec![0.0],
        };
        let p = WeightVector::uniform(1, WeightKind::Importance).unwrap();
        let w = WeightVector::uniform(1, WeightKind::Preferential).unwrap();
        let prob = TwoStageProblem::new(vec![0.0], vec![], vec![false], vec![sc], p, w).unwrap();
        let RecourseResult::Finite { value, y, .. } = prob.eval_recourse(0, &[3.0]).unwrap() else {
            panic!("expected finite recourse");
        };
        assert!(value.abs() < 1e-12);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hand_solved_transport() {
        let prob = transport(3.0, 2.0);
        let RecourseResult::Finite { value, lambda, y } = prob.eval_recourse(0, &[5.0]).unwrap()
        else {
            panic!("expected finite recourse");
        };
        assert!((value - 6.0).abs() < 1e-9);
        assert!((lambda[1] - 2.0).abs() < 1e-9);
        assert!((y[0] - 3.0).abs() < 1e-9);
        assert!((dot(&prob.scenarios()[0].d, &y) - value).abs() < 1e-9);
    }

    #[test]
    fn shortfall_gives_ray() {
        let prob = transport(3.0, 2.0);
        let RecourseResult::InfeasibleWithRay { ray, margin } =
            prob.eval_recourse(0, &[1.0]).unwrap()
        else {
            panic!("expected a ray");
        };
        assert!(margin > 1e-7);
        let sc = &prob.scenarios()[0];
        assert!(sc.mul_b_transpose(&ray, 3).iter().all(|&v| v <= 1e-7));
        assert!(matches!(
            prob.eval_objective(&[1.0]),
            Err(ModelError::InfeasibleFirstStage { scenario: 0 })
        ));
    }

    #[test]
    fn negative_cost_without_rows_is_unbounded() {
        let sc = Scenario {
            d: vec![-1.0],
            a: vec![],
            b: vec![],
            h: vec![],
        };
        let p = WeightVector::uniform(1, WeightKind::Importance).unwrap();
        let w = WeightVector::uniform(1, WeightKind::Preferential).unwrap();
        let prob = TwoStageProblem::new(vec![0.0], vec![], vec![false], vec![sc], p, w).unwrap();
        assert!(matches!(
            prob.eval_recourse(0, &[0.0]),
            Err(ModelError::RecourseUnbounded { scenario: 0 })
        ));
    }

    #[test]
    fn singleton_objective_is_plain_sum() {
        let prob = transport(3.0, 2.0);
        assert!((prob.eval_objective(&[5.0]).unwrap() - 11.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_wrong_scenario_width() {
        let mut file = ProblemFile::from(&transport(3.0, 2.0));
        file.scenarios[0].b[1] = vec![1.0, 0.0];
        let err = TwoStageProblem::try_from(file).unwrap_err().to_string();
        assert!(err.contains("scenarios[0].B[1]"), "{err}");
    }

    #[test]
    fn rejects_bad_probability_sum() {
        let mut file = ProblemFile::from(&transport(3.0, 2.0));
        file.p = vec![0.9];
        let err = TwoStageProblem::try_from(file).unwrap_err();
        assert!(matches!(err, ModelError::Weights { ref location, .. } if location == "p"));
    }

    #[test]
    fn json_round_trip() {
        let prob = transport(3.0, 2.0);
        assert_eq!(TwoStageProblem::from_json(&prob.to_json()).unwrap(), prob);
    }
}
