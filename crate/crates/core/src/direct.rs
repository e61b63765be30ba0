//! Monolithic linear formulation of the two-stage WOWA problem.
//!
//! For nonincreasing `w` the WOWA of `q` equals
//!
//! ```text
//! min  Σ_j (w_j - w_{j+1}) (j β_j + K Σ_k p_k α_kj)
//! s.t. β_j + α_kj ≥ q_k,  α ≥ 0,  β free,       w_{K+1} = 0
//! ```
//!
//! which is the LP dual of `K Σ_j (w_j - w_{j+1}) max{ q'z : Σz = j/K, 0 ≤ z ≤ p }`.
//! Substituting `q_k = d_k'y_k` and adding the scenario rows gives one LP/MIP
//! for the whole problem.

use std::time::{Duration, Instant};

use crate::aggregation::WeightVector;
use crate::lp::{LpEngine, LpError, LpModel, LpOutcome, Relation, Sense, SimplexEngine};
use crate::model::{ModelError, TwoStageProblem};
use crate::report::{relative_gap, Method, SolveError, SolveReport, Termination};

/// `(w_j - w_{j+1})` for `j = 1..K`, with `w_{K+1} = 0`.
fn weight_drops(w: &WeightVector) -> Vec<f64> {
    let e = w.entries();
    (0..e.len())
        .map(|j| e[j] - e.get(j + 1).copied().unwrap_or(0.0))
        .collect()
}

/// Adds `β` (K, free) and `α` (K², ≥ 0) with their objective terms, and the
/// K² coupling rows `β_j + α_kj - q_k ≥ 0`, where `q_k` is the linear form
/// `q_terms[k]`. Returns the first `β` and first `α` column.
pub(crate) fn add_wowa_block(
    model: &mut LpModel,
    w: &WeightVector,
    p: &WeightVector,
    q_terms: &[Vec<(usize, f64)>],
) -> (usize, usize) {
    let k = w.len();
    let drops = weight_drops(w);
    let beta = model.num_vars();
    for (j, &drop) in drops.iter().enumerate() {
        model.add_free_var((j + 1) as f64 * drop);
    }
    let alpha = model.num_vars();
    for &pk in p.entries() {
        for &drop in &drops {
            model.add_var(0.0, f64::INFINITY, k as f64 * drop * pk);
        }
    }
    for (s, terms) in q_terms.iter().enumerate() {
        for j in 0..k {
            let mut entries = Vec::with_capacity(terms.len() + 2);
            entries.push((beta + j, 1.0));
            entries.push((alpha + s * k + j, 1.0));
            entries.extend(terms.iter().map(|&(col, v)| (col, -v)));
            model.add_sparse_constraint(&entries, Relation::Ge, 0.0);
        }
    }
    (beta, alpha)
}

/// The monolithic model and the column layout needed to read its solution.
#[derive(Debug, Clone)]
pub struct MonolithModel {
    pub model: LpModel,
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    pub x_start: usize,
    pub y_start: usize,
    pub beta_start: usize,
    pub alpha_start: usize,
    /// Index of the first coupling row.
    pub coupling_start: usize,
}

impl MonolithModel {
    pub fn y_col(&self, scenario: usize, j: usize) -> usize {
        self.y_start + scenario * self.n2 + j
    }

    pub fn alpha_col(&self, scenario: usize, j: usize) -> usize {
        self.alpha_start + scenario * self.k + j
    }

    pub fn first_stage<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.x_start..self.x_start + self.n1]
    }
}

pub fn build_monolith(problem: &TwoStageProblem) -> MonolithModel {
    let (n1, n2, k) = (problem.n1(), problem.n2(), problem.num_scenarios());
    let mut model = LpModel::new(Sense::Minimize);
    let x_start = problem.add_first_stage(&mut model);
    let y_start = model.num_vars();
    for _ in 0..k * n2 {
        model.add_var(0.0, f64::INFINITY, 0.0);
    }
    for (s, sc) in problem.scenarios().iter().enumerate() {
        for ((a_row, b_row), &h) in sc.a.iter().zip(&sc.b).zip(&sc.h) {
            let mut entries: Vec<(usize, f64)> = a_row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, &v)| (x_start + j, v))
                .collect();
            entries.extend(
                b_row
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, &v)| (y_start + s * n2 + j, v)),
            );
            model.add_sparse_constraint(&entries, Relation::Eq, h);
        }
    }
    let q_terms: Vec<Vec<(usize, f64)>> = problem
        .scenarios()
        .iter()
        .enumerate()
        .map(|(s, sc)| {
            sc.d.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, &v)| (y_start + s * n2 + j, v))
                .collect()
        })
        .collect();
    let coupling_start = model.num_constraints();
    let (beta_start, alpha_start) = add_wowa_block(&mut model, problem.w(), problem.p(), &q_terms);
    MonolithModel {
        model,
        n1,
        n2,
        k,
        x_start,
        y_start,
        beta_start,
        alpha_start,
        coupling_start,
    }
}

#[derive(Debug, Clone, Default)]
pub struct DirectOptions {
    pub time_limit: Option<Duration>,
}

pub fn solve_direct(problem: &TwoStageProblem) -> Result<SolveReport, SolveError> {
    solve_direct_with(problem, &DirectOptions::default(), &SimplexEngine)
}

pub fn solve_direct_with(
    problem: &TwoStageProblem,
    options: &DirectOptions,
    engine: &dyn LpEngine,
) -> Result<SolveReport, SolveError> {
    let started = Instant::now();
    let mono = build_monolith(problem);
    let mut report = SolveReport::empty(Method::Direct, problem.n1(), 0.0);
    report.iterations = 1;
    let solve_started = Instant::now();
    let outcome = if mono.model.has_binaries() {
        engine.solve_mip(&mono.model, options.time_limit)
    } else {
        engine.solve_lp(&mono.model)
    };
    report.master_time_s = solve_started.elapsed().as_secs_f64();
    let solution = match outcome {
        Ok(LpOutcome::Optimal(s)) => s,
        Ok(LpOutcome::Infeasible { .. }) => {
            report.wall_time_s = started.elapsed().as_secs_f64();
            return Err(SolveError::Infeasible(Box::new(report)));
        }
        Ok(LpOutcome::Unbounded { .. }) => return Err(SolveError::Unbounded),
        Err(LpError::TimeLimit { incumbent, .. }) => {
            report.termination = Termination::TimeLimit;
            if let Some(inc) = incumbent {
                report.objective = inc.objective;
                report.first_stage = mono.first_stage(&inc.x).to_vec();
            }
            report.wall_time_s = started.elapsed().as_secs_f64();
            return Err(SolveError::TimeLimit(Box::new(report)));
        }
        Err(e) => return Err(e.into()),
    };
    let x = mono.first_stage(&solution.x).to_vec();
    report.objective = solution.objective;
    report.lower_bound = solution.objective;
    report.final_gap = relative_gap(solution.objective, solution.objective);
    report.termination = Termination::GapClosed;
    // The attained y_k need not be optimal for scenarios carrying zero
    // effective weight, so Q_k(x*) is re-solved per scenario.
    let attained: Vec<f64> = problem
        .scenarios()
        .iter()
        .enumerate()
        .map(|(s, sc)| {
            sc.d.iter()
                .enumerate()
                .map(|(j, d)| d * solution.x[mono.y_col(s, j)])
                .sum()
        })
        .collect();
    let resolved = problem.eval_all_recourse(engine, &x, false)?;
    report.recourse = resolved
        .iter()
        .zip(attained)
        .map(|(r, fallback)| r.value().unwrap_or(fallback))
        .collect();
    report.first_stage = x;
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Which LP formulation [`wowa_lp_value_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WowaLpPath {
    /// K LPs `max{ q'z : Σz = j/K, 0 ≤ z ≤ p }`.
    Primal,
    /// The single K²-row dual LP.
    #[default]
    Dual,
}

/// WOWA of `q` computed by linear programming.
pub fn wowa_lp_value(q: &[f64], w: &WeightVector, p: &WeightVector) -> Result<f64, ModelError> {
    wowa_lp_value_with(q, w, p, WowaLpPath::Dual)
}

pub fn wowa_lp_value_with(
    q: &[f64],
    w: &WeightVector,
    p: &WeightVector,
    path: WowaLpPath,
) -> Result<f64, ModelError> {
    let k = w.len();
    if q.len() != k || p.len() != k {
        return Err(ModelError::Schema {
            location: "wowa_lp_value".into(),
            message: format!("expected {k} values and weights, got {} and {}", q.len(), p.len()),
        });
    }
    let drops = weight_drops(w);
    match path {
        WowaLpPath::Primal => {
            let p_sum: f64 = p.entries().iter().sum();
            let mut total = 0.0;
            for (j, &drop) in drops.iter().enumerate() {
                if drop == 0.0 {
                    continue;
                }
                let mut model = LpModel::new(Sense::Maximize);
                for (&qk, &pk) in q.iter().zip(p.entries()) {
                    model.add_var(0.0, pk, qk);
                }
                let level = ((j + 1) as f64 / k as f64).min(p_sum);
                model.add_constraint(vec![1.0; k], Relation::Eq, level);
                let opt = expect_optimal(crate::lp::solve_lp(&model)?)?;
                total += k as f64 * drop * opt;
            }
            Ok(total)
        }
        WowaLpPath::Dual => {
            let mut model = LpModel::new(Sense::Minimize);
            // q_k enters as the rhs: β_j + α_kj ≥ q_k.
            add_wowa_block(&mut model, w, p, &vec![Vec::new(); k]);
            for (s, row) in model.constraints.iter_mut().enumerate() {
                row.rhs = q[s / k];
            }
            expect_optimal(crate::lp::solve_lp(&model)?)
        }
    }
}

fn expect_optimal(outcome: LpOutcome) -> Result<f64, ModelError> {
    match outcome {
        LpOutcome::Optimal(s) => Ok(s.objective),
        other => Err(ModelError::Lp(LpError::InvalidModel(format!(
            "WOWA LP ended {:?}",
            other.status()
        )))),
    }
}
