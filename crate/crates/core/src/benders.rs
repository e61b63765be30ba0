//! Benders-type decomposition with one recourse variable `q_k` per scenario.
//!
//! The master keeps the WOWA block of the monolithic formulation with `q_k`
//! in place of `d_k'y_k`:
//!
//! ```text
//! min  c'x + Σ_j (w_j - w_{j+1}) (j β_j + K Σ_k p_k α_kj)
//! s.t. β_j + α_kj ≥ q_k                      (all k, j)
//!      γ'(h_k - A_k x) ≤ 0                   (feasibility cuts)
//!      q_k ≥ λ'(h_k - A_k x)                 (optimality cuts)
//!      q_k ≥ floor,  x ∈ X
//! ```
//!
//! Each iteration adds an optimality cut for every scenario whose `q_k`
//! underestimates `Q_k(x*)`.

use crate::decomposition::{
    self, scenario_cut_terms, Cut, CutKind, DecompositionParams, Master, CUT_VIOLATION_TOL,
};
use crate::direct::add_wowa_block;
use crate::lp::{LpEngine, LpModel, LpSolution, Sense, SimplexEngine};
use crate::model::{RecourseResult, TwoStageProblem};
use crate::report::{Method, SolveError, SolveReport};

/// Master problem over `(x, q, β, α)`.
#[derive(Debug, Clone)]
pub struct BendersMaster {
    pub model: LpModel,
    pub x_start: usize,
    pub q_start: usize,
    pub beta_start: usize,
    pub alpha_start: usize,
    /// Index of the first coupling row; there are always K² of them.
    pub coupling_start: usize,
}

impl BendersMaster {
    pub fn new(problem: &TwoStageProblem, floor: f64) -> Self {
        let mut model = LpModel::new(Sense::Minimize);
        let x_start = problem.add_first_stage(&mut model);
        let q_start = model.num_vars();
        for _ in 0..problem.num_scenarios() {
            model.add_var(floor, f64::INFINITY, 0.0);
        }
        let q_terms: Vec<Vec<(usize, f64)>> = (0..problem.num_scenarios())
            .map(|k| vec![(q_start + k, 1.0)])
            .collect();
        let coupling_start = model.num_constraints();
        let (beta_start, alpha_start) =
            add_wowa_block(&mut model, problem.w(), problem.p(), &q_terms);
        Self {
            model,
            x_start,
            q_start,
            beta_start,
            alpha_start,
            coupling_start,
        }
    }
}

impl Master for BendersMaster {
    fn method(&self) -> Method {
        Method::Benders
    }

    fn model(&self) -> &LpModel {
        &self.model
    }

    fn model_mut(&mut self) -> &mut LpModel {
        &mut self.model
    }

    fn x_start(&self) -> usize {
        self.x_start
    }

    fn floor_bounds_aggregate(&self) -> bool {
        false
    }

    fn optimality_cuts(
        &self,
        problem: &TwoStageProblem,
        x: &[f64],
        master: &LpSolution,
        recourse: &[RecourseResult],
        iteration: usize,
    ) -> Result<Vec<(usize, Cut)>, SolveError> {
        let mut cuts = Vec::new();
        for (k, r) in recourse.iter().enumerate() {
            let RecourseResult::Finite { value, lambda, .. } = r else {
                continue;
            };
            let q_col = self.q_start + k;
            if master.x[q_col] >= value - CUT_VIOLATION_TOL {
                continue;
            }
            let (coeffs, constant) = scenario_cut_terms(problem, k, lambda);
            let mut cut = Cut {
                kind: CutKind::Optimality,
                iteration,
                scenario: Some(k),
                coeffs,
                constant,
                value_at_generation: 0.0,
                dual_residual: problem.scenarios()[k].dual_residual(lambda),
                permutation: None,
                deltas: None,
            };
            cut.value_at_generation = cut.value_at(x);
            cuts.push((q_col, cut));
        }
        Ok(cuts)
    }
}

pub fn solve_benders(
    problem: &TwoStageProblem,
    params: &DecompositionParams,
) -> Result<SolveReport, SolveError> {
    solve_benders_with(problem, params, &SimplexEngine)
}

pub fn solve_benders_with(
    problem: &TwoStageProblem,
    params: &DecompositionParams,
    engine: &dyn LpEngine,
) -> Result<SolveReport, SolveError> {
    let floor = params.floor(problem)?;
    decomposition::run(problem, params, engine, BendersMaster::new(problem, floor))
}
