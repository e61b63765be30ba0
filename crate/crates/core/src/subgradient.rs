//! Decomposition with a single aggregated WOWA cut per iteration.
//!
//! For concave `w*` the WOWA aggregate is the maximum over permutations `π`
//! of `Σ_r δ^π_r a_{π(r)}`. Freezing the sorting permutation `π*` and the
//! scenario duals at `x*` therefore gives an under-estimator of
//! `wowa(Q(x))` that is tight at `x*`:
//!
//! ```text
//! θ ≥ Σ_r δ_r λ*_{π*(r)}'(h_{π*(r)} - A_{π*(r)} x)
//! ```

use crate::aggregation::ranked_deltas;
use crate::decomposition::{self, Cut, CutKind, DecompositionParams, Master};
use crate::lp::{LpEngine, LpModel, LpSolution, Sense, SimplexEngine};
use crate::model::{dot, ModelError, RecourseResult, TwoStageProblem};
use crate::report::{Method, SolveError, SolveReport};

/// Master problem over `(x, θ)`.
#[derive(Debug, Clone)]
pub struct SubgradientMaster {
    pub model: LpModel,
    pub x_start: usize,
    pub theta: usize,
}

impl SubgradientMaster {
    pub fn new(problem: &TwoStageProblem, floor: f64) -> Self {
        let mut model = LpModel::new(Sense::Minimize);
        let x_start = problem.add_first_stage(&mut model);
        let theta = model.add_var(floor, f64::INFINITY, 1.0);
        Self {
            model,
            x_start,
            theta,
        }
    }
}

/// An aggregated cut `θ ≥ cut_constant + cut_coeffs · x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WowaSubgradient {
    pub pi_star: Vec<usize>,
    pub deltas: Vec<f64>,
    /// `-Σ_r δ_r λ_{π*(r)}'A_{π*(r)}`.
    pub cut_coeffs: Vec<f64>,
    /// `Σ_r δ_r λ_{π*(r)}'h_{π*(r)}`.
    pub cut_constant: f64,
}

impl WowaSubgradient {
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.cut_constant + dot(&self.cut_coeffs, x)
    }
}

/// Builds the WOWA cut from finite recourse results at `x*`.
pub fn wowa_subgradient(
    problem: &TwoStageProblem,
    recourse: &[RecourseResult],
) -> Result<WowaSubgradient, ModelError> {
    let mut q = Vec::with_capacity(recourse.len());
    let mut lambdas = Vec::with_capacity(recourse.len());
    for (k, r) in recourse.iter().enumerate() {
        match r {
            RecourseResult::Finite { value, lambda, .. } => {
                q.push(*value);
                lambdas.push(lambda);
            }
            RecourseResult::InfeasibleWithRay { .. } => {
                return Err(ModelError::InfeasibleFirstStage { scenario: k })
            }
        }
    }
    let ranked = ranked_deltas(problem.w(), problem.p(), &q).map_err(|source| {
        ModelError::Weights {
            location: "recourse values".into(),
            source,
        }
    })?;
    let n1 = problem.n1();
    let mut cut_coeffs = vec![0.0; n1];
    let mut cut_constant = 0.0;
    for (&k, &delta) in ranked.permutation.iter().zip(&ranked.deltas) {
        if delta == 0.0 {
            continue;
        }
        let sc = &problem.scenarios()[k];
        for (c, v) in cut_coeffs.iter_mut().zip(sc.mul_a_transpose(lambdas[k], n1)) {
            *c -= delta * v;
        }
        cut_constant += delta * dot(lambdas[k], &sc.h);
    }
    Ok(WowaSubgradient {
        pi_star: ranked.permutation,
        deltas: ranked.deltas,
        cut_coeffs,
        cut_constant,
    })
}

impl Master for SubgradientMaster {
    fn method(&self) -> Method {
        Method::Subgradient
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
        true
    }

    fn optimality_cuts(
        &self,
        problem: &TwoStageProblem,
        x: &[f64],
        _master: &LpSolution,
        recourse: &[RecourseResult],
        iteration: usize,
    ) -> Result<Vec<(usize, Cut)>, SolveError> {
        let sg = wowa_subgradient(problem, recourse)?;
        let dual_residual = recourse
            .iter()
            .enumerate()
            .filter_map(|(k, r)| match r {
                RecourseResult::Finite { lambda, .. } => {
                    Some(problem.scenarios()[k].dual_residual(lambda))
                }
                RecourseResult::InfeasibleWithRay { .. } => None,
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let cut = Cut {
            kind: CutKind::Optimality,
            iteration,
            scenario: None,
            value_at_generation: sg.value_at(x),
            coeffs: sg.cut_coeffs,
            constant: sg.cut_constant,
            dual_residual,
            permutation: Some(sg.pi_star),
            deltas: Some(sg.deltas),
        };
        Ok(vec![(self.theta, cut)])
    }
}

pub fn solve_subgradient(
    problem: &TwoStageProblem,
    params: &DecompositionParams,
) -> Result<SolveReport, SolveError> {
    solve_subgradient_with(problem, params, &SimplexEngine)
}

pub fn solve_subgradient_with(
    problem: &TwoStageProblem,
    params: &DecompositionParams,
    engine: &dyn LpEngine,
) -> Result<SolveReport, SolveError> {
    if !problem.w().is_nonincreasing() {
        return Err(SolveError::Model(ModelError::Weights {
            location: "w".into(),
            source: crate::aggregation::WeightError::NotNonincreasing,
        }));
    }
    let floor = params.floor(problem)?;
    decomposition::run(problem, params, engine, SubgradientMaster::new(problem, floor))
}
