//! Delayed cut generation loop shared by the Benders-type and subgradient
//! methods. The two differ only in the master's recourse variables and in
//! how optimality cuts are formed.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::lp::{LpEngine, LpError, LpModel, LpOutcome, LpSolution, Relation};
use crate::model::{dot, RecourseResult, TwoStageProblem};
use crate::report::{
    relative_gap, IterationRecord, Method, SolveError, SolveReport, Termination,
};

/// Absolute violation below which no optimality cut is generated.
pub(crate) const CUT_VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionParams {
    /// Relative gap at which the loop stops.
    pub epsilon: f64,
    pub max_iter: usize,
    pub time_limit: Duration,
    /// Valid lower bound on every recourse value. Defaults to 0 when all
    /// second-stage costs are nonnegative; required otherwise.
    pub theta_floor: Option<f64>,
    /// Solve the scenario subproblems on worker threads.
    pub parallel: bool,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iter: 10_000,
            time_limit: Duration::from_secs(3600),
            theta_floor: None,
            parallel: false,
        }
    }
}

impl DecompositionParams {
    pub(crate) fn floor(&self, problem: &TwoStageProblem) -> Result<f64, SolveError> {
        match self.theta_floor {
            Some(f) if f.is_finite() => Ok(f),
            Some(f) => Err(SolveError::InvalidThetaFloor {
                floor: f,
                observed: f64::NAN,
            }),
            None if problem.has_nonnegative_recourse_costs() => Ok(0.0),
            None => Err(SolveError::MissingThetaFloor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    Feasibility,
    Optimality,
}

/// A cut `target ≥ constant + coeffs · x`, where the target is `0` for
/// feasibility cuts, `q_k` for per-scenario cuts and `θ` for WOWA cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub iteration: usize,
    /// Generating scenario; `None` for an aggregated WOWA cut.
    pub scenario: Option<usize>,
    pub coeffs: Vec<f64>,
    pub constant: f64,
    /// `constant + coeffs · x*` at the generating point. For feasibility
    /// cuts this is the ray margin `γ'(h - A x*)`.
    pub value_at_generation: f64,
    /// Largest component of `λ'B - d` (of `γ'B` for rays) over the
    /// contributing multipliers.
    pub dual_residual: f64,
    /// Sorting permutation and effective weights of a WOWA cut.
    pub permutation: Option<Vec<usize>>,
    pub deltas: Option<Vec<f64>>,
}

impl Cut {
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.constant + dot(&self.coeffs, x)
    }
}

/// `(-λ'A_k, λ'h_k)`.
pub(crate) fn scenario_cut_terms(
    problem: &TwoStageProblem,
    k: usize,
    multipliers: &[f64],
) -> (Vec<f64>, f64) {
    let sc = &problem.scenarios()[k];
    let coeffs = sc
        .mul_a_transpose(multipliers, problem.n1())
        .into_iter()
        .map(|v| -v)
        .collect();
    (coeffs, dot(multipliers, &sc.h))
}

/// What each method contributes to the loop.
pub(crate) trait Master {
    fn method(&self) -> Method;
    fn model(&self) -> &LpModel;
    fn model_mut(&mut self) -> &mut LpModel;
    fn x_start(&self) -> usize;
    /// Whether the floor bounds the aggregate (`θ`) rather than each `q_k`.
    fn floor_bounds_aggregate(&self) -> bool;
    /// Optimality cuts for the current master solution, each paired with
    /// its target column.
    fn optimality_cuts(
        &self,
        problem: &TwoStageProblem,
        x: &[f64],
        master: &LpSolution,
        recourse: &[RecourseResult],
        iteration: usize,
    ) -> Result<Vec<(usize, Cut)>, SolveError>;
}

struct CutPool {
    rows: Vec<(Option<usize>, Vec<f64>, f64)>,
}

impl CutPool {
    fn same(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
    }

    /// Registers the cut, returning false when an identical one exists.
    fn insert(&mut self, target: Option<usize>, cut: &Cut) -> bool {
        let duplicate = self.rows.iter().any(|(t, coeffs, constant)| {
            *t == target
                && Self::same(*constant, cut.constant)
                && coeffs.iter().zip(&cut.coeffs).all(|(a, b)| Self::same(*a, *b))
        });
        if !duplicate {
            self.rows.push((target, cut.coeffs.clone(), cut.constant));
        }
        !duplicate
    }
}

fn add_cut_row(model: &mut LpModel, x_start: usize, target: Option<usize>, cut: &Cut) {
    let mut entries: Vec<(usize, f64)> = cut
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, &v)| (x_start + j, -v))
        .collect();
    if let Some(t) = target {
        entries.push((t, 1.0));
    }
    model.add_sparse_constraint(&entries, Relation::Ge, cut.constant);
}

pub(crate) fn run<M: Master>(
    problem: &TwoStageProblem,
    params: &DecompositionParams,
    engine: &dyn LpEngine,
    mut master: M,
) -> Result<SolveReport, SolveError> {
    let started = Instant::now();
    let floor = params.floor(problem)?;
    let n1 = problem.n1();
    let mut report = SolveReport::empty(master.method(), n1, params.epsilon);
    let mut pool = CutPool { rows: Vec::new() };
    let mut best_ub = f64::INFINITY;
    let mut best_lb = f64::NEG_INFINITY;

    let finish = |report: &mut SolveReport, best_ub: f64, best_lb: f64| {
        report.objective = best_ub;
        report.lower_bound = best_lb;
        report.final_gap = relative_gap(best_ub, best_lb);
        report.wall_time_s = started.elapsed().as_secs_f64();
    };

    loop {
        if report.iterations >= params.max_iter {
            report.termination = Termination::IterLimit;
            finish(&mut report, best_ub, best_lb);
            return Err(SolveError::IterationLimit(Box::new(report)));
        }
        let elapsed = started.elapsed();
        if elapsed >= params.time_limit {
            report.termination = Termination::TimeLimit;
            finish(&mut report, best_ub, best_lb);
            return Err(SolveError::TimeLimit(Box::new(report)));
        }
        report.iterations += 1;
        let iteration = report.iterations;

        // Step 1: relaxed master.
        let master_started = Instant::now();
        let outcome = if master.model().has_binaries() {
            engine.solve_mip(master.model(), Some(params.time_limit - elapsed))
        } else {
            engine.solve_lp(master.model())
        };
        let master_time = master_started.elapsed().as_secs_f64();
        report.master_time_s += master_time;
        let solution = match outcome {
            Ok(LpOutcome::Optimal(s)) => s,
            Ok(LpOutcome::Infeasible { .. }) => {
                report.termination = Termination::Infeasible;
                finish(&mut report, best_ub, best_lb);
                return Err(SolveError::Infeasible(Box::new(report)));
            }
            Ok(LpOutcome::Unbounded { .. }) => return Err(SolveError::Unbounded),
            Err(LpError::TimeLimit { .. }) => {
                report.termination = Termination::TimeLimit;
                finish(&mut report, best_ub, best_lb);
                return Err(SolveError::TimeLimit(Box::new(report)));
            }
            Err(e) => return Err(e.into()),
        };
        let lb = solution.objective;
        best_lb = best_lb.max(lb);
        let x_start = master.x_start();
        let x: Vec<f64> = solution.x[x_start..x_start + n1].to_vec();

        // Step 2: scenario duals.
        let sub_started = Instant::now();
        let recourse = problem.eval_all_recourse(engine, &x, params.parallel)?;
        let sub_time = sub_started.elapsed().as_secs_f64();
        report.sub_time_s += sub_time;

        let mut record = IterationRecord {
            iteration,
            lower_bound: lb,
            upper_bound: None,
            best_upper_bound: best_ub,
            feasibility_cuts: 0,
            optimality_cuts: 0,
            master_time_s: master_time,
            sub_time_s: sub_time,
        };

        if recourse.iter().any(|r| !r.is_finite()) {
            for (k, r) in recourse.iter().enumerate() {
                let RecourseResult::InfeasibleWithRay { ray, margin } = r else {
                    continue;
                };
                let (coeffs, constant) = scenario_cut_terms(problem, k, ray);
                let sc = &problem.scenarios()[k];
                let cut = Cut {
                    kind: CutKind::Feasibility,
                    iteration,
                    scenario: Some(k),
                    coeffs,
                    constant,
                    value_at_generation: *margin,
                    dual_residual: sc
                        .mul_b_transpose(ray, problem.n2())
                        .into_iter()
                        .fold(f64::NEG_INFINITY, f64::max),
                    permutation: None,
                    deltas: None,
                };
                if pool.insert(None, &cut) {
                    add_cut_row(master.model_mut(), x_start, None, &cut);
                    report.cut_log.push(cut);
                    record.feasibility_cuts += 1;
                }
            }
            report.feasibility_cuts += record.feasibility_cuts;
            log::info!(
                "{} iter {iteration}: LB {lb:.9e}, {} feasibility cut(s)",
                master.method(),
                record.feasibility_cuts
            );
            let stalled = record.feasibility_cuts == 0;
            report.trace.push(record);
            if stalled {
                report.termination = Termination::Infeasible;
                finish(&mut report, best_ub, best_lb);
                return Err(SolveError::StalledGap(Box::new(report)));
            }
            continue;
        }

        // Step 3: upper bound and gap.
        let q: Vec<f64> = recourse.iter().map(|r| r.value().unwrap()).collect();
        let aggregate = problem.wowa_of(&q)?;
        let observed = if master.floor_bounds_aggregate() {
            aggregate
        } else {
            q.iter().copied().fold(f64::INFINITY, f64::min)
        };
        if observed < floor - 1e-6 {
            return Err(SolveError::InvalidThetaFloor { floor, observed });
        }
        let ub = problem.first_stage_cost(&x) + aggregate;
        record.upper_bound = Some(ub);
        if ub < best_ub {
            best_ub = ub;
            report.first_stage = x.clone();
            report.recourse = q.clone();
        }
        record.best_upper_bound = best_ub;
        let gap = relative_gap(best_ub, best_lb);
        log::info!(
            "{} iter {iteration}: LB {lb:.9e}, UB {ub:.9e}, gap {gap:.3e}",
            master.method()
        );
        if gap < params.epsilon {
            report.trace.push(record);
            report.termination = Termination::GapClosed;
            finish(&mut report, best_ub, best_lb);
            return Ok(report);
        }

        for (target, cut) in master.optimality_cuts(problem, &x, &solution, &recourse, iteration)? {
            if pool.insert(Some(target), &cut) {
                add_cut_row(master.model_mut(), x_start, Some(target), &cut);
                report.cut_log.push(cut);
                record.optimality_cuts += 1;
            }
        }
        report.optimality_cuts += record.optimality_cuts;
        let stalled = record.optimality_cuts == 0;
        report.trace.push(record);
        if stalled {
            log::warn!("{} stalled at gap {gap:.3e}", master.method());
            report.termination = Termination::IterLimit;
            finish(&mut report, best_ub, best_lb);
            return Err(SolveError::StalledGap(Box::new(report)));
        }
    }
}
