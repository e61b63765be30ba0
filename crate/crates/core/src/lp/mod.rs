//! Dense linear and mixed-binary programming.
//!
//! [`solve_lp`] runs a two-phase bounded-variable primal simplex and returns
//! either an optimum with duals and reduced costs, a Farkas certificate of
//! infeasibility, or a primal ray of unboundedness. [`solve_mip`] adds
//! best-bound branch-and-bound over binary variables, re-optimizing each node
//! with the dual simplex from the previous node's tableau.
//!
//! Sign conventions:
//! * duals are `∂ objective / ∂ rhs` in the model's own sense, so for a
//!   minimization a `≥` row has a nonnegative dual and a `≤` row a
//!   nonpositive one;
//! * a Farkas ray `y` has the sign pattern of minimization duals and
//!   certifies `max { y'Ax : l ≤ x ≤ u } < y'b`;
//! * an unbounded ray `r` keeps every row relation satisfied when added to a
//!   feasible point and strictly improves the objective.
//!
//! Other engines can stand in for the built-in kernel by implementing
//! [`LpEngine`]; the decomposition drivers only talk to that trait.

mod lu;
mod mip;
mod simplex;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mip::MipOptions;

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const OPTIMALITY_TOL: f64 = 1e-7;
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs >= rhs - tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl LpModel {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds a continuous variable; existing rows get a zero coefficient.
    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.push_var(Variable {
            lower,
            upper,
            kind: VarKind::Continuous,
            cost,
        })
    }

    fn push_var(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        for c in &mut self.constraints {
            c.coeffs.push(0.0);
        }
        self.variables.len() - 1
    }

    pub fn add_free_var(&mut self, cost: f64) -> usize {
        self.add_var(f64::NEG_INFINITY, f64::INFINITY, cost)
    }

    pub fn add_binary(&mut self, cost: f64) -> usize {
        self.push_var(Variable {
            lower: 0.0,
            upper: 1.0,
            kind: VarKind::Binary,
            cost,
        })
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    /// Adds a row given as `(variable, coefficient)` pairs over the current
    /// variable set. Repeated indices accumulate.
    pub fn add_sparse_constraint(
        &mut self,
        terms: &[(usize, f64)],
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn has_binaries(&self) -> bool {
        self.variables.iter().any(|v| v.kind == VarKind::Binary)
    }

    /// Copy with every binary relaxed to a continuous variable in its bounds.
    pub fn relaxed(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.variables {
            v.kind = VarKind::Continuous;
        }
        out
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, xi)| v.cost * xi).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| {
            let lhs = c.activity(x);
            match c.relation {
                Relation::Le => (lhs - c.rhs).max(0.0),
                Relation::Ge => (c.rhs - lhs).max(0.0),
                Relation::Eq => (lhs - c.rhs).abs(),
            }
        });
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.variables.is_empty() {
            return Err(LpError::InvalidModel("model has no variables".into()));
        }
        let n = self.num_vars();
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(LpError::InvalidModel(format!(
                    "variable {j} has invalid bounds [{}, {}]",
                    v.lower, v.upper
                )));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!(
                    "variable {j} has an empty bound interval"
                )));
            }
            if !v.cost.is_finite() {
                return Err(LpError::InvalidModel(format!(
                    "variable {j} has a non-finite cost"
                )));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(LpError::InvalidModel(format!(
                    "binary variable {j} has bounds outside [0, 1]"
                )));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::InvalidModel(format!(
                    "constraint {i} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::InvalidModel(format!(
                    "constraint {i} has non-finite data"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One per constraint, `∂ objective / ∂ rhs`.
    pub duals: Vec<f64>,
    /// `cost_j - Σ_i a_ij · dual_i`, in the model's sense.
    pub reduced_costs: Vec<f64>,
}

impl LpSolution {
    /// `b'y` plus the bound terms implied by the reduced costs.
    pub fn dual_objective(&self, model: &LpModel) -> f64 {
        let flip = match model.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let rows: f64 = model
            .constraints
            .iter()
            .zip(&self.duals)
            .map(|(c, y)| c.rhs * y)
            .sum();
        let bounds: f64 = model
            .variables
            .iter()
            .zip(&self.reduced_costs)
            .map(|(v, &rc)| {
                let signed = flip * rc;
                if signed > 1e-9 {
                    rc * v.lower
                } else if signed < -1e-9 {
                    rc * v.upper
                } else {
                    0.0
                }
            })
            .sum();
        rows + bounds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// Farkas multipliers, one per constraint.
    Infeasible { farkas: Vec<f64> },
    /// Improving direction over the variables.
    Unbounded { ray: Vec<f64> },
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal(_) => LpStatus::Optimal,
            LpOutcome::Infeasible { .. } => LpStatus::Infeasible,
            LpOutcome::Unbounded { .. } => LpStatus::Unbounded,
        }
    }

    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

/// Snapshot of the simplex basis attached to numerical failures.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisState {
    pub phase: u8,
    pub iterations: usize,
    pub basic_columns: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("simplex failed to converge in phase {} after {} iterations", .0.phase, .0.iterations)]
    NumericalFailure(Box<BasisState>),
    #[error("branch-and-bound node limit of {nodes} reached")]
    NodeLimit {
        nodes: usize,
        incumbent: Option<Box<LpSolution>>,
    },
    #[error("branch-and-bound time limit reached after {nodes} nodes")]
    TimeLimit {
        nodes: usize,
        incumbent: Option<Box<LpSolution>>,
    },
}

/// Solves a continuous LP.
pub fn solve_lp(model: &LpModel) -> Result<LpOutcome, LpError> {
    model.validate()?;
    if model.has_binaries() {
        return Err(LpError::InvalidModel(
            "solve_lp requires an all-continuous model; use solve_mip or relaxed()".into(),
        ));
    }
    simplex::solve(model)
}

/// Solves a model with binary variables by branch-and-bound.
pub fn solve_mip(model: &LpModel) -> Result<LpOutcome, LpError> {
    solve_mip_with(model, &MipOptions::default())
}

pub fn solve_mip_with(model: &LpModel, options: &MipOptions) -> Result<LpOutcome, LpError> {
    model.validate()?;
    mip::solve(model, options)
}

/// The operations the decomposition drivers need from an LP/MIP engine.
pub trait LpEngine: Sync {
    fn solve_lp(&self, model: &LpModel) -> Result<LpOutcome, LpError>;
    fn solve_mip(&self, model: &LpModel, time_limit: Option<Duration>)
        -> Result<LpOutcome, LpError>;
}

/// The built-in dense simplex and branch-and-bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimplexEngine;

impl LpEngine for SimplexEngine {
    fn solve_lp(&self, model: &LpModel) -> Result<LpOutcome, LpError> {
        solve_lp(model)
    }

    fn solve_mip(
        &self,
        model: &LpModel,
        time_limit: Option<Duration>,
    ) -> Result<LpOutcome, LpError> {
        let options = MipOptions {
            time_limit,
            ..MipOptions::default()
        };
        solve_mip_with(model, &options)
    }
}

/// Checks a Farkas certificate against `model`: multiplier signs must match
/// the row relations and `y'b - max_{l≤x≤u} y'Ax` must exceed `tol`.
pub fn farkas_margin(model: &LpModel, farkas: &[f64]) -> Option<f64> {
    let tol = FEASIBILITY_TOL;
    let mut rhs = 0.0;
    for (c, &y) in model.constraints.iter().zip(farkas) {
        let ok = match c.relation {
            Relation::Le => y <= tol,
            Relation::Ge => y >= -tol,
            Relation::Eq => true,
        };
        if !ok {
            return None;
        }
        rhs += y * c.rhs;
    }
    let mut max_lhs = 0.0;
    for (j, v) in model.variables.iter().enumerate() {
        let coef: f64 = model
            .constraints
            .iter()
            .zip(farkas)
            .map(|(c, y)| c.coeffs[j] * y)
            .sum();
        if coef > tol {
            if v.upper.is_infinite() {
                return None;
            }
            max_lhs += coef * v.upper;
        } else if coef < -tol {
            if v.lower.is_infinite() {
                return None;
            }
            max_lhs += coef * v.lower;
        } else if coef != 0.0 {
            // Within tolerance; charge the finite bound with larger effect.
            let cand = [v.lower, v.upper]
                .into_iter()
                .filter(|b| b.is_finite())
                .map(|b| coef * b)
                .fold(f64::NEG_INFINITY, f64::max);
            if cand.is_finite() {
                max_lhs += cand;
            }
        }
    }
    Some(rhs - max_lhs)
}
