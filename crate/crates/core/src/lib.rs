//! Two-stage decision making under the weighted OWA (WOWA) criterion.
//!
//! The crate solves
//!
//! ```text
//! min  c'x + wowa_(w,p)(Q_1(x), ..., Q_K(x))   s.t.  x ∈ X, x ≥ 0
//! ```
//!
//! where `Q_k(x)` is the optimal recourse cost of scenario `k`, in three
//! independent ways: a monolithic linear formulation ([`direct`]), a
//! Benders-type multi-cut decomposition ([`benders`]), and a decomposition with
//! one aggregated subgradient cut per iteration ([`subgradient`]). All three
//! run on the self-contained LP/MIP kernel in [`lp`].

pub mod aggregation;
pub mod benders;
pub mod cli;
mod decomposition;
pub mod direct;
pub mod loctrans;
pub mod lp;
pub mod model;
pub mod report;
pub mod subgradient;

pub use aggregation::{
    generate_weights_galpha, owa, ranked_deltas, wowa, wowa_bruteforce_permutations,
    Interpolant, RankedDeltas, WeightError, WeightKind, WeightVector,
};
pub use decomposition::{Cut, CutKind, DecompositionParams};
pub use model::{ModelError, RecourseResult, Scenario, TwoStageProblem};
pub use report::{IterationRecord, Method, SolveError, SolveReport, Termination};

/// Solves `problem` with `method`. The direct method uses only the time
/// limit from `params`.
pub fn solve(
    problem: &TwoStageProblem,
    method: Method,
    params: &DecompositionParams,
) -> Result<SolveReport, SolveError> {
    match method {
        Method::Direct => direct::solve_direct_with(
            problem,
            &direct::DirectOptions {
                time_limit: Some(params.time_limit),
            },
            &lp::SimplexEngine,
        ),
        Method::Benders => benders::solve_benders(problem, params),
        Method::Subgradient => subgradient::solve_subgradient(problem, params),
    }
}
