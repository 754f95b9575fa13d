//! Planners: exact value iteration and policy evaluation for finite MDPs,
//! and fitted Q iteration over transition tuples for continuous states.

mod fqi;
mod solve;
mod trees;

pub use fqi::{
    fitted_q_act, fitted_q_iteration, simulate_dataset, FittedQ, FqiConfig, RegressorKind,
    TransitionTuple,
};
pub use solve::{bellman_residual, policy_evaluation, value_iteration, Plan, QTable};
pub use trees::{ExtraTreesConfig, ExtraTreesRegressor};

use thiserror::Error;

/// Default sup-norm tolerance for the exact planners.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default sweep limit for value iteration.
pub const DEFAULT_MAX_ITERS: usize = 100_000;

#[derive(Debug, Error)]
pub enum PlanningError {
    #[error(
        "value iteration did not reach tolerance {tol:.1e}: residual {residual:.3e} after {iterations} sweeps"
    )]
    NotConverged {
        residual: f64,
        iterations: usize,
        tol: f64,
    },
    #[error("linear solve failed: {0}")]
    SingularSystem(String),
    #[error("invalid planner input: {0}")]
    InvalidInput(String),
}
