use cmdp_core::CmdpError;
use constraint_learner::LearnerError;
use soft_planner::PlannerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaxentError {
    #[error("{what} has length {got}, expected {expected}")]
    Shape {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{0} trajectory set is empty")]
    Empty(&'static str),
    #[error("{0} is out of range")]
    Config(&'static str),
    #[error("value iteration did not converge in {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Cmdp(#[from] CmdpError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MaxentError>;
