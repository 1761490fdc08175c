use cmdp_core::CmdpError;
use soft_planner::PlannerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("demo set is empty")]
    EmptyDemos,
    #[error("{0} must be positive")]
    Config(&'static str),
    #[error("lambda diverged at iteration {iteration}: component {index} is {value}")]
    Diverged { iteration: usize, index: usize, value: f64 },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Cmdp(#[from] CmdpError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LearnerError>;
