use cmdp_core::CmdpError;
use constraint_learner::LearnerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgError {
    #[error("{what} has length {got}, expected {expected}")]
    Shape {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("non-finite gradient component {index} ({value})")]
    NonFiniteGradient { index: usize, value: f64 },
    #[error("enumeration would visit {0} trajectories")]
    TooLarge(usize),
    #[error("{0} is out of range")]
    Config(&'static str),
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Cmdp(#[from] CmdpError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PgError>;
