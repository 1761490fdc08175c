use cmdp_core::CmdpError;
use constraint_learner::LearnerError;
use soft_planner::PlannerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("{what} has length {got}, expected {expected}")]
    Shape {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("network needs at least an input and an output layer")]
    TooFewLayers,
    #[error("layer sizes must be positive")]
    EmptyLayer,
    #[error("decoder {decoder:?} does not mirror encoder {encoder:?}")]
    Mismatch { encoder: Vec<usize>, decoder: Vec<usize> },
    #[error("{0} batch is empty")]
    EmptyBatch(&'static str),
    #[error("{0} is out of range")]
    Config(&'static str),
    #[error("pre-training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("non-finite encoder gradient at outer iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Cmdp(#[from] CmdpError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, EncoderError>;
