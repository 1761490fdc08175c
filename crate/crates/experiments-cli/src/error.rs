use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("cannot score an empty trajectory")]
    EmptyTrajectory,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Grid(#[from] gridworld::GridError),
    #[error(transparent)]
    Cmdp(#[from] cmdp_core::CmdpError),
    #[error(transparent)]
    Planner(#[from] soft_planner::PlannerError),
    #[error(transparent)]
    Learner(#[from] constraint_learner::LearnerError),
    #[error(transparent)]
    Pg(#[from] policy_gradient::PgError),
    #[error(transparent)]
    Encoder(#[from] cost_encoder::EncoderError),
    #[error(transparent)]
    Maxent(#[from] maxent_baseline::MaxentError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
