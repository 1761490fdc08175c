//! Experiment pipeline for the gridworld constraint-learning study.

pub mod config;
pub mod error;
pub mod eval;
pub mod pipeline;

pub use config::{ExperimentConfig, Method, TransferSpec};
pub use error::{ExperimentError, Result};
pub use eval::{evaluate_policy, mean_se, violation_rate, EvalSummary};
pub use pipeline::*;
