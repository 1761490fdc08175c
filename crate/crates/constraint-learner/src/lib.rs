//! Constraint learning by dual descent on the feature-matching multipliers
//! `λ`, with the policy re-solved to convergence after every dual step.

mod dual;
mod error;
mod runner;

pub use dual::{dual_gradient, dual_update, DemoSet, DualState};
pub use error::{LearnerError, Result};
pub use runner::{
    dual_function, lagrangian_value, run_mce_icrl_features, run_mce_icrl_tabular, IcrlRunConfig, NominalFeatures,
    RunLog, RunLogRow, TabularRun, DIVERGENCE_LIMIT,
};
