//! Sample-based approximation of the inner policy solve: a tabular softmax
//! policy trained with the score-function gradient of the Lagrangian, using
//! a per-state value baseline and generalized advantage estimation.

mod enumerate;
mod error;
mod estimators;
mod policy;
mod runner;
mod step;

pub use enumerate::{baseline_zero_expectation_check, enumerated_policy_gradient, MAX_ENUMERATED};
pub use error::{PgError, Result};
pub use estimators::{augmented_reward, batch_advantages, gae, AdvantageEstimate};
pub use policy::{ParametricPolicy, ValueTable};
pub use runner::{run_mce_icrl_pg, PgRun, PgRunLog, PgRunLogRow};
pub use step::{policy_gradient_step, surrogate_gradient, surrogate_objective, PgConfig, StepStats};
