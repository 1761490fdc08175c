//! Trajectory-level maximum-entropy constraint inference baseline: a
//! per-pair validity classifier `ζ`, a non-causal soft planner and the
//! alternating training loop.

pub mod error;
pub mod planner;
pub mod runner;
pub mod zeta;

pub use error::{MaxentError, Result};
pub use planner::{noncausal_backup, noncausal_soft_value_iteration};
pub use runner::{run_maxent_icrl, MaxentConfig, MaxentRun};
pub use zeta::{maxent_loglik_gradient, ZetaTable};
