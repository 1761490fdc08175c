//! Soft policy evaluation, closed-form policy improvement and soft policy
//! iteration on the penalized reward `R - λ·φ`, plus expert generation.
//!
//! Absorbing states are terminal: their action values and state value are
//! pinned to zero, so they carry neither reward nor entropy.

mod config;
mod error;
mod expert;
mod iteration;
mod values;

pub use cmdp_core::TabularPolicy;
pub use config::{PlannerConfig, MIN_BETA};
pub use error::{PlannerError, Result};
pub use expert::{make_expert, make_expert_verified, ExpertReport, EXPERT_MAX_DOUBLINGS};
pub use iteration::{
    policy_improvement, soft_bellman_backup, soft_bellman_backup_reward, soft_policy_evaluation,
    soft_policy_evaluation_reward, soft_policy_iteration, soft_policy_iteration_reward, ConvergenceLog,
    IterationRecord,
};
pub use values::{log_sum_exp, penalized_reward, policy_value, SoftValues};
