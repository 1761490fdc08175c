use serde::{Deserialize, Serialize};

use crate::error::{PlannerError, Result};

/// Smallest admissible entropy coefficient.
pub const MIN_BETA: f64 = 1e-8;

fn default_eval_tol() -> f64 {
    1e-9
}

fn default_max_eval_sweeps() -> usize {
    10_000
}

fn default_max_pi_iters() -> usize {
    500
}

fn default_pi_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub beta: f64,
    /// Bound on the sup-norm distance between the returned and the exact
    /// fixed point of the evaluation backup.
    #[serde(default = "default_eval_tol")]
    pub eval_tol: f64,
    #[serde(default = "default_max_eval_sweeps")]
    pub max_eval_sweeps: usize,
    #[serde(default = "default_max_pi_iters")]
    pub max_pi_iters: usize,
    #[serde(default = "default_pi_tol")]
    pub pi_tol: f64,
}

impl PlannerConfig {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            eval_tol: default_eval_tol(),
            max_eval_sweeps: default_max_eval_sweeps(),
            max_pi_iters: default_max_pi_iters(),
            pi_tol: default_pi_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= MIN_BETA) || !self.beta.is_finite() {
            return Err(PlannerError::Beta(self.beta));
        }
        if !(self.eval_tol > 0.0) {
            return Err(PlannerError::Tolerance("eval_tol"));
        }
        if !(self.pi_tol > 0.0) {
            return Err(PlannerError::Tolerance("pi_tol"));
        }
        if self.max_eval_sweeps == 0 {
            return Err(PlannerError::Tolerance("max_eval_sweeps"));
        }
        if self.max_pi_iters == 0 {
            return Err(PlannerError::Tolerance("max_pi_iters"));
        }
        Ok(())
    }
}
