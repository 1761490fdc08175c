use cmdp_core::CmdpError;
use thiserror::Error;

use crate::iteration::ConvergenceLog;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("beta {0} below the minimum {min}", min = crate::MIN_BETA)]
    Beta(f64),
    #[error("{0} must be positive")]
    Tolerance(&'static str),
    #[error("lambda component {index} is {value}; multipliers must be nonnegative")]
    NegativeLambda { index: usize, value: f64 },
    #[error("{what} has length {got}, expected {expected}")]
    Shape {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("policy evaluation did not converge in {sweeps} sweeps (residual {residual:e})")]
    EvaluationDiverged { sweeps: usize, residual: f64 },
    #[error("policy iteration hit the cap of {iterations} iterations (last policy change {last_change:e})")]
    IterationCap {
        iterations: usize,
        last_change: f64,
        log: ConvergenceLog,
    },
    #[error("penalty weight {0} is negative")]
    Penalty(f64),
    #[error("expert violation probability {violation:e} still above {threshold:e} at penalty {penalty}")]
    ExpertThreshold {
        penalty: f64,
        violation: f64,
        threshold: f64,
    },
    #[error(transparent)]
    Cmdp(#[from] CmdpError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PlannerError>;
