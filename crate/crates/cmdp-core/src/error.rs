use thiserror::Error;

#[derive(Debug, Error)]
pub enum CmdpError {
    #[error("{what} has length {got}, expected {expected}")]
    Shape {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("transition row ({state}, {action}) sums to {sum}")]
    TransitionRow { state: usize, action: usize, sum: f64 },
    #[error("transition ({state}, {action}) has invalid probability {value}")]
    TransitionValue { state: usize, action: usize, value: f64 },
    #[error("initial distribution sums to {0}")]
    InitialDist(f64),
    #[error("initial distribution has invalid entry {0}")]
    InitialValue(f64),
    #[error("true cost {value} at ({state}, {action}) is negative or non-finite")]
    Cost { state: usize, action: usize, value: f64 },
    #[error("reward at ({state}, {action}) is not finite")]
    Reward { state: usize, action: usize },
    #[error("discount {0} outside [0, 1)")]
    Discount(f64),
    #[error("budget {0} is negative")]
    Budget(f64),
    #[error("absorbing state {state}: {reason}")]
    Absorbing { state: usize, reason: &'static str },
    #[error("index ({state}, {action}) out of range for {num_states}x{num_actions} table")]
    Index {
        state: usize,
        action: usize,
        num_states: usize,
        num_actions: usize,
    },
    #[error("policy row {state} is invalid: {reason}")]
    Policy { state: usize, reason: String },
    #[error("feature value {value} at ({state}, {action}) outside [0, 1]")]
    FeatureRange { state: usize, action: usize, value: f64 },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CmdpError>;
