use cmdp_core::{FeatureMap, TabularCmdp};

use crate::error::{PlannerError, Result};

/// Soft action values and the soft-max state value `v(s) = β logsumexp(q(s,·)/β)`.
///
/// Absorbing states hold `q = 0` and `v = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftValues {
    pub num_actions: usize,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl SoftValues {
    pub fn from_q(q: Vec<f64>, cmdp: &TabularCmdp, beta: f64) -> Self {
        let na = cmdp.num_actions();
        let v = (0..cmdp.num_states())
            .map(|s| if cmdp.is_absorbing(s) { 0.0 } else { soft_max(&q[s * na..(s + 1) * na], beta) })
            .collect();
        Self { num_actions: na, q, v }
    }

    pub fn zeros(cmdp: &TabularCmdp, beta: f64) -> Self {
        Self::from_q(vec![0.0; cmdp.num_pairs()], cmdp, beta)
    }

    pub fn q_row(&self, s: usize) -> &[f64] {
        &self.q[s * self.num_actions..(s + 1) * self.num_actions]
    }
}

/// `log Σ exp(x)` with max subtraction; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `β logsumexp(q/β)` computed as `max + β log Σ exp((q - max)/β)`.
pub(crate) fn soft_max(q: &[f64], beta: f64) -> f64 {
    let m = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + beta * q.iter().map(|x| ((x - m) / beta).exp()).sum::<f64>().ln()
}

/// Policy-weighted soft value `Σ_a π(a|s) (q(s,a) - β log π(a|s))`, `0 log 0 = 0`.
pub fn policy_value(q_row: &[f64], pi_row: &[f64], beta: f64) -> f64 {
    q_row
        .iter()
        .zip(pi_row)
        .filter(|&(_, &p)| p > 0.0)
        .map(|(&q, &p)| p * (q - beta * p.ln()))
        .sum()
}

/// Reward table `R(s,a) - λ·φ(s,a)`.
pub fn penalized_reward(cmdp: &TabularCmdp, lambda: &[f64], phi: &FeatureMap) -> Result<Vec<f64>> {
    phi.check_shape(cmdp.num_states(), cmdp.num_actions())?;
    if lambda.len() != phi.dim() {
        return Err(PlannerError::Shape { what: "lambda", got: lambda.len(), expected: phi.dim() });
    }
    if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, &l)| !(l >= 0.0)) {
        return Err(PlannerError::NegativeLambda { index, value });
    }
    let cost = phi.cost_table(lambda);
    Ok(cmdp.reward_table().iter().zip(cost).map(|(r, c)| r - c).collect())
}
