use cmdp_core::{FeatureMap, TabularCmdp, Trajectory};

use crate::policy::{ParametricPolicy, ValueTable};

/// `R(s,a) - λ·φ(s,a) - β log π(a|s)`.
pub fn augmented_reward(
    s: usize,
    a: usize,
    log_pi: f64,
    lambda: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    beta: f64,
) -> f64 {
    cmdp.reward(s, a) - phi.dot(s, a, lambda) - beta * log_pi
}

/// Per-timestep advantages of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageEstimate(pub Vec<f64>);

/// `A_t = δ_t + γ λ_gae A_{t+1}`, computed backwards.
pub fn gae(deltas: &[f64], gamma: f64, gae_lambda: f64) -> AdvantageEstimate {
    let mut out = vec![0.0; deltas.len()];
    let mut acc = 0.0;
    for t in (0..deltas.len()).rev() {
        acc = deltas[t] + gamma * gae_lambda * acc;
        out[t] = acc;
    }
    AdvantageEstimate(out)
}

/// Rewards, advantages and bootstrapped returns for one rollout.
#[derive(Debug, Clone)]
pub(crate) struct Scored {
    pub advantages: AdvantageEstimate,
    pub returns: Vec<f64>,
}

/// Value of the state after the last step: zero when absorbing, else the
/// baseline (the rollout was cut by the horizon).
fn tail_value(traj: &Trajectory, cmdp: &TabularCmdp, values: &ValueTable) -> f64 {
    if cmdp.is_absorbing(traj.final_state) {
        0.0
    } else {
        values.v_hat[traj.final_state]
    }
}

pub(crate) fn score_trajectory(
    traj: &Trajectory,
    policy: &ParametricPolicy,
    values: &ValueTable,
    lambda: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    beta: f64,
    gamma: f64,
    gae_lambda: f64,
) -> Scored {
    let n = traj.steps.len();
    let rewards: Vec<f64> = traj
        .steps
        .iter()
        .map(|&(s, a)| augmented_reward(s, a, policy.log_prob(s, a), lambda, phi, cmdp, beta))
        .collect();
    let tail = tail_value(traj, cmdp, values);
    let mut deltas = Vec::with_capacity(n);
    for t in 0..n {
        let (s, _) = traj.steps[t];
        let next = if t + 1 < n { values.v_hat[traj.steps[t + 1].0] } else { tail };
        deltas.push(rewards[t] + gamma * next - values.v_hat[s]);
    }
    let mut returns = vec![0.0; n];
    let mut acc = tail;
    for t in (0..n).rev() {
        acc = rewards[t] + gamma * acc;
        returns[t] = acc;
    }
    Scored { advantages: gae(&deltas, gamma, gae_lambda), returns }
}

/// Advantages for every trajectory of a batch.
#[allow(clippy::too_many_arguments)]
pub fn batch_advantages(
    batch: &[Trajectory],
    policy: &ParametricPolicy,
    values: &ValueTable,
    lambda: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    beta: f64,
    gamma: f64,
    gae_lambda: f64,
) -> Vec<AdvantageEstimate> {
    batch
        .iter()
        .map(|t| score_trajectory(t, policy, values, lambda, phi, cmdp, beta, gamma, gae_lambda).advantages)
        .collect()
}
