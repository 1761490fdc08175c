use cmdp_core::{FeatureMap, TabularCmdp, Trajectory};
use constraint_learner::DualState;
use serde::{Deserialize, Serialize};

use crate::error::{PgError, Result};
use crate::estimators::{score_trajectory, AdvantageEstimate};
use crate::policy::{ParametricPolicy, ValueTable};

/// Baseline moving-average rate.
const VALUE_RATE: f64 = 0.5;

fn default_beta() -> f64 {
    1e-5
}

fn default_gamma() -> f64 {
    0.99
}

fn default_gae_lambda() -> f64 {
    0.9
}

fn default_lr_theta() -> f64 {
    0.1
}

fn default_steps_per_update() -> usize {
    16
}

fn default_pg_updates() -> usize {
    50
}

fn default_value_fit_sweeps() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgConfig {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_gae_lambda")]
    pub gae_lambda: f64,
    #[serde(default = "default_lr_theta")]
    pub lr_theta: f64,
    /// Trajectories sampled per policy-gradient step.
    #[serde(default = "default_steps_per_update")]
    pub steps_per_update: usize,
    #[serde(default = "default_pg_updates")]
    pub pg_updates_per_dual_step: usize,
    #[serde(default = "default_value_fit_sweeps")]
    pub value_fit_sweeps: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for PgConfig {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            gamma: default_gamma(),
            gae_lambda: default_gae_lambda(),
            lr_theta: default_lr_theta(),
            steps_per_update: default_steps_per_update(),
            pg_updates_per_dual_step: default_pg_updates(),
            value_fit_sweeps: default_value_fit_sweeps(),
            seed: 0,
        }
    }
}

impl PgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(PgError::Config("gae_lambda"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(PgError::Config("gamma"));
        }
        if !(self.beta >= 0.0) {
            return Err(PgError::Config("beta"));
        }
        if !(self.lr_theta > 0.0) {
            return Err(PgError::Config("lr_theta"));
        }
        if self.steps_per_update == 0 {
            return Err(PgError::Config("steps_per_update"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub grad_norm: f64,
    pub batch_size: usize,
}

/// Frozen-batch surrogate `(1/N) Σ_i Σ_t log π_θ(a_t|s_t) Â_t`.
pub fn surrogate_objective(policy: &ParametricPolicy, batch: &[Trajectory], adv: &[AdvantageEstimate]) -> f64 {
    let n = batch.len() as f64;
    batch
        .iter()
        .zip(adv)
        .map(|(t, a)| t.steps.iter().zip(&a.0).map(|(&(s, act), &x)| policy.log_prob(s, act) * x).sum::<f64>())
        .sum::<f64>()
        / n
}

/// Analytic gradient of [`surrogate_objective`].
pub fn surrogate_gradient(policy: &ParametricPolicy, batch: &[Trajectory], adv: &[AdvantageEstimate]) -> Vec<f64> {
    let n = batch.len() as f64;
    let mut g = vec![0.0; policy.theta.len()];
    for (t, a) in batch.iter().zip(adv) {
        for (&(s, act), &x) in t.steps.iter().zip(&a.0) {
            policy.add_grad_log_prob(s, act, x / n, &mut g);
        }
    }
    g
}

/// One ascent step on the Lagrangian policy gradient followed by a baseline
/// refit on the augmented returns of the same batch.
pub fn policy_gradient_step(
    policy: &ParametricPolicy,
    values: &ValueTable,
    batch: &[Trajectory],
    dual: &DualState,
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    cfg: &PgConfig,
) -> Result<(ParametricPolicy, ValueTable, StepStats)> {
    cfg.validate()?;
    if batch.is_empty() {
        return Err(PgError::EmptyBatch);
    }
    if dual.lambda.len() != phi.dim() {
        return Err(PgError::Shape { what: "lambda", got: dual.lambda.len(), expected: phi.dim() });
    }
    let scored: Vec<_> = batch
        .iter()
        .map(|t| score_trajectory(t, policy, values, &dual.lambda, phi, cmdp, cfg.beta, cfg.gamma, cfg.gae_lambda))
        .collect();
    let adv: Vec<AdvantageEstimate> = scored.iter().map(|s| s.advantages.clone()).collect();
    let grad = surrogate_gradient(policy, batch, &adv);
    if let Some((index, &value)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(PgError::NonFiniteGradient { index, value });
    }
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut next = policy.clone();
    for (th, g) in next.theta.iter_mut().zip(&grad) {
        *th += cfg.lr_theta * g;
    }

    let ns = values.v_hat.len();
    let mut sum = vec![0.0; ns];
    let mut count = vec![0usize; ns];
    for (t, sc) in batch.iter().zip(&scored) {
        for (&(s, _), &g) in t.steps.iter().zip(&sc.returns) {
            sum[s] += g;
            count[s] += 1;
        }
    }
    let mut v = values.clone();
    for _ in 0..cfg.value_fit_sweeps {
        for s in 0..ns {
            if count[s] > 0 {
                let target = sum[s] / count[s] as f64;
                v.v_hat[s] += VALUE_RATE * (target - v.v_hat[s]);
            }
        }
    }
    Ok((next, v, StepStats { grad_norm, batch_size: batch.len() }))
}
