use cmdp_core::Trajectory;
use serde::{Deserialize, Serialize};

use crate::error::{MaxentError, Result};

/// Per-pair validity probabilities `ζ(s,a) = sigmoid(logit(s,a))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaTable {
    pub num_states: usize,
    pub num_actions: usize,
    pub logits: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log sigmoid(z)` without forming `sigmoid(z)` first.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

impl ZetaTable {
    /// All logits 0, so every pair starts at `ζ = 0.5`.
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        Self { num_states, num_actions, logits: vec![0.0; num_states * num_actions] }
    }

    pub fn zeta(&self, s: usize, a: usize) -> f64 {
        sigmoid(self.logits[s * self.num_actions + a])
    }

    pub fn log_zeta(&self, s: usize, a: usize) -> f64 {
        log_sigmoid(self.logits[s * self.num_actions + a])
    }

    pub fn zeta_table(&self) -> Vec<f64> {
        self.logits.iter().map(|&l| sigmoid(l)).collect()
    }

    /// Implied cost `1 - ζ` per pair, for rendering.
    pub fn cost_table(&self) -> Vec<f64> {
        self.logits.iter().map(|&l| sigmoid(-l)).collect()
    }

    /// `R(s,a) + w log ζ(s,a)`.
    pub fn barrier_reward(&self, reward: &[f64], weight: f64) -> Result<Vec<f64>> {
        if reward.len() != self.logits.len() {
            return Err(MaxentError::Shape { what: "reward", got: reward.len(), expected: self.logits.len() });
        }
        Ok(reward.iter().zip(&self.logits).map(|(r, &l)| r + weight * log_sigmoid(l)).collect())
    }

    pub fn ascend(&mut self, grad: &[f64], lr: f64) -> Result<()> {
        if grad.len() != self.logits.len() {
            return Err(MaxentError::Shape { what: "logit gradient", got: grad.len(), expected: self.logits.len() });
        }
        self.logits.iter_mut().zip(grad).for_each(|(l, g)| *l += lr * g);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let z: Self = serde_json::from_str(text)?;
        if z.logits.len() != z.num_states * z.num_actions {
            return Err(MaxentError::Shape { what: "logits", got: z.logits.len(), expected: z.num_states * z.num_actions });
        }
        Ok(z)
    }
}

/// Mean visit counts per pair (undiscounted).
fn mean_counts(trajs: &[Trajectory], zeta: &ZetaTable) -> Result<Vec<f64>> {
    let mut counts = vec![0.0; zeta.logits.len()];
    let n = trajs.len() as f64;
    for t in trajs {
        for &(s, a) in &t.steps {
            if s >= zeta.num_states || a >= zeta.num_actions {
                return Err(MaxentError::Shape { what: "trajectory pair", got: s * zeta.num_actions + a, expected: zeta.logits.len() });
            }
            counts[s * zeta.num_actions + a] += 1.0 / n;
        }
    }
    Ok(counts)
}

/// Gradient with respect to the logits of
/// `mean_D Σ_t log ζ(s_t,a_t) - mean_nominal Σ_t log ζ(s_t,a_t)`.
///
/// `∂ log sigmoid(l)/∂l = 1 - ζ`, so each entry is `(1 - ζ)` times the
/// difference of mean visit counts.
pub fn maxent_loglik_gradient(demos: &[Trajectory], nominal: &[Trajectory], zeta: &ZetaTable) -> Result<Vec<f64>> {
    if demos.is_empty() {
        return Err(MaxentError::Empty("demo"));
    }
    if nominal.is_empty() {
        return Err(MaxentError::Empty("nominal"));
    }
    let d = mean_counts(demos, zeta)?;
    let n = mean_counts(nominal, zeta)?;
    Ok(zeta.logits.iter().zip(d.iter().zip(&n)).map(|(&l, (d, n))| sigmoid(-l) * (d - n)).collect())
}
