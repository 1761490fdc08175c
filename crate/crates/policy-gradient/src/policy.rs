use cmdp_core::TabularPolicy;
use serde::{Deserialize, Serialize};

/// Softmax policy with one logit per `(s, a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricPolicy {
    pub num_states: usize,
    pub num_actions: usize,
    pub theta: Vec<f64>,
}

impl ParametricPolicy {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self { num_states, num_actions, theta: vec![0.0; num_states * num_actions] }
    }

    /// `π(·|s)` as a max-subtracted softmax of the logits.
    pub fn probs(&self, s: usize) -> Vec<f64> {
        let row = &self.theta[s * self.num_actions..(s + 1) * self.num_actions];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = row.iter().map(|x| (x - m).exp()).collect();
        let z: f64 = e.iter().sum();
        e.into_iter().map(|x| x / z).collect()
    }

    pub fn log_prob(&self, s: usize, a: usize) -> f64 {
        let row = &self.theta[s * self.num_actions..(s + 1) * self.num_actions];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        row[a] - lse
    }

    /// Adds `scale · ∇_θ log π(a|s)` into `out`; only the logits of `s` move.
    pub fn add_grad_log_prob(&self, s: usize, a: usize, scale: f64, out: &mut [f64]) {
        let p = self.probs(s);
        let base = s * self.num_actions;
        for (b, pb) in p.iter().enumerate() {
            let indicator = if b == a { 1.0 } else { 0.0 };
            out[base + b] += scale * (indicator - pb);
        }
    }

    pub fn to_tabular(&self) -> TabularPolicy {
        let mut flat = Vec::with_capacity(self.theta.len());
        for s in 0..self.num_states {
            flat.extend(self.probs(s));
        }
        TabularPolicy::from_flat(self.num_states, self.num_actions, flat).expect("softmax rows are normalized")
    }
}

/// Learned per-state value baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub v_hat: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(num_states: usize) -> Self {
        Self { v_hat: vec![0.0; num_states] }
    }
}
