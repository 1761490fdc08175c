use serde::{Deserialize, Serialize};

use crate::error::{CmdpError, Result};
use crate::NORM_TOL;

/// Stochastic policy matrix `π(a | s)`, every row on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyDoc", into = "PolicyDoc")]
pub struct TabularPolicy {
    num_states: usize,
    num_actions: usize,
    pi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PolicyDoc {
    num_states: usize,
    num_actions: usize,
    pi: Vec<Vec<f64>>,
}

impl TabularPolicy {
    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        Self { num_states, num_actions, pi: vec![p; num_states * num_actions] }
    }

    /// Point-mass policy choosing `actions[s]` in state `s`.
    pub fn deterministic(num_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut pi = vec![0.0; actions.len() * num_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= num_actions {
                return Err(CmdpError::Policy { state: s, reason: format!("action {a} out of range") });
            }
            pi[s * num_actions + a] = 1.0;
        }
        Ok(Self { num_states: actions.len(), num_actions, pi })
    }

    /// Validates a flat row-major probability table.
    pub fn from_flat(num_states: usize, num_actions: usize, pi: Vec<f64>) -> Result<Self> {
        if pi.len() != num_states * num_actions {
            return Err(CmdpError::Shape { what: "policy", got: pi.len(), expected: num_states * num_actions });
        }
        for s in 0..num_states {
            let row = &pi[s * num_actions..(s + 1) * num_actions];
            if row.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
                return Err(CmdpError::Policy { state: s, reason: "negative or non-finite entry".into() });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORM_TOL {
                return Err(CmdpError::Policy { state: s, reason: format!("row sums to {sum}") });
            }
        }
        Ok(Self { num_states, num_actions, pi })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.pi[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.pi[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.pi
    }

    /// `log π(a|s)`, with `-inf` for zero-probability actions.
    pub fn log_prob(&self, s: usize, a: usize) -> f64 {
        self.prob(s, a).ln()
    }

    /// Sup-norm distance between two policies of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.pi.iter().zip(&other.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn check_shape(&self, num_states: usize, num_actions: usize) -> Result<()> {
        if self.num_states != num_states || self.num_actions != num_actions {
            return Err(CmdpError::Shape {
                what: "policy",
                got: self.num_states * self.num_actions,
                expected: num_states * num_actions,
            });
        }
        Ok(())
    }
}

impl TryFrom<PolicyDoc> for TabularPolicy {
    type Error = CmdpError;

    fn try_from(doc: PolicyDoc) -> Result<Self> {
        if doc.pi.len() != doc.num_states {
            return Err(CmdpError::Shape { what: "policy rows", got: doc.pi.len(), expected: doc.num_states });
        }
        let mut flat = Vec::with_capacity(doc.num_states * doc.num_actions);
        for row in &doc.pi {
            if row.len() != doc.num_actions {
                return Err(CmdpError::Shape { what: "policy row", got: row.len(), expected: doc.num_actions });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(doc.num_states, doc.num_actions, flat)
    }
}

impl From<TabularPolicy> for PolicyDoc {
    fn from(p: TabularPolicy) -> Self {
        let pi = p.pi.chunks(p.num_actions.max(1)).map(|r| r.to_vec()).collect();
        PolicyDoc { num_states: p.num_states, num_actions: p.num_actions, pi }
    }
}
