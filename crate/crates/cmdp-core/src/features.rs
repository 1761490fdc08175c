use serde::{Deserialize, Serialize};

use crate::error::{CmdpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    OneHot,
    Encoded,
}

/// Mapping `(s, a) -> φ(s, a) ∈ [0, 1]^k`.
///
/// One-hot maps are implicit (feature index `s * num_actions + a`); encoded
/// maps store a dense `(s, a, k)` table, usually produced by an encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    dim: usize,
    num_states: usize,
    num_actions: usize,
    mode: FeatureMode,
    table: Vec<f64>,
}

impl FeatureMap {
    pub fn one_hot(num_states: usize, num_actions: usize) -> Self {
        Self {
            dim: num_states * num_actions,
            num_states,
            num_actions,
            mode: FeatureMode::OneHot,
            table: Vec::new(),
        }
    }

    /// Dense map from a row-major `(s, a, k)` table with entries in `[0, 1]`.
    pub fn encoded(num_states: usize, num_actions: usize, dim: usize, table: Vec<f64>) -> Result<Self> {
        let expected = num_states * num_actions * dim;
        if table.len() != expected {
            return Err(CmdpError::Shape { what: "feature table", got: table.len(), expected });
        }
        for (i, &v) in table.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                let pair = i / dim.max(1);
                return Err(CmdpError::FeatureRange {
                    state: pair / num_actions,
                    action: pair % num_actions,
                    value: v,
                });
            }
        }
        Ok(Self { dim, num_states, num_actions, mode: FeatureMode::Encoded, table })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Feature vector of a pair, materialized.
    pub fn features(&self, s: usize, a: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.add_scaled(s, a, 1.0, &mut out);
        out
    }

    /// `w · φ(s, a)`.
    pub fn dot(&self, s: usize, a: usize, w: &[f64]) -> f64 {
        match self.mode {
            FeatureMode::OneHot => w[s * self.num_actions + a],
            FeatureMode::Encoded => {
                let row = self.row(s, a);
                row.iter().zip(w).map(|(x, y)| x * y).sum()
            }
        }
    }

    /// `out += scale * φ(s, a)`.
    pub fn add_scaled(&self, s: usize, a: usize, scale: f64, out: &mut [f64]) {
        match self.mode {
            FeatureMode::OneHot => out[s * self.num_actions + a] += scale,
            FeatureMode::Encoded => {
                for (o, x) in out.iter_mut().zip(self.row(s, a)) {
                    *o += scale * x;
                }
            }
        }
    }

    /// Learned cost table `c(s, a) = w · φ(s, a)`.
    pub fn cost_table(&self, w: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_states * self.num_actions);
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                out.push(self.dot(s, a, w));
            }
        }
        out
    }

    pub fn check_shape(&self, num_states: usize, num_actions: usize) -> Result<()> {
        if self.num_states != num_states || self.num_actions != num_actions {
            return Err(CmdpError::Shape {
                what: "feature map",
                got: self.num_states * self.num_actions,
                expected: num_states * num_actions,
            });
        }
        Ok(())
    }

    fn row(&self, s: usize, a: usize) -> &[f64] {
        let i = (s * self.num_actions + a) * self.dim;
        &self.table[i..i + self.dim]
    }
}
