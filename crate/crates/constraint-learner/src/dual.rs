use cmdp_core::{trajectory_features, FeatureMap, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{LearnerError, Result};

/// Nonnegative multipliers over feature dimensions with their budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub lr_lambda: f64,
    pub iteration: usize,
}

impl DualState {
    pub fn new(dim: usize, lambda_init: f64, alpha: f64, lr_lambda: f64) -> Self {
        Self { lambda: vec![lambda_init; dim], alpha: vec![alpha; dim], lr_lambda, iteration: 0 }
    }

    pub fn lambda_l1(&self) -> f64 {
        self.lambda.iter().map(|x| x.abs()).sum()
    }
}

/// Expert demonstrations with their cached mean discounted features.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoSet {
    trajectories: Vec<Trajectory>,
    empirical_features: Vec<f64>,
}

impl DemoSet {
    pub fn new(trajectories: Vec<Trajectory>, phi: &FeatureMap, gamma: f64) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(LearnerError::EmptyDemos);
        }
        let n = trajectories.len() as f64;
        let mut mean = vec![0.0; phi.dim()];
        for t in &trajectories {
            for (m, f) in mean.iter_mut().zip(trajectory_features(t, phi, gamma)?) {
                *m += f;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        Ok(Self { trajectories, empirical_features: mean })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn empirical_features(&self) -> &[f64] {
        &self.empirical_features
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// `∇_λ L = E_D[φ] - E_π[φ] - α`.
pub fn dual_gradient(expert_feats: &[f64], nominal_feats: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    check("nominal_feats", nominal_feats.len(), expert_feats.len())?;
    check("alpha", alpha.len(), expert_feats.len())?;
    Ok(expert_feats.iter().zip(nominal_feats).zip(alpha).map(|((e, n), a)| e - n - a).collect())
}

/// Projected descent `λ ← max(0, λ - lr · grad)`.
pub fn dual_update(dual: &DualState, grad: &[f64]) -> Result<DualState> {
    check("grad", grad.len(), dual.lambda.len())?;
    let lambda = dual.lambda.iter().zip(grad).map(|(l, g)| (l - dual.lr_lambda * g).max(0.0)).collect();
    Ok(DualState { lambda, alpha: dual.alpha.clone(), lr_lambda: dual.lr_lambda, iteration: dual.iteration + 1 })
}

fn check(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(LearnerError::Dimension { what, got, expected });
    }
    Ok(())
}
