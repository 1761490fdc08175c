use cmdp_core::{violation_probability, TabularCmdp, TabularPolicy};

use crate::config::PlannerConfig;
use crate::error::{PlannerError, Result};
use crate::iteration::soft_policy_iteration_reward;

pub const EXPERT_MAX_DOUBLINGS: usize = 20;

/// Soft-optimal policy for `R - w · 1[C > 0]`.
pub fn make_expert(cmdp: &TabularCmdp, penalty_weight: f64, cfg: &PlannerConfig) -> Result<TabularPolicy> {
    if !(penalty_weight >= 0.0) {
        return Err(PlannerError::Penalty(penalty_weight));
    }
    let reward: Vec<f64> = cmdp
        .reward_table()
        .iter()
        .zip(cmdp.cost_table())
        .map(|(&r, &c)| if c > 0.0 { r - penalty_weight } else { r })
        .collect();
    Ok(soft_policy_iteration_reward(&reward, cmdp, cfg)?.0)
}

#[derive(Debug, Clone)]
pub struct ExpertReport {
    pub policy: TabularPolicy,
    pub penalty: f64,
    pub violation_probability: f64,
    /// The penalty outgrew every achievable reward-plus-entropy difference
    /// before the threshold was met, so the residual violations are forced by
    /// the dynamics.
    pub saturated: bool,
}

/// Penalty doubling from 1 until the exact violation probability drops below
/// `threshold`.
///
/// Once the penalty exceeds `(R_max - R_min + β log|A|) / (1 - γ)` a single
/// violation outweighs any return the agent could gain from it, and the
/// schedule stops with `saturated = true`.
pub fn make_expert_verified(cmdp: &TabularCmdp, cfg: &PlannerConfig, threshold: f64) -> Result<ExpertReport> {
    let r = cmdp.reward_table();
    let span = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - r.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = (span + cfg.beta * (cmdp.num_actions() as f64).ln()) / (1.0 - cmdp.gamma());
    let mut penalty = 1.0;
    for _ in 0..=EXPERT_MAX_DOUBLINGS {
        let policy = make_expert(cmdp, penalty, cfg)?;
        let vp = violation_probability(&policy, cmdp);
        if vp < threshold || penalty > bound {
            return Ok(ExpertReport { policy, penalty, violation_probability: vp, saturated: vp >= threshold });
        }
        penalty *= 2.0;
    }
    let policy = make_expert(cmdp, penalty / 2.0, cfg)?;
    Err(PlannerError::ExpertThreshold {
        penalty: penalty / 2.0,
        violation: violation_probability(&policy, cmdp),
        threshold,
    })
}
