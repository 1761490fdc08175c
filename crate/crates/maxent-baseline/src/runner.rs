use std::time::Instant;

use cmdp_core::{
    expected_features_exact, expected_table_exact, sample_trajectory, seeded_rng, FeatureMap, TabularCmdp, TabularPolicy,
    Trajectory,
};
use constraint_learner::{DemoSet, IcrlRunConfig, RunLog, RunLogRow};
use serde::{Deserialize, Serialize};

use crate::error::{MaxentError, Result};
use crate::planner::noncausal_soft_value_iteration;
use crate::zeta::{maxent_loglik_gradient, ZetaTable};

fn default_barrier_weight() -> f64 {
    1.0
}

/// Settings specific to the baseline; everything else comes from the shared
/// run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxentConfig {
    /// `w` in the shaped reward `R + w log ζ`.
    #[serde(default = "default_barrier_weight")]
    pub barrier_weight: f64,
    /// Model temperature; the planner's `β` when absent.
    #[serde(default)]
    pub temperature: Option<f64>,
    /// Logit ascent rate; the run's `lr_lambda` when absent.
    #[serde(default)]
    pub lr_logit: Option<f64>,
    /// Nominal rollouts per iteration; the demo count when absent.
    #[serde(default)]
    pub nominal_samples: Option<usize>,
}

impl Default for MaxentConfig {
    fn default() -> Self {
        Self { barrier_weight: default_barrier_weight(), temperature: None, lr_logit: None, nominal_samples: None }
    }
}

#[derive(Debug, Clone)]
pub struct MaxentRun {
    pub zeta: ZetaTable,
    pub policy: TabularPolicy,
    pub log: RunLog,
}

/// Alternates planning on `R + w log ζ` under the non-causal model, sampling
/// nominal rollouts and one ascent step on the logits. The last iteration
/// plans without updating, which gives the returned policy.
///
/// `lambda_l1` in the log holds `Σ (1 - ζ)`, the total implied cost.
pub fn run_maxent_icrl(cmdp: &TabularCmdp, demos: &DemoSet, cfg: &IcrlRunConfig, mcfg: &MaxentConfig) -> Result<MaxentRun> {
    cfg.validate()?;
    let beta = mcfg.temperature.unwrap_or(cfg.planner.beta);
    let lr = mcfg.lr_logit.unwrap_or(cfg.lr_lambda);
    let samples = mcfg.nominal_samples.unwrap_or(demos.len());
    if !(mcfg.barrier_weight >= 0.0) {
        return Err(MaxentError::Config("barrier_weight"));
    }
    if !(lr > 0.0) {
        return Err(MaxentError::Config("lr_logit"));
    }
    if samples == 0 {
        return Err(MaxentError::Config("nominal_samples"));
    }
    let (ns, na) = (cmdp.num_states(), cmdp.num_actions());
    let one_hot = FeatureMap::one_hot(ns, na);
    let demo_feats = DemoSet::new(demos.trajectories().to_vec(), &one_hot, cmdp.gamma())?;
    let start = Instant::now();
    let mut rng = seeded_rng(cfg.seed, 0x6d6178);
    let mut zeta = ZetaTable::new(ns, na);
    let mut log = RunLog::default();
    for iteration in 0..=cfg.outer_iterations {
        let reward = zeta.barrier_reward(cmdp.reward_table(), mcfg.barrier_weight)?;
        let (policy, _) = noncausal_soft_value_iteration(&reward, cmdp, beta, &cfg.planner)?;
        let nominal = expected_features_exact(&policy, cmdp, &one_hot);
        let gap = demo_feats.empirical_features().iter().zip(&nominal).map(|(e, n)| (e - n).powi(2)).sum::<f64>().sqrt();
        log.rows.push(RunLogRow {
            iteration,
            feature_gap_l2: gap,
            lambda_l1: zeta.cost_table().iter().sum(),
            exact_reward: expected_table_exact(&policy, cmdp, cmdp.reward_table()),
            exact_true_cost: expected_table_exact(&policy, cmdp, cmdp.cost_table()),
            wall_time_ms: if cfg.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        });
        if iteration == cfg.outer_iterations {
            return Ok(MaxentRun { zeta, policy, log });
        }
        let rollouts: Vec<Trajectory> = (0..samples).map(|_| sample_trajectory(&policy, cmdp, &mut rng, false)).collect();
        let grad = maxent_loglik_gradient(demos.trajectories(), &rollouts, &zeta)?;
        zeta.ascend(&grad, lr)?;
    }
    unreachable!("loop returns on its last iteration")
}
