use std::io::Write;
use std::time::Instant;

use cmdp_core::{
    causal_entropy_exact, expected_features_exact, expected_table_exact, sample_trajectory, seeded_rng,
    trajectory_features, FeatureMap, TabularCmdp, TabularPolicy,
};
use serde::{Deserialize, Serialize};
use soft_planner::{penalized_reward, soft_policy_iteration_reward, PlannerConfig};

use crate::dual::{dual_gradient, dual_update, DemoSet, DualState};
use crate::error::{LearnerError, Result};

/// Any multiplier beyond this magnitude aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// How the nominal feature expectation is obtained each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NominalFeatures {
    /// Occupancy DP, variance free.
    #[default]
    Exact,
    /// Mean over freshly sampled nominal rollouts.
    Sampled { trajectories: usize },
}

fn default_outer_iterations() -> usize {
    20
}

fn default_lr_lambda() -> f64 {
    5e-4
}

fn default_lambda_init() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcrlRunConfig {
    #[serde(default = "default_outer_iterations")]
    pub outer_iterations: usize,
    pub planner: PlannerConfig,
    #[serde(default = "default_lr_lambda")]
    pub lr_lambda: f64,
    #[serde(default = "default_lambda_init")]
    pub lambda_init: f64,
    /// Feature-matching budget, broadcast to every dimension.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub nominal_features: NominalFeatures,
    /// Off by default so that logs are reproducible byte for byte; the
    /// `wall_time_ms` column then holds 0.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl IcrlRunConfig {
    pub fn new(planner: PlannerConfig) -> Self {
        Self {
            outer_iterations: default_outer_iterations(),
            planner,
            lr_lambda: default_lr_lambda(),
            lambda_init: default_lambda_init(),
            alpha: 0.0,
            seed: 0,
            nominal_features: NominalFeatures::Exact,
            record_wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.planner.validate()?;
        if !(self.lr_lambda > 0.0) {
            return Err(LearnerError::Config("lr_lambda"));
        }
        if !(self.lambda_init >= 0.0) {
            return Err(LearnerError::Config("lambda_init"));
        }
        if !(self.alpha >= 0.0) {
            return Err(LearnerError::Config("alpha"));
        }
        if let NominalFeatures::Sampled { trajectories: 0 } = self.nominal_features {
            return Err(LearnerError::Config("nominal_features.trajectories"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunLogRow {
    pub iteration: usize,
    pub feature_gap_l2: f64,
    pub lambda_l1: f64,
    pub exact_reward: f64,
    pub exact_true_cost: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub rows: Vec<RunLogRow>,
}

impl RunLog {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TabularRun {
    pub dual: DualState,
    pub policy: TabularPolicy,
    pub log: RunLog,
}

/// Runs the outer loop against a demo set.
pub fn run_mce_icrl_tabular(
    cmdp: &TabularCmdp,
    demos: &DemoSet,
    phi: &FeatureMap,
    cfg: &IcrlRunConfig,
) -> Result<TabularRun> {
    run_mce_icrl_features(cmdp, demos.empirical_features(), phi, cfg)
}

/// Outer loop against a fixed expert feature expectation.
///
/// Each iteration solves the inner problem to convergence, measures the
/// nominal features and takes one projected descent step on `λ`. A last solve
/// at the final `λ` produces the returned policy and the closing log row.
pub fn run_mce_icrl_features(
    cmdp: &TabularCmdp,
    expert_feats: &[f64],
    phi: &FeatureMap,
    cfg: &IcrlRunConfig,
) -> Result<TabularRun> {
    cfg.validate()?;
    phi.check_shape(cmdp.num_states(), cmdp.num_actions())?;
    if expert_feats.len() != phi.dim() {
        return Err(LearnerError::Dimension { what: "expert features", got: expert_feats.len(), expected: phi.dim() });
    }
    let start = Instant::now();
    let mut rng = seeded_rng(cfg.seed, 0x6e6f6d);
    let mut dual = DualState::new(phi.dim(), cfg.lambda_init, cfg.alpha, cfg.lr_lambda);
    let mut log = RunLog::default();
    for iteration in 0..=cfg.outer_iterations {
        let reward = penalized_reward(cmdp, &dual.lambda, phi)?;
        let (policy, _, _) = soft_policy_iteration_reward(&reward, cmdp, &cfg.planner)?;
        let nominal = match cfg.nominal_features {
            NominalFeatures::Exact => expected_features_exact(&policy, cmdp, phi),
            NominalFeatures::Sampled { trajectories } => {
                let mut mean = vec![0.0; phi.dim()];
                for _ in 0..trajectories {
                    let t = sample_trajectory(&policy, cmdp, &mut rng, false);
                    for (m, f) in mean.iter_mut().zip(trajectory_features(&t, phi, cmdp.gamma())?) {
                        *m += f / trajectories as f64;
                    }
                }
                mean
            }
        };
        let gap = l2(expert_feats.iter().zip(&nominal).map(|(e, n)| e - n));
        log.rows.push(RunLogRow {
            iteration,
            feature_gap_l2: gap,
            lambda_l1: dual.lambda_l1(),
            exact_reward: expected_table_exact(&policy, cmdp, cmdp.reward_table()),
            exact_true_cost: expected_table_exact(&policy, cmdp, cmdp.cost_table()),
            wall_time_ms: if cfg.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        });
        if iteration == cfg.outer_iterations {
            return Ok(TabularRun { dual, policy, log });
        }
        let grad = dual_gradient(expert_feats, &nominal, &dual.alpha)?;
        dual = dual_update(&dual, &grad)?;
        check_divergence(&dual)?;
    }
    unreachable!("loop returns on its last iteration")
}

pub(crate) fn l2(xs: impl Iterator<Item = f64>) -> f64 {
    xs.map(|x| x * x).sum::<f64>().sqrt()
}

fn check_divergence(dual: &DualState) -> Result<()> {
    for (index, &value) in dual.lambda.iter().enumerate() {
        if !value.is_finite() || value.abs() > DIVERGENCE_LIMIT {
            return Err(LearnerError::Diverged { iteration: dual.iteration, index, value });
        }
    }
    Ok(())
}

/// `L(π, λ) = E_π[R] + β H(π) + λ · (E_D[φ] - E_π[φ] - α)`, evaluated exactly.
pub fn lagrangian_value(
    policy: &TabularPolicy,
    dual: &DualState,
    demos: &DemoSet,
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    beta: f64,
) -> Result<f64> {
    lagrangian_from_features(policy, &dual.lambda, &dual.alpha, demos.empirical_features(), phi, cmdp, beta)
}

fn lagrangian_from_features(
    policy: &TabularPolicy,
    lambda: &[f64],
    alpha: &[f64],
    expert_feats: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    beta: f64,
) -> Result<f64> {
    let k = phi.dim();
    for (what, len) in [("lambda", lambda.len()), ("alpha", alpha.len()), ("expert features", expert_feats.len())] {
        if len != k {
            return Err(LearnerError::Dimension { what, got: len, expected: k });
        }
    }
    let nominal = expected_features_exact(policy, cmdp, phi);
    let penalty: f64 = (0..k).map(|i| lambda[i] * (expert_feats[i] - nominal[i] - alpha[i])).sum();
    Ok(expected_table_exact(policy, cmdp, cmdp.reward_table()) + beta * causal_entropy_exact(policy, cmdp) + penalty)
}

/// Dual function `g(λ) = max_π L(π, λ)`, with the maximizer found by soft
/// policy iteration on `R - λ·φ`.
pub fn dual_function(
    lambda: &[f64],
    alpha: &[f64],
    expert_feats: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    planner: &PlannerConfig,
) -> Result<f64> {
    let reward = penalized_reward(cmdp, lambda, phi)?;
    let (policy, _, _) = soft_policy_iteration_reward(&reward, cmdp, planner)?;
    lagrangian_from_features(&policy, lambda, alpha, expert_feats, phi, cmdp, planner.beta)
}
