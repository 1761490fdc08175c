use std::time::Instant;

use cmdp_core::{expected_table_exact, sample_trajectory, seeded_rng, TabularCmdp, TabularPolicy, Trajectory};
use constraint_learner::{dual_gradient, dual_update, DualState, IcrlRunConfig, NominalFeatures, RunLog, RunLogRow};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use soft_planner::{penalized_reward, soft_policy_iteration_reward};

use crate::error::{EncoderError, Result};
use crate::mlp::{MlpDecoder, MlpEncoder};
use crate::objectives::{encode_pair, encoded_feature_map, encoder_dual_gradient, WeightedBatch};
use crate::pretrain::{pretrain_autoencoder, PretrainConfig, PretrainReport};

fn default_hidden() -> Vec<usize> {
    vec![40]
}

fn default_feature_dim() -> usize {
    8
}

fn default_lr_zeta() -> f64 {
    5e-4
}

fn default_decay() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_feature_dim")]
    pub feature_dim: usize,
    #[serde(default = "default_lr_zeta")]
    pub lr_zeta: f64,
    /// Per-iteration multiplicative decay of `lr_zeta`.
    #[serde(default = "default_decay")]
    pub lr_decay: f64,
    #[serde(default)]
    pub pretrain: bool,
    #[serde(default)]
    pub pretrain_cfg: PretrainConfig,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            hidden: default_hidden(),
            feature_dim: default_feature_dim(),
            lr_zeta: default_lr_zeta(),
            lr_decay: default_decay(),
            pretrain: false,
            pretrain_cfg: PretrainConfig::default(),
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.hidden.contains(&0) {
            return Err(EncoderError::EmptyLayer);
        }
        if !(self.lr_zeta >= 0.0) {
            return Err(EncoderError::Config("lr_zeta"));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(EncoderError::Config("lr_decay"));
        }
        Ok(())
    }

    pub fn layer_sizes(&self, num_states: usize, num_actions: usize) -> Vec<usize> {
        let mut sizes = vec![num_states + num_actions];
        sizes.extend(&self.hidden);
        sizes.push(self.feature_dim);
        sizes
    }
}

#[derive(Debug, Clone)]
pub struct EncoderRun {
    pub dual: DualState,
    pub encoder: MlpEncoder,
    pub policy: TabularPolicy,
    pub log: RunLog,
    pub pretrain: Option<PretrainReport>,
}

fn solve(cmdp: &TabularCmdp, enc: &MlpEncoder, lambda: &[f64], cfg: &IcrlRunConfig) -> Result<TabularPolicy> {
    let phi = encoded_feature_map(enc, cmdp.num_states(), cmdp.num_actions())?;
    let reward = penalized_reward(cmdp, lambda, &phi)?;
    Ok(soft_policy_iteration_reward(&reward, cmdp, &cfg.planner)?.0)
}

/// Balanced pre-training set: equally many expert and nominal pairs.
fn pretrain_data<R: rand::Rng + ?Sized>(cmdp: &TabularCmdp, demos: &[Trajectory], nominal: &[Trajectory], rng: &mut R) -> Vec<Vec<f64>> {
    let (ns, na) = (cmdp.num_states(), cmdp.num_actions());
    let pairs = |ts: &[Trajectory]| ts.iter().flat_map(|t| t.steps.iter().copied()).collect::<Vec<_>>();
    let (mut e, mut n) = (pairs(demos), pairs(nominal));
    e.shuffle(rng);
    n.shuffle(rng);
    let m = e.len().min(n.len());
    e.iter().take(m).chain(n.iter().take(m)).map(|&(s, a)| encode_pair(s, a, ns, na)).collect()
}

/// Outer loop with encoder-backed features: each iteration solves the inner
/// problem under `λ·φ_ζ`, then descends on both `λ` and `ζ`.
pub fn run_mce_icrl_encoder(
    cmdp: &TabularCmdp,
    demos: &[Trajectory],
    cfg: &IcrlRunConfig,
    enc_cfg: &EncoderConfig,
) -> Result<EncoderRun> {
    cfg.validate()?;
    enc_cfg.validate()?;
    if demos.is_empty() {
        return Err(EncoderError::EmptyBatch("demo"));
    }
    let start = Instant::now();
    let (ns, na) = (cmdp.num_states(), cmdp.num_actions());
    let mut enc = MlpEncoder::init(&enc_cfg.layer_sizes(ns, na), &mut seeded_rng(cfg.seed, 0x656e63))?;
    let mut dual = DualState::new(enc_cfg.feature_dim, cfg.lambda_init, cfg.alpha, cfg.lr_lambda);
    let mut rng = seeded_rng(cfg.seed, 0x6e6f6d);

    let pretrain = if enc_cfg.pretrain {
        let mut prng = seeded_rng(cfg.seed, 0x707265);
        let dec = MlpDecoder::mirror(&enc, &mut prng)?;
        let policy = solve(cmdp, &enc, &dual.lambda, cfg)?;
        let nominal: Vec<Trajectory> = (0..demos.len()).map(|_| sample_trajectory(&policy, cmdp, &mut prng, false)).collect();
        let data = pretrain_data(cmdp, demos, &nominal, &mut prng);
        let report = pretrain_autoencoder(&enc, &dec, &data, &enc_cfg.pretrain_cfg, &mut prng)?;
        enc = report.encoder.clone();
        Some(report)
    } else {
        None
    };

    let demo_batch = WeightedBatch::from_trajectories(demos, ns, na, cmdp.gamma());
    let mut lr_zeta = enc_cfg.lr_zeta;
    let mut log = RunLog::default();
    for iteration in 0..=cfg.outer_iterations {
        let policy = solve(cmdp, &enc, &dual.lambda, cfg)?;
        let nominal = match cfg.nominal_features {
            NominalFeatures::Exact => WeightedBatch::from_occupancy(&policy, cmdp),
            NominalFeatures::Sampled { trajectories } => {
                let ts: Vec<Trajectory> = (0..trajectories).map(|_| sample_trajectory(&policy, cmdp, &mut rng, false)).collect();
                WeightedBatch::from_trajectories(&ts, ns, na, cmdp.gamma())
            }
        };
        let e = demo_batch.expected_features(&enc)?;
        let n = nominal.expected_features(&enc)?;
        log.rows.push(RunLogRow {
            iteration,
            feature_gap_l2: e.iter().zip(&n).map(|(e, n)| (e - n).powi(2)).sum::<f64>().sqrt(),
            lambda_l1: dual.lambda_l1(),
            exact_reward: expected_table_exact(&policy, cmdp, cmdp.reward_table()),
            exact_true_cost: expected_table_exact(&policy, cmdp, cmdp.cost_table()),
            wall_time_ms: if cfg.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        });
        if iteration == cfg.outer_iterations {
            return Ok(EncoderRun { dual, encoder: enc, policy, log, pretrain });
        }
        let grad_zeta = if nominal.is_empty() {
            enc.zero_gradient()
        } else {
            encoder_dual_gradient(&enc, &dual.lambda, &demo_batch, &nominal)?
        };
        if !grad_zeta.is_finite() {
            return Err(EncoderError::NonFinite { iteration });
        }
        dual = dual_update(&dual, &dual_gradient(&e, &n, &dual.alpha)?)?;
        enc.apply_gradient(&grad_zeta, lr_zeta);
        lr_zeta *= enc_cfg.lr_decay;
    }
    unreachable!("loop returns on its last iteration")
}
