use std::path::{Path, PathBuf};

use constraint_learner::IcrlRunConfig;
use cost_encoder::EncoderConfig;
use gridworld::GridSpec;
use maxent_baseline::MaxentConfig;
use policy_gradient::PgConfig;
use serde::{Deserialize, Serialize};
use soft_planner::PlannerConfig;

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MceTabular,
    McePg,
    MaxentBaseline,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::MceTabular => "mce_tabular",
            Method::McePg => "mce_pg",
            Method::MaxentBaseline => "maxent_baseline",
        }
    }
}

/// Reward-swap transfer: the same grid with the goal moved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSpec {
    pub alt_goal: (usize, usize),
}

fn default_grid() -> GridSpec {
    GridSpec::default_layout()
}

fn default_methods() -> Vec<Method> {
    vec![Method::MceTabular]
}

fn default_icrl() -> IcrlRunConfig {
    IcrlRunConfig::new(PlannerConfig::new(1e-5))
}

fn default_expert_trajectories() -> usize {
    50
}

fn default_eval_trajectories() -> usize {
    100
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_expert_threshold() -> f64 {
    1e-6
}

fn default_betas() -> Vec<f64> {
    vec![1e-5, 1e-4, 1e-3, 1e-2]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// A whole experiment; every field has a default so `{}` is a valid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    /// Methods trained in every cell.
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_icrl")]
    pub icrl: IcrlRunConfig,
    #[serde(default)]
    pub pg: Option<PgConfig>,
    /// Encoder-backed features for the tabular MCE runner when present.
    #[serde(default)]
    pub encoder: Option<EncoderConfig>,
    #[serde(default)]
    pub maxent: MaxentConfig,
    #[serde(default = "default_expert_trajectories")]
    pub num_expert_trajectories: usize,
    #[serde(default = "default_eval_trajectories")]
    pub eval_trajectories: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Stochasticity values; the grid's own value when absent.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    #[serde(default = "default_betas")]
    pub ablation_betas: Vec<f64>,
    #[serde(default)]
    pub transfer: Option<TransferSpec>,
    /// Violation-probability target for the verified expert.
    #[serde(default = "default_expert_threshold")]
    pub expert_threshold: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() || sweep.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return bad("sweep values must lie in [0, 1]");
            }
        }
        if self.num_expert_trajectories == 0 || self.eval_trajectories == 0 {
            return bad("trajectory counts must be positive");
        }
        if self.ablation_betas.iter().any(|&b| !(b > 0.0)) {
            return bad("ablation betas must be positive");
        }
        self.grid.validate()?;
        self.icrl.validate()?;
        if let Some(pg) = &self.pg {
            pg.validate()?;
        }
        if let Some(enc) = &self.encoder {
            enc.validate()?;
        }
        Ok(())
    }

    pub fn sweep_points(&self) -> Vec<f64> {
        self.sweep.clone().unwrap_or_else(|| vec![self.grid.stochasticity])
    }

    pub fn pg_config(&self) -> PgConfig {
        self.pg.clone().unwrap_or_default()
    }
}
