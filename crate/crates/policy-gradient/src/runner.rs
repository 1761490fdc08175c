use std::io::Write;
use std::time::Instant;

use cmdp_core::{
    expected_features_exact, expected_table_exact, sample_trajectory, seeded_rng, trajectory_features, FeatureMap,
    TabularCmdp,
};
use constraint_learner::{dual_gradient, dual_update, DemoSet, DualState, IcrlRunConfig, LearnerError, DIVERGENCE_LIMIT};
use serde::Serialize;

use crate::error::{PgError, Result};
use crate::policy::{ParametricPolicy, ValueTable};
use crate::step::{policy_gradient_step, PgConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgRunLogRow {
    pub iteration: usize,
    pub feature_gap_l2: f64,
    pub lambda_l1: f64,
    pub exact_reward: f64,
    pub exact_true_cost: f64,
    pub wall_time_ms: f64,
    pub batch_size: usize,
    pub grad_norm: f64,
    pub sampled_feature_gap_l2: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PgRunLog {
    pub rows: Vec<PgRunLogRow>,
}

impl PgRunLog {
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
pub struct PgRun {
    pub dual: DualState,
    pub policy: ParametricPolicy,
    pub values: ValueTable,
    pub log: PgRunLog,
}

/// Outer loop with the inner solve replaced by `pg_updates_per_dual_step`
/// policy-gradient steps on fresh batches. Nominal features come from a
/// sampled batch as large as the demo set; the exact gap is logged alongside.
pub fn run_mce_icrl_pg(
    cmdp: &TabularCmdp,
    demos: &DemoSet,
    phi: &FeatureMap,
    dual_cfg: &IcrlRunConfig,
    pg_cfg: &PgConfig,
) -> Result<PgRun> {
    dual_cfg.validate()?;
    pg_cfg.validate()?;
    phi.check_shape(cmdp.num_states(), cmdp.num_actions())?;
    let expert = demos.empirical_features();
    if expert.len() != phi.dim() {
        return Err(PgError::Shape { what: "expert features", got: expert.len(), expected: phi.dim() });
    }
    let start = Instant::now();
    let mut rng = seeded_rng(pg_cfg.seed, 0x7067);
    let mut dual = DualState::new(phi.dim(), dual_cfg.lambda_init, dual_cfg.alpha, dual_cfg.lr_lambda);
    let mut policy = ParametricPolicy::zeros(cmdp.num_states(), cmdp.num_actions());
    let mut values = ValueTable::zeros(cmdp.num_states());
    let mut log = PgRunLog::default();
    let nominal_count = demos.len();
    for iteration in 0..=dual_cfg.outer_iterations {
        let mut grad_norm = 0.0;
        for _ in 0..pg_cfg.pg_updates_per_dual_step {
            let tab = policy.to_tabular();
            let batch: Vec<_> = (0..pg_cfg.steps_per_update).map(|_| sample_trajectory(&tab, cmdp, &mut rng, false)).collect();
            let (p, v, stats) = policy_gradient_step(&policy, &values, &batch, &dual, phi, cmdp, pg_cfg)?;
            policy = p;
            values = v;
            grad_norm += stats.grad_norm / pg_cfg.pg_updates_per_dual_step as f64;
        }
        let tab = policy.to_tabular();
        let mut sampled = vec![0.0; phi.dim()];
        for _ in 0..nominal_count {
            let t = sample_trajectory(&tab, cmdp, &mut rng, false);
            for (m, f) in sampled.iter_mut().zip(trajectory_features(&t, phi, cmdp.gamma())?) {
                *m += f / nominal_count as f64;
            }
        }
        let exact = expected_features_exact(&tab, cmdp, phi);
        let gap = |nom: &[f64]| expert.iter().zip(nom).map(|(e, n)| (e - n).powi(2)).sum::<f64>().sqrt();
        log.rows.push(PgRunLogRow {
            iteration,
            feature_gap_l2: gap(&exact),
            lambda_l1: dual.lambda_l1(),
            exact_reward: expected_table_exact(&tab, cmdp, cmdp.reward_table()),
            exact_true_cost: expected_table_exact(&tab, cmdp, cmdp.cost_table()),
            wall_time_ms: if dual_cfg.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
            batch_size: nominal_count,
            grad_norm,
            sampled_feature_gap_l2: gap(&sampled),
        });
        if iteration == dual_cfg.outer_iterations {
            break;
        }
        let grad = dual_gradient(expert, &sampled, &dual.alpha)?;
        dual = dual_update(&dual, &grad)?;
        if let Some((index, &value)) =
            dual.lambda.iter().enumerate().find(|(_, l)| !l.is_finite() || l.abs() > DIVERGENCE_LIMIT)
        {
            return Err(LearnerError::Diverged { iteration: dual.iteration, index, value }.into());
        }
    }
    Ok(PgRun { dual, policy, values, log })
}
