use std::fs;
use std::path::{Path, PathBuf};

use cmdp_core::{sample_trajectory, seeded_rng, FeatureMap, TabularCmdp, TabularPolicy, Trajectory};
use constraint_learner::{run_mce_icrl_tabular, DemoSet, RunLog};
use cost_encoder::{encoded_feature_map, run_mce_icrl_encoder, MlpEncoder};
use gridworld::{compile, render_cost_map, GridSpec};
use maxent_baseline::{run_maxent_icrl, ZetaTable};
use policy_gradient::run_mce_icrl_pg;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use soft_planner::{make_expert_verified, soft_policy_iteration_reward, ExpertReport};

use crate::config::{ExperimentConfig, Method};
use crate::error::{ExperimentError, Result};
use crate::eval::{evaluate_policy, mean_se, EvalSummary};

const DEMO_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

/// Learned cost with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnedCost {
    OneHot { lambda: Vec<f64>, cost: Vec<f64> },
    Encoded { lambda: Vec<f64>, encoder: MlpEncoder, cost: Vec<f64> },
    Zeta { zeta: ZetaTable, cost: Vec<f64> },
}

impl LearnedCost {
    /// Per-pair cost table `(s, a)`.
    pub fn cost(&self) -> &[f64] {
        match self {
            LearnedCost::OneHot { cost, .. } | LearnedCost::Encoded { cost, .. } | LearnedCost::Zeta { cost, .. } => cost,
        }
    }

    pub fn file_name(&self) -> &'static str {
        match self {
            LearnedCost::Zeta { .. } => "zeta.json",
            _ => "lambda.json",
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(ExperimentError::MissingArtifact(path.to_path_buf()));
        }
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Everything a trained cell produced.
#[derive(Debug, Clone)]
pub struct TrainedCell {
    pub policy: TabularPolicy,
    pub learned: LearnedCost,
    pub curves: Vec<u8>,
}

/// One (variant, stochasticity, seed) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Method name, or method plus ablation tag.
    pub label: String,
    pub method: Method,
    pub stochasticity: f64,
    pub seed: u64,
    pub cfg: ExperimentConfig,
}

impl Cell {
    pub fn dir(&self, root: &Path) -> PathBuf {
        root.join(&self.label).join(format!("st{:.2}_seed{}", self.stochasticity, self.seed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRow {
    pub label: String,
    pub method: String,
    pub stochasticity: f64,
    pub beta: f64,
    pub seed: u64,
    pub reward: f64,
    pub reward_undiscounted: f64,
    pub violation_rate: f64,
    pub expert_reward: f64,
    pub expert_violation_rate: f64,
    pub expert_penalty: f64,
    pub expert_saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub label: String,
    pub stochasticity: f64,
    pub beta: f64,
    pub seeds: usize,
    pub reward_mean: f64,
    pub reward_se: f64,
    pub reward_undiscounted_mean: f64,
    pub reward_undiscounted_se: f64,
    pub violation_mean: f64,
    pub violation_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub label: String,
    pub stochasticity: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutcome {
    pub rows: Vec<FinalRow>,
    pub aggregate: Vec<AggregateRow>,
    pub failures: Vec<FailedCell>,
}

/// Demonstrations of the verified expert for one grid and seed.
pub struct ExpertData {
    pub cmdp: TabularCmdp,
    pub report: ExpertReport,
    pub demos: Vec<Trajectory>,
}

pub fn expert_data(grid: &GridSpec, cfg: &ExperimentConfig, seed: u64) -> Result<ExpertData> {
    let cmdp = compile(grid)?;
    let report = make_expert_verified(&cmdp, &cfg.icrl.planner, cfg.expert_threshold)?;
    let mut rng = seeded_rng(seed, DEMO_STREAM);
    let demos = (0..cfg.num_expert_trajectories).map(|_| sample_trajectory(&report.policy, &cmdp, &mut rng, false)).collect();
    Ok(ExpertData { cmdp, report, demos })
}

fn csv_bytes<F: FnOnce(&mut Vec<u8>) -> Result<()>>(f: F) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn write_log(log: &RunLog) -> Result<Vec<u8>> {
    csv_bytes(|b| Ok(log.write_csv(b)?))
}

/// Runs one method on the given demonstrations.
pub fn train(method: Method, cmdp: &TabularCmdp, demos: &[Trajectory], cfg: &ExperimentConfig, seed: u64) -> Result<TrainedCell> {
    let (ns, na) = (cmdp.num_states(), cmdp.num_actions());
    let mut icrl = cfg.icrl.clone();
    icrl.seed = seed;
    let one_hot = FeatureMap::one_hot(ns, na);
    match method {
        Method::MceTabular => match &cfg.encoder {
            None => {
                let demo_set = DemoSet::new(demos.to_vec(), &one_hot, cmdp.gamma())?;
                let run = run_mce_icrl_tabular(cmdp, &demo_set, &one_hot, &icrl)?;
                let cost = one_hot.cost_table(&run.dual.lambda);
                let curves = write_log(&run.log)?;
                Ok(TrainedCell { policy: run.policy, learned: LearnedCost::OneHot { lambda: run.dual.lambda, cost }, curves })
            }
            Some(enc_cfg) => {
                let run = run_mce_icrl_encoder(cmdp, demos, &icrl, enc_cfg)?;
                let cost = encoded_feature_map(&run.encoder, ns, na)?.cost_table(&run.dual.lambda);
                let curves = write_log(&run.log)?;
                let learned = LearnedCost::Encoded { lambda: run.dual.lambda, encoder: run.encoder, cost };
                Ok(TrainedCell { policy: run.policy, learned, curves })
            }
        },
        Method::McePg => {
            let demo_set = DemoSet::new(demos.to_vec(), &one_hot, cmdp.gamma())?;
            let mut pg = cfg.pg_config();
            pg.seed = seed;
            let run = run_mce_icrl_pg(cmdp, &demo_set, &one_hot, &icrl, &pg)?;
            let cost = one_hot.cost_table(&run.dual.lambda);
            let curves = csv_bytes(|b| Ok(run.log.write_csv(b)?))?;
            Ok(TrainedCell { policy: run.policy.to_tabular(), learned: LearnedCost::OneHot { lambda: run.dual.lambda, cost }, curves })
        }
        Method::MaxentBaseline => {
            let demo_set = DemoSet::new(demos.to_vec(), &one_hot, cmdp.gamma())?;
            let run = run_maxent_icrl(cmdp, &demo_set, &icrl, &cfg.maxent)?;
            let cost = run.zeta.cost_table();
            let curves = write_log(&run.log)?;
            Ok(TrainedCell { policy: run.policy, learned: LearnedCost::Zeta { zeta: run.zeta, cost }, curves })
        }
    }
}

fn write_final(path: &Path, rows: &[FinalRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Trains, evaluates and writes the artifacts of one cell.
pub fn run_cell(cell: &Cell, root: &Path) -> Result<FinalRow> {
    let cfg = &cell.cfg;
    let grid = cfg.grid.with_stochasticity(cell.stochasticity);
    let data = expert_data(&grid, cfg, cell.seed)?;
    let trained = train(cell.method, &data.cmdp, &data.demos, cfg, cell.seed)?;
    let eval = evaluate_policy(&trained.policy, &data.cmdp, cfg.eval_trajectories, &mut seeded_rng(cell.seed, EVAL_STREAM))?;
    let expert_eval = evaluate_policy(&data.report.policy, &data.cmdp, cfg.eval_trajectories, &mut seeded_rng(cell.seed, EVAL_STREAM))?;
    let row = FinalRow {
        label: cell.label.clone(),
        method: cell.method.name().to_string(),
        stochasticity: cell.stochasticity,
        beta: cfg.icrl.planner.beta,
        seed: cell.seed,
        reward: eval.reward,
        reward_undiscounted: eval.reward_undiscounted,
        violation_rate: eval.violation_rate,
        expert_reward: expert_eval.reward,
        expert_violation_rate: expert_eval.violation_rate,
        expert_penalty: data.report.penalty,
        expert_saturated: data.report.saturated,
    };
    let dir = cell.dir(root);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("curves.csv"), &trained.curves)?;
    write_final(&dir.join("final.csv"), std::slice::from_ref(&row))?;
    fs::write(dir.join("costmap.txt"), render_cost_map(trained.learned.cost(), &grid)?)?;
    fs::write(dir.join(trained.learned.file_name()), serde_json::to_string_pretty(&trained.learned)?)?;
    fs::write(dir.join("policy.json"), serde_json::to_string_pretty(&trained.policy)?)?;
    Ok(row)
}

/// Groups rows by (label, stochasticity) in first-seen order.
pub fn aggregate(rows: &[FinalRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, f64, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(l, s, _)| *l == r.label && *s == r.stochasticity) {
            keys.push((r.label.clone(), r.stochasticity, r.beta));
        }
    }
    keys.into_iter()
        .map(|(label, stochasticity, beta)| {
            let group: Vec<&FinalRow> = rows.iter().filter(|r| r.label == label && r.stochasticity == stochasticity).collect();
            let col = |f: fn(&FinalRow) -> f64| mean_se(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (reward_mean, reward_se) = col(|r| r.reward);
            let (reward_undiscounted_mean, reward_undiscounted_se) = col(|r| r.reward_undiscounted);
            let (violation_mean, violation_se) = col(|r| r.violation_rate);
            AggregateRow {
                label,
                stochasticity,
                beta,
                seeds: group.len(),
                reward_mean,
                reward_se,
                reward_undiscounted_mean,
                reward_undiscounted_se,
                violation_mean,
                violation_se,
            }
        })
        .collect()
}

/// Runs every cell in parallel, then writes `per_seed.csv`, `aggregate.csv`
/// and, when any cell failed, `failed_cells.json`.
pub fn run_cells(cells: &[Cell], root: &Path) -> Result<ExperimentOutcome> {
    fs::create_dir_all(root)?;
    let results: Vec<Result<FinalRow>> = cells.par_iter().map(|c| run_cell(c, root)).collect();
    let mut outcome = ExperimentOutcome::default();
    for (cell, res) in cells.iter().zip(results) {
        match res {
            Ok(row) => outcome.rows.push(row),
            Err(e) => outcome.failures.push(FailedCell {
                label: cell.label.clone(),
                stochasticity: cell.stochasticity,
                seed: cell.seed,
                error: e.to_string(),
            }),
        }
    }
    outcome.aggregate = aggregate(&outcome.rows);
    write_final(&root.join("per_seed.csv"), &outcome.rows)?;
    let mut w = csv::Writer::from_path(root.join("aggregate.csv"))?;
    for r in &outcome.aggregate {
        w.serialize(r)?;
    }
    w.flush()?;
    let manifest = root.join("failed_cells.json");
    if outcome.failures.is_empty() {
        if manifest.exists() {
            fs::remove_file(manifest)?;
        }
    } else {
        fs::write(manifest, serde_json::to_string_pretty(&outcome.failures)?)?;
    }
    Ok(outcome)
}

/// Cells for every method, sweep point and seed of the config.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for st in cfg.sweep_points() {
            for &seed in &cfg.seeds {
                cells.push(Cell { label: method.name().to_string(), method, stochasticity: st, seed, cfg: cfg.clone() });
            }
        }
    }
    cells
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    run_cells(&sweep_cells(cfg), &cfg.output_dir)
}

/// One aggregate row per `β` (and sweep point) for the first method.
pub fn ablate_beta(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let method = cfg.methods[0];
    let mut cells = Vec::new();
    for &beta in &cfg.ablation_betas {
        let mut c = cfg.clone();
        c.icrl.planner.beta = beta;
        if let Some(pg) = c.pg.as_mut() {
            pg.beta = beta;
        }
        for st in cfg.sweep_points() {
            for &seed in &cfg.seeds {
                cells.push(Cell { label: format!("{}_beta{:e}", method.name(), beta), method, stochasticity: st, seed, cfg: c.clone() });
            }
        }
    }
    run_cells(&cells, &cfg.output_dir)
}

/// Encoder-backed tabular runs with and without pre-training.
pub fn ablate_pretrain(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let enc = cfg.encoder.clone().ok_or_else(|| ExperimentError::Config("ablate-pretrain needs an encoder section".into()))?;
    let mut cells = Vec::new();
    for pretrain in [false, true] {
        let mut c = cfg.clone();
        c.encoder = Some(cost_encoder::EncoderConfig { pretrain, ..enc.clone() });
        for st in cfg.sweep_points() {
            for &seed in &cfg.seeds {
                let label = if pretrain { "encoder_pretrained" } else { "encoder_scratch" }.to_string();
                cells.push(Cell { label, method: Method::MceTabular, stochasticity: st, seed, cfg: c.clone() });
            }
        }
    }
    run_cells(&cells, &cfg.output_dir)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub seed: u64,
    pub stochasticity: f64,
    pub learned: EvalSummary,
    pub control: EvalSummary,
}

/// Plans on the alternative reward minus a frozen learned cost and
/// evaluates; the control plans with the cost removed.
pub fn transfer_eval(alt: &TabularCmdp, cost: &[f64], cfg: &ExperimentConfig, seed: u64) -> Result<(EvalSummary, EvalSummary)> {
    if cost.len() != alt.num_pairs() {
        return Err(ExperimentError::Config(format!("cost table has {} entries, expected {}", cost.len(), alt.num_pairs())));
    }
    let shaped: Vec<f64> = alt.reward_table().iter().zip(cost).map(|(r, c)| r - c).collect();
    let (with_cost, _, _) = soft_policy_iteration_reward(&shaped, alt, &cfg.icrl.planner)?;
    let (control, _, _) = soft_policy_iteration_reward(alt.reward_table(), alt, &cfg.icrl.planner)?;
    let learned = evaluate_policy(&with_cost, alt, cfg.eval_trajectories, &mut seeded_rng(seed, EVAL_STREAM))?;
    let control = evaluate_policy(&control, alt, cfg.eval_trajectories, &mut seeded_rng(seed, EVAL_STREAM))?;
    Ok((learned, control))
}

fn alt_grid(cfg: &ExperimentConfig, st: f64) -> Result<GridSpec> {
    let spec = cfg.transfer.as_ref().ok_or_else(|| ExperimentError::Config("transfer needs a transfer section".into()))?;
    let grid = cfg.grid.with_stochasticity(st).with_goal(spec.alt_goal);
    grid.validate()?;
    Ok(grid)
}

/// Transfer from the artifacts of a previous `train` or `sweep` run of the
/// first method; writes `transfer.csv`.
pub fn transfer_experiment(cfg: &ExperimentConfig) -> Result<Vec<TransferRow>> {
    cfg.validate()?;
    let method = cfg.methods[0];
    let mut rows = Vec::new();
    for st in cfg.sweep_points() {
        let alt = compile(&alt_grid(cfg, st)?)?;
        for &seed in &cfg.seeds {
            let cell = Cell { label: method.name().to_string(), method, stochasticity: st, seed, cfg: cfg.clone() };
            let dir = cell.dir(&cfg.output_dir);
            let path = ["lambda.json", "zeta.json"].iter().map(|f| dir.join(f)).find(|p| p.exists()).unwrap_or_else(|| dir.join("lambda.json"));
            let learned = LearnedCost::load(&path)?;
            let (with_cost, control) = transfer_eval(&alt, learned.cost(), cfg, seed)?;
            rows.push(TransferRow { seed, stochasticity: st, learned: with_cost, control });
        }
    }
    let mut w = csv::Writer::from_path(cfg.output_dir.join("transfer.csv"))?;
    w.write_record([
        "seed",
        "stochasticity",
        "reward",
        "reward_undiscounted",
        "violation_rate",
        "control_reward",
        "control_reward_undiscounted",
        "control_violation_rate",
    ])?;
    for r in &rows {
        w.serialize((
            r.seed,
            r.stochasticity,
            r.learned.reward,
            r.learned.reward_undiscounted,
            r.learned.violation_rate,
            r.control.reward,
            r.control.reward_undiscounted,
            r.control.violation_rate,
        ))?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertSummary {
    pub stochasticity: f64,
    pub seed: u64,
    pub penalty: f64,
    pub violation_probability: f64,
    pub saturated: bool,
    pub eval: EvalSummary,
}

/// Writes the verified expert policy and its demonstrations for every sweep
/// point and seed under `<output_dir>/expert`.
pub fn make_experts(cfg: &ExperimentConfig) -> Result<Vec<ExpertSummary>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for st in cfg.sweep_points() {
        for &seed in &cfg.seeds {
            let data = expert_data(&cfg.grid.with_stochasticity(st), cfg, seed)?;
            let eval = evaluate_policy(&data.report.policy, &data.cmdp, cfg.eval_trajectories, &mut seeded_rng(seed, EVAL_STREAM))?;
            let dir = cfg.output_dir.join("expert").join(format!("st{st:.2}_seed{seed}"));
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("policy.json"), serde_json::to_string_pretty(&data.report.policy)?)?;
            fs::write(dir.join("demos.json"), serde_json::to_string(&data.demos)?)?;
            out.push(ExpertSummary {
                stochasticity: st,
                seed,
                penalty: data.report.penalty,
                violation_probability: data.report.violation_probability,
                saturated: data.report.saturated,
                eval,
            });
        }
    }
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("expert").join("summary.json"), serde_json::to_string_pretty(&out)?)?;
    Ok(out)
}

/// Re-evaluates stored `policy.json` artifacts of every configured cell and
/// writes `evaluation.csv`; missing artifacts become failed cells.
pub fn evaluate_artifacts(cfg: &ExperimentConfig) -> Result<(Vec<FinalRow>, Vec<FailedCell>)> {
    cfg.validate()?;
    let (mut rows, mut failures) = (Vec::new(), Vec::new());
    for cell in sweep_cells(cfg) {
        let res = (|| -> Result<FinalRow> {
            let path = cell.dir(&cfg.output_dir).join("policy.json");
            if !path.exists() {
                return Err(ExperimentError::MissingArtifact(path));
            }
            let policy: TabularPolicy = serde_json::from_str(&fs::read_to_string(&path)?)?;
            let grid = cfg.grid.with_stochasticity(cell.stochasticity);
            let data = expert_data(&grid, cfg, cell.seed)?;
            let eval = evaluate_policy(&policy, &data.cmdp, cfg.eval_trajectories, &mut seeded_rng(cell.seed, EVAL_STREAM))?;
            let expert = evaluate_policy(&data.report.policy, &data.cmdp, cfg.eval_trajectories, &mut seeded_rng(cell.seed, EVAL_STREAM))?;
            Ok(FinalRow {
                label: cell.label.clone(),
                method: cell.method.name().to_string(),
                stochasticity: cell.stochasticity,
                beta: cfg.icrl.planner.beta,
                seed: cell.seed,
                reward: eval.reward,
                reward_undiscounted: eval.reward_undiscounted,
                violation_rate: eval.violation_rate,
                expert_reward: expert.reward,
                expert_violation_rate: expert.violation_rate,
                expert_penalty: data.report.penalty,
                expert_saturated: data.report.saturated,
            })
        })();
        match res {
            Ok(r) => rows.push(r),
            Err(e) => failures.push(FailedCell { label: cell.label, stochasticity: cell.stochasticity, seed: cell.seed, error: e.to_string() }),
        }
    }
    fs::create_dir_all(&cfg.output_dir)?;
    write_final(&cfg.output_dir.join("evaluation.csv"), &rows)?;
    Ok((rows, failures))
}

/// ASCII cost map of a stored `lambda.json` / `zeta.json` artifact.
pub fn render_artifact(path: &Path, grid: &GridSpec) -> Result<String> {
    Ok(render_cost_map(LearnedCost::load(path)?.cost(), grid)?)
}
