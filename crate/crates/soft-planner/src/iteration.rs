use std::io::Write;

use cmdp_core::{FeatureMap, TabularCmdp, TabularPolicy};
use serde::Serialize;

use crate::config::PlannerConfig;
use crate::error::{PlannerError, Result};
use crate::values::{penalized_reward, policy_value, SoftValues};

/// One soft policy iteration step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `max |Q^{π_k} - Q^{π_{k-1}}|`.
    pub value_residual: f64,
    /// `max |π_{k+1} - π_k|`.
    pub policy_residual: f64,
    /// `min (Q^{π_k} - Q^{π_{k-1}})`; empty on the first iteration.
    pub min_q_increase: Option<f64>,
    pub sweeps: usize,
    pub monotone: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceLog {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceLog {
    /// True when no iteration decreased any action value beyond tolerance.
    pub fn is_monotone(&self) -> bool {
        self.records.iter().all(|r| r.monotone)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Backup on an arbitrary reward table:
/// `q'(s,a) = r(s,a) + γ Σ_{s'} p(s'|s,a) Σ_{a'} π(a'|s') (q(s',a') - β log π(a'|s'))`.
pub fn soft_bellman_backup_reward(
    q: &[f64],
    policy: &TabularPolicy,
    reward: &[f64],
    cmdp: &TabularCmdp,
    beta: f64,
) -> Vec<f64> {
    let na = cmdp.num_actions();
    let v: Vec<f64> = (0..cmdp.num_states())
        .map(|s| {
            if cmdp.is_absorbing(s) {
                0.0
            } else {
                policy_value(&q[s * na..(s + 1) * na], policy.row(s), beta)
            }
        })
        .collect();
    backup_with_values(&v, reward, cmdp)
}

fn backup_with_values(v: &[f64], reward: &[f64], cmdp: &TabularCmdp) -> Vec<f64> {
    let na = cmdp.num_actions();
    let gamma = cmdp.gamma();
    let mut out = vec![0.0; cmdp.num_pairs()];
    for s in 0..cmdp.num_states() {
        if cmdp.is_absorbing(s) {
            continue;
        }
        for a in 0..na {
            let next: f64 = cmdp.successors(s, a).iter().map(|&(n, p)| p * v[n]).sum();
            out[s * na + a] = reward[s * na + a] + gamma * next;
        }
    }
    out
}

/// Backup on `R - λ·φ`.
pub fn soft_bellman_backup(
    q: &[f64],
    policy: &TabularPolicy,
    lambda: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    beta: f64,
) -> Result<Vec<f64>> {
    check_q(q, cmdp)?;
    policy.check_shape(cmdp.num_states(), cmdp.num_actions())?;
    let reward = penalized_reward(cmdp, lambda, phi)?;
    Ok(soft_bellman_backup_reward(q, policy, &reward, cmdp, beta))
}

fn check_q(q: &[f64], cmdp: &TabularCmdp) -> Result<()> {
    if q.len() != cmdp.num_pairs() {
        return Err(PlannerError::Shape { what: "q", got: q.len(), expected: cmdp.num_pairs() });
    }
    Ok(())
}

/// Iterates the backup for a fixed policy until the distance to the fixed
/// point is provably below `eval_tol` (residual scaled by `γ/(1-γ)`).
pub fn soft_policy_evaluation_reward(
    policy: &TabularPolicy,
    reward: &[f64],
    cmdp: &TabularCmdp,
    cfg: &PlannerConfig,
    warm_start: Option<&[f64]>,
) -> Result<(SoftValues, usize)> {
    cfg.validate()?;
    policy.check_shape(cmdp.num_states(), cmdp.num_actions())?;
    let gamma = cmdp.gamma();
    let mut q = match warm_start {
        Some(q0) => {
            check_q(q0, cmdp)?;
            q0.to_vec()
        }
        None => vec![0.0; cmdp.num_pairs()],
    };
    let scale = if gamma == 0.0 { 0.0 } else { gamma / (1.0 - gamma) };
    let mut residual = f64::INFINITY;
    for sweep in 1..=cfg.max_eval_sweeps {
        let next = soft_bellman_backup_reward(&q, policy, reward, cmdp, cfg.beta);
        residual = q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        q = next;
        if !residual.is_finite() {
            break;
        }
        if residual * scale <= cfg.eval_tol {
            return Ok((SoftValues::from_q(q, cmdp, cfg.beta), sweep));
        }
    }
    Err(PlannerError::EvaluationDiverged { sweeps: cfg.max_eval_sweeps, residual })
}

/// Evaluation of `π` on `R - λ·φ`, started from `q = 0`.
pub fn soft_policy_evaluation(
    policy: &TabularPolicy,
    lambda: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    cfg: &PlannerConfig,
) -> Result<SoftValues> {
    let reward = penalized_reward(cmdp, lambda, phi)?;
    Ok(soft_policy_evaluation_reward(policy, &reward, cmdp, cfg, None)?.0)
}

/// Closed-form improvement `π(a|s) = exp((q(s,a) - v(s))/β)`, computed as a
/// max-subtracted softmax of `q/β`.
pub fn policy_improvement(values: &SoftValues, beta: f64) -> TabularPolicy {
    let na = values.num_actions;
    let ns = values.q.len() / na;
    let mut pi = Vec::with_capacity(values.q.len());
    for s in 0..ns {
        let row = values.q_row(s);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = row.iter().map(|x| ((x - m) / beta).exp()).collect();
        let z: f64 = e.iter().sum();
        pi.extend(e.iter().map(|x| x / z));
    }
    TabularPolicy::from_flat(ns, na, pi).expect("softmax rows are normalized")
}

/// Soft policy iteration on an arbitrary reward table, from the uniform
/// policy and `q = 0`, until the policy moves less than `pi_tol`.
pub fn soft_policy_iteration_reward(
    reward: &[f64],
    cmdp: &TabularCmdp,
    cfg: &PlannerConfig,
) -> Result<(TabularPolicy, SoftValues, ConvergenceLog)> {
    cfg.validate()?;
    check_q(reward, cmdp)?;
    let mut policy = TabularPolicy::uniform(cmdp.num_states(), cmdp.num_actions());
    let mut prev_q: Option<Vec<f64>> = None;
    let mut log = ConvergenceLog::default();
    let mut last_change = f64::INFINITY;
    for iteration in 0..cfg.max_pi_iters {
        let warm = prev_q.as_deref();
        let (values, sweeps) = soft_policy_evaluation_reward(&policy, reward, cmdp, cfg, warm)?;
        let improved = policy_improvement(&values, cfg.beta);
        let policy_residual = improved.max_abs_diff(&policy);
        let (value_residual, min_q_increase) = match &prev_q {
            Some(old) => {
                let diffs = values.q.iter().zip(old).map(|(n, o)| n - o);
                let (mut sup, mut min) = (0.0f64, f64::INFINITY);
                for d in diffs {
                    sup = sup.max(d.abs());
                    min = min.min(d);
                }
                (sup, Some(min))
            }
            None => (values.q.iter().fold(0.0f64, |m, x| m.max(x.abs())), None),
        };
        let monotone = min_q_increase.map_or(true, |m| m >= -2.0 * cfg.eval_tol);
        log.records.push(IterationRecord {
            iteration,
            value_residual,
            policy_residual,
            min_q_increase,
            sweeps,
            monotone,
        });
        last_change = policy_residual;
        if policy_residual < cfg.pi_tol {
            return Ok((improved, values, log));
        }
        prev_q = Some(values.q);
        policy = improved;
    }
    Err(PlannerError::IterationCap { iterations: cfg.max_pi_iters, last_change, log })
}

/// Soft policy iteration on `R - λ·φ`.
pub fn soft_policy_iteration(
    lambda: &[f64],
    phi: &FeatureMap,
    cmdp: &TabularCmdp,
    cfg: &PlannerConfig,
) -> Result<(TabularPolicy, SoftValues, ConvergenceLog)> {
    let reward = penalized_reward(cmdp, lambda, phi)?;
    soft_policy_iteration_reward(&reward, cmdp, cfg)
}
