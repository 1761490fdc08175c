use cmdp_core::{TabularCmdp, TabularPolicy};
use soft_planner::{policy_improvement, PlannerConfig, SoftValues};

use crate::error::{MaxentError, Result};

/// One backup of the trajectory-level maximum-entropy model:
/// `q(s,a) = r(s,a) + β log Σ_{s'} p(s'|s,a) exp(γ v(s')/β)`.
///
/// The dynamics enter inside the exponent, so as `β → 0` the backup tends to
/// the best reachable successor value rather than its expectation. Each row
/// subtracts its own maximum over the support before exponentiating.
pub fn noncausal_backup(v: &[f64], reward: &[f64], cmdp: &TabularCmdp, beta: f64) -> Vec<f64> {
    let (ns, na, gamma) = (cmdp.num_states(), cmdp.num_actions(), cmdp.gamma());
    let mut q = vec![0.0; ns * na];
    for s in 0..ns {
        if cmdp.is_absorbing(s) {
            continue;
        }
        for a in 0..na {
            let succ = cmdp.successors(s, a);
            let m = succ.iter().map(|&(n, _)| gamma * v[n]).fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = succ.iter().map(|&(n, p)| p * ((gamma * v[n] - m) / beta).exp()).sum();
            q[s * na + a] = reward[s * na + a] + m + beta * z.ln();
        }
    }
    q
}

/// Soft value iteration under [`noncausal_backup`] from `v = 0`, stopped
/// when `residual · γ/(1-γ) ≤ eval_tol`.
pub fn noncausal_soft_value_iteration(
    reward: &[f64],
    cmdp: &TabularCmdp,
    beta: f64,
    cfg: &PlannerConfig,
) -> Result<(TabularPolicy, SoftValues)> {
    if reward.len() != cmdp.num_pairs() {
        return Err(MaxentError::Shape { what: "reward", got: reward.len(), expected: cmdp.num_pairs() });
    }
    if !(beta >= soft_planner::MIN_BETA && beta.is_finite()) {
        return Err(MaxentError::Config("model temperature"));
    }
    let gamma = cmdp.gamma();
    let mut values = SoftValues::zeros(cmdp, beta);
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_eval_sweeps {
        let next = SoftValues::from_q(noncausal_backup(&values.v, reward, cmdp, beta), cmdp, beta);
        residual = next.v.iter().zip(&values.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        values = next;
        if residual * gamma / (1.0 - gamma) <= cfg.eval_tol {
            return Ok((policy_improvement(&values, beta), values));
        }
    }
    Err(MaxentError::NotConverged { sweeps: cfg.max_eval_sweeps, residual })
}
