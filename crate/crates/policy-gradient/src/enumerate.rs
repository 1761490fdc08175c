use cmdp_core::TabularCmdp;

use crate::error::{PgError, Result};
use crate::policy::{ParametricPolicy, ValueTable};

/// Upper bound on enumerated trajectories.
pub const MAX_ENUMERATED: usize = 1_000_000;

/// Every trajectory up to the horizon with its probability.
fn enumerate(policy: &ParametricPolicy, cmdp: &TabularCmdp) -> Result<Vec<(f64, Vec<(usize, usize)>)>> {
    let branching = (0..cmdp.num_states())
        .flat_map(|s| (0..cmdp.num_actions()).map(move |a| (s, a)))
        .map(|(s, a)| cmdp.successors(s, a).len())
        .max()
        .unwrap_or(1)
        * cmdp.num_actions();
    let bound = (branching as f64).powi(cmdp.horizon() as i32) * cmdp.num_states() as f64;
    if bound > MAX_ENUMERATED as f64 {
        return Err(PgError::TooLarge(bound.min(usize::MAX as f64) as usize));
    }
    let probs: Vec<Vec<f64>> = (0..cmdp.num_states()).map(|s| policy.probs(s)).collect();
    let mut out = Vec::new();
    let mut path = Vec::new();
    for (s0, &p0) in cmdp.initial_dist().iter().enumerate() {
        if p0 > 0.0 {
            walk(cmdp, &probs, s0, p0, &mut path, &mut out);
        }
    }
    Ok(out)
}

fn walk(
    cmdp: &TabularCmdp,
    probs: &[Vec<f64>],
    s: usize,
    prob: f64,
    path: &mut Vec<(usize, usize)>,
    out: &mut Vec<(f64, Vec<(usize, usize)>)>,
) {
    if path.len() == cmdp.horizon() || cmdp.is_absorbing(s) {
        out.push((prob, path.clone()));
        return;
    }
    for (a, &pa) in probs[s].iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        path.push((s, a));
        for &(next, p) in cmdp.successors(s, a) {
            walk(cmdp, probs, next, prob * pa * p, path, out);
        }
        path.pop();
    }
}

/// Max-abs component of `Σ_τ P(τ) Σ_t ∇_θ log π(a_t|s_t) b(s_t)`.
pub fn baseline_zero_expectation_check(policy: &ParametricPolicy, cmdp: &TabularCmdp, b: &ValueTable) -> Result<f64> {
    check_shapes(policy, cmdp, b)?;
    let mut total = vec![0.0; policy.theta.len()];
    for (p, steps) in enumerate(policy, cmdp)? {
        for &(s, a) in &steps {
            policy.add_grad_log_prob(s, a, p * b.v_hat[s], &mut total);
        }
    }
    Ok(total.iter().fold(0.0, |m, x| m.max(x.abs())))
}

/// Exact `E[Σ_t ∇_θ log π(a_t|s_t) (G_t - b(s_t))]` with reward-to-go `G_t`
/// taken on a row-major `(s, a)` reward table.
pub fn enumerated_policy_gradient(
    policy: &ParametricPolicy,
    cmdp: &TabularCmdp,
    reward: &[f64],
    gamma: f64,
    baseline: Option<&ValueTable>,
) -> Result<Vec<f64>> {
    if let Some(b) = baseline {
        check_shapes(policy, cmdp, b)?;
    }
    let na = cmdp.num_actions();
    let mut total = vec![0.0; policy.theta.len()];
    for (p, steps) in enumerate(policy, cmdp)? {
        let mut to_go = vec![0.0; steps.len()];
        let mut acc = 0.0;
        for t in (0..steps.len()).rev() {
            let (s, a) = steps[t];
            acc = reward[s * na + a] + gamma * acc;
            to_go[t] = acc;
        }
        for (t, &(s, a)) in steps.iter().enumerate() {
            let b = baseline.map_or(0.0, |v| v.v_hat[s]);
            policy.add_grad_log_prob(s, a, p * (to_go[t] - b), &mut total);
        }
    }
    Ok(total)
}

fn check_shapes(policy: &ParametricPolicy, cmdp: &TabularCmdp, b: &ValueTable) -> Result<()> {
    if policy.theta.len() != cmdp.num_pairs() {
        return Err(PgError::Shape { what: "theta", got: policy.theta.len(), expected: cmdp.num_pairs() });
    }
    if b.v_hat.len() != cmdp.num_states() {
        return Err(PgError::Shape { what: "baseline", got: b.v_hat.len(), expected: cmdp.num_states() });
    }
    Ok(())
}
