use cmdp_core::{discounted_trajectory_return, sample_trajectory, undiscounted_return, TabularCmdp, TabularPolicy, Trajectory};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

/// Fraction of steps whose true cost is positive.
pub fn violation_rate(traj: &Trajectory, cmdp: &TabularCmdp) -> Result<f64> {
    if traj.steps.is_empty() {
        return Err(ExperimentError::EmptyTrajectory);
    }
    let hits = traj.steps.iter().filter(|&&(s, a)| cmdp.true_cost(s, a) > 0.0).count();
    Ok(hits as f64 / traj.steps.len() as f64)
}

/// Means over `n` evaluation rollouts, which stop at the first violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub trajectories: usize,
    pub reward: f64,
    pub reward_undiscounted: f64,
    pub violation_rate: f64,
}

pub fn evaluate_policy<R: Rng + ?Sized>(policy: &TabularPolicy, cmdp: &TabularCmdp, n: usize, rng: &mut R) -> Result<EvalSummary> {
    if n == 0 {
        return Err(ExperimentError::Config("evaluation needs at least one trajectory".into()));
    }
    let (mut reward, mut raw, mut viol) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let t = sample_trajectory(policy, cmdp, rng, true);
        reward += discounted_trajectory_return(&t, cmdp.reward_table(), cmdp.num_actions(), cmdp.gamma())?;
        raw += undiscounted_return(&t, cmdp.reward_table(), cmdp.num_actions())?;
        viol += violation_rate(&t, cmdp)?;
    }
    let n_f = n as f64;
    Ok(EvalSummary { trajectories: n, reward: reward / n_f, reward_undiscounted: raw / n_f, violation_rate: viol / n_f })
}

/// Sample mean and standard error `std/√n` (with the `n - 1` sample
/// deviation; 0 for a single value).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
