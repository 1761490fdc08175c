use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cmdp::TabularCmdp;
use crate::error::{CmdpError, Result};
use crate::features::FeatureMap;
use crate::policy::TabularPolicy;
use crate::rng::sample_index;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<(usize, usize)>,
    pub final_state: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// `Σ_t γ^t table(s_t, a_t)` for a row-major `(s, a)` table.
pub fn discounted_trajectory_return(
    traj: &Trajectory,
    table: &[f64],
    num_actions: usize,
    gamma: f64,
) -> Result<f64> {
    let mut total = 0.0;
    let mut disc = 1.0;
    for &(s, a) in &traj.steps {
        let i = s * num_actions + a;
        if a >= num_actions || i >= table.len() {
            return Err(CmdpError::Index {
                state: s,
                action: a,
                num_states: table.len() / num_actions.max(1),
                num_actions,
            });
        }
        total += disc * table[i];
        disc *= gamma;
    }
    Ok(total)
}

/// Plain sum of `table(s_t, a_t)`.
pub fn undiscounted_return(traj: &Trajectory, table: &[f64], num_actions: usize) -> Result<f64> {
    discounted_trajectory_return(traj, table, num_actions, 1.0)
}

/// `Σ_t γ^t φ(s_t, a_t)`.
pub fn trajectory_features(traj: &Trajectory, phi: &FeatureMap, gamma: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; phi.dim()];
    let mut disc = 1.0;
    for &(s, a) in &traj.steps {
        if s >= phi.num_states() || a >= phi.num_actions() {
            return Err(CmdpError::Index {
                state: s,
                action: a,
                num_states: phi.num_states(),
                num_actions: phi.num_actions(),
            });
        }
        phi.add_scaled(s, a, disc, &mut out);
        disc *= gamma;
    }
    Ok(out)
}

/// Rolls out at most `horizon` steps, stopping on absorbing states.
///
/// With `eval_mode` the rollout also stops right after the first step whose
/// true cost is positive.
pub fn sample_trajectory<R: Rng + ?Sized>(
    policy: &TabularPolicy,
    cmdp: &TabularCmdp,
    rng: &mut R,
    eval_mode: bool,
) -> Trajectory {
    let mut s = sample_index(cmdp.initial_dist(), rng);
    let mut steps = Vec::new();
    for _ in 0..cmdp.horizon() {
        if cmdp.is_absorbing(s) {
            break;
        }
        let a = sample_index(policy.row(s), rng);
        steps.push((s, a));
        let next = sample_successor(cmdp, s, a, rng);
        if eval_mode && cmdp.true_cost(s, a) > 0.0 {
            s = next;
            break;
        }
        s = next;
    }
    Trajectory { steps, final_state: s }
}

fn sample_successor<R: Rng + ?Sized>(cmdp: &TabularCmdp, s: usize, a: usize, rng: &mut R) -> usize {
    let succ = cmdp.successors(s, a);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(next, p) in succ {
        acc += p;
        if u < acc {
            return next;
        }
    }
    succ.last().map(|&(n, _)| n).unwrap_or(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn traj(steps: Vec<(usize, usize)>) -> Trajectory {
        Trajectory { steps, final_state: 0 }
    }

    #[test]
    fn empty_return_is_zero() {
        assert_eq!(discounted_trajectory_return(&traj(vec![]), &[1.0], 1, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn single_step_return() {
        let r = discounted_trajectory_return(&traj(vec![(0, 0)]), &[-1.0], 1, 0.99).unwrap();
        assert_eq!(r, -1.0);
    }

    #[test]
    fn two_step_return() {
        let table = [1.0, 0.0, 0.0, 2.0];
        let r = discounted_trajectory_return(&traj(vec![(0, 0), (1, 1)]), &table, 2, 0.5).unwrap();
        assert_eq!(r, 2.0);
    }

    #[test]
    fn return_rejects_bad_index() {
        assert!(discounted_trajectory_return(&traj(vec![(3, 0)]), &[1.0, 2.0], 1, 0.5).is_err());
    }

    #[test]
    fn features_of_repeated_pair() {
        let phi = FeatureMap::one_hot(2, 2);
        let f = trajectory_features(&traj(vec![(1, 0), (1, 0)]), &phi, 0.9).unwrap();
        assert_eq!(f, vec![0.0, 0.0, 1.9, 0.0]);
        let single = trajectory_features(&traj(vec![(0, 1)]), &phi, 0.9).unwrap();
        assert_eq!(single, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(trajectory_features(&traj(vec![]), &phi, 0.9).unwrap(), vec![0.0; 4]);
    }

    fn line(cost_first: f64) -> TabularCmdp {
        // s0 -> s1 -> s2 (absorbing), one action
        TabularCmdp::new(
            3,
            1,
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            vec![-1.0, -1.0, 0.0],
            vec![cost_first, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            0.9,
            10,
            0.0,
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn rollout_stops_at_goal() {
        let m = line(0.0);
        let pi = TabularPolicy::uniform(3, 1);
        let t = sample_trajectory(&pi, &m, &mut seeded_rng(0, 0), false);
        assert_eq!(t.steps, vec![(0, 0), (1, 0)]);
        assert_eq!(t.final_state, 2);
    }

    #[test]
    fn eval_mode_stops_on_first_violation() {
        let m = line(1.0);
        let pi = TabularPolicy::uniform(3, 1);
        let t = sample_trajectory(&pi, &m, &mut seeded_rng(0, 0), true);
        assert_eq!(t.steps, vec![(0, 0)]);
        let full = sample_trajectory(&pi, &m, &mut seeded_rng(0, 0), false);
        assert_eq!(full.len(), 2);
    }

    #[test]
    fn rollout_respects_horizon_and_seed() {
        let loop_m = TabularCmdp::new(1, 2, vec![1.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0], 0.5, 7, 0.0, vec![])
            .unwrap();
        let pi = TabularPolicy::uniform(1, 2);
        let a = sample_trajectory(&pi, &loop_m, &mut seeded_rng(9, 2), false);
        let b = sample_trajectory(&pi, &loop_m, &mut seeded_rng(9, 2), false);
        assert_eq!(a.len(), 7);
        assert_eq!(a, b);
    }
}
