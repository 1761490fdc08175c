use rand::Rng;

use crate::cmdp::TabularCmdp;
use crate::policy::TabularPolicy;

/// Draws a dense random CMDP without absorbing states.
///
/// Transition rows are normalized uniform draws with roughly a third of the
/// entries zeroed; rewards are uniform in `[-1, 1]` and costs in `[0, 1]` on
/// about half of the pairs.
pub fn random_cmdp<R: Rng + ?Sized>(
    rng: &mut R,
    num_states: usize,
    num_actions: usize,
    gamma: f64,
    horizon: usize,
) -> TabularCmdp {
    let (ns, na) = (num_states, num_actions);
    let mut transition = Vec::with_capacity(ns * na * ns);
    for _ in 0..ns * na {
        let mut row: Vec<f64> = (0..ns)
            .map(|_| if rng.gen_bool(0.35) { 0.0 } else { rng.gen_range(0.05..1.0) })
            .collect();
        if row.iter().all(|&x| x == 0.0) {
            row[rng.gen_range(0..ns)] = 1.0;
        }
        normalize(&mut row);
        transition.extend(row);
    }
    let reward = (0..ns * na).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let true_cost = (0..ns * na)
        .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..1.0) } else { 0.0 })
        .collect();
    let mut init: Vec<f64> = (0..ns).map(|_| rng.gen_range(0.1..1.0)).collect();
    normalize(&mut init);
    TabularCmdp::new(ns, na, transition, reward, true_cost, init, gamma, horizon, 0.0, vec![])
        .expect("random rows are normalized")
}

/// Random strictly positive policy.
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, num_states: usize, num_actions: usize) -> TabularPolicy {
    let mut pi = Vec::with_capacity(num_states * num_actions);
    for _ in 0..num_states {
        let mut row: Vec<f64> = (0..num_actions).map(|_| rng.gen_range(0.05..1.0)).collect();
        normalize(&mut row);
        pi.extend(row);
    }
    TabularPolicy::from_flat(num_states, num_actions, pi).expect("normalized rows")
}

/// Divides by the sum, then pushes the rounding residue into the largest entry.
fn normalize(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= sum);
    let residue = 1.0 - row.iter().sum::<f64>();
    let imax = (0..row.len()).max_by(|&i, &j| row[i].total_cmp(&row[j])).unwrap_or(0);
    row[imax] += residue;
}
