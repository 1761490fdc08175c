use cmdp_core::random::random_cmdp;
use cmdp_core::{sample_trajectory, seeded_rng, FeatureMap, TabularCmdp, Trajectory};
use constraint_learner::DualState;
use policy_gradient::*;
use rand::Rng;

fn relative_error(numerical: f64, analytical: f64) -> f64 {
    (numerical - analytical).abs() / (numerical.abs() + analytical.abs()).max(1e-6)
}

fn random_setup(seed: u64) -> (TabularCmdp, ParametricPolicy, ValueTable, Vec<Trajectory>, DualState) {
    let mut rng = seeded_rng(seed, 1);
    let ns = rng.gen_range(2..=5);
    let na = rng.gen_range(2..=3);
    let m = random_cmdp(&mut rng, ns, na, 0.9, 8);
    let policy = ParametricPolicy { num_states: ns, num_actions: na, theta: (0..ns * na).map(|_| rng.gen_range(-2.0..2.0)).collect() };
    let values = ValueTable { v_hat: (0..ns).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let tab = policy.to_tabular();
    let batch = (0..4).map(|_| sample_trajectory(&tab, &m, &mut rng, false)).collect();
    let lambda = (0..ns * na).map(|_| rng.gen_range(0.0..1.0)).collect();
    let dual = DualState { lambda, alpha: vec![0.0; ns * na], lr_lambda: 0.1, iteration: 0 };
    (m, policy, values, batch, dual)
}

#[test]
fn surrogate_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let (m, policy, values, batch, dual) = random_setup(seed);
        let phi = FeatureMap::one_hot(m.num_states(), m.num_actions());
        let adv = batch_advantages(&batch, &policy, &values, &dual.lambda, &phi, &m, 0.3, 0.9, 0.9);
        let g = surrogate_gradient(&policy, &batch, &adv);
        let eps = 1e-6;
        for i in 0..policy.theta.len() {
            let mut plus = policy.clone();
            plus.theta[i] += eps;
            let mut minus = policy.clone();
            minus.theta[i] -= eps;
            let fd = (surrogate_objective(&plus, &batch, &adv) - surrogate_objective(&minus, &batch, &adv)) / (2.0 * eps);
            assert!(relative_error(fd, g[i]) < 1e-5, "seed {seed} index {i}: fd {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn baseline_expectation_vanishes_on_random_pairs() {
    for seed in 0..10 {
        let mut rng = seeded_rng(seed, 2);
        let ns = rng.gen_range(2..=4);
        let na = rng.gen_range(2..=3);
        let m = random_cmdp(&mut rng, ns, na, 0.9, 3);
        let policy = ParametricPolicy { num_states: ns, num_actions: na, theta: (0..ns * na).map(|_| rng.gen_range(-2.0..2.0)).collect() };
        let b = ValueTable { v_hat: (0..ns).map(|_| rng.gen_range(-5.0..5.0)).collect() };
        assert!(baseline_zero_expectation_check(&policy, &m, &b).unwrap() <= 1e-10);
        let with = enumerated_policy_gradient(&policy, &m, m.reward_table(), 0.9, Some(&b)).unwrap();
        let without = enumerated_policy_gradient(&policy, &m, m.reward_table(), 0.9, None).unwrap();
        for (x, y) in with.iter().zip(&without) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn gae_with_unit_lambda_telescopes_to_returns() {
    let mut rng = seeded_rng(4, 0);
    let rewards: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // with v_hat = 0 the deltas are the rewards themselves
    let adv = gae(&rewards, 0.95, 1.0);
    for t in 0..rewards.len() {
        let direct: f64 = rewards[t..].iter().enumerate().map(|(l, r)| 0.95f64.powi(l as i32) * r).sum();
        assert!((adv.0[t] - direct).abs() < 1e-12);
    }
}

#[test]
fn zero_advantages_leave_logits_unchanged() {
    let (_, policy, _, batch, _) = random_setup(3);
    let adv: Vec<AdvantageEstimate> = batch.iter().map(|t| AdvantageEstimate(vec![0.0; t.len()])).collect();
    assert!(surrogate_gradient(&policy, &batch, &adv).iter().all(|&g| g == 0.0));
}

#[test]
fn rows_stay_normalized_after_updates() {
    let (m, mut policy, mut values, _, dual) = random_setup(8);
    let phi = FeatureMap::one_hot(m.num_states(), m.num_actions());
    let cfg = PgConfig { lr_theta: 5.0, beta: 0.1, gamma: 0.9, ..PgConfig::default() };
    let mut rng = seeded_rng(8, 3);
    for _ in 0..50 {
        let tab = policy.to_tabular();
        let batch: Vec<_> = (0..4).map(|_| sample_trajectory(&tab, &m, &mut rng, false)).collect();
        let (p, v, _) = policy_gradient_step(&policy, &values, &batch, &dual, &phi, &m, &cfg).unwrap();
        policy = p;
        values = v;
        for s in 0..m.num_states() {
            assert!((policy.probs(s).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn bandit_learns_the_better_arm() {
    // state 0 steps into absorbing state 1 under both arms
    let m = TabularCmdp::new(2, 2, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4], vec![1.0, 0.0], 0.9, 5, 0.0, vec![1])
        .unwrap();
    let phi = FeatureMap::one_hot(2, 2);
    let dual = DualState::new(4, 0.0, 0.0, 0.1);
    let cfg = PgConfig { beta: 0.01, lr_theta: 0.1, ..PgConfig::default() };
    let mut policy = ParametricPolicy::zeros(2, 2);
    let mut values = ValueTable::zeros(2);
    let mut rng = seeded_rng(0, 0);
    let mut last = policy.probs(0)[0];
    for _ in 0..200 {
        let tab = policy.to_tabular();
        let batch: Vec<_> = (0..16).map(|_| sample_trajectory(&tab, &m, &mut rng, false)).collect();
        let (p, v, _) = policy_gradient_step(&policy, &values, &batch, &dual, &phi, &m, &cfg).unwrap();
        policy = p;
        values = v;
        let now = policy.probs(0)[0];
        assert!(now >= last, "{now} < {last}");
        last = now;
    }
    assert!(last > 0.9);
}
