use cmdp_core::random::{random_cmdp, random_policy};
use cmdp_core::{expected_features_exact, sample_trajectory, seeded_rng, FeatureMap, TabularCmdp};
use constraint_learner::*;
use gridworld::{compile, GridSpec};
use proptest::prelude::*;
use rand::Rng;
use soft_planner::{make_expert_verified, penalized_reward, soft_policy_iteration_reward, PlannerConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multipliers_stay_nonnegative(
        init in proptest::collection::vec(0.0f64..5.0, 1..8),
        steps in proptest::collection::vec((proptest::collection::vec(-10.0f64..10.0, 8), 1e-4f64..10.0), 1..20),
    ) {
        let k = init.len();
        let mut dual = DualState { lambda: init, alpha: vec![0.0; k], lr_lambda: 1.0, iteration: 0 };
        for (grad, lr) in steps {
            dual.lr_lambda = lr;
            dual = dual_update(&dual, &grad[..k]).unwrap();
            prop_assert!(dual.lambda.iter().all(|&l| l >= 0.0));
        }
    }

    #[test]
    fn lagrangian_is_affine_in_lambda(seed in 0u64..100_000, t in 0.0f64..1.0) {
        let mut rng = seeded_rng(seed, 1);
        let m = random_cmdp(&mut rng, 3, 2, 0.8, 60);
        let phi = FeatureMap::one_hot(3, 2);
        let pi = random_policy(&mut rng, 3, 2);
        let demos = DemoSet::new(vec![sample_trajectory(&pi, &m, &mut rng, false)], &phi, m.gamma()).unwrap();
        let l1: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..3.0)).collect();
        let l2: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..3.0)).collect();
        let mix: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let value = |l: &[f64]| {
            let dual = DualState { lambda: l.to_vec(), alpha: vec![0.0; 6], lr_lambda: 0.1, iteration: 0 };
            lagrangian_value(&pi, &dual, &demos, &phi, &m, 0.5).unwrap()
        };
        let lhs = value(&mix);
        let rhs = t * value(&l1) + (1.0 - t) * value(&l2);
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}

fn convex_instance(seed: u64) -> (TabularCmdp, Vec<f64>, f64) {
    let mut rng = seeded_rng(seed, 2);
    let ns = rng.gen_range(2..=5);
    let na = rng.gen_range(2..=3);
    // long horizon so the finite-horizon expectations match the planner's objective
    let gamma = rng.gen_range(0.5..0.9);
    let m = random_cmdp(&mut rng, ns, na, gamma, 400);
    let pi = random_policy(&mut rng, ns, na);
    let expert = expected_features_exact(&pi, &m, &FeatureMap::one_hot(ns, na));
    (m, expert, rng.gen_range(0.1..2.0))
}

#[test]
fn dual_function_is_convex() {
    for seed in 0..50 {
        let (m, expert, beta) = convex_instance(seed);
        let phi = FeatureMap::one_hot(m.num_states(), m.num_actions());
        let mut rng = seeded_rng(seed, 3);
        let k = phi.dim();
        let l1: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
        let l2: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
        let t: f64 = rng.gen_range(0.0..1.0);
        let mix: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let planner = PlannerConfig::new(beta);
        let g = |l: &[f64]| dual_function(l, &vec![0.0; k], &expert, &phi, &m, &planner).unwrap();
        assert!(g(&mix) <= t * g(&l1) + (1.0 - t) * g(&l2) + 1e-6, "seed {seed}");
    }
}

#[test]
fn matched_features_are_a_fixed_point() {
    let (m, _, beta) = convex_instance(7);
    let phi = FeatureMap::one_hot(m.num_states(), m.num_actions());
    let mut cfg = IcrlRunConfig::new(PlannerConfig::new(beta));
    cfg.lr_lambda = 0.5;
    let reward = penalized_reward(&m, &vec![1.0; phi.dim()], &phi).unwrap();
    let (pi, _, _) = soft_policy_iteration_reward(&reward, &m, &cfg.planner).unwrap();
    let nominal = expected_features_exact(&pi, &m, &phi);
    let grad = dual_gradient(&nominal, &nominal, &vec![0.0; phi.dim()]).unwrap();
    assert!(grad.iter().all(|&g| g == 0.0));
    let run = run_mce_icrl_features(&m, &nominal, &phi, &cfg).unwrap();
    assert!(run.dual.lambda.iter().all(|&l| (l - 1.0).abs() < 1e-9));
    assert!(run.log.rows.last().unwrap().feature_gap_l2 < 1e-3);
}

#[test]
fn self_generated_demos_shrink_the_gap() {
    let m = TabularCmdp::new(
        2,
        2,
        vec![0.7, 0.3, 0.1, 0.9, 0.4, 0.6, 0.8, 0.2],
        vec![0.5, 1.0, -0.2, 0.3],
        vec![0.0; 4],
        vec![1.0, 0.0],
        0.7,
        200,
        0.0,
        vec![],
    )
    .unwrap();
    let phi = FeatureMap::one_hot(2, 2);
    let planner = PlannerConfig::new(1.0);
    let target = [0.2, 1.5, 0.0, 0.7];
    let (pi, _, _) = soft_policy_iteration_reward(&penalized_reward(&m, &target, &phi).unwrap(), &m, &planner).unwrap();
    let expert = expected_features_exact(&pi, &m, &phi);
    let mut cfg = IcrlRunConfig::new(planner);
    cfg.lr_lambda = 0.2;
    cfg.outer_iterations = 300;
    let run = run_mce_icrl_features(&m, &expert, &phi, &cfg).unwrap();
    let gaps: Vec<f64> = run.log.rows.iter().map(|r| r.feature_gap_l2).collect();
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
    }
    assert!(*gaps.last().unwrap() < 1e-3);
}

#[test]
fn nominal_only_features_gain_cost_pressure() {
    let spec = GridSpec::default_layout();
    let m = compile(&spec).unwrap();
    let phi = FeatureMap::one_hot(m.num_states(), 4);
    let planner = PlannerConfig::new(1e-5);
    let expert = make_expert_verified(&m, &planner, 1e-6).unwrap();
    let mut rng = seeded_rng(0, 0);
    let trajs = (0..50).map(|_| sample_trajectory(&expert.policy, &m, &mut rng, false)).collect();
    let demos = DemoSet::new(trajs, &phi, m.gamma()).unwrap();
    let mut cfg = IcrlRunConfig::new(planner);
    cfg.outer_iterations = 1;
    let run = run_mce_icrl_tabular(&m, &demos, &phi, &cfg).unwrap();

    let reward = penalized_reward(&m, &vec![1.0; phi.dim()], &phi).unwrap();
    let (first, _, _) = soft_policy_iteration_reward(&reward, &m, &planner).unwrap();
    let nominal = expected_features_exact(&first, &m, &phi);
    let mut pressured = 0;
    for i in 0..phi.dim() {
        if nominal[i] > 1e-9 && demos.empirical_features()[i] == 0.0 {
            assert!(run.dual.lambda[i] > 1.0);
            pressured += 1;
        }
    }
    assert!(pressured > 0);
}

#[test]
fn sampled_nominal_mode_is_seeded() {
    let (m, expert, beta) = convex_instance(3);
    let phi = FeatureMap::one_hot(m.num_states(), m.num_actions());
    let mut cfg = IcrlRunConfig::new(PlannerConfig::new(beta));
    cfg.nominal_features = NominalFeatures::Sampled { trajectories: 20 };
    cfg.outer_iterations = 3;
    cfg.lr_lambda = 0.1;
    let a = run_mce_icrl_features(&m, &expert, &phi, &cfg).unwrap();
    let b = run_mce_icrl_features(&m, &expert, &phi, &cfg).unwrap();
    assert_eq!(a.dual, b.dual);
    assert_eq!(a.log, b.log);
}
