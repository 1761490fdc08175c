//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL without failing
//! the process; any other failure exits non-zero.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cmdp_core::random::{random_cmdp, random_policy};
use cmdp_core::{expected_features_exact, sample_trajectory, seeded_rng, FeatureMap, TabularPolicy};
use constraint_learner::{dual_function, dual_gradient, dual_update, DualState};
use cost_encoder::{
    encoder_dual_gradient, encoder_dual_objective, reconstruction_gradient, reconstruction_loss, MlpDecoder, MlpEncoder,
    WeightedBatch,
};
use experiments_cli::{
    ablate_beta, ablate_pretrain, run_experiment, sweep_cells, run_cells, transfer_experiment, ExperimentConfig, FinalRow,
    LearnedCost, Method,
};
use policy_gradient::{
    baseline_zero_expectation_check, batch_advantages, surrogate_gradient, surrogate_objective, ParametricPolicy, ValueTable,
};
use rand::Rng;
use soft_planner::{
    penalized_reward, policy_improvement, soft_bellman_backup_reward, soft_policy_evaluation_reward, soft_policy_iteration_reward,
    PlannerConfig,
};

const KNOWN_FAILURES: &[u32] = &[5, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(name: &str, out: &Path) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    let mut cfg = ExperimentConfig::load(&path).expect("shipped config loads");
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn relative_error(numerical: f64, analytical: f64) -> f64 {
    (numerical - analytical).abs() / (numerical.abs() + analytical.abs()).max(1e-6)
}

fn central_difference(p: &[f64], i: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let eps = 1e-6;
    let (mut plus, mut minus) = (p.to_vec(), p.to_vec());
    plus[i] += eps;
    minus[i] -= eps;
    (f(&plus) - f(&minus)) / (2.0 * eps)
}

fn criterion_1() -> Outcome {
    let (mut worst_mono, mut worst_ratio, mut worst_fixed) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let mut ratio_ok = true;
    for seed in 0..50 {
        let mut rng = seeded_rng(seed, 100);
        let ns = rng.gen_range(1..=6);
        let na = rng.gen_range(1..=3);
        let gamma = rng.gen_range(0.5..=0.95);
        let beta = rng.gen_range(0.1..=2.0);
        let m = random_cmdp(&mut rng, ns, na, gamma, 50);
        let cfg = PlannerConfig::new(beta);
        let reward = m.reward_table();

        let mut pi = TabularPolicy::uniform(ns, na);
        let (mut old, _) = soft_policy_evaluation_reward(&pi, reward, &m, &cfg, None).unwrap();
        for _ in 0..30 {
            pi = policy_improvement(&old, beta);
            let (new, _) = soft_policy_evaluation_reward(&pi, reward, &m, &cfg, None).unwrap();
            for (n, o) in new.q.iter().zip(&old.q) {
                worst_mono = worst_mono.max(o - n);
            }
            old = new;
        }

        for _ in 0..5 {
            let q1: Vec<f64> = (0..m.num_pairs()).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let q2: Vec<f64> = (0..m.num_pairs()).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let p = random_policy(&mut rng, ns, na);
            let d = sup(
                &soft_bellman_backup_reward(&q1, &p, reward, &m, beta),
                &soft_bellman_backup_reward(&q2, &p, reward, &m, beta),
            );
            let ratio = d / sup(&q1, &q2);
            worst_ratio = worst_ratio.max(ratio);
            ratio_ok &= d <= (gamma + 1e-9) * sup(&q1, &q2);
        }

        let (conv, _, _) = soft_policy_iteration_reward(reward, &m, &cfg).unwrap();
        let (vals, _) = soft_policy_evaluation_reward(&conv, reward, &m, &cfg, None).unwrap();
        for s in 0..ns {
            for a in 0..na {
                let target = ((vals.q[s * na + a] - vals.v[s]) / beta).exp();
                worst_fixed = worst_fixed.max((conv.prob(s, a) - target).abs());
            }
        }
    }
    let pass = worst_mono <= 1e-8 && ratio_ok && worst_fixed <= 1e-6;
    outcome(
        pass,
        format!("50 CMDPs: max Q drop {worst_mono:.2e}, max contraction ratio {worst_ratio:.4}, max fixed-point error {worst_fixed:.2e}"),
    )
}

fn pg_fd_error(seed: u64) -> f64 {
    let mut rng = seeded_rng(seed, 101);
    let ns = rng.gen_range(2..=5);
    let na = rng.gen_range(2..=3);
    let m = random_cmdp(&mut rng, ns, na, 0.9, 8);
    let policy = ParametricPolicy { num_states: ns, num_actions: na, theta: (0..ns * na).map(|_| rng.gen_range(-2.0..2.0)).collect() };
    let values = ValueTable { v_hat: (0..ns).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let tab = policy.to_tabular();
    let batch: Vec<_> = (0..4).map(|_| sample_trajectory(&tab, &m, &mut rng, false)).collect();
    let lambda: Vec<f64> = (0..ns * na).map(|_| rng.gen_range(0.0..1.0)).collect();
    let phi = FeatureMap::one_hot(ns, na);
    let adv = batch_advantages(&batch, &policy, &values, &lambda, &phi, &m, 0.3, 0.9, 0.9);
    let g = surrogate_gradient(&policy, &batch, &adv);
    (0..policy.theta.len())
        .map(|i| {
            let fd = central_difference(&policy.theta, i, |t| {
                let p = ParametricPolicy { theta: t.to_vec(), ..policy.clone() };
                surrogate_objective(&p, &batch, &adv)
            });
            relative_error(fd, g[i])
        })
        .fold(0.0, f64::max)
}

fn random_batch<R: Rng>(rng: &mut R, dim: usize) -> WeightedBatch {
    let mut b = WeightedBatch::default();
    for _ in 0..rng.gen_range(1..=5) {
        b.push((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(0.0..1.0));
    }
    b
}

fn encoder_fd_errors(seed: u64) -> (f64, f64) {
    let mut rng = seeded_rng(seed, 102);
    let depth = rng.gen_range(1..=3);
    let sizes: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=6)).collect();
    let enc = MlpEncoder::init(&sizes, &mut rng).unwrap();
    let lambda: Vec<f64> = (0..enc.output_dim()).map(|_| rng.gen_range(0.0..2.0)).collect();
    let (demo, nominal) = (random_batch(&mut rng, sizes[0]), random_batch(&mut rng, sizes[0]));
    let g = encoder_dual_gradient(&enc, &lambda, &demo, &nominal).unwrap().flatten();
    let p = enc.params();
    let dual = (0..p.len())
        .map(|i| {
            let fd = central_difference(&p, i, |q| {
                let mut e = enc.clone();
                e.set_params(q).unwrap();
                encoder_dual_objective(&e, &lambda, &demo, &nominal).unwrap()
            });
            relative_error(fd, g[i])
        })
        .fold(0.0, f64::max);

    let dec = MlpDecoder::mirror(&enc, &mut rng).unwrap();
    let data: Vec<Vec<f64>> = (0..rng.gen_range(1..=4)).map(|_| (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let (ge, gd) = reconstruction_gradient(&enc, &dec, &data).unwrap();
    let (ge, gd) = (ge.flatten(), gd.flatten());
    let pd = dec.params();
    let mut recon = 0.0f64;
    for i in 0..p.len() {
        let fd = central_difference(&p, i, |q| {
            let mut e = enc.clone();
            e.set_params(q).unwrap();
            reconstruction_loss(&e, &dec, &data).unwrap()
        });
        recon = recon.max(relative_error(fd, ge[i]));
    }
    for i in 0..pd.len() {
        let fd = central_difference(&pd, i, |q| {
            let mut d = dec.clone();
            d.set_params(q).unwrap();
            reconstruction_loss(&enc, &d, &data).unwrap()
        });
        recon = recon.max(relative_error(fd, gd[i]));
    }
    (dual, recon)
}

fn criterion_2() -> Outcome {
    let pg = (0..30).map(pg_fd_error).fold(0.0, f64::max);
    let (mut dual, mut recon) = (0.0f64, 0.0f64);
    for seed in 0..30 {
        let (d, r) = encoder_fd_errors(seed);
        dual = dual.max(d);
        recon = recon.max(r);
    }
    let pass = pg < 1e-5 && dual < 1e-5 && recon < 1e-5;
    outcome(pass, format!("30 configs each: max rel. error surrogate {pg:.2e}, encoder dual {dual:.2e}, reconstruction {recon:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let mut rng = seeded_rng(seed, 103);
        let ns = rng.gen_range(2..=4);
        let na = rng.gen_range(2..=3);
        let m = random_cmdp(&mut rng, ns, na, 0.9, 3);
        let policy = ParametricPolicy { num_states: ns, num_actions: na, theta: (0..ns * na).map(|_| rng.gen_range(-2.0..2.0)).collect() };
        let b = ValueTable { v_hat: (0..ns).map(|_| rng.gen_range(-5.0..5.0)).collect() };
        worst = worst.max(baseline_zero_expectation_check(&policy, &m, &b).unwrap());
    }
    outcome(worst <= 1e-10, format!("10 pairs: max |E[baseline term]| {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = seeded_rng(0, 104);
    let mut nonneg = true;
    for _ in 0..200 {
        let k = rng.gen_range(1..=8);
        let mut dual = DualState::new(k, rng.gen_range(0.0..5.0), 0.0, 1.0);
        for _ in 0..rng.gen_range(1..=20) {
            dual.lr_lambda = rng.gen_range(1e-4..10.0);
            let grad: Vec<f64> = (0..k).map(|_| rng.gen_range(-10.0..10.0)).collect();
            dual = dual_update(&dual, &grad).unwrap();
            nonneg &= dual.lambda.iter().all(|&l| l >= 0.0);
        }
    }

    let mut worst_convex = f64::NEG_INFINITY;
    for seed in 0..50 {
        let mut rng = seeded_rng(seed, 105);
        let ns = rng.gen_range(2..=5);
        let na = rng.gen_range(2..=3);
        let gamma = rng.gen_range(0.5..0.9);
        let m = random_cmdp(&mut rng, ns, na, gamma, 400);
        let phi = FeatureMap::one_hot(ns, na);
        let expert = expected_features_exact(&random_policy(&mut rng, ns, na), &m, &phi);
        let planner = PlannerConfig::new(rng.gen_range(0.1..2.0));
        let k = phi.dim();
        let l1: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
        let l2: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
        let t: f64 = rng.gen_range(0.0..1.0);
        let mix: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let g = |l: &[f64]| dual_function(l, &vec![0.0; k], &expert, &phi, &m, &planner).unwrap();
        worst_convex = worst_convex.max(g(&mix) - (t * g(&l1) + (1.0 - t) * g(&l2)));
    }

    let mut rng = seeded_rng(1, 106);
    let m = random_cmdp(&mut rng, 4, 2, 0.8, 200);
    let phi = FeatureMap::one_hot(4, 2);
    let reward = penalized_reward(&m, &[1.0; 8], &phi).unwrap();
    let (pi, _, _) = soft_policy_iteration_reward(&reward, &m, &PlannerConfig::new(0.5)).unwrap();
    let feats = expected_features_exact(&pi, &m, &phi);
    let vanish = dual_gradient(&feats, &feats, &[0.0; 8]).unwrap().iter().all(|&g| g == 0.0);

    let pass = nonneg && worst_convex <= 1e-6 && vanish;
    outcome(
        pass,
        format!("200 fuzzed sequences nonneg={nonneg}; 50 triples max convexity excess {worst_convex:.2e}; matched-feature gradient zero={vanish}"),
    )
}

fn by<'a>(rows: &'a [FinalRow], label: &str, st: f64) -> Vec<&'a FinalRow> {
    rows.iter().filter(|r| r.label == label && (r.stochasticity - st).abs() < 1e-12).collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criterion_5(rows: &[FinalRow]) -> Outcome {
    let mce0 = by(rows, "mce_tabular", 0.0);
    let v0 = mean(mce0.iter().map(|r| r.violation_rate));
    let r0 = mean(mce0.iter().map(|r| r.reward));
    let re = mean(mce0.iter().map(|r| r.expert_reward));
    let rel = (r0 - re).abs() / re.abs();
    let mut worst_rise = f64::NEG_INFINITY;
    for st in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let v = mean(by(rows, "mce_tabular", st).iter().map(|r| r.violation_rate));
        worst_rise = worst_rise.max(v - v0);
    }
    let (mce5, max5) = (by(rows, "mce_tabular", 0.5), by(rows, "maxent_baseline", 0.5));
    let wins = max5.iter().filter(|m| mce5.iter().any(|c| c.seed == m.seed && m.violation_rate > c.violation_rate)).count();
    let (a, b, c) = (v0 <= 0.05 && rel <= 0.15, worst_rise < 0.15, wins >= 4);
    outcome(
        a && b && c,
        format!(
            "st=0 violation {v0:.4}, reward {r0:.4} vs expert {re:.4} ({:.1}%) [{}]; max violation rise {worst_rise:.4} [{}]; maxent above MCE at 0.5 on {wins}/5 seeds [{}]",
            rel * 100.0,
            ok(a),
            ok(b),
            ok(c)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "fail"
    }
}

/// Linear-interpolation percentile of the sorted values.
fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Cells with at least one action whose multiplier is strictly above the
/// 75th percentile of all multipliers, scored against the constrained cells.
fn localization_overlap(lambda: &[f64], cfg: &ExperimentConfig) -> f64 {
    let threshold = percentile(lambda, 75.0);
    let na = lambda.len() / cfg.grid.num_states();
    let selected: BTreeSet<usize> = lambda.iter().enumerate().filter(|(_, &l)| l > threshold).map(|(i, _)| i / na).collect();
    let truth: BTreeSet<usize> = cfg.grid.constrained_cells.iter().map(|&c| cfg.grid.index(c)).collect();
    selected.intersection(&truth).count() as f64 / truth.len() as f64
}

fn criterion_6(cfg: &ExperimentConfig) -> Outcome {
    let mut overlaps = Vec::new();
    for cell in sweep_cells(cfg).into_iter().filter(|c| c.method == Method::MceTabular && c.stochasticity == 0.0) {
        let learned = LearnedCost::load(&cell.dir(&cfg.output_dir).join("lambda.json")).unwrap();
        let LearnedCost::OneHot { lambda, .. } = learned else { panic!("tabular run stores one-hot multipliers") };
        overlaps.push(localization_overlap(&lambda, cfg));
    }
    let hits = overlaps.iter().filter(|&&o| o >= 0.8).count();
    outcome(hits >= 4, format!("overlap per seed {overlaps:?}; {hits}/5 seeds ≥ 0.8"))
}

fn criterion_7(out: &Path) -> Outcome {
    let cfg = config("ablate_beta.json", out);
    let result = ablate_beta(&cfg).unwrap();
    assert!(result.failures.is_empty(), "{:?}", result.failures);
    let stats: Vec<(f64, f64, f64)> = cfg
        .ablation_betas
        .iter()
        .map(|&b| {
            let rows: Vec<&FinalRow> = result.rows.iter().filter(|r| r.beta == b).collect();
            (b, mean(rows.iter().map(|r| r.reward)), mean(rows.iter().map(|r| r.violation_rate)))
        })
        .collect();
    let best = stats.iter().copied().fold(stats[0], |acc, s| if s.1 > acc.1 { s } else { acc });
    let largest = *stats.last().unwrap();
    let (a, b) = (best.0 < largest.0, best.2 <= largest.2);
    let table: Vec<String> = stats.iter().map(|(b, r, v)| format!("{b:e}: R {r:.4} V {v:.4}")).collect();
    outcome(
        a && b,
        format!("sweep-averaged [{}]; best beta {:e} [{}]; violation at best ≤ at {:e} [{}]", table.join(", "), best.0, ok(a), largest.0, ok(b)),
    )
}

fn criterion_8(out: &Path) -> Outcome {
    let cfg = config("ablate_pretrain.json", out);
    let result = ablate_pretrain(&cfg).unwrap();
    assert!(result.failures.is_empty(), "{:?}", result.failures);
    let reward = |label: &str, seed: u64| result.rows.iter().find(|r| r.label == label && r.seed == seed).unwrap().reward;
    let wins = cfg.seeds.iter().filter(|&&s| reward("encoder_pretrained", s) >= reward("encoder_scratch", s)).count();
    let pairs: Vec<String> =
        cfg.seeds.iter().map(|&s| format!("{:.3}/{:.3}", reward("encoder_pretrained", s), reward("encoder_scratch", s))).collect();
    outcome(wins >= 3, format!("pretrained/scratch reward per seed [{}]; pretrained ≥ scratch on {wins}/5", pairs.join(", ")))
}

fn criterion_9(out: &Path) -> Outcome {
    let cfg = config("transfer.json", out);
    let trained = run_cells(&sweep_cells(&cfg), &cfg.output_dir).unwrap();
    assert!(trained.failures.is_empty(), "{:?}", trained.failures);
    let rows = transfer_experiment(&cfg).unwrap();
    let pass = rows.iter().all(|r| r.learned.violation_rate < 0.05 && r.learned.violation_rate < r.control.violation_rate);
    let per: Vec<String> = rows.iter().map(|r| format!("{:.3}/{:.3}", r.learned.violation_rate, r.control.violation_rate)).collect();
    outcome(pass, format!("goal {:?}: learned/control violation per seed [{}]", cfg.transfer.as_ref().unwrap().alt_goal, per.join(", ")))
}

fn csv_files(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<(PathBuf, Vec<u8>)> = walkdir::WalkDir::new(root)
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .map(|e| (e.path().strip_prefix(root).unwrap().to_path_buf(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_10(first: &Path, out: &Path) -> Outcome {
    let cfg = config("gridworld.json", out);
    run_experiment(&cfg).unwrap();
    let (a, b) = (csv_files(first), csv_files(out));
    let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x == y);
    outcome(same && !a.is_empty(), format!("{} CSV files compared, identical={same}", a.len()))
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut unexpected = Vec::new();
    let mut report = |n: u32, start: Instant, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(&n) { " (known failure)" } else { "" };
        println!("criterion {n:>2}: {tag}{note} [{:.1}s] {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass && !KNOWN_FAILURES.contains(&n) {
            unexpected.push(n);
        }
    };

    let t = Instant::now();
    report(1, t, criterion_1());
    let t = Instant::now();
    report(2, t, criterion_2());
    let t = Instant::now();
    report(3, t, criterion_3());
    let t = Instant::now();
    report(4, t, criterion_4());

    let t = Instant::now();
    let headline = config("gridworld.json", &root.join("headline"));
    let result = run_experiment(&headline).unwrap();
    let failed = !result.failures.is_empty();
    report(5, t, if failed { outcome(false, format!("failed cells: {:?}", result.failures)) } else { criterion_5(&result.rows) });
    let t = Instant::now();
    report(6, t, criterion_6(&headline));
    let t = Instant::now();
    report(7, t, criterion_7(&root.join("beta")));
    let t = Instant::now();
    report(8, t, criterion_8(&root.join("pretrain")));
    let t = Instant::now();
    report(9, t, criterion_9(&root.join("transfer")));
    let t = Instant::now();
    report(10, t, criterion_10(&headline.output_dir, &root.join("repeat")));

    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
