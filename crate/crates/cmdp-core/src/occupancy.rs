use crate::cmdp::TabularCmdp;
use crate::features::FeatureMap;
use crate::policy::TabularPolicy;

/// Discounted state occupancy `ρ(t, s)` for `t = 0 .. horizon - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure {
    pub horizon: usize,
    pub num_states: usize,
    pub rho: Vec<f64>,
}

impl OccupancyMeasure {
    pub fn at(&self, t: usize, s: usize) -> f64 {
        self.rho[t * self.num_states + s]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.rho[t * self.num_states..(t + 1) * self.num_states]
    }

    /// `Σ_t ρ(t, s)`.
    pub fn state_totals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_states];
        for t in 0..self.horizon {
            for (o, r) in out.iter_mut().zip(self.row(t)) {
                *o += r;
            }
        }
        out
    }
}

/// Forward DP `ρ(t+1, s') = γ Σ_{s,a} ρ(t, s) π(a|s) p(s'|s,a)`.
///
/// Absorbing states keep their mass here; the expectations below skip them.
pub fn occupancy(policy: &TabularPolicy, cmdp: &TabularCmdp) -> OccupancyMeasure {
    let ns = cmdp.num_states();
    let horizon = cmdp.horizon();
    let mut rho = vec![0.0; horizon * ns];
    if horizon > 0 {
        rho[..ns].copy_from_slice(cmdp.initial_dist());
    }
    for t in 1..horizon {
        let (prev, cur) = rho.split_at_mut(t * ns);
        let prev = &prev[(t - 1) * ns..];
        let cur = &mut cur[..ns];
        push_forward(policy, cmdp, prev, cur, cmdp.gamma());
    }
    OccupancyMeasure { horizon, num_states: ns, rho }
}

fn push_forward(policy: &TabularPolicy, cmdp: &TabularCmdp, prev: &[f64], cur: &mut [f64], scale: f64) {
    for (s, &mass) in prev.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for a in 0..cmdp.num_actions() {
            let w = scale * mass * policy.prob(s, a);
            if w == 0.0 {
                continue;
            }
            for &(next, p) in cmdp.successors(s, a) {
                cur[next] += w * p;
            }
        }
    }
}

/// Discounted state-action visitation `d(s, a) = Σ_t ρ(t, s) π(a|s)`, zero on
/// absorbing states.
pub fn state_action_occupancy(policy: &TabularPolicy, cmdp: &TabularCmdp) -> Vec<f64> {
    let totals = occupancy(policy, cmdp).state_totals();
    let na = cmdp.num_actions();
    let mut d = vec![0.0; cmdp.num_pairs()];
    for (s, &mass) in totals.iter().enumerate() {
        if cmdp.is_absorbing(s) {
            continue;
        }
        for a in 0..na {
            d[s * na + a] = mass * policy.prob(s, a);
        }
    }
    d
}

/// `E_π[Σ_t γ^t φ(s_t, a_t)]` over the horizon.
pub fn expected_features_exact(policy: &TabularPolicy, cmdp: &TabularCmdp, phi: &FeatureMap) -> Vec<f64> {
    let d = state_action_occupancy(policy, cmdp);
    let na = cmdp.num_actions();
    let mut out = vec![0.0; phi.dim()];
    for (i, &w) in d.iter().enumerate() {
        if w != 0.0 {
            phi.add_scaled(i / na, i % na, w, &mut out);
        }
    }
    out
}

/// `E_π[Σ_t γ^t table(s_t, a_t)]` for a row-major `(s, a)` table.
pub fn expected_table_exact(policy: &TabularPolicy, cmdp: &TabularCmdp, table: &[f64]) -> f64 {
    state_action_occupancy(policy, cmdp).iter().zip(table).map(|(d, x)| d * x).sum()
}

/// Discounted causal entropy `Σ_t Σ_s ρ(t, s) H(π(·|s))`, with `0 log 0 = 0`.
pub fn causal_entropy_exact(policy: &TabularPolicy, cmdp: &TabularCmdp) -> f64 {
    let totals = occupancy(policy, cmdp).state_totals();
    totals
        .iter()
        .enumerate()
        .filter(|&(s, _)| !cmdp.is_absorbing(s))
        .map(|(s, &mass)| {
            let h: f64 = policy.row(s).iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
            mass * h
        })
        .sum()
}

/// Undiscounted probability that a rollout takes at least one positive-cost
/// step within the horizon.
pub fn violation_probability(policy: &TabularPolicy, cmdp: &TabularCmdp) -> f64 {
    let ns = cmdp.num_states();
    let na = cmdp.num_actions();
    let mut mass = cmdp.initial_dist().to_vec();
    let mut next = vec![0.0; ns];
    let mut total = 0.0;
    for _ in 0..cmdp.horizon() {
        next.iter_mut().for_each(|x| *x = 0.0);
        for s in 0..ns {
            let m = mass[s];
            if m == 0.0 || cmdp.is_absorbing(s) {
                continue;
            }
            for a in 0..na {
                let w = m * policy.prob(s, a);
                if w == 0.0 {
                    continue;
                }
                if cmdp.true_cost(s, a) > 0.0 {
                    total += w;
                    continue;
                }
                for &(n, p) in cmdp.successors(s, a) {
                    next[n] += w * p;
                }
            }
        }
        std::mem::swap(&mut mass, &mut next);
    }
    total
}
