use serde::{Deserialize, Serialize};

use crate::error::{CmdpError, Result};
use crate::NORM_TOL;

/// Complete tabular environment model.
///
/// Tables indexed `(s, a)` are stored row-major with stride `num_actions`;
/// the transition tensor `(s, a, s')` has stride `num_actions * num_states`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CmdpDoc", into = "CmdpDoc")]
pub struct TabularCmdp {
    num_states: usize,
    num_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    true_cost: Vec<f64>,
    initial_dist: Vec<f64>,
    gamma: f64,
    horizon: usize,
    budget: f64,
    absorbing: Vec<usize>,
    successors: Vec<Vec<(usize, f64)>>,
    is_absorbing: Vec<bool>,
}

/// Raw constructor arguments, also the JSON document layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmdpDoc {
    pub num_states: usize,
    pub num_actions: usize,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
    pub true_cost: Vec<Vec<f64>>,
    pub initial_dist: Vec<f64>,
    pub gamma: f64,
    pub horizon: usize,
    #[serde(default)]
    pub budget: f64,
    #[serde(default)]
    pub absorbing: Vec<usize>,
}

impl TabularCmdp {
    /// Builds and validates a CMDP from flat row-major tables.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        true_cost: Vec<f64>,
        initial_dist: Vec<f64>,
        gamma: f64,
        horizon: usize,
        budget: f64,
        absorbing: Vec<usize>,
    ) -> Result<Self> {
        let (ns, na) = (num_states, num_actions);
        check_len("transition", transition.len(), ns * na * ns)?;
        check_len("reward", reward.len(), ns * na)?;
        check_len("true_cost", true_cost.len(), ns * na)?;
        check_len("initial_dist", initial_dist.len(), ns)?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(CmdpError::Discount(gamma));
        }
        if !(budget >= 0.0) {
            return Err(CmdpError::Budget(budget));
        }

        let mut successors = Vec::with_capacity(ns * na);
        for s in 0..ns {
            for a in 0..na {
                let row = &transition[(s * na + a) * ns..(s * na + a + 1) * ns];
                let mut sum = 0.0;
                let mut succ = Vec::new();
                for (next, &p) in row.iter().enumerate() {
                    if !(0.0..=1.0 + NORM_TOL).contains(&p) {
                        return Err(CmdpError::TransitionValue { state: s, action: a, value: p });
                    }
                    if p > 0.0 {
                        succ.push((next, p));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > NORM_TOL {
                    return Err(CmdpError::TransitionRow { state: s, action: a, sum });
                }
                successors.push(succ);
                let r = reward[s * na + a];
                if !r.is_finite() {
                    return Err(CmdpError::Reward { state: s, action: a });
                }
                let c = true_cost[s * na + a];
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(CmdpError::Cost { state: s, action: a, value: c });
                }
            }
        }

        let mut init_sum = 0.0;
        for &p in &initial_dist {
            if !(0.0..=1.0 + NORM_TOL).contains(&p) {
                return Err(CmdpError::InitialValue(p));
            }
            init_sum += p;
        }
        if (init_sum - 1.0).abs() > NORM_TOL {
            return Err(CmdpError::InitialDist(init_sum));
        }

        let mut is_absorbing = vec![false; ns];
        for &s in &absorbing {
            if s >= ns {
                return Err(CmdpError::Absorbing { state: s, reason: "index out of range" });
            }
            is_absorbing[s] = true;
            for a in 0..na {
                if transition[(s * na + a) * ns + s] != 1.0 {
                    return Err(CmdpError::Absorbing { state: s, reason: "must self-transition with probability 1" });
                }
                if reward[s * na + a] != 0.0 || true_cost[s * na + a] != 0.0 {
                    return Err(CmdpError::Absorbing { state: s, reason: "must have zero reward and cost" });
                }
            }
        }
        let mut absorbing = absorbing;
        absorbing.sort_unstable();
        absorbing.dedup();

        Ok(Self {
            num_states,
            num_actions,
            transition,
            reward,
            true_cost,
            initial_dist,
            gamma,
            horizon,
            budget,
            absorbing,
            successors,
            is_absorbing,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_pairs(&self) -> usize {
        self.num_states * self.num_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn absorbing(&self) -> &[usize] {
        &self.absorbing
    }

    pub fn is_absorbing(&self, s: usize) -> bool {
        self.is_absorbing[s]
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    /// Flat `(s, a)` reward table.
    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    /// Flat `(s, a)` ground-truth cost table.
    pub fn cost_table(&self) -> &[f64] {
        &self.true_cost
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.num_actions + a]
    }

    pub fn true_cost(&self, s: usize, a: usize) -> f64 {
        self.true_cost[s * self.num_actions + a]
    }

    pub fn transition(&self, s: usize, a: usize, next: usize) -> f64 {
        self.transition[(s * self.num_actions + a) * self.num_states + next]
    }

    /// Nonzero entries of the transition row `p(· | s, a)`.
    pub fn successors(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.successors[s * self.num_actions + a]
    }

    /// Same dynamics with a different reward table.
    pub fn with_reward(&self, reward: Vec<f64>) -> Result<Self> {
        Self::new(
            self.num_states,
            self.num_actions,
            self.transition.clone(),
            reward,
            self.true_cost.clone(),
            self.initial_dist.clone(),
            self.gamma,
            self.horizon,
            self.budget,
            self.absorbing.clone(),
        )
    }

    pub fn check_index(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.num_states || a >= self.num_actions {
            return Err(CmdpError::Index {
                state: s,
                action: a,
                num_states: self.num_states,
                num_actions: self.num_actions,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(CmdpError::Shape { what, got, expected });
    }
    Ok(())
}

impl TryFrom<CmdpDoc> for TabularCmdp {
    type Error = CmdpError;

    fn try_from(doc: CmdpDoc) -> Result<Self> {
        let (ns, na) = (doc.num_states, doc.num_actions);
        check_len("transition", doc.transition.len(), ns)?;
        check_len("reward", doc.reward.len(), ns)?;
        check_len("true_cost", doc.true_cost.len(), ns)?;
        let mut transition = Vec::with_capacity(ns * na * ns);
        for rows in &doc.transition {
            check_len("transition[s]", rows.len(), na)?;
            for row in rows {
                check_len("transition[s][a]", row.len(), ns)?;
                transition.extend_from_slice(row);
            }
        }
        let flatten = |what: &'static str, table: &[Vec<f64>]| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(ns * na);
            for row in table {
                check_len(what, row.len(), na)?;
                out.extend_from_slice(row);
            }
            Ok(out)
        };
        let reward = flatten("reward[s]", &doc.reward)?;
        let true_cost = flatten("true_cost[s]", &doc.true_cost)?;
        TabularCmdp::new(
            ns,
            na,
            transition,
            reward,
            true_cost,
            doc.initial_dist,
            doc.gamma,
            doc.horizon,
            doc.budget,
            doc.absorbing,
        )
    }
}

impl From<TabularCmdp> for CmdpDoc {
    fn from(m: TabularCmdp) -> Self {
        let (ns, na) = (m.num_states, m.num_actions);
        let transition = (0..ns)
            .map(|s| {
                (0..na)
                    .map(|a| m.transition[(s * na + a) * ns..(s * na + a + 1) * ns].to_vec())
                    .collect()
            })
            .collect();
        let nest = |t: &[f64]| t.chunks(na.max(1)).map(|r| r.to_vec()).collect::<Vec<_>>();
        CmdpDoc {
            num_states: ns,
            num_actions: na,
            transition,
            reward: nest(&m.reward),
            true_cost: nest(&m.true_cost),
            initial_dist: m.initial_dist,
            gamma: m.gamma,
            horizon: m.horizon,
            budget: m.budget,
            absorbing: m.absorbing,
        }
    }
}
