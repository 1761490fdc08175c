//! Gridworld navigation with location constraints.
//!
//! Cells are `(x, y)` with `x` the column and `y` the row; the state index is
//! `y * width + x`. Row 0 is printed first by [`render_cost_map`].

use std::collections::BTreeSet;

use cmdp_core::{CmdpError, TabularCmdp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Cell = (usize, usize);

#[derive(Debug, Error)]
pub enum GridError {
    #[error("{what} {cell:?} is outside the {width}x{height} grid")]
    OutOfBounds {
        what: &'static str,
        cell: Cell,
        width: usize,
        height: usize,
    },
    #[error("{0} cell may not be constrained")]
    ConstrainedEndpoint(&'static str),
    #[error("start and goal coincide")]
    StartIsGoal,
    #[error("stochasticity {0} outside [0, 1]")]
    Stochasticity(f64),
    #[error("grid must have at least one cell")]
    Empty,
    #[error("cost table has {got} entries, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error(transparent)]
    Cmdp(#[from] CmdpError),
}

pub type Result<T> = std::result::Result<T, GridError>;

/// Actions in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }
}

pub const NUM_ACTIONS: usize = 4;

fn default_step_reward() -> f64 {
    -1.0
}

fn default_goal_reward() -> f64 {
    1.0
}

fn default_horizon() -> usize {
    200
}

fn default_gamma() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub start: Cell,
    pub goal: Cell,
    pub constrained_cells: BTreeSet<Cell>,
    #[serde(default)]
    pub stochasticity: f64,
    #[serde(default = "default_step_reward")]
    pub step_reward: f64,
    #[serde(default = "default_goal_reward")]
    pub goal_reward: f64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Discount of the compiled CMDP.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl GridSpec {
    /// 7x7 grid with a vertical band of constrained cells in column 3 covering
    /// rows 1..=5. Start and goal sit on row 3 at opposite sides, so the
    /// shortest unconstrained route detours through row 0 or row 6.
    pub fn default_layout() -> Self {
        Self {
            width: 7,
            height: 7,
            start: (0, 3),
            goal: (6, 3),
            constrained_cells: (1..=5).map(|y| (3, y)).collect(),
            stochasticity: 0.0,
            step_reward: default_step_reward(),
            goal_reward: default_goal_reward(),
            horizon: default_horizon(),
            gamma: default_gamma(),
        }
    }

    pub fn with_stochasticity(&self, stochasticity: f64) -> Self {
        Self { stochasticity, ..self.clone() }
    }

    pub fn num_states(&self) -> usize {
        self.width * self.height
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.1 * self.width + cell.0
    }

    pub fn cell(&self, index: usize) -> Cell {
        (index % self.width, index / self.width)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.0 < self.width && cell.1 < self.height
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(GridError::Empty);
        }
        let check = |what: &'static str, cell: Cell| {
            if self.in_bounds(cell) {
                Ok(())
            } else {
                Err(GridError::OutOfBounds { what, cell, width: self.width, height: self.height })
            }
        };
        check("start", self.start)?;
        check("goal", self.goal)?;
        for &c in &self.constrained_cells {
            check("constrained cell", c)?;
        }
        if self.start == self.goal {
            return Err(GridError::StartIsGoal);
        }
        if self.constrained_cells.contains(&self.start) {
            return Err(GridError::ConstrainedEndpoint("start"));
        }
        if self.constrained_cells.contains(&self.goal) {
            return Err(GridError::ConstrainedEndpoint("goal"));
        }
        if !(0.0..=1.0).contains(&self.stochasticity) {
            return Err(GridError::Stochasticity(self.stochasticity));
        }
        Ok(())
    }

    /// Cell reached by `action`, staying put when blocked by a wall.
    pub fn step(&self, cell: Cell, action: Action) -> Cell {
        let (dx, dy) = action.delta();
        let x = cell.0 as isize + dx;
        let y = cell.1 as isize + dy;
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            cell
        } else {
            (x as usize, y as usize)
        }
    }

    /// Von Neumann neighbors that exist inside the grid.
    pub fn neighbors(&self, cell: Cell) -> Vec<Cell> {
        Action::ALL.iter().map(|&a| self.step(cell, a)).filter(|&c| c != cell).collect()
    }

    /// Reward table with the goal moved to `goal`; used for reward-swap transfer.
    pub fn with_goal(&self, goal: Cell) -> Self {
        Self { goal, ..self.clone() }
    }
}

/// Compiles the grid into a CMDP with 4 actions and an absorbing goal.
pub fn compile(spec: &GridSpec) -> Result<TabularCmdp> {
    spec.validate()?;
    let ns = spec.num_states();
    let na = NUM_ACTIONS;
    let goal = spec.index(spec.goal);
    let mut transition = vec![0.0; ns * na * ns];
    let mut reward = vec![0.0; ns * na];
    let mut cost = vec![0.0; ns * na];
    for s in 0..ns {
        let cell = spec.cell(s);
        for (a, &action) in Action::ALL.iter().enumerate() {
            let row = &mut transition[(s * na + a) * ns..(s * na + a + 1) * ns];
            if s == goal {
                row[s] = 1.0;
                continue;
            }
            row[spec.index(spec.step(cell, action))] += 1.0 - spec.stochasticity;
            if spec.stochasticity > 0.0 {
                let nb = spec.neighbors(cell);
                let share = spec.stochasticity / nb.len() as f64;
                for c in nb {
                    row[spec.index(c)] += share;
                }
            }
            let p_goal = row[goal];
            reward[s * na + a] = spec.step_reward * (1.0 - p_goal) + spec.goal_reward * p_goal;
            if spec.constrained_cells.contains(&cell) {
                cost[s * na + a] = 1.0;
            }
        }
    }
    let mut init = vec![0.0; ns];
    init[spec.index(spec.start)] = 1.0;
    Ok(TabularCmdp::new(ns, na, transition, reward, cost, init, spec.gamma, spec.horizon, 0.0, vec![goal])?)
}

/// ASCII cost map: per cell the max-over-actions cost, bucketed by its
/// fraction of the largest cell cost into `.`, `-`, `+`, `#`. Start and goal
/// are drawn as `I` and `O`.
pub fn render_cost_map(cost: &[f64], spec: &GridSpec) -> Result<String> {
    let expected = spec.num_states() * NUM_ACTIONS;
    if cost.len() != expected {
        return Err(GridError::Dimension { got: cost.len(), expected });
    }
    let cell_cost: Vec<f64> = cost.chunks(NUM_ACTIONS).map(|r| r.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).collect();
    let top = cell_cost.iter().cloned().fold(0.0, f64::max);
    let mut out = String::with_capacity((spec.width + 1) * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let ch = if (x, y) == spec.start {
                'I'
            } else if (x, y) == spec.goal {
                'O'
            } else {
                bucket(cell_cost[spec.index((x, y))], top)
            };
            out.push(ch);
        }
        out.push('\n');
    }
    Ok(out)
}

fn bucket(c: f64, top: f64) -> char {
    if top <= 0.0 {
        return '.';
    }
    let f = c / top;
    if f >= 0.75 {
        '#'
    } else if f >= 0.5 {
        '+'
    } else if f >= 0.25 {
        '-'
    } else {
        '.'
    }
}
