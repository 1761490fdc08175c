//! Shared tabular CMDP machinery: the environment model, trajectories,
//! feature maps, occupancy measures and exact expectations under a policy.

pub mod cmdp;
pub mod error;
pub mod features;
pub mod occupancy;
pub mod policy;
pub mod random;
pub mod rng;
pub mod trajectory;

pub use cmdp::TabularCmdp;
pub use error::{CmdpError, Result};
pub use features::{FeatureMap, FeatureMode};
pub use occupancy::{
    causal_entropy_exact, expected_features_exact, expected_table_exact, occupancy,
    state_action_occupancy, violation_probability, OccupancyMeasure,
};
pub use policy::TabularPolicy;
pub use rng::{sample_index, seeded_rng};
pub use trajectory::{
    discounted_trajectory_return, sample_trajectory, trajectory_features, undiscounted_return,
    Trajectory,
};

/// Row normalization tolerance used by every constructor.
pub const NORM_TOL: f64 = 1e-12;
