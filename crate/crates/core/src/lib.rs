//! Simulation and control of a single-zone air handling unit: moist-air
//! properties, a lumped thermal plant, baseline controllers, a PPO agent and
//! an evaluation harness.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod harness;
pub mod plant;
pub mod psychro;
pub mod rl;
pub mod scenario;
pub mod sim;

pub use control::{ControlCommand, ControllerSettings, Mode};
pub use error::{ConfigError, Error, Result};
pub use harness::{compare, run_episode, ComparisonReport, Episode, EpisodeMetrics, TrajectoryRow};
pub use plant::{BuildingParams, Exogenous, Profiles, ZoneState};
pub use rl::{ppo_train, Policy, PpoConfig, TrainOutcome};
pub use scenario::Scenario;
