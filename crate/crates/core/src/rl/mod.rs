//! Proximal policy optimisation for the supply fan.

pub mod env;
pub mod gae;
pub mod nn;
pub mod policy;
pub mod ppo;

pub use env::{Action, EnvStep, HvacEnv, Observation};
pub use policy::{Policy, PolicyError, PolicyMetadata};
pub use ppo::{ppo_train, PpoConfig, ProgressRecord, TrainError, TrainOutcome};
