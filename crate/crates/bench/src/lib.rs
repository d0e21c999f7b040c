//! Shared fixtures for the benchmarks.

use ahu_core::rl::PolicyMetadata;
use ahu_core::{Policy, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Nominal scenario shortened to `duration` seconds.
pub fn scenario(duration: f64) -> Scenario {
    let mut sc = Scenario::default();
    sc.simulation.duration = duration;
    sc.simulation.warmup_s = 0.0;
    sc
}

/// Freshly initialised policy with the default network size.
pub fn policy(seed: u64) -> Policy {
    let cfg = ahu_core::PpoConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Policy::init(&cfg.hidden, cfg.initial_log_std, PolicyMetadata::new(seed, 0), &mut rng)
}
