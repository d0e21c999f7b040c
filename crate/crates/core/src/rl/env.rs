//! Gym-style environment around the closed loop: observation, reward and an
//! agent step spanning one control interval.

use rand::Rng;

use crate::control::Mode;
use crate::error::{ConfigError, Result};
use crate::plant::{BuildingParams, ZoneState};
use crate::scenario::Scenario;
use crate::sim::ClosedLoop;

pub const OBS_DIM: usize = 2;

/// Agent observation: indoor temperature and the setpoint error
/// `T_set - T_air`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t_air: f64,
    pub error: f64,
}

impl Observation {
    pub fn new(t_air: f64, t_set: f64) -> Self {
        Self {
            t_air,
            error: t_set - t_air,
        }
    }

    pub fn features(&self) -> [f64; OBS_DIM] {
        [self.t_air, self.error]
    }
}

pub fn observe(s: &ZoneState, p: &BuildingParams) -> Observation {
    Observation::new(s.t_air, p.t_set)
}

/// Clips a raw policy output to a fan fraction.
pub fn clip_action(raw: f64) -> f64 {
    raw.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    /// Unbounded policy output.
    pub raw: f64,
    /// Fan fraction in `[0, 1]`.
    pub u: f64,
}

impl Action {
    pub fn from_raw(raw: f64) -> Self {
        Self { raw, u: clip_action(raw) }
    }
}

/// Negative squared setpoint error.
pub fn reward(t_air: f64, p: &BuildingParams) -> f64 {
    let e = t_air - p.t_set;
    -(e * e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvStep {
    pub state: ZoneState,
    pub observation: Observation,
    /// Mean of the per-physics-step rewards over the interval.
    pub reward: f64,
    /// The episode reached its configured duration.
    pub done: bool,
}

/// Training environment. One agent step holds the fan fraction for
/// `control_interval_s` of physics while ventilation logic is re-resolved at
/// every physics step.
pub struct HvacEnv<'a> {
    scenario: &'a Scenario,
    mode: Mode,
    inner: ClosedLoop<'a>,
    substeps: usize,
    episode_steps: u64,
}

impl<'a> HvacEnv<'a> {
    pub fn new(scenario: &'a Scenario, mode: Mode) -> Result<Self> {
        if !mode.is_learned() {
            return Err(ConfigError::invalid("mode", format!("{mode} is not a learned control mode")).into());
        }
        Ok(Self {
            scenario,
            mode,
            inner: ClosedLoop::new(scenario, mode)?,
            substeps: scenario.substeps_per_action(),
            episode_steps: scenario.simulation.steps() as u64,
        })
    }

    /// Agent steps per episode.
    pub fn episode_length(&self) -> usize {
        (self.episode_steps as usize).div_ceil(self.substeps)
    }

    pub fn observation(&self) -> Observation {
        observe(self.inner.state(), &self.scenario.building)
    }

    pub fn state(&self) -> &ZoneState {
        self.inner.state()
    }

    /// Restarts the episode. With phase randomisation enabled the daily
    /// profiles are shifted by a uniformly drawn offset.
    pub fn reset<R: Rng>(&mut self, rng: &mut R) -> Result<Observation> {
        let profiles = if self.scenario.training.phase_randomization {
            let period = self.scenario.profiles.t_out.period_s;
            self.scenario.profiles.shifted(rng.gen_range(0.0..period))
        } else {
            self.scenario.profiles.clone()
        };
        self.inner = ClosedLoop::with_profiles(self.scenario, self.mode, profiles)?;
        Ok(self.observation())
    }

    pub fn step(&mut self, u: f64) -> Result<EnvStep> {
        let p = &self.scenario.building;
        let mut total = 0.0;
        let mut n = 0;
        while n < self.substeps && self.inner.steps_taken() < self.episode_steps {
            let rec = self.inner.step(Some(clip_action(u)))?;
            total += reward(rec.after.t_air, p);
            n += 1;
        }
        Ok(EnvStep {
            state: *self.inner.state(),
            observation: self.observation(),
            reward: if n > 0 { total / n as f64 } else { 0.0 },
            done: self.inner.steps_taken() >= self.episode_steps,
        })
    }
}
