//! Scenario files: TOML documents with `[building]`, `[profiles]`,
//! `[simulation]`, `[controller]` and `[training]` sections. Every key is
//! optional and falls back to the reference building and daily profiles.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::ControllerSettings;
use crate::error::ConfigError;
use crate::plant::{BuildingParams, Profiles, ZoneState};
use crate::psychro;
use crate::rl::PpoConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    pub t_air: f64,
    pub t_wall: f64,
    pub co2: f64,
    /// Indoor relative humidity in %, used when `w` is absent.
    pub rh: f64,
    /// Indoor humidity ratio, kg/kg; overrides `rh`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

impl Default for InitialConditions {
    fn default() -> Self {
        Self {
            t_air: 25.0,
            t_wall: 25.0,
            co2: 400.0,
            rh: 50.0,
            w: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSettings {
    /// Physics step, s.
    pub dt: f64,
    /// Episode length, s.
    pub duration: f64,
    /// Leading window excluded from comfort and CO₂ statistics, s.
    pub warmup_s: f64,
    pub seed: u64,
    pub initial: InitialConditions,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            dt: 1.0,
            duration: 86_400.0,
            warmup_s: 3600.0,
            seed: 42,
            initial: InitialConditions::default(),
        }
    }
}

impl SimulationSettings {
    /// Number of physics steps in one episode.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub building: BuildingParams,
    pub profiles: Profiles,
    pub simulation: SimulationSettings,
    pub controller: ControllerSettings,
    pub training: PpoConfig,
}

fn is_whole_multiple(value: f64, unit: f64) -> bool {
    let n = (value / unit).round();
    n >= 1.0 && (n * unit - value).abs() <= 1e-9 * value.abs().max(1.0)
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Fully resolved scenario as TOML, every default spelled out.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// SHA-256 of the resolved TOML, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.building.validate()?;
        self.profiles.validate()?;
        self.controller.validate()?;
        self.training.validate()?;
        let sim = &self.simulation;
        if !(sim.dt > 0.0 && sim.dt.is_finite()) {
            return Err(ConfigError::invalid("simulation.dt", "must be positive"));
        }
        if !(sim.duration > 0.0) || !is_whole_multiple(sim.duration, sim.dt) {
            return Err(ConfigError::invalid("simulation.duration", "must be a positive whole multiple of dt"));
        }
        if !(sim.warmup_s >= 0.0 && sim.warmup_s < sim.duration) {
            return Err(ConfigError::invalid("simulation.warmup_s", "must lie in [0, duration)"));
        }
        if !is_whole_multiple(self.training.control_interval_s, sim.dt) {
            return Err(ConfigError::invalid(
                "training.control_interval_s",
                "must be a positive whole multiple of simulation.dt",
            ));
        }
        let init = &sim.initial;
        if !(init.co2 >= self.building.co2_out) {
            return Err(ConfigError::invalid("simulation.initial.co2", "must be at least building.co2_out"));
        }
        for (name, v) in [("t_air", init.t_air), ("t_wall", init.t_wall)] {
            if !(psychro::T_MIN..=psychro::T_MAX).contains(&v) {
                return Err(ConfigError::invalid(format!("simulation.initial.{name}"), "outside [-40, 60] °C"));
            }
        }
        self.initial_state()?;
        Ok(())
    }

    pub fn initial_state(&self) -> Result<ZoneState, ConfigError> {
        let init = &self.simulation.initial;
        let w = match init.w {
            Some(w) if w >= 0.0 && w.is_finite() => w,
            Some(w) => return Err(ConfigError::invalid("simulation.initial.w", format!("invalid humidity ratio {w}"))),
            None => psychro::humidity_ratio(init.t_air, init.rh, self.building.p_atm)
                .map_err(|e| ConfigError::invalid("simulation.initial.rh", e.to_string()))?,
        };
        Ok(ZoneState {
            t_air: init.t_air,
            t_wall: init.t_wall,
            w,
            co2: init.co2,
            energy_j: 0.0,
        })
    }

    /// Number of physics steps per agent decision.
    pub fn substeps_per_action(&self) -> usize {
        (self.training.control_interval_s / self.simulation.dt).round() as usize
    }
}
