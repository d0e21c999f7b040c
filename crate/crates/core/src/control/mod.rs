//! AHU controllers and the ventilation logic that turns a controller output
//! into a physical airflow command.

mod economizer;
mod pid;
mod thermostat;
mod ventilation;

pub use economizer::{economizer_fresh_fraction, economizer_update, EconomizerSettings, EconomizerState};
pub use pid::{pid_update, PidGains, PidState};
pub use thermostat::{thermostat_update, ThermostatState};
pub use ventilation::{adjusted_supply_temp, dcv_min_fresh_flow, hierarchical_flow, FlowSplit, VentilationFloor};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error};
use crate::plant::{BuildingParams, Exogenous, ZoneState};
use crate::psychro::MoistAirPoint;

/// Airflow and supply conditions applied to the zone over one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlCommand {
    /// Supply airflow, m³/s.
    pub v_total: f64,
    /// Outdoor part of the supply airflow, m³/s.
    pub v_fresh: f64,
    /// `v_fresh / v_total`, or 0 with no flow.
    pub alpha: f64,
    /// Temperature of the air delivered to the zone, °C.
    pub t_supply_eff: f64,
}

impl ControlCommand {
    pub fn off(t_air: f64) -> Self {
        Self {
            v_total: 0.0,
            v_fresh: 0.0,
            alpha: 0.0,
            t_supply_eff: t_air,
        }
    }

    fn with_fraction(v_total: f64, alpha: f64, t_supply_eff: f64) -> Self {
        let alpha = if v_total > 0.0 { alpha } else { 0.0 };
        Self {
            v_total,
            v_fresh: alpha * v_total,
            alpha,
            t_supply_eff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Hysteresis thermostat, fixed damper.
    #[serde(rename = "onoff")]
    OnOff,
    /// PID fan modulation, fixed damper.
    #[serde(rename = "pid")]
    Pid,
    /// Learned fan policy with the ventilation floor, fixed damper.
    #[serde(rename = "ppo")]
    PpoFixed,
    /// Learned fan policy with demand-controlled ventilation and an enthalpy
    /// economizer.
    #[serde(rename = "ppo-econ")]
    PpoEcon,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::OnOff, Mode::Pid, Mode::PpoFixed, Mode::PpoEcon];

    pub fn name(self) -> &'static str {
        match self {
            Mode::OnOff => "onoff",
            Mode::Pid => "pid",
            Mode::PpoFixed => "ppo",
            Mode::PpoEcon => "ppo-econ",
        }
    }

    pub fn is_learned(self) -> bool {
        matches!(self, Mode::PpoFixed | Mode::PpoEcon)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ConfigError::UnknownMode(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermostatSettings {
    /// Full hysteresis width around the setpoint, °C.
    pub differential: f64,
}

impl Default for ThermostatSettings {
    fn default() -> Self {
        Self { differential: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSettings {
    pub mode: Mode,
    pub ventilation_floor: VentilationFloor,
    pub pid: PidGains,
    pub thermostat: ThermostatSettings,
    pub economizer: EconomizerSettings,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        Self {
            mode: Mode::Pid,
            ventilation_floor: VentilationFloor::AlphaScaled,
            pid: PidGains::default(),
            thermostat: ThermostatSettings::default(),
            economizer: EconomizerSettings::default(),
        }
    }
}

impl ControllerSettings {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.pid;
        for (name, v) in [("kp", g.kp), ("ki", g.ki), ("kd", g.kd)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(format!("controller.pid.{name}"), "must be non-negative and finite"));
            }
        }
        if !(self.thermostat.differential >= 0.0) {
            return Err(ConfigError::invalid("controller.thermostat.differential", "must be non-negative"));
        }
        if !(self.economizer.deadband_j_per_kg >= 0.0) {
            return Err(ConfigError::invalid("controller.economizer.deadband_j_per_kg", "must be non-negative"));
        }
        Ok(())
    }
}

/// A resolved command plus the bookkeeping produced while resolving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub command: ControlCommand,
    pub economizer: EconomizerState,
    /// The ventilation floor could not be met within the fan capacity.
    pub shortfall: bool,
}

/// Turns a controller output `u ∈ [0, 1]` into an airflow command for `mode`.
///
/// Baselines drive the fan directly at the fixed damper position with no
/// ventilation floor. Learned modes get the occupancy floor and a supply
/// temperature that keeps zone cooling equal to `u · V_max` at the nominal
/// coil temperature.
#[allow(clippy::too_many_arguments)]
pub fn resolve_command(
    mode: Mode,
    u: f64,
    state: &ZoneState,
    exo: &Exogenous,
    w_outdoor: f64,
    economizer: EconomizerState,
    settings: &ControllerSettings,
    p: &BuildingParams,
) -> Result<Resolution, Error> {
    let u = u.clamp(0.0, 1.0);
    match mode {
        Mode::OnOff | Mode::Pid => Ok(Resolution {
            command: ControlCommand::with_fraction(u * p.v_max, p.alpha_fixed, p.t_supply_nominal),
            economizer,
            shortfall: false,
        }),
        Mode::PpoFixed => {
            let flow = hierarchical_flow(u, exo.n_occ, p.alpha_fixed, settings.ventilation_floor, p)?;
            let t_supply = adjusted_supply_temp(state.t_air, flow.v_agent, flow.v_total, p);
            Ok(Resolution {
                command: ControlCommand::with_fraction(flow.v_total, p.alpha_fixed, t_supply),
                economizer,
                shortfall: flow.shortfall,
            })
        }
        Mode::PpoEcon => {
            // With a demand-sized damper the fresh part equals the requirement
            // whenever total flow covers it, so the floor is the requirement.
            let flow = hierarchical_flow(u, exo.n_occ, 1.0, VentilationFloor::AllFresh, p)?;
            let required = dcv_min_fresh_flow(exo.n_occ, p)?;
            // Enthalpy needs no saturation data, so an overheated zone is fine.
            let indoor = MoistAirPoint {
                temperature: state.t_air,
                humidity_ratio: state.w,
            };
            let outdoor = MoistAirPoint::new(exo.t_out, w_outdoor)?;
            let (economizer, alpha) = economizer_fresh_fraction(
                economizer,
                &indoor,
                &outdoor,
                flow.v_total,
                required,
                &settings.economizer,
            );
            let t_supply = adjusted_supply_temp(state.t_air, flow.v_agent, flow.v_total, p);
            Ok(Resolution {
                command: ControlCommand::with_fraction(flow.v_total, alpha, t_supply),
                economizer,
                shortfall: flow.shortfall,
            })
        }
    }
}
