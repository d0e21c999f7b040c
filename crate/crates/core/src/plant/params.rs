use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Effective air mass is the room air mass times this factor, accounting for
/// the thermal inertia of furnishings.
pub const FURNISHING_MASS_FACTOR: f64 = 10.0;

/// Physical constants of the single-zone building and its air handler.
///
/// Defaults reproduce the reference building: a 1200 m³ hall served by an
/// 8 m³/s AHU with a 12 °C coil leaving temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildingParams {
    /// Specific heat of air, J/(kg·K).
    pub c_p: f64,
    /// Air density, kg/m³.
    pub rho_air: f64,
    /// Zone volume, m³.
    pub v_house: f64,
    /// Latent heat of vaporisation, J/kg.
    pub h_fg: f64,
    /// Wall thermal capacitance, J/K.
    pub c_wall: f64,
    /// Outdoor-to-wall resistance, K/W.
    pub r_out: f64,
    /// Wall-to-air resistance, K/W.
    pub r_in: f64,
    /// Coil leaving-air temperature, °C.
    pub t_supply_nominal: f64,
    /// Coil leaving-air humidity ratio, kg/kg.
    pub w_supply: f64,
    /// Fan capacity, m³/s.
    pub v_max: f64,
    /// Fresh-air fraction for fixed-damper modes.
    pub alpha_fixed: f64,
    /// Outdoor CO₂, ppm.
    pub co2_out: f64,
    /// Indoor CO₂ ceiling, ppm.
    pub co2_limit: f64,
    /// Pure-CO₂ generation per occupant, m³/s.
    pub g_co2_per_person: f64,
    /// Moisture release per occupant, kg/s.
    pub m_moist_per_person: f64,
    /// Atmospheric pressure, Pa.
    pub p_atm: f64,
    /// Temperature setpoint, °C.
    pub t_set: f64,
}

impl Default for BuildingParams {
    fn default() -> Self {
        Self {
            c_p: 1005.0,
            rho_air: 1.2,
            v_house: 1200.0,
            h_fg: 2_501_000.0,
            c_wall: 1e7,
            r_out: 0.02,
            r_in: 0.05,
            t_supply_nominal: 12.0,
            w_supply: 0.007,
            v_max: 8.0,
            alpha_fixed: 0.5,
            co2_out: 400.0,
            co2_limit: 1000.0,
            g_co2_per_person: 1e-5,
            m_moist_per_person: 2e-5,
            p_atm: 101_325.0,
            t_set: 22.0,
        }
    }
}

impl BuildingParams {
    /// Effective thermal/moisture air mass in kg: `V · ρ · 10`.
    pub fn m_air_eff(&self) -> f64 {
        self.v_house * self.rho_air * FURNISHING_MASS_FACTOR
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("c_p", self.c_p),
            ("rho_air", self.rho_air),
            ("v_house", self.v_house),
            ("h_fg", self.h_fg),
            ("c_wall", self.c_wall),
            ("r_out", self.r_out),
            ("r_in", self.r_in),
            ("v_max", self.v_max),
            ("g_co2_per_person", self.g_co2_per_person),
            ("p_atm", self.p_atm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(format!("building.{name}"), format!("must be positive and finite, got {v}")));
            }
        }
        let non_negative = [
            ("w_supply", self.w_supply),
            ("co2_out", self.co2_out),
            ("m_moist_per_person", self.m_moist_per_person),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(format!("building.{name}"), format!("must be non-negative and finite, got {v}")));
            }
        }
        for (name, v) in [("t_supply_nominal", self.t_supply_nominal), ("t_set", self.t_set)] {
            if !v.is_finite() {
                return Err(ConfigError::invalid(format!("building.{name}"), "must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha_fixed) {
            return Err(ConfigError::invalid(
                "building.alpha_fixed",
                format!("must lie in [0, 1], got {}", self.alpha_fixed),
            ));
        }
        if !(self.co2_limit > self.co2_out) {
            return Err(ConfigError::invalid(
                "building.co2_limit",
                format!("must exceed co2_out ({} <= {})", self.co2_limit, self.co2_out),
            ));
        }
        Ok(())
    }
}
