//! Occupancy-driven ventilation: the CO₂ mass-balance minimum, the flow
//! floor that overrides the agent, and the supply-temperature correction that
//! keeps the delivered cooling equal to what the agent asked for.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::plant::{BuildingParams, PPM};

/// Fresh-air flow (m³/s) that holds CO₂ at the limit in steady state for
/// `n_occ` occupants.
pub fn dcv_min_fresh_flow(n_occ: f64, p: &BuildingParams) -> Result<f64, ConfigError> {
    let headroom = p.co2_limit - p.co2_out;
    if !(headroom > 0.0) {
        return Err(ConfigError::invalid(
            "building.co2_limit",
            format!("must exceed co2_out ({} <= {})", p.co2_limit, p.co2_out),
        ));
    }
    Ok(p.g_co2_per_person * n_occ.max(0.0) / (headroom / PPM))
}

/// How the ventilation requirement is turned into a total-flow floor when the
/// damper admits only a fraction `alpha` of outdoor air.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VentilationFloor {
    /// `V_required / alpha`, so that the fresh part alone meets the requirement.
    #[default]
    AlphaScaled,
    /// `V_required` regardless of the damper position.
    AllFresh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSplit {
    pub v_total: f64,
    pub v_agent: f64,
    /// The floor exceeded the fan capacity and flow was saturated.
    pub shortfall: bool,
}

/// Total flow as the larger of the agent's request `u · V_max` and the
/// ventilation floor, capped at `V_max`.
pub fn hierarchical_flow(
    u: f64,
    n_occ: f64,
    alpha: f64,
    floor: VentilationFloor,
    p: &BuildingParams,
) -> Result<FlowSplit, ConfigError> {
    let v_agent = u.clamp(0.0, 1.0) * p.v_max;
    let required = dcv_min_fresh_flow(n_occ, p)?;
    let v_floor = match floor {
        _ if required == 0.0 => 0.0,
        VentilationFloor::AllFresh => required,
        VentilationFloor::AlphaScaled if alpha > 0.0 => required / alpha,
        VentilationFloor::AlphaScaled => f64::INFINITY,
    };
    let wanted = v_agent.max(v_floor);
    Ok(FlowSplit {
        v_total: wanted.min(p.v_max),
        v_agent,
        shortfall: v_floor > p.v_max,
    })
}

/// Supply temperature that makes `v_total` deliver the same sensible cooling
/// as `v_agent` at the nominal coil temperature.
pub fn adjusted_supply_temp(t_air: f64, v_agent: f64, v_total: f64, p: &BuildingParams) -> f64 {
    if v_total <= 0.0 {
        return t_air;
    }
    t_air - v_agent * (t_air - p.t_supply_nominal) / v_total
}
