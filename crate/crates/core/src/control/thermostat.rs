use serde::{Deserialize, Serialize};

/// Hysteresis thermostat latch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThermostatState {
    pub fan_on: bool,
}

/// Switches the fan on above `t_set + differential/2`, off below
/// `t_set - differential/2`, and otherwise holds. Returns the new latch and
/// the fan fraction (1 or 0).
pub fn thermostat_update(
    st: ThermostatState,
    t_air: f64,
    t_set: f64,
    differential: f64,
) -> (ThermostatState, f64) {
    let half = 0.5 * differential;
    let fan_on = if t_air > t_set + half {
        true
    } else if t_air < t_set - half {
        false
    } else {
        st.fan_on
    };
    (ThermostatState { fan_on }, if fan_on { 1.0 } else { 0.0 })
}
