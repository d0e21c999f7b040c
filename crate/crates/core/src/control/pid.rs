use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    /// Proportional gain, 1/°C.
    pub kp: f64,
    /// Integral gain, 1/(°C·s).
    pub ki: f64,
    /// Derivative gain, s/°C.
    pub kd: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 0.5,
            ki: 0.001,
            kd: 0.1,
        }
    }
}

/// Discrete PID on the cooling error `T_air - T_set`.
///
/// The derivative acts on the error with `prev_error` starting at zero, and
/// the only saturation is the output clip to `[0, 1]`: the integral is left
/// free to wind up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub gains: PidGains,
    /// Accumulated error, °C·s.
    pub integral: f64,
    pub prev_error: f64,
}

impl PidState {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: 0.0,
            prev_error: 0.0,
        }
    }

    /// Unclipped controller output for error `e`, without mutating state.
    fn raw_output(&self, e: f64, dt: f64) -> f64 {
        let integral = self.integral + e * dt;
        let derivative = (e - self.prev_error) / dt;
        self.gains.kp * e + self.gains.ki * integral + self.gains.kd * derivative
    }
}

/// Advances the controller by `dt` and returns the fan fraction in `[0, 1]`.
pub fn pid_update(st: PidState, t_air: f64, t_set: f64, dt: f64) -> (PidState, f64) {
    let e = t_air - t_set;
    let raw = st.raw_output(e, dt);
    let next = PidState {
        gains: st.gains,
        integral: st.integral + e * dt,
        prev_error: e,
    };
    (next, raw.clamp(0.0, 1.0))
}
