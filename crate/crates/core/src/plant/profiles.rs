//! Daily boundary-condition profiles: clamped sinusoids for outdoor weather,
//! occupancy and internal gains.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Boundary conditions acting on the zone at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exogenous {
    /// Outdoor dry-bulb, °C.
    pub t_out: f64,
    /// Outdoor relative humidity, %.
    pub rh_out: f64,
    /// Occupants (fractional counts allowed).
    pub n_occ: f64,
    /// Internal sensible gains, W.
    pub q_internal: f64,
}

/// `offset + amplitude · sin(2π (t + phase) / period)`, clamped to `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub offset: f64,
    pub amplitude: f64,
    #[serde(default = "default_period")]
    pub period_s: f64,
    #[serde(default)]
    pub phase_s: f64,
    pub min: f64,
    pub max: f64,
}

fn default_period() -> f64 {
    86_400.0
}

impl Profile {
    pub const fn sinusoid(offset: f64, amplitude: f64, min: f64, max: f64) -> Self {
        Self {
            offset,
            amplitude,
            period_s: 86_400.0,
            phase_s: 0.0,
            min,
            max,
        }
    }

    /// Constant value, useful for degenerate test scenarios.
    pub const fn constant(value: f64) -> Self {
        Self::sinusoid(value, 0.0, value, value)
    }

    pub fn raw(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (2.0 * PI * (t + self.phase_s) / self.period_s).sin()
    }

    pub fn at(&self, t: f64) -> f64 {
        self.raw(t).clamp(self.min, self.max)
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        let all_finite = [self.offset, self.amplitude, self.period_s, self.phase_s, self.min, self.max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(ConfigError::invalid(format!("profiles.{name}"), "all fields must be finite"));
        }
        if !(self.period_s > 0.0) {
            return Err(ConfigError::invalid(format!("profiles.{name}.period_s"), "must be positive"));
        }
        if self.min > self.max {
            return Err(ConfigError::invalid(format!("profiles.{name}"), "min exceeds max"));
        }
        Ok(())
    }
}

/// The four daily profiles driving a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Profiles {
    pub t_out: Profile,
    /// Percent; the unit-fraction form `0.3 + 0.3 sin` is scaled by 100.
    pub rh_out: Profile,
    pub occupancy: Profile,
    pub q_internal: Profile,
}

impl Default for Profiles {
    fn default() -> Self {
        Self {
            t_out: Profile::sinusoid(25.0, 5.0, 20.0, 30.0),
            rh_out: Profile::sinusoid(30.0, 30.0, 30.0, 60.0),
            occupancy: Profile::sinusoid(70.0, 80.0, 70.0, 150.0),
            q_internal: Profile::sinusoid(25_000.0, 45_000.0, 25_000.0, 70_000.0),
        }
    }
}

impl Profiles {
    /// Constant boundary conditions.
    pub fn constant(t_out: f64, rh_out: f64, n_occ: f64, q_internal: f64) -> Self {
        Self {
            t_out: Profile::constant(t_out),
            rh_out: Profile::constant(rh_out),
            occupancy: Profile::constant(n_occ),
            q_internal: Profile::constant(q_internal),
        }
    }

    pub fn exogenous_at(&self, t: f64) -> Exogenous {
        Exogenous {
            t_out: self.t_out.at(t),
            rh_out: self.rh_out.at(t),
            n_occ: self.occupancy.at(t),
            q_internal: self.q_internal.at(t),
        }
    }

    /// Same profiles advanced by `phase_s` seconds.
    pub fn shifted(&self, phase_s: f64) -> Self {
        let shift = |p: &Profile| Profile {
            phase_s: p.phase_s + phase_s,
            ..*p
        };
        Self {
            t_out: shift(&self.t_out),
            rh_out: shift(&self.rh_out),
            occupancy: shift(&self.occupancy),
            q_internal: shift(&self.q_internal),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.t_out.validate("t_out")?;
        self.rh_out.validate("rh_out")?;
        self.occupancy.validate("occupancy")?;
        self.q_internal.validate("q_internal")?;
        if self.rh_out.min < 0.0 || self.rh_out.max > 100.0 {
            return Err(ConfigError::invalid("profiles.rh_out", "clamp bounds must lie within [0, 100] %"));
        }
        if self.occupancy.min < 0.0 {
            return Err(ConfigError::invalid("profiles.occupancy.min", "occupancy cannot be negative"));
        }
        if self.t_out.min < crate::psychro::T_MIN || self.t_out.max > crate::psychro::T_MAX {
            return Err(ConfigError::invalid(
                "profiles.t_out",
                "clamp bounds must lie within the psychrometric range [-40, 60] °C",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midnight_values() {
        let x = Profiles::default().exogenous_at(0.0);
        assert_eq!(x.t_out, 25.0);
        assert_eq!(x.n_occ, 70.0);
        assert_eq!(x.q_internal, 25_000.0);
        assert_eq!(x.rh_out, 30.0);
    }

    #[test]
    fn peak_values() {
        let x = Profiles::default().exogenous_at(21_600.0);
        assert_abs_diff_eq!(x.t_out, 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x.rh_out, 60.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x.n_occ, 150.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x.q_internal, 70_000.0, epsilon = 1e-6);
    }

    #[test]
    fn trough_values_are_clamped() {
        let p = Profiles::default();
        assert_abs_diff_eq!(p.occupancy.raw(64_800.0), -10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.q_internal.raw(64_800.0), -20_000.0, epsilon = 1e-6);
        assert_abs_diff_eq!(p.rh_out.raw(64_800.0), 0.0, epsilon = 1e-9);
        let x = p.exogenous_at(64_800.0);
        assert_eq!(x.n_occ, 70.0);
        assert_eq!(x.q_internal, 25_000.0);
        assert_eq!(x.rh_out, 30.0);
        assert_abs_diff_eq!(x.t_out, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn values_stay_in_range_over_a_day() {
        let p = Profiles::default();
        for t in (0..86_400).step_by(60) {
            let x = p.exogenous_at(t as f64);
            assert!((20.0..=30.0).contains(&x.t_out));
            assert!((30.0..=60.0).contains(&x.rh_out));
            assert!((70.0..=150.0).contains(&x.n_occ));
            assert!((25_000.0..=70_000.0).contains(&x.q_internal));
        }
    }

    #[test]
    fn shift_moves_the_phase() {
        let p = Profiles::default();
        let s = p.shifted(21_600.0);
        assert_eq!(s.exogenous_at(0.0), p.exogenous_at(21_600.0));
    }

    #[test]
    fn validation() {
        Profiles::default().validate().unwrap();
        let mut p = Profiles::default();
        p.occupancy.min = 200.0;
        assert!(p.validate().is_err());
        let mut p = Profiles::default();
        p.t_out.period_s = 0.0;
        assert!(p.validate().is_err());
    }
}
