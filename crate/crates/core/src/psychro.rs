//! Moist-air psychrometrics: saturation pressure (Buck), humidity ratio and
//! specific enthalpy.

use thiserror::Error;

/// Lower bound of the saturation-pressure correlation, in °C.
pub const T_MIN: f64 = -40.0;
/// Upper bound of the saturation-pressure correlation, in °C.
pub const T_MAX: f64 = 60.0;

/// Ratio of molar masses of water vapour and dry air.
pub const EPSILON: f64 = 0.622;

/// Specific heat of dry air, J/(kg·K).
pub const CP_AIR: f64 = 1005.0;
/// Latent heat of vaporisation of water at 0 °C, J/kg.
pub const H_FG: f64 = 2_501_000.0;
/// Specific heat of water vapour, J/(kg·K).
pub const CP_VAPOUR: f64 = 1860.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PsychroError {
    #[error("temperature {0} °C outside [{T_MIN}, {T_MAX}]")]
    TemperatureOutOfRange(f64),
    #[error("relative humidity {0} % outside [0, 100]")]
    RelativeHumidityOutOfRange(f64),
    #[error("humidity ratio {0} must be non-negative and finite")]
    InvalidHumidityRatio(f64),
    #[error("vapour pressure {vapour} Pa is not below atmospheric pressure {atmospheric} Pa")]
    PressureTooLow { vapour: f64, atmospheric: f64 },
}

/// A state point of moist air.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoistAirPoint {
    /// Dry-bulb temperature, °C.
    pub temperature: f64,
    /// kg water per kg dry air.
    pub humidity_ratio: f64,
}

impl MoistAirPoint {
    pub fn new(temperature: f64, humidity_ratio: f64) -> Result<Self, PsychroError> {
        check_temperature(temperature)?;
        if !(humidity_ratio >= 0.0) || !humidity_ratio.is_finite() {
            return Err(PsychroError::InvalidHumidityRatio(humidity_ratio));
        }
        Ok(Self {
            temperature,
            humidity_ratio,
        })
    }

    /// Specific enthalpy in J per kg of dry air.
    pub fn enthalpy(&self) -> f64 {
        moist_air_enthalpy(self.temperature, self.humidity_ratio)
    }
}

fn check_temperature(t: f64) -> Result<(), PsychroError> {
    if (T_MIN..=T_MAX).contains(&t) {
        Ok(())
    } else {
        Err(PsychroError::TemperatureOutOfRange(t))
    }
}

/// Saturation vapour pressure over liquid water in Pa (Buck's relation,
/// without enhancement factor).
pub fn saturation_pressure(t: f64) -> Result<f64, PsychroError> {
    check_temperature(t)?;
    Ok(buck(t))
}

fn buck(t: f64) -> f64 {
    611.21 * (((18.678 - t / 234.5) * t) / (t + 257.14)).exp()
}

/// Humidity ratio (kg/kg) of air at `t` °C, relative humidity `rh` in
/// percent and total pressure `p_atm` in Pa.
pub fn humidity_ratio(t: f64, rh: f64, p_atm: f64) -> Result<f64, PsychroError> {
    if !(0.0..=100.0).contains(&rh) {
        return Err(PsychroError::RelativeHumidityOutOfRange(rh));
    }
    let vapour = rh / 100.0 * saturation_pressure(t)?;
    let denom = p_atm - vapour;
    if !(denom > 0.0) {
        return Err(PsychroError::PressureTooLow {
            vapour,
            atmospheric: p_atm,
        });
    }
    Ok(EPSILON * vapour / denom)
}

/// Inverse of [`humidity_ratio`]: relative humidity in percent. Values above
/// 100 indicate supersaturated input and are returned unclamped.
pub fn relative_humidity(t: f64, w: f64, p_atm: f64) -> Result<f64, PsychroError> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(PsychroError::InvalidHumidityRatio(w));
    }
    let vapour = w * p_atm / (EPSILON + w);
    Ok(100.0 * vapour / saturation_pressure(t)?)
}

/// [`relative_humidity`] without the temperature range check, extrapolating
/// the saturation correlation. For reporting only.
pub fn relative_humidity_extrapolated(t: f64, w: f64, p_atm: f64) -> f64 {
    100.0 * (w * p_atm / (EPSILON + w)) / buck(t)
}

/// Moist-air enthalpy `c_p·T + w·(h_fg + c_pv·T)` in J/kg dry air.
pub fn moist_air_enthalpy(t: f64, w: f64) -> f64 {
    CP_AIR * t + w * (H_FG + CP_VAPOUR * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const P: f64 = 101_325.0;

    #[test]
    fn extrapolated_rh_agrees_in_range() {
        for t in [-20.0, 0.0, 22.0, 45.0, 60.0] {
            let w = humidity_ratio(t, 40.0, 101_325.0).unwrap();
            assert_eq!(relative_humidity_extrapolated(t, w, 101_325.0), relative_humidity(t, w, 101_325.0).unwrap());
        }
        assert!(relative_humidity_extrapolated(75.0, 0.01, 101_325.0).is_finite());
    }

    #[test]
    fn saturation_pressure_spot_values() {
        assert_eq!(saturation_pressure(0.0).unwrap(), 611.21);
        // Direct evaluation of the correlation; 20 °C also within 1 % of the
        // tabulated 2339 Pa.
        assert_relative_eq!(saturation_pressure(20.0).unwrap(), 2338.33998, max_relative = 1e-8);
        assert_relative_eq!(saturation_pressure(25.0).unwrap(), 3168.53141, max_relative = 1e-8);
        assert!((saturation_pressure(20.0).unwrap() - 2339.0).abs() / 2339.0 < 0.01);
    }

    #[test]
    fn saturation_pressure_rejects_out_of_range() {
        assert!(matches!(
            saturation_pressure(-40.1),
            Err(PsychroError::TemperatureOutOfRange(_))
        ));
        assert!(saturation_pressure(60.5).is_err());
        assert!(saturation_pressure(f64::NAN).is_err());
    }

    #[test]
    fn saturation_pressure_monotone_on_grid() {
        let mut prev = saturation_pressure(T_MIN).unwrap();
        for i in 1..=1000 {
            let t = T_MIN + 0.1 * i as f64;
            let p = saturation_pressure(t.min(T_MAX)).unwrap();
            assert!(p > prev, "not increasing at {t}");
            prev = p;
        }
    }

    #[test]
    fn humidity_ratio_values() {
        assert_eq!(humidity_ratio(25.0, 0.0, P).unwrap(), 0.0);
        assert_relative_eq!(humidity_ratio(25.0, 50.0, P).unwrap(), 0.00987974749, max_relative = 1e-8);
    }

    #[test]
    fn humidity_ratio_errors() {
        assert!(humidity_ratio(25.0, 101.0, P).is_err());
        assert!(humidity_ratio(25.0, -1.0, P).is_err());
        assert!(matches!(
            humidity_ratio(25.0, 100.0, 3000.0),
            Err(PsychroError::PressureTooLow { .. })
        ));
    }

    #[test]
    fn enthalpy_values() {
        assert_eq!(moist_air_enthalpy(0.0, 0.0), 0.0);
        assert_relative_eq!(moist_air_enthalpy(25.0, 0.01), 50_600.0, max_relative = 1e-12);
        assert!(moist_air_enthalpy(25.0, 0.011) > moist_air_enthalpy(25.0, 0.01));
    }

    #[test]
    fn moist_air_point_validates() {
        assert!(MoistAirPoint::new(20.0, -0.001).is_err());
        assert!(MoistAirPoint::new(70.0, 0.01).is_err());
        let p = MoistAirPoint::new(25.0, 0.01).unwrap();
        assert_relative_eq!(p.enthalpy(), 50_600.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn saturated_air_holds_most_water(t in -40.0f64..60.0, rh in 0.0f64..99.999) {
            prop_assert!(humidity_ratio(t, 100.0, P).unwrap() > humidity_ratio(t, rh, P).unwrap());
        }

        #[test]
        fn humidity_ratio_increases_with_temperature(t in -40.0f64..59.0, rh in 1.0f64..100.0) {
            prop_assert!(humidity_ratio(t + 1.0, rh, P).unwrap() > humidity_ratio(t, rh, P).unwrap());
        }

        #[test]
        fn relative_humidity_round_trip(t in -40.0f64..60.0, rh in 0.01f64..100.0) {
            let w = humidity_ratio(t, rh, P).unwrap();
            let back = relative_humidity(t, w, P).unwrap();
            prop_assert!(((back - rh) / rh).abs() < 1e-9);
        }
    }
}
