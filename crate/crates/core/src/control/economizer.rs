use serde::{Deserialize, Serialize};

use crate::psychro::MoistAirPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomizerSettings {
    /// Full width of the hysteresis band on the outdoor-minus-indoor enthalpy
    /// gap, J/kg.
    pub deadband_j_per_kg: f64,
}

impl Default for EconomizerSettings {
    fn default() -> Self {
        Self {
            deadband_j_per_kg: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EconomizerState {
    pub free_cooling_active: bool,
}

/// Latches free cooling on when outdoor air is at least half a deadband lower
/// in enthalpy than indoor air, off when at least half a deadband higher.
pub fn economizer_update(st: EconomizerState, h_in: f64, h_out: f64, deadband: f64) -> EconomizerState {
    let half = 0.5 * deadband;
    let gap = h_out - h_in;
    let free_cooling_active = if gap < -half {
        true
    } else if gap > half {
        false
    } else {
        st.free_cooling_active
    };
    EconomizerState { free_cooling_active }
}

/// Fresh-air fraction from the economizer: all outdoor air during free
/// cooling, otherwise only what ventilation requires.
pub fn economizer_fresh_fraction(
    st: EconomizerState,
    indoor: &MoistAirPoint,
    outdoor: &MoistAirPoint,
    v_total: f64,
    v_required: f64,
    settings: &EconomizerSettings,
) -> (EconomizerState, f64) {
    let next = economizer_update(st, indoor.enthalpy(), outdoor.enthalpy(), settings.deadband_j_per_kg);
    let alpha = if next.free_cooling_active {
        1.0
    } else if v_total > 0.0 {
        (v_required / v_total).min(1.0)
    } else {
        0.0
    };
    (next, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INACTIVE: EconomizerState = EconomizerState {
        free_cooling_active: false,
    };
    const ACTIVE: EconomizerState = EconomizerState {
        free_cooling_active: true,
    };

    /// Dry air point with the requested enthalpy.
    fn point_with_enthalpy(h: f64) -> MoistAirPoint {
        MoistAirPoint::new(h / 1005.0, 0.0).unwrap()
    }

    #[test]
    fn cool_outdoor_air_activates() {
        let s = EconomizerSettings::default();
        let (st, alpha) = economizer_fresh_fraction(
            INACTIVE,
            &point_with_enthalpy(50_000.0),
            &point_with_enthalpy(30_000.0),
            4.0,
            1.0,
            &s,
        );
        assert_eq!((st, alpha), (ACTIVE, 1.0));
    }

    #[test]
    fn warm_outdoor_air_limits_intake() {
        let s = EconomizerSettings::default();
        let (st, alpha) = economizer_fresh_fraction(
            ACTIVE,
            &point_with_enthalpy(50_000.0),
            &point_with_enthalpy(60_000.0),
            5.0,
            2.5,
            &s,
        );
        assert_eq!(st, INACTIVE);
        assert_eq!(alpha, 0.5);
        let (_, alpha) = economizer_fresh_fraction(
            INACTIVE,
            &point_with_enthalpy(50_000.0),
            &point_with_enthalpy(60_000.0),
            0.0,
            0.0,
            &s,
        );
        assert_eq!(alpha, 0.0);
    }

    #[test]
    fn inside_deadband_keeps_previous_state() {
        for prev in [INACTIVE, ACTIVE] {
            for gap in [-999.0, 0.0, 999.0] {
                assert_eq!(economizer_update(prev, 50_000.0, 50_000.0 + gap, 2000.0), prev);
            }
        }
    }

    #[test]
    fn monotone_ramp_switches_once() {
        // Outdoor enthalpy sweeping slowly through the indoor value and back.
        let mut st = ACTIVE;
        let mut changes = 0;
        let ramp = (0..=4000).map(|i| 45_000.0 + 2.5 * i as f64);
        for h_out in ramp {
            let next = economizer_update(st, 50_000.0, h_out, 2000.0);
            changes += usize::from(next != st);
            st = next;
        }
        assert_eq!(changes, 1);
        assert_eq!(st, INACTIVE);
    }

    proptest! {
        #[test]
        fn decision_ignores_common_offset(
            h_in in 0.0f64..100_000.0,
            gap in -5_000.0f64..5_000.0,
            offset in -50_000.0f64..50_000.0,
            prev in any::<bool>(),
        ) {
            // Keep away from the band edges, where rounding of the shifted
            // values could flip a strict comparison.
            prop_assume!((gap.abs() - 1000.0).abs() > 1e-6);
            let st = EconomizerState { free_cooling_active: prev };
            let a = economizer_update(st, h_in, h_in + gap, 2000.0);
            let b = economizer_update(st, h_in + offset, h_in + gap + offset, 2000.0);
            prop_assert_eq!(a, b);
        }
    }
}
