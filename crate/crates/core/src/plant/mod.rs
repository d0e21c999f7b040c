//! Single-zone building physics: a 2R-2C envelope network coupled with
//! moisture and CO₂ mass balances and a cooling-coil load model.
//!
//! State is advanced by explicit Euler at a fixed step (1 s by default). The
//! fastest time constant is the air node at full fan, about 1.5·10³ s, so a
//! 1 s Euler step is well inside its stability region.
//! [`step_rk4`] integrates the same right-hand side with classical
//! Runge-Kutta and exists as a reference for accuracy checks.

mod params;
mod profiles;

pub use params::{BuildingParams, FURNISHING_MASS_FACTOR};
pub use profiles::{Exogenous, Profile, Profiles};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::ControlCommand;
use crate::psychro::{self, PsychroError};

/// Conversion between ppm and volume fraction.
pub const PPM: f64 = 1e6;
/// Joules per kWh.
pub const J_PER_KWH: f64 = 3.6e6;

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("non-finite zone state after step: {0:?}")]
    NonFinite(ZoneState),
    #[error("outdoor psychrometrics: {0}")]
    Psychro(#[from] PsychroError),
}

/// Integrated states of the zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneState {
    /// Indoor air temperature, °C.
    pub t_air: f64,
    /// Lumped wall temperature, °C.
    pub t_wall: f64,
    /// Indoor humidity ratio, kg/kg.
    pub w: f64,
    /// Indoor CO₂, ppm.
    pub co2: f64,
    /// Accumulated coil energy, J.
    pub energy_j: f64,
}

impl ZoneState {
    /// 25 °C air and wall at 50 % RH, outdoor-level CO₂, no energy spent.
    pub fn initial(p: &BuildingParams) -> Result<Self, PsychroError> {
        Ok(Self {
            t_air: 25.0,
            t_wall: 25.0,
            w: psychro::humidity_ratio(25.0, 50.0, p.p_atm)?,
            co2: p.co2_out,
            energy_j: 0.0,
        })
    }

    fn is_finite(&self) -> bool {
        self.t_air.is_finite()
            && self.t_wall.is_finite()
            && self.w.is_finite()
            && self.co2.is_finite()
            && self.energy_j.is_finite()
    }
}

/// Cooling-coil power split, W.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CoilLoad {
    pub q_sensible: f64,
    pub q_latent: f64,
    pub q_coil: f64,
}

/// Wall temperature rate, K/s.
pub fn wall_derivative(s: &ZoneState, t_out: f64, p: &BuildingParams) -> f64 {
    ((t_out - s.t_wall) / p.r_out + (s.t_air - s.t_wall) / p.r_in) / p.c_wall
}

/// Air temperature rate, K/s.
pub fn air_derivative(s: &ZoneState, q_internal: f64, q_cooling: f64, p: &BuildingParams) -> f64 {
    ((s.t_wall - s.t_air) / p.r_in + q_internal - q_cooling) / (p.m_air_eff() * p.c_p)
}

/// Humidity-ratio rate, (kg/kg)/s. Supply air enters at the coil's leaving
/// humidity ratio.
pub fn humidity_derivative(s: &ZoneState, n_occ: f64, v_total: f64, p: &BuildingParams) -> f64 {
    (p.m_moist_per_person * n_occ + p.rho_air * v_total * (p.w_supply - s.w)) / p.m_air_eff()
}

/// CO₂ rate, ppm/s. Generation is pure CO₂ volume and is scaled to ppm.
pub fn co2_derivative(s: &ZoneState, n_occ: f64, v_fresh: f64, p: &BuildingParams) -> f64 {
    (p.g_co2_per_person * n_occ * PPM + v_fresh * (p.co2_out - s.co2)) / p.v_house
}

/// Sensible cooling delivered to the zone by `v_total` of supply air at
/// `t_supply_eff`, W. Never negative.
pub fn zone_cooling(v_total: f64, t_air: f64, t_supply_eff: f64, p: &BuildingParams) -> f64 {
    v_total * p.rho_air * p.c_p * (t_air - t_supply_eff).max(0.0)
}

/// Coil load for a mixed return/outdoor stream cooled to `t_supply_eff` and
/// dried to `w_supply`. `w_outdoor` is the outdoor humidity ratio.
pub fn coil_load(
    v_total: f64,
    alpha: f64,
    s: &ZoneState,
    t_out: f64,
    w_outdoor: f64,
    t_supply_eff: f64,
    p: &BuildingParams,
) -> CoilLoad {
    let w_mixed = (1.0 - alpha) * s.w + alpha * w_outdoor;
    let t_mixed = (1.0 - alpha) * s.t_air + alpha * t_out;
    let q_sensible = v_total * p.rho_air * p.c_p * (t_mixed - t_supply_eff).max(0.0);
    let q_latent = v_total * p.rho_air * p.h_fg * (w_mixed - p.w_supply).max(0.0);
    CoilLoad {
        q_sensible,
        q_latent,
        q_coil: q_sensible + q_latent,
    }
}

/// Outdoor humidity ratio for the given boundary conditions.
pub fn outdoor_humidity_ratio(x: &Exogenous, p: &BuildingParams) -> Result<f64, PsychroError> {
    psychro::humidity_ratio(x.t_out, x.rh_out, p.p_atm)
}

#[derive(Debug, Clone, Copy)]
struct Rates {
    t_wall: f64,
    t_air: f64,
    w: f64,
    co2: f64,
    power: f64,
}

fn rates(
    s: &ZoneState,
    cmd: &ControlCommand,
    x: &Exogenous,
    w_outdoor: f64,
    p: &BuildingParams,
) -> (Rates, CoilLoad) {
    let q_cooling = zone_cooling(cmd.v_total, s.t_air, cmd.t_supply_eff, p);
    let coil = coil_load(cmd.v_total, cmd.alpha, s, x.t_out, w_outdoor, cmd.t_supply_eff, p);
    let r = Rates {
        t_wall: wall_derivative(s, x.t_out, p),
        t_air: air_derivative(s, x.q_internal, q_cooling, p),
        w: humidity_derivative(s, x.n_occ, cmd.v_total, p),
        co2: co2_derivative(s, x.n_occ, cmd.v_fresh, p),
        power: coil.q_coil,
    };
    (r, coil)
}

fn advance(s: &ZoneState, r: &Rates, h: f64) -> ZoneState {
    ZoneState {
        t_air: s.t_air + h * r.t_air,
        t_wall: s.t_wall + h * r.t_wall,
        w: s.w + h * r.w,
        co2: s.co2 + h * r.co2,
        energy_j: s.energy_j + h * r.power,
    }
}

fn finish(mut next: ZoneState, p: &BuildingParams) -> Result<ZoneState, PlantError> {
    next.co2 = next.co2.max(p.co2_out);
    next.w = next.w.max(0.0);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(PlantError::NonFinite(next))
    }
}

/// Result of one integration step: the new state and the coil load that was
/// applied over the step (evaluated at the start of the step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: ZoneState,
    pub coil: CoilLoad,
}

/// One explicit-Euler step of length `dt` under a command held constant over
/// the step and boundary conditions `x` sampled at the start of the step.
pub fn step(
    s: &ZoneState,
    cmd: &ControlCommand,
    x: &Exogenous,
    dt: f64,
    p: &BuildingParams,
) -> Result<StepOutcome, PlantError> {
    let w_outdoor = outdoor_humidity_ratio(x, p)?;
    let (r, coil) = rates(s, cmd, x, w_outdoor, p);
    let state = finish(advance(s, &r, dt), p)?;
    Ok(StepOutcome { state, coil })
}

/// Classical fourth-order Runge-Kutta step with boundary conditions sampled
/// continuously from `profiles` at `t`, `t + dt/2` and `t + dt`. The command
/// is held over the step.
pub fn step_rk4(
    s: &ZoneState,
    cmd: &ControlCommand,
    profiles: &Profiles,
    t: f64,
    dt: f64,
    p: &BuildingParams,
) -> Result<StepOutcome, PlantError> {
    let stage = |state: &ZoneState, time: f64| -> Result<(Rates, CoilLoad), PlantError> {
        let x = profiles.exogenous_at(time);
        let w_outdoor = outdoor_humidity_ratio(&x, p)?;
        Ok(rates(state, cmd, &x, w_outdoor, p))
    };
    let (k1, coil) = stage(s, t)?;
    let (k2, _) = stage(&advance(s, &k1, 0.5 * dt), t + 0.5 * dt)?;
    let (k3, _) = stage(&advance(s, &k2, 0.5 * dt), t + 0.5 * dt)?;
    let (k4, _) = stage(&advance(s, &k3, dt), t + dt)?;
    let combine = |f: fn(&Rates) -> f64| (f(&k1) + 2.0 * f(&k2) + 2.0 * f(&k3) + f(&k4)) / 6.0;
    let r = Rates {
        t_wall: combine(|r| r.t_wall),
        t_air: combine(|r| r.t_air),
        w: combine(|r| r.w),
        co2: combine(|r| r.co2),
        power: combine(|r| r.power),
    };
    let state = finish(advance(s, &r, dt), p)?;
    Ok(StepOutcome { state, coil })
}

/// Accumulated coil energy in kWh.
pub fn total_energy_kwh(s: &ZoneState) -> f64 {
    s.energy_j / J_PER_KWH
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> BuildingParams {
        BuildingParams::default()
    }

    fn state(t_air: f64, t_wall: f64, w: f64, co2: f64) -> ZoneState {
        ZoneState {
            t_air,
            t_wall,
            w,
            co2,
            energy_j: 0.0,
        }
    }

    fn cmd(v_total: f64, alpha: f64, t_supply_eff: f64) -> ControlCommand {
        ControlCommand {
            v_total,
            v_fresh: alpha * v_total,
            alpha,
            t_supply_eff,
        }
    }

    #[test]
    fn wall_derivative_cases() {
        let p = p();
        assert_eq!(wall_derivative(&state(22.0, 22.0, 0.008, 400.0), 22.0, &p), 0.0);
        assert_relative_eq!(
            wall_derivative(&state(22.0, 25.0, 0.008, 400.0), 30.0, &p),
            1.9e-5,
            max_relative = 1e-12
        );
        assert!(wall_derivative(&state(26.0, 25.0, 0.008, 400.0), 30.0, &p) > 0.0);
    }

    #[test]
    fn air_derivative_cases() {
        let p = p();
        let s = state(22.0, 25.0, 0.008, 400.0);
        assert_relative_eq!(air_derivative(&s, 50_000.0, 30_000.0, &p), 20_060.0 / (14_400.0 * 1005.0), max_relative = 1e-12);
        assert_relative_eq!(air_derivative(&s, 50_000.0, 30_000.0, &p), 1.3862e-3, max_relative = 1e-4);
        // Wall gain 60 W balanced by 60 W of cooling.
        assert_eq!(air_derivative(&s, 0.0, 60.0, &p), 0.0);
    }

    #[test]
    fn humidity_derivative_cases() {
        let p = p();
        assert_eq!(humidity_derivative(&state(22.0, 22.0, 0.007, 400.0), 0.0, 3.0, &p), 0.0);
        let s = state(22.0, 22.0, 0.009, 400.0);
        assert_relative_eq!(humidity_derivative(&s, 100.0, 4.0, &p), (0.002 - 0.0096) / 14_400.0, max_relative = 1e-9);
        assert_relative_eq!(humidity_derivative(&s, 100.0, 4.0, &p), -5.2778e-7, max_relative = 1e-4);
        assert_relative_eq!(humidity_derivative(&s, 100.0, 0.0, &p), 0.002 / 14_400.0, max_relative = 1e-12);
    }

    #[test]
    fn co2_derivative_cases() {
        let p = p();
        assert_eq!(co2_derivative(&state(22.0, 22.0, 0.008, 400.0), 0.0, 2.0, &p), 0.0);
        assert!(co2_derivative(&state(22.0, 22.0, 0.008, 800.0), 100.0, 2.5, &p).abs() < 1e-12);
        assert!(co2_derivative(&state(22.0, 22.0, 0.008, 1000.0), 150.0, 2.5, &p).abs() < 1e-12);
    }

    #[test]
    fn coil_load_cases() {
        let p = p();
        // Return 0.008, outdoor 0.012, half fresh: mixed 0.010.
        let s = state(22.0, 22.0, 0.008, 400.0);
        let c = coil_load(1.0, 0.5, &s, 22.0, 0.012, 12.0, &p);
        assert_relative_eq!(c.q_latent, 1.2 * 2_501_000.0 * 0.003, max_relative = 1e-12);
        // Mixed humidity equal to the supply humidity: no latent load.
        let s = state(22.0, 22.0, 0.007, 400.0);
        let c = coil_load(5.0, 0.5, &s, 25.0, 0.007, 12.0, &p);
        assert_eq!(c.q_latent, 0.0);
        // Pure recirculation at full flow.
        let c = coil_load(8.0, 0.0, &s, 30.0, 0.015, 12.0, &p);
        assert_relative_eq!(c.q_sensible, 96_480.0, max_relative = 1e-12);
        assert_eq!(c.q_coil, c.q_sensible + c.q_latent);
    }

    #[test]
    fn coil_never_heats_or_humidifies() {
        let p = p();
        let s = state(10.0, 10.0, 0.004, 400.0);
        let c = coil_load(4.0, 0.5, &s, 5.0, 0.003, 12.0, &p);
        assert_eq!(c, CoilLoad::default());
    }

    #[test]
    fn zone_cooling_cases() {
        let p = p();
        assert_eq!(zone_cooling(5.0, 22.0, 22.0, &p), 0.0);
        assert_relative_eq!(zone_cooling(8.0, 22.0, 12.0, &p), 96_480.0, max_relative = 1e-12);
        assert_eq!(zone_cooling(0.0, 22.0, 12.0, &p), 0.0);
    }

    #[test]
    fn energy_conversion() {
        let mut s = state(22.0, 22.0, 0.008, 400.0);
        assert_eq!(total_energy_kwh(&s), 0.0);
        s.energy_j = 3600.0 * 3600.0;
        assert_relative_eq!(total_energy_kwh(&s), 3.6, max_relative = 1e-12);
        s.energy_j = 96_480.0 * 86_400.0;
        assert_relative_eq!(total_energy_kwh(&s), 2315.52, max_relative = 1e-12);
    }

    #[test]
    fn fixed_point_only_accumulates_energy() {
        let p = p();
        // Wall and outdoor at the air temperature, no occupants, no gains,
        // air at supply humidity, no cooling lift.
        let s = state(22.0, 22.0, p.w_supply, p.co2_out);
        let c = cmd(3.0, 0.5, 22.0);
        let x = Exogenous {
            t_out: 22.0,
            rh_out: 50.0,
            n_occ: 0.0,
            q_internal: 0.0,
        };
        let out = step(&s, &c, &x, 1.0, &p).unwrap();
        assert_eq!(out.state.t_air.to_bits(), s.t_air.to_bits());
        assert_eq!(out.state.t_wall.to_bits(), s.t_wall.to_bits());
        assert_eq!(out.state.w.to_bits(), s.w.to_bits());
        assert_eq!(out.state.co2.to_bits(), s.co2.to_bits());
        assert_eq!(out.state.energy_j, out.coil.q_coil);
        assert!(out.coil.q_coil > 0.0);
    }

    #[test]
    fn co2_after_one_step_with_full_occupancy() {
        let p = p();
        let s = state(25.0, 25.0, 0.0099, 400.0);
        let x = Exogenous {
            t_out: 25.0,
            rh_out: 50.0,
            n_occ: 150.0,
            q_internal: 0.0,
        };
        let out = step(&s, &cmd(0.0, 0.0, 25.0), &x, 1.0, &p).unwrap();
        assert_relative_eq!(out.state.co2, 401.25, max_relative = 1e-12);
    }

    #[test]
    fn co2_is_floored_at_outdoor_level() {
        let p = p();
        let s = state(25.0, 25.0, 0.0099, 400.0);
        let x = Exogenous {
            t_out: 25.0,
            rh_out: 50.0,
            n_occ: 0.0,
            q_internal: 0.0,
        };
        let out = step(&s, &cmd(8.0, 1.0, 12.0), &x, 1.0, &p).unwrap();
        assert_eq!(out.state.co2, 400.0);
    }

    #[test]
    fn non_finite_state_is_rejected() {
        let p = p();
        let s = state(f64::NAN, 25.0, 0.0099, 400.0);
        let x = Profiles::default().exogenous_at(0.0);
        assert!(matches!(
            step(&s, &cmd(1.0, 0.5, 12.0), &x, 1.0, &p),
            Err(PlantError::NonFinite(_))
        ));
    }

    fn run_open_loop(dt: f64, v_total: f64, seconds: f64) -> ZoneState {
        let p = p();
        let profiles = Profiles::default();
        let mut s = ZoneState::initial(&p).unwrap();
        let c = cmd(v_total, 0.5, 12.0);
        let n = (seconds / dt).round() as usize;
        for i in 0..n {
            let x = profiles.exogenous_at(i as f64 * dt);
            s = step(&s, &c, &x, dt, &p).unwrap().state;
        }
        s
    }

    #[test]
    fn halving_dt_barely_moves_the_end_state() {
        let coarse = run_open_loop(1.0, 4.0, 86_400.0);
        let fine = run_open_loop(0.5, 4.0, 86_400.0);
        assert!((coarse.t_air - fine.t_air).abs() < 0.01, "{} vs {}", coarse.t_air, fine.t_air);
    }

    /// CO₂ after `tau_count` air-change time constants under the DCV flow for
    /// 150 occupants.
    fn co2_after(start: f64, tau_count: f64) -> f64 {
        let p = p();
        let v_fresh = crate::control::dcv_min_fresh_flow(150.0, &p).unwrap();
        let x = Exogenous {
            t_out: 22.0,
            rh_out: 50.0,
            n_occ: 150.0,
            q_internal: 0.0,
        };
        let c = cmd(v_fresh, 1.0, 22.0);
        let mut s = state(22.0, 22.0, 0.008, start);
        let steps = (tau_count * p.v_house / v_fresh).round() as usize;
        for _ in 0..steps {
            s = step(&s, &c, &x, 1.0, &p).unwrap().state;
        }
        s.co2
    }

    #[test]
    fn dcv_flow_closes_on_the_limit() {
        // The gap decays as e^-t/τ: from 900 ppm five time constants suffice,
        // from outdoor level (600 ppm gap) it takes seven.
        assert!((co2_after(900.0, 5.0) - 1000.0).abs() < 1.0);
        assert!((co2_after(400.0, 5.0) - 1000.0).abs() > 1.0);
        assert!((co2_after(400.0, 7.0) - 1000.0).abs() < 1.0);
        assert!((co2_after(1300.0, 7.0) - 1000.0).abs() < 1.0);
    }

    #[test]
    fn free_decay_towards_outdoor_temperature() {
        let p = p();
        let x = Exogenous {
            t_out: 30.0,
            rh_out: 40.0,
            n_occ: 0.0,
            q_internal: 0.0,
        };
        let mut s = state(22.0, 24.0, 0.008, 600.0);
        let c = cmd(0.0, 0.0, 12.0);
        let mut prev = s;
        for _ in 0..200_000 {
            s = step(&s, &c, &x, 1.0, &p).unwrap().state;
            assert!(s.t_air >= prev.t_air && s.t_air <= 30.0);
            assert!(s.t_wall >= prev.t_wall && s.t_wall <= 30.0);
            assert_eq!(s.w, 0.008);
            assert_eq!(s.co2, 600.0);
            prev = s;
        }
        // Wall closes a sizeable part of its gap; air follows more slowly.
        assert!(s.t_wall > 26.4 && s.t_air > 22.5, "{s:?}");
    }

    #[test]
    fn rk4_agrees_with_euler_open_loop() {
        let p = p();
        let profiles = Profiles::default();
        let c = cmd(4.0, 0.5, 12.0);
        let mut e = ZoneState::initial(&p).unwrap();
        let mut r = e;
        for i in 0..86_400 {
            let t = i as f64;
            e = step(&e, &c, &profiles.exogenous_at(t), 1.0, &p).unwrap().state;
            r = step_rk4(&r, &c, &profiles, t, 1.0, &p).unwrap().state;
        }
        assert!((e.t_air - r.t_air).abs() < 0.05);
        assert!((e.co2 - r.co2).abs() < 2.0);
        assert!((e.w - r.w).abs() < 1e-5);
        assert!((e.energy_j - r.energy_j).abs() / r.energy_j < 1e-3);
    }
}
