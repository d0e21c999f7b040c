//! Closed-loop stepping: controller state, command resolution and plant
//! integration for one trajectory.

use crate::control::{
    pid_update, resolve_command, thermostat_update, ControlCommand, EconomizerState, Mode, PidState,
    ThermostatState,
};
use crate::error::{Error, Result};
use crate::plant::{self, CoilLoad, Exogenous, Profiles, ZoneState};
use crate::scenario::Scenario;

/// Everything that happened during one physics step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Start of the step, s.
    pub t: f64,
    /// State at the start of the step.
    pub before: ZoneState,
    /// State at the end of the step.
    pub after: ZoneState,
    pub exogenous: Exogenous,
    pub command: ControlCommand,
    pub coil: CoilLoad,
    pub economizer_active: bool,
    pub shortfall: bool,
}

/// One trajectory of the zone under a single control mode.
#[derive(Debug, Clone)]
pub struct ClosedLoop<'a> {
    scenario: &'a Scenario,
    mode: Mode,
    profiles: Profiles,
    state: ZoneState,
    step_index: u64,
    thermostat: ThermostatState,
    pid: PidState,
    economizer: EconomizerState,
}

impl<'a> ClosedLoop<'a> {
    pub fn new(scenario: &'a Scenario, mode: Mode) -> Result<Self> {
        Self::with_profiles(scenario, mode, scenario.profiles.clone())
    }

    /// Uses `profiles` instead of the scenario's own, e.g. phase-shifted ones.
    pub fn with_profiles(scenario: &'a Scenario, mode: Mode, profiles: Profiles) -> Result<Self> {
        Ok(Self {
            scenario,
            mode,
            profiles,
            state: scenario.initial_state()?,
            step_index: 0,
            thermostat: ThermostatState::default(),
            pid: PidState::new(scenario.controller.pid),
            economizer: EconomizerState::default(),
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn state(&self) -> &ZoneState {
        &self.state
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    /// Current simulation time, s.
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.scenario.simulation.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.step_index
    }

    /// Advances one physics step. Baseline modes compute their own fan
    /// fraction; learned modes use `agent_u`, which must be provided.
    pub fn step(&mut self, agent_u: Option<f64>) -> Result<StepRecord> {
        let sc = self.scenario;
        let p = &sc.building;
        let dt = sc.simulation.dt;
        let t = self.time();
        let x = self.profiles.exogenous_at(t);
        let u = match self.mode {
            Mode::OnOff => {
                let (next, u) = thermostat_update(
                    self.thermostat,
                    self.state.t_air,
                    p.t_set,
                    sc.controller.thermostat.differential,
                );
                self.thermostat = next;
                u
            }
            Mode::Pid => {
                let (next, u) = pid_update(self.pid, self.state.t_air, p.t_set, dt);
                self.pid = next;
                u
            }
            Mode::PpoFixed | Mode::PpoEcon => agent_u.ok_or(Error::MissingPolicy(self.mode.name()))?,
        };
        let w_outdoor = plant::outdoor_humidity_ratio(&x, p)?;
        let res = resolve_command(self.mode, u, &self.state, &x, w_outdoor, self.economizer, &sc.controller, p)?;
        self.economizer = res.economizer;
        let out = plant::step(&self.state, &res.command, &x, dt, p)?;
        let record = StepRecord {
            t,
            before: self.state,
            after: out.state,
            exogenous: x,
            command: res.command,
            coil: out.coil,
            economizer_active: res.economizer.free_cooling_active,
            shortfall: res.shortfall,
        };
        if res.shortfall {
            log::debug!("t={t}: ventilation floor exceeds fan capacity");
        }
        self.state = out.state;
        self.step_index += 1;
        Ok(record)
    }
}
