//! Per-step trajectory rows and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::psychro;
use crate::sim::StepRecord;

/// One physics step: the state at its start, the boundary conditions, the
/// command applied over it and the resulting coil load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    #[serde(rename = "T_air")]
    pub t_air: f64,
    #[serde(rename = "T_wall")]
    pub t_wall: f64,
    pub w: f64,
    #[serde(rename = "RH_in")]
    pub rh_in: f64,
    #[serde(rename = "CO2")]
    pub co2: f64,
    #[serde(rename = "T_out")]
    pub t_out: f64,
    #[serde(rename = "RH_out")]
    pub rh_out: f64,
    #[serde(rename = "N_occ")]
    pub n_occ: f64,
    #[serde(rename = "Q_internal")]
    pub q_internal: f64,
    #[serde(rename = "V_total")]
    pub v_total: f64,
    #[serde(rename = "V_fresh")]
    pub v_fresh: f64,
    pub alpha: f64,
    #[serde(rename = "T_supply_eff")]
    pub t_supply_eff: f64,
    #[serde(rename = "Q_sensible")]
    pub q_sensible: f64,
    #[serde(rename = "Q_latent")]
    pub q_latent: f64,
    #[serde(rename = "Q_coil")]
    pub q_coil: f64,
    /// Negative squared setpoint error at the end of the step.
    pub reward: f64,
    /// Free cooling was active. Not part of the CSV.
    #[serde(skip)]
    pub economizer_active: bool,
}

pub const CSV_HEADER: [&str; 18] = [
    "t",
    "T_air",
    "T_wall",
    "w",
    "RH_in",
    "CO2",
    "T_out",
    "RH_out",
    "N_occ",
    "Q_internal",
    "V_total",
    "V_fresh",
    "alpha",
    "T_supply_eff",
    "Q_sensible",
    "Q_latent",
    "Q_coil",
    "reward",
];

impl TrajectoryRow {
    pub fn from_record(rec: &StepRecord, reward: f64, p_atm: f64) -> Self {
        let s = &rec.before;
        Self {
            t: rec.t,
            t_air: s.t_air,
            t_wall: s.t_wall,
            w: s.w,
            rh_in: psychro::relative_humidity_extrapolated(s.t_air, s.w, p_atm),
            co2: s.co2,
            t_out: rec.exogenous.t_out,
            rh_out: rec.exogenous.rh_out,
            n_occ: rec.exogenous.n_occ,
            q_internal: rec.exogenous.q_internal,
            v_total: rec.command.v_total,
            v_fresh: rec.command.v_fresh,
            alpha: rec.command.alpha,
            t_supply_eff: rec.command.t_supply_eff,
            q_sensible: rec.coil.q_sensible,
            q_latent: rec.coil.q_latent,
            q_coil: rec.coil.q_coil,
            reward,
            economizer_active: rec.economizer_active,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
