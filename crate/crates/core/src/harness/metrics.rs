//! Episode summary statistics, computed from trajectory rows alone.

use serde::{Deserialize, Serialize};

use super::trajectory::TrajectoryRow;
use crate::plant::J_PER_KWH;
use crate::scenario::Scenario;

/// Half-width of the comfort band around the setpoint, °C.
pub const COMFORT_BAND: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSettings {
    pub dt: f64,
    pub warmup_s: f64,
    pub t_set: f64,
    pub co2_limit: f64,
}

impl From<&Scenario> for MetricsSettings {
    fn from(sc: &Scenario) -> Self {
        Self {
            dt: sc.simulation.dt,
            warmup_s: sc.simulation.warmup_s,
            t_set: sc.building.t_set,
            co2_limit: sc.building.co2_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// Coil energy over the whole episode.
    pub total_kwh: f64,
    /// Setpoint RMSE after warm-up, °C.
    pub temp_rmse_post_warmup: f64,
    /// Peak CO₂ after warm-up, ppm.
    pub max_co2: f64,
    /// Share of post-warm-up time above the CO₂ limit, %.
    pub pct_time_co2_over_limit: f64,
    /// Fan off-to-on transitions over the whole episode.
    pub thermostat_cycles: u64,
    /// Share of post-warm-up time within ±0.5 °C of the setpoint, %.
    pub comfort_band_occupancy: f64,
    /// Mean outdoor airflow after warm-up, m³/s.
    pub mean_fresh_flow: f64,
}

pub fn compute_metrics(rows: &[TrajectoryRow], m: &MetricsSettings) -> EpisodeMetrics {
    let energy_j: f64 = rows.iter().map(|r| r.q_coil * m.dt).sum();
    let mut cycles = 0;
    let mut fan_on = false;
    for r in rows {
        let on = r.v_total > 0.0;
        if on && !fan_on {
            cycles += 1;
        }
        fan_on = on;
    }

    let post: Vec<&TrajectoryRow> = rows.iter().filter(|r| r.t >= m.warmup_s).collect();
    let n = post.len() as f64;
    let pct = |count: usize| if post.is_empty() { 0.0 } else { 100.0 * count as f64 / n };
    let mse = post.iter().map(|r| (r.t_air - m.t_set).powi(2)).sum::<f64>() / n.max(1.0);
    EpisodeMetrics {
        total_kwh: energy_j / J_PER_KWH,
        temp_rmse_post_warmup: mse.sqrt(),
        max_co2: post.iter().map(|r| r.co2).fold(f64::NEG_INFINITY, f64::max),
        pct_time_co2_over_limit: pct(post.iter().filter(|r| r.co2 > m.co2_limit).count()),
        thermostat_cycles: cycles,
        comfort_band_occupancy: pct(post.iter().filter(|r| (r.t_air - m.t_set).abs() <= COMFORT_BAND).count()),
        mean_fresh_flow: post.iter().map(|r| r.v_fresh).sum::<f64>() / n.max(1.0),
    }
}

/// Sample mean and standard deviation (n − 1 denominator).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
