//! Episode runner, metrics and multi-controller comparison.

mod metrics;
mod trajectory;

pub use metrics::{compute_metrics, mean_std, EpisodeMetrics, MetricsSettings, COMFORT_BAND};
pub use trajectory::{read_csv, write_csv, TrajectoryRow, CSV_HEADER};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::Mode;
use crate::error::{Error, Result};
use crate::plant::ZoneState;
use crate::rl::env::{observe, reward};
use crate::rl::Policy;
use crate::scenario::Scenario;
use crate::sim::ClosedLoop;

#[derive(Debug, Clone)]
pub struct Episode {
    pub mode: Mode,
    pub trajectory: Vec<TrajectoryRow>,
    pub metrics: EpisodeMetrics,
    pub final_state: ZoneState,
}

/// Runs one full episode. Learned modes query `policy` deterministically
/// once per control interval and hold the action in between.
pub fn run_episode(scenario: &Scenario, mode: Mode, policy: Option<&Policy>) -> Result<Episode> {
    let policy = match (mode.is_learned(), policy) {
        (true, None) => return Err(Error::MissingPolicy(mode.name())),
        (true, p) => p,
        (false, _) => None,
    };
    let p = &scenario.building;
    let steps = scenario.simulation.steps();
    let interval = scenario.substeps_per_action();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.simulation.seed);
    let mut cl = ClosedLoop::new(scenario, mode)?;
    let mut rows = Vec::with_capacity(steps);
    let mut u = None;
    for k in 0..steps {
        if let Some(pol) = policy {
            if k % interval == 0 {
                u = Some(pol.predict(&observe(cl.state(), p), true, &mut rng).u);
            }
        }
        let rec = cl.step(u)?;
        rows.push(TrajectoryRow::from_record(&rec, reward(rec.after.t_air, p), p.p_atm));
    }
    let metrics = compute_metrics(&rows, &MetricsSettings::from(scenario));
    Ok(Episode {
        mode,
        trajectory: rows,
        metrics,
        final_state: *cl.state(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario_hash: String,
    pub per_mode: BTreeMap<String, EpisodeMetrics>,
    /// `"a_vs_b"`: energy saved by `a` relative to `b`, %.
    pub pairwise_savings_pct: BTreeMap<String, f64>,
    /// Savings of ppo-econ relative to the lowest-energy other mode, %.
    pub savings_pct_vs_best_baseline: Option<f64>,
}

/// `(reference - candidate) / reference`, in %.
pub fn savings_pct(candidate_kwh: f64, reference_kwh: f64) -> f64 {
    100.0 * (reference_kwh - candidate_kwh) / reference_kwh
}

/// Runs every mode on the same scenario, in parallel, and summarises.
pub fn compare(scenario: &Scenario, modes: &[Mode], policies: &BTreeMap<Mode, Policy>) -> Result<ComparisonReport> {
    let episodes: Vec<Result<Episode>> = std::thread::scope(|s| {
        let handles: Vec<_> = modes
            .iter()
            .map(|&mode| s.spawn(move || run_episode(scenario, mode, policies.get(&mode))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("episode thread panicked")).collect()
    });
    let mut per_mode = BTreeMap::new();
    for ep in episodes {
        let ep = ep?;
        per_mode.insert(ep.mode.name().to_owned(), ep.metrics);
    }
    Ok(report(scenario.hash(), per_mode))
}

fn report(scenario_hash: String, per_mode: BTreeMap<String, EpisodeMetrics>) -> ComparisonReport {
    let mut pairwise = BTreeMap::new();
    for (a, ma) in &per_mode {
        for (b, mb) in &per_mode {
            if a != b {
                pairwise.insert(format!("{a}_vs_{b}"), savings_pct(ma.total_kwh, mb.total_kwh));
            }
        }
    }
    let econ = Mode::PpoEcon.name();
    let best = per_mode
        .iter()
        .filter(|(name, _)| name.as_str() != econ)
        .map(|(_, m)| m.total_kwh)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    let savings = per_mode
        .get(econ)
        .zip(best)
        .map(|(m, best)| savings_pct(m.total_kwh, best));
    ComparisonReport {
        scenario_hash,
        per_mode,
        pairwise_savings_pct: pairwise,
        savings_pct_vs_best_baseline: savings,
    }
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>9} {:>9} {:>9} {:>7} {:>9} {:>8}",
            "mode", "kWh", "RMSE_C", "maxCO2", "CO2>lim%", "cycles", "comfort%", "Vfresh"
        );
        for (name, m) in &self.per_mode {
            let _ = writeln!(
                out,
                "{:<10} {:>10.1} {:>9.3} {:>9.1} {:>9.2} {:>7} {:>9.2} {:>8.3}",
                name,
                m.total_kwh,
                m.temp_rmse_post_warmup,
                m.max_co2,
                m.pct_time_co2_over_limit,
                m.thermostat_cycles,
                m.comfort_band_occupancy,
                m.mean_fresh_flow
            );
        }
        if let Some(s) = self.savings_pct_vs_best_baseline {
            let _ = writeln!(out, "ppo-econ savings vs best baseline: {s:.2} %");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::Profiles;
    use crate::rl::PolicyMetadata;

    fn short(mut sc: Scenario) -> Scenario {
        sc.simulation.duration = 7200.0;
        sc.simulation.warmup_s = 600.0;
        sc
    }

    #[test]
    fn zero_load_pid_does_nothing() {
        let mut sc = Scenario::default();
        sc.profiles = Profiles::constant(22.0, 50.0, 0.0, 0.0);
        sc.simulation.initial.t_air = 22.0;
        sc.simulation.initial.t_wall = 22.0;
        let ep = run_episode(&sc, Mode::Pid, None).unwrap();
        assert!(ep.metrics.total_kwh.abs() < 1e-9, "{}", ep.metrics.total_kwh);
        assert!(ep.metrics.temp_rmse_post_warmup < 1e-9);
    }

    #[test]
    fn row_count_and_energy_additivity() {
        let sc = short(Scenario::default());
        for mode in [Mode::OnOff, Mode::Pid] {
            let ep = run_episode(&sc, mode, None).unwrap();
            assert_eq!(ep.trajectory.len(), 7200);
            assert!(ep.trajectory.windows(2).all(|w| w[1].t > w[0].t));
            let sum: f64 = ep.trajectory.iter().map(|r| r.q_coil).sum();
            let rel = (sum - ep.final_state.energy_j).abs() / ep.final_state.energy_j;
            assert!(rel < 1e-6, "{rel}");
            assert!(ep.trajectory.iter().all(|r| r.co2 >= 400.0));
        }
    }

    #[test]
    fn metrics_survive_csv_round_trip() {
        let sc = short(Scenario::default());
        let ep = run_episode(&sc, Mode::OnOff, None).unwrap();
        let mut buf = Vec::new();
        write_csv(&ep.trajectory, &mut buf).unwrap();
        let header = std::str::from_utf8(&buf).unwrap().lines().next().unwrap().to_owned();
        assert_eq!(header, CSV_HEADER.join(","));
        let rows = read_csv(buf.as_slice()).unwrap();
        assert_eq!(compute_metrics(&rows, &MetricsSettings::from(&sc)), ep.metrics);
    }

    #[test]
    fn learned_modes_need_a_policy() {
        let sc = short(Scenario::default());
        assert!(matches!(run_episode(&sc, Mode::PpoEcon, None), Err(Error::MissingPolicy(_))));
    }

    #[test]
    fn comparison_is_deterministic() {
        let sc = short(Scenario::default());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pol = Policy::init(&[8, 8], 0.0, PolicyMetadata::new(5, 0), &mut rng);
        let policies: BTreeMap<Mode, Policy> = [(Mode::PpoFixed, pol.clone()), (Mode::PpoEcon, pol)].into();
        let a = compare(&sc, &Mode::ALL, &policies).unwrap();
        let b = compare(&sc, &[Mode::PpoEcon, Mode::Pid, Mode::PpoFixed, Mode::OnOff], &policies).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.per_mode.len(), 4);
        assert!(a.savings_pct_vs_best_baseline.is_some());
        assert!(a.table().lines().count() >= 5);
    }

    #[test]
    fn savings_formula() {
        assert!((savings_pct(2609.0, 2760.0) - 5.471).abs() < 1e-3);
    }
}
