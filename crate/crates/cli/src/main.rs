//! `ahu`: simulate, train, evaluate and compare AHU controllers.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ahu_core::harness::{self, write_csv};
use ahu_core::rl::ProgressRecord;
use ahu_core::{ppo_train, ConfigError, Mode, Policy, Scenario};
use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ahu", version, about = "Single-zone AHU simulation and control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its trajectory as CSV; metrics JSON goes to stdout.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "onoff")]
        mode: Mode,
        /// Policy file, required for ppo and ppo-econ.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Trajectory CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a PPO policy; progress CSV goes to stdout.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "ppo")]
        mode: Mode,
        #[arg(long)]
        timesteps: Option<u64>,
        /// Policy output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a saved policy for one episode and print its metrics as JSON.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "ppo")]
        mode: Mode,
        #[arg(long)]
        policy: PathBuf,
        /// Write the metrics here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several modes on the same scenario and report energy savings.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Modes to run (repeatable); all four by default.
        #[arg(long)]
        mode: Vec<Mode>,
        /// Policy used by the learned modes.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Train a policy in memory when none is given.
        #[arg(long)]
        train_missing: bool,
        #[arg(long)]
        timesteps: Option<u64>,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse a scenario and print it with every default filled in.
    ValidateScenario {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Physics step, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Seconds between agent decisions.
    #[arg(long)]
    control_interval: Option<f64>,
    /// Suppress tables and progress output.
    #[arg(long)]
    quiet: bool,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        if e.chain().any(|c| c.downcast_ref::<ConfigError>().is_some() || is_config(c)) {
            Failure::Usage(e)
        } else {
            Failure::Runtime(e)
        }
    }
}

fn is_config(e: &(dyn std::error::Error + 'static)) -> bool {
    matches!(e.downcast_ref::<ahu_core::Error>(), Some(ahu_core::Error::Config(_)))
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

impl Common {
    fn scenario(&self) -> Result<Scenario, Failure> {
        let mut sc = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        if let Some(seed) = self.seed {
            sc.simulation.seed = seed;
            sc.training.seed = seed;
        }
        if let Some(dt) = self.dt {
            sc.simulation.dt = dt;
        }
        if let Some(ci) = self.control_interval {
            sc.training.control_interval_s = ci;
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_policy(path: &Path) -> Result<Policy, Failure> {
    Policy::load(path).map_err(|e| Failure::Runtime(e.into()))
}

fn learned(mode: Mode) -> Result<Mode, Failure> {
    if mode.is_learned() {
        Ok(mode)
    } else {
        Err(usage(format!("mode {mode} has no policy to train or evaluate")))
    }
}

fn train(sc: &Scenario, mode: Mode, quiet: bool) -> Result<Policy, Failure> {
    let stdout = io::stdout();
    let mut progress = csv::Writer::from_writer(stdout.lock());
    let mut failed = None;
    let outcome = ppo_train(sc, &sc.training, mode, |rec: &ProgressRecord| {
        if !quiet && failed.is_none() {
            if let Err(e) = progress.serialize(rec).and_then(|_| Ok(progress.flush()?)) {
                failed = Some(e);
            }
        }
    })
    .map_err(|e| Failure::Runtime(e.into()))?;
    if let Some(e) = failed {
        return Err(Failure::Runtime(e.into()));
    }
    Ok(outcome.policy)
}

fn to_json_line<T: serde::Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            common,
            mode,
            policy,
            out,
        } => {
            let sc = common.scenario()?;
            let policy = match (mode.is_learned(), policy) {
                (true, None) => return Err(usage(format!("mode {mode} needs --policy"))),
                (true, Some(p)) => Some(load_policy(&p)?),
                (false, _) => None,
            };
            let ep = harness::run_episode(&sc, mode, policy.as_ref())?;
            let mut w = create(&out)?;
            write_csv(&ep.trajectory, &mut w)?;
            w.flush()?;
            print!("{}", to_json_line(&ep.metrics)?);
        }
        Command::Train {
            common,
            mode,
            timesteps,
            out,
        } => {
            let mut sc = common.scenario()?;
            let mode = learned(mode)?;
            if let Some(n) = timesteps {
                sc.training.total_timesteps = n;
                sc.validate()?;
            }
            let policy = train(&sc, mode, common.quiet)?;
            policy.save(&out).map_err(|e| Failure::Runtime(e.into()))?;
            log::info!("policy written to {}", out.display());
        }
        Command::Evaluate {
            common,
            mode,
            policy,
            out,
        } => {
            let sc = common.scenario()?;
            let mode = learned(mode)?;
            let policy = load_policy(&policy)?;
            let ep = harness::run_episode(&sc, mode, Some(&policy))?;
            let text = to_json_line(&ep.metrics)?;
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Compare {
            common,
            mode,
            policy,
            train_missing,
            timesteps,
            out,
        } => {
            let mut sc = common.scenario()?;
            if let Some(n) = timesteps {
                sc.training.total_timesteps = n;
                sc.validate()?;
            }
            let mut modes = if mode.is_empty() { Mode::ALL.to_vec() } else { mode };
            modes.sort();
            modes.dedup();
            let mut policies = BTreeMap::new();
            if modes.iter().any(|m| m.is_learned()) {
                let pol = match (policy, train_missing) {
                    (Some(p), _) => load_policy(&p)?,
                    (None, true) => {
                        log::info!("training a policy for the learned modes");
                        // Progress would interleave with the table, so train quietly.
                        train(&sc, Mode::PpoFixed, true)?
                    }
                    (None, false) => return Err(usage("learned modes need --policy or --train-missing")),
                };
                for m in modes.iter().filter(|m| m.is_learned()) {
                    policies.insert(*m, pol.clone());
                }
            }
            let report = harness::compare(&sc, &modes, &policies)?;
            std::fs::write(&out, report.to_json()).with_context(|| format!("cannot write {}", out.display()))?;
            if !common.quiet {
                print!("{}", report.table());
            }
        }
        Command::ValidateScenario { common } => {
            if common.scenario.is_none() {
                return Err(usage("validate-scenario needs --scenario"));
            }
            let sc = common.scenario()?;
            print!("{}", sc.to_toml_string());
            if !common.quiet {
                eprintln!("scenario ok, hash {}", sc.hash());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AHU_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
