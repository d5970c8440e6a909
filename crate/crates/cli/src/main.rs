use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beaconmac_cli::{
    frame_csv, loss_band, run_experiment, validate_points, CliError, ExperimentSpec, OracleTable, ValidationOptions,
};
use beaconmac_core::time::{request_tx_time_tq, us_to_minislots};
use beaconmac_core::{ProtocolParams, ScenarioConfig};
use beaconmac_sim::{run_scenario, CSV_HEADER};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "beaconmac", version, about = "Beacon-scheduled MAC analysis and simulation harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Seed base; replication r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Simulated seconds per replication.
    #[arg(long = "duration-s")]
    duration_s: Option<f64>,
    /// Replications per grid point.
    #[arg(long)]
    reps: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment file and write its CSV table.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Shortest realtime frame meeting the loss target, per N.
    TrfMin {
        /// Call counts.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
        n: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Analytic against simulated voice loss; exits 1 if any row fails.
    Validate {
        #[arg(long, value_delimiter = ',', default_value = "4,6")]
        n: Vec<u32>,
        /// Frame lengths in mini-slots. Default: the 10-slot grid points whose
        /// analytic loss lies in [0.003, 0.1].
        #[arg(long = "t-rf", value_delimiter = ',')]
        t_rf: Vec<u32>,
        /// Non-realtime nodes sharing the channel.
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 0.0)]
        load: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Contention pmf: closed formula against enumeration.
    Oracle {
        #[arg(long = "n1-max", default_value_t = 4)]
        n1_max: u32,
        #[arg(long = "w-max", default_value_t = 8)]
        w_max: u32,
        /// Request duration in mini-slots (default: from the protocol constants).
        #[arg(long = "t-q")]
        t_q: Option<u32>,
        /// Differences above this are flagged.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario file and print its metrics row.
    Scenario {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io { path: p.to_path_buf(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn apply_common(cfg: &mut ScenarioConfig, c: &Common) {
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(d) = c.duration_s {
        cfg.duration_s = d;
    }
}

fn run(cmd: Cmd) -> Result<bool, CliError> {
    match cmd {
        Cmd::Run { spec, common } => {
            let mut spec = ExperimentSpec::parse(&read(&spec)?)?;
            apply_common(&mut spec.base, &common);
            if let Some(s) = common.seed {
                spec.seed = s;
            }
            if let Some(r) = common.reps {
                spec.reps = r;
            }
            if common.out.is_some() {
                spec.out = common.out;
            }
            let csv = run_experiment(&spec)?;
            if spec.out.is_none() {
                print!("{csv}");
            }
            Ok(true)
        }
        Cmd::TrfMin { n, common } => {
            emit(common.out.as_deref(), &frame_csv(&ProtocolParams::default(), &n)?)?;
            Ok(true)
        }
        Cmd::Validate { n, t_rf, k, load, common } => {
            let mut opts = ValidationOptions::default();
            opts.base.k_nonrealtime = k;
            opts.base.load_pkts_s = load;
            apply_common(&mut opts.base, &common);
            if let Some(r) = common.reps {
                opts.reps = r;
            }
            let mut points = Vec::new();
            for &ni in &n {
                let ts = if t_rf.is_empty() { loss_band(&opts.base.params, ni, (30, 300, 10), (0.003, 0.1))? } else { t_rf.clone() };
                points.extend(ts.into_iter().map(|t| (ni, t)));
            }
            let report = validate_points(&points, &opts)?;
            emit(common.out.as_deref(), &report.to_csv())?;
            let failures = report.failures();
            for f in &failures {
                eprintln!(
                    "FAIL N={} T_rf={}: analytic {:.4}, simulated {:.4}, tolerance {:.4}, monotone {}",
                    f.n,
                    f.t_rf,
                    f.analytic,
                    f.sim,
                    f.tolerance(),
                    f.monotone
                );
            }
            Ok(failures.is_empty())
        }
        Cmd::Oracle { n1_max, w_max, t_q, tol, out } => {
            let p = ProtocolParams::default();
            let t_q = t_q.unwrap_or_else(|| us_to_minislots(request_tx_time_tq(&p), &p));
            let table = OracleTable::build(n1_max, w_max, t_q, tol)?;
            emit(out.as_deref(), &table.to_csv())?;
            eprintln!(
                "{} rows, {} flagged, max |formula - oracle| = {:.3e}",
                table.rows.len(),
                table.flagged().len(),
                table.max_abs_diff()
            );
            Ok(true)
        }
        Cmd::Scenario { file, common } => {
            let mut cfg = ScenarioConfig::parse(&read(&file)?)?;
            apply_common(&mut cfg, &common);
            let m = run_scenario(&cfg)?;
            emit(common.out.as_deref(), &format!("{CSV_HEADER}\n{}\n", m.csv_row()))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
