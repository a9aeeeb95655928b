//! Command-line surface: `run`, `compare`, `sweep`, and `analyze` over a
//! JSON config. Exit codes: 0 success, 1 usage error, 2 config error,
//! 3 runtime or numeric error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::analytic::ClosedLoopModel;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::disturbance_power;
use crate::{output, scenario};

#[derive(Debug, Parser)]
#[command(
    name = "ffrsim",
    version,
    about = "Grid frequency dynamics with a frequency-responsive data center"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigOpts {
    /// JSON config file; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config value, e.g. --set grid.inertia_h=4. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct OutOpt {
    /// Directory for output files; created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario; write its time series CSV and metrics JSON.
    Run {
        #[command(flatten)]
        config: ConfigOpts,
        #[command(flatten)]
        out: OutOpt,
    },
    /// Simulate baseline, ups_only, and coordinated cases on the same grid.
    Compare {
        #[command(flatten)]
        config: ConfigOpts,
        #[command(flatten)]
        out: OutOpt,
    },
    /// Run the gain/inertia sensitivity grid; write the sweep CSV.
    Sweep {
        #[command(flatten)]
        config: ConfigOpts,
        #[command(flatten)]
        out: OutOpt,
    },
    /// Print the small-signal model (poles, steady state, nadir) as JSON.
    Analyze {
        #[command(flatten)]
        config: ConfigOpts,
    },
}

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code instead of exiting, so both `main` and tests can call it.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(opts: &ConfigOpts) -> Result<Config> {
    match &opts.config {
        Some(path) => Config::from_file(path, &opts.set),
        None => Config::from_text("{}", &opts.set),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::OutputIo {
        path: dir.display().to_string(),
        source,
    })
}

/// timeseries.csv -> timeseries_baseline.csv and so on.
fn per_case_name(base: &str, case: &str) -> String {
    match base.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_{case}.{ext}"),
        None => format!("{base}_{case}"),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let series = scenario::run(&cfg.scenario)?;
            let metrics = scenario::compute_metrics(&series, &cfg.scenario);
            let case = scenario::CaseResult {
                mode: cfg.scenario.mode,
                series,
                metrics,
                nadir_improvement: None,
            };
            ensure_dir(&out.out)?;
            let ts_path = out.out.join(&cfg.output.timeseries);
            output::write_timeseries(&case.series, &ts_path)?;
            let metrics_path = out.out.join(&cfg.output.metrics);
            output::write_metrics(std::slice::from_ref(&case), &cfg.provenance, &metrics_path)?;
            println!("wrote {}", ts_path.display());
            println!("wrote {}", metrics_path.display());
            Ok(())
        }
        Command::Compare { config, out } => {
            let cfg = load(&config)?;
            let cases = scenario::compare_cases(&cfg.scenario)?;
            ensure_dir(&out.out)?;
            for case in &cases {
                let path = out
                    .out
                    .join(per_case_name(&cfg.output.timeseries, case.mode.as_str()));
                output::write_timeseries(&case.series, &path)?;
                println!("wrote {}", path.display());
            }
            let metrics_path = out.out.join(&cfg.output.metrics);
            output::write_metrics(&cases, &cfg.provenance, &metrics_path)?;
            println!("wrote {}", metrics_path.display());
            Ok(())
        }
        Command::Sweep { config, out } => {
            let cfg = load(&config)?;
            let cells = scenario::sweep(
                &cfg.scenario,
                &cfg.sweep.k_dc_mw_per_hz,
                &cfg.sweep.h_s,
                cfg.sweep.workers,
            )?;
            ensure_dir(&out.out)?;
            let path = out.out.join(&cfg.output.sweep);
            output::write_sweep(&cells, &path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Analyze { config } => {
            let cfg = load(&config)?;
            let grid = &cfg.scenario.grid;
            let model = ClosedLoopModel {
                h: grid.inertia_h,
                d: grid.damping_d,
                k_dc: cfg.provenance.derived.k_dc_pu,
                tau: cfg.scenario.dc.tau_dc,
                f0: grid.f0,
            };
            let dp = disturbance_power(
                &cfg.scenario.disturbance,
                cfg.scenario.disturbance.t_start,
                grid.s_sys,
            );
            print!("{}", output::render_analysis(&model, dp)?);
            Ok(())
        }
    }
}
