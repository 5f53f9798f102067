//! Command-line front end.
//!
//! Exit status: 0 when every check passes, 2 when checks ran and at least
//! one failed, 1 on input or usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::arm::torque_profile;
use crate::config::{self, DesignConfig};
use crate::error::{Error, Result};
use crate::report::{force_curve_csv, input_digest, profile_csv, Format, Report};
use crate::sim::{run_simulation, SimOutcome, SimTrace};
use crate::sizing::{available_force, sizing_report};
use crate::structural::{structural_report, FeaReference};

/// Samples along the lift in the report's torque profile.
pub const PROFILE_STEPS: usize = 10;
/// Simulated time after the last trace event when no duration is given.
pub const DEFAULT_SETTLE_S: f64 = 3.0;
/// Simulated duration for an empty trace when no duration is given.
pub const DEFAULT_EMPTY_DURATION_S: f64 = 5.0;
pub const DEFAULT_STEP_S: f64 = 0.01;
/// Command time used by `report` when no trace is given.
pub const CANONICAL_COMMAND_S: f64 = 1.0;

#[derive(Debug, Parser)]
#[command(name = "exoarm", version, about = "Pneumatic exoskeleton arm sizing, simulation and structural checks")]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Design configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Force chain, bore selection, stroke and force margin.
    Size {
        #[command(flatten)]
        config: ConfigArg,
        /// Report file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the command chain against a sensor trace.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Trace CSV with columns time_s,channel,value.
        #[arg(short, long)]
        trace: PathBuf,
        /// Simulated time in seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Sample step in seconds.
        #[arg(long, default_value_t = DEFAULT_STEP_S)]
        step: f64,
        /// Output directory for trajectory.csv and the summary.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Stress and factor-of-safety checks for the support components.
    Analyze {
        #[command(flatten)]
        config: ConfigArg,
        /// Report file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Include the FEA reference table.
        #[arg(long)]
        show_reference: bool,
    },
    /// Everything above in one document plus curve files.
    Report {
        #[command(flatten)]
        config: ConfigArg,
        /// Trace CSV; a single command at 1 s when omitted.
        #[arg(short, long)]
        trace: Option<PathBuf>,
        /// Output directory; the report goes to stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let format = cli.format;
    match cli.command {
        Command::Size { config, out } => {
            let (cfg, text) = load(&config.config)?;
            let mut report = Report::new(input_digest([text.as_bytes()]));
            add_sizing(&mut report, &cfg)?;
            emit(&report, format, out.as_deref())
        }
        Command::Simulate { config, trace, duration, step, out } => {
            let (cfg, text) = load(&config.config)?;
            let trace_text = config::read_text(&trace)?;
            let sim_trace = parse_trace(&trace_text, &trace)?;
            let outcome = simulate(&cfg, &sim_trace, duration, step)?;
            let mut report = Report::new(input_digest([text.as_bytes(), trace_text.as_bytes()]));
            report.add_simulation(outcome.summary.clone());
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
                    write_atomic(&dir.join("trajectory.csv"), &outcome.trajectory.to_csv())?;
                    write_atomic(&dir.join(summary_name(format)), &report.render(format))?;
                }
                None => print!("{}", report.render(format)),
            }
            Ok(report.exit_code())
        }
        Command::Analyze { config, out, show_reference } => {
            let (cfg, text) = load(&config.config)?;
            let mut report = Report::new(input_digest([text.as_bytes()]));
            add_structural(&mut report, &cfg)?;
            if show_reference {
                report.reference = Some(FeaReference::default());
            }
            emit(&report, format, out.as_deref())
        }
        Command::Report { config, trace, out } => {
            let (cfg, text) = load(&config.config)?;
            let (sim_trace, trace_text) = match &trace {
                Some(path) => {
                    let t = config::read_text(path)?;
                    (parse_trace(&t, path)?, Some(t))
                }
                None => (SimTrace::pulses(&[CANONICAL_COMMAND_S], 0.1, 1.0)?, None),
            };
            let mut inputs = vec![text.as_bytes()];
            inputs.extend(trace_text.as_deref().map(str::as_bytes));
            let mut report = Report::new(input_digest(inputs));
            add_sizing(&mut report, &cfg)?;
            let outcome = simulate(&cfg, &sim_trace, None, DEFAULT_STEP_S)?;
            report.add_simulation(outcome.summary.clone());
            add_structural(&mut report, &cfg)?;
            let geometry = cfg.geometry();
            let rows = torque_profile(&geometry, &cfg.load_case(), cfg.sweep()?, PROFILE_STEPS)?;
            let cylinder = cfg.cylinder();
            let available = available_force(&cylinder, cylinder.acting_side);
            report.add_profile(&rows, available);
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
                    let name = match format {
                        Format::Text => "report.txt",
                        Format::Json => "report.json",
                    };
                    write_atomic(&dir.join(name), &report.render(format))?;
                    write_atomic(&dir.join("torque_profile.csv"), &profile_csv(&rows))?;
                    write_atomic(&dir.join("force_vs_angle.csv"), &force_curve_csv(&rows, available))?;
                    write_atomic(&dir.join("trajectory.csv"), &outcome.trajectory.to_csv())?;
                }
                None => print!("{}", report.render(format)),
            }
            Ok(report.exit_code())
        }
    }
}

fn load(path: &Path) -> Result<(DesignConfig, String)> {
    let text = config::read_text(path)?;
    let cfg = config::load_config(path).map_err(|e| in_file(path, e))?;
    Ok((cfg, text))
}

fn parse_trace(text: &str, path: &Path) -> Result<SimTrace> {
    SimTrace::from_csv(text.as_bytes()).map_err(|e| in_file(path, e))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        e @ Error::Io { .. } => e,
        other => Error::Input { path: path.to_path_buf(), source: Box::new(other) },
    }
}

fn add_sizing(report: &mut Report, cfg: &DesignConfig) -> Result<()> {
    let p = &cfg.pneumatics;
    let sizing = sizing_report(
        &cfg.geometry(),
        &cfg.load_case(),
        p.pressure_pa,
        p.rod_diameter_m,
        &cfg.catalog()?,
        cfg.sweep()?,
    )?;
    report.add_sizing(sizing);
    Ok(())
}

fn add_structural(report: &mut Report, cfg: &DesignConfig) -> Result<()> {
    let structural = structural_report(&cfg.structural_cases(), &cfg.material()?, &FeaReference::default());
    report.add_structural(structural);
    Ok(())
}

fn simulate(cfg: &DesignConfig, trace: &SimTrace, duration: Option<f64>, step: f64) -> Result<SimOutcome> {
    let duration = duration.unwrap_or_else(|| match trace.last_time() {
        Some(t) => t.as_secs() + DEFAULT_SETTLE_S,
        None => DEFAULT_EMPTY_DURATION_S,
    });
    run_simulation(&cfg.sim_setup()?, trace, duration, step)
}

fn summary_name(format: Format) -> &'static str {
    match format {
        Format::Text => "summary.txt",
        Format::Json => "summary.json",
    }
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<i32> {
    let rendered = report.render(format);
    match out {
        Some(path) => write_atomic(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(report.exit_code())
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
