//! Command-line front end. Exit codes: 0 success, 1 flagged result or I/O
//! failure, 2 configuration or usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::exec::Execution;
use crate::io::{
    comparison_csv, load_config, optimum_csv, sweep_csv, trajectory_csv, write_atomic, ConfigError, RunConfig,
};
use crate::models::{regime_report, to_mhz, STRONG_MARGIN};
use crate::observables::{merit_report, RELIABLE_RESIDUAL};
use crate::solvers::{integrate, Solver};
use crate::sweep::{compare_protocols, grid_sweep, optimize_inner, Protocol};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FLAGGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "photon-gun", version, about = "Cavity-QED single-photon source simulation and drive optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Config file, or the name of a bundled config (e.g. paper_fig2).
    #[arg(long)]
    config: String,
    /// Output CSV; tables go to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Schedule {
    /// Evaluate points one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

impl Schedule {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one configuration; prints figures of merit, writes the time series to --out.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "conditional", value_parser = parse_solver)]
        solver: Solver,
    },
    /// Evaluate the objective on the [[task.axis]] grid, optimizing [[task.free]] at each point.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
    },
    /// Maximize the objective over the [[task.free]] parameters.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
    },
    /// Optimized constant-pump and ramp-on protocols for each task.kappa_over_gamma.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        schedule: Schedule,
    },
    /// Cooperativity and regime margins of a configuration.
    Regime {
        /// Config file, or the name of a bundled config.
        #[arg(long)]
        config: String,
    },
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    match s {
        "conditional" => Ok(Solver::Conditional),
        "master" => Ok(Solver::Master),
        _ => Err(format!("unknown solver `{s}` (expected conditional or master)")),
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] Error),
    #[error("cannot write `{path}`: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(
                Error::InvalidConfig(_)
                | Error::InvalidCutoff(_)
                | Error::ZeroDetuning
                | Error::StepTooLarge { .. }
                | Error::Unsupported(_)
                | Error::KindMismatch { .. },
            ) => EXIT_CONFIG,
            CliError::Model(_) | CliError::Write { .. } => EXIT_FLAGGED,
        }
    }
}

/// Run the command line `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_atomic(path, text).map_err(|e| CliError::Write { path: path.display().to_string(), source: e })
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Write { path: "<stdout>".into(), source: e }),
    }
}

fn say(stdout: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    stdout.write_fmt(text).map_err(|e| CliError::Write { path: "<stdout>".into(), source: e })
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Simulate { common, solver } => {
            let cfg = load_config(&common.config)?;
            let traj = integrate(&cfg.model, &cfg.integration, solver)?;
            let report = merit_report(&traj, cfg.readout());
            say(
                stdout,
                format_args!(
                    "model            {}\nsolver           {}\ndt_ns            {:.6}\n{report}",
                    cfg.model.kind,
                    solver.name(),
                    cfg.integration.dt
                ),
            )?;
            if let Some(path) = &common.out {
                emit(Some(path), &trajectory_csv(&traj), stdout)?;
            }
            Ok(if report.residual > RELIABLE_RESIDUAL { EXIT_FLAGGED } else { EXIT_OK })
        }
        Command::Sweep { common, schedule } => {
            let cfg = load_config(&common.config)?;
            let result = grid_sweep(&cfg.sweep_spec()?, schedule.exec())?;
            emit(common.out.as_deref(), &sweep_csv(&result), stdout)?;
            Ok(if result.points.iter().any(|p| p.value.is_none()) { EXIT_FLAGGED } else { EXIT_OK })
        }
        Command::Optimize { common, schedule } => {
            let cfg = load_config(&common.config)?;
            let free = cfg.free()?;
            if free.is_empty() {
                return Err(ConfigError::MissingKey { section: "task", key: "free" }.into());
            }
            let opt =
                optimize_inner(&cfg.model, &free, cfg.objective(), &cfg.policy(), &cfg.search(), schedule.exec())?;
            emit(common.out.as_deref(), &optimum_csv(cfg.objective(), &opt), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Compare { common, schedule } => {
            let cfg = load_config(&common.config)?;
            let table =
                compare_protocols(&cfg.model, &cfg.kappa_over_gamma(), &cfg.compare_options(), schedule.exec())?;
            emit(common.out.as_deref(), &comparison_csv(&table), stdout)?;
            if common.out.is_some() {
                for objective in &table.objectives {
                    for p in [Protocol::ConstantRaman, Protocol::AdiabaticRamp] {
                        let spread = table.spread(p, *objective).map_or("n/a".into(), |s| format!("{s:.6}"));
                        say(stdout, format_args!("spread {:<10} {:<14} {spread}\n", p.key(), objective.key()))?;
                    }
                }
            }
            Ok(if table.is_flagged() { EXIT_FLAGGED } else { EXIT_OK })
        }
        Command::Regime { config } => {
            let cfg = load_config(&config)?;
            say(stdout, format_args!("{}", regime_text(&cfg)))?;
            Ok(EXIT_OK)
        }
    }
}

fn regime_text(cfg: &RunConfig) -> String {
    let c = &cfg.model;
    let r = regime_report(c);
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut s = format!(
        "model                 {}\n\
         g, kappa, gamma (MHz) {:.4}, {:.4}, {:.4}  (times 2pi)\n\
         cooperativity         {:.6}\n\
         critical_atom_number  {:.6}\n\
         kappa^2/g^2           {:.6}\n\
         g^2/(kappa gamma)     {:.6}\n\
         bad_cavity            {}  (both margins >= {STRONG_MARGIN})\n",
        c.kind,
        to_mhz(c.g),
        to_mhz(c.kappa),
        to_mhz(c.gamma),
        r.cooperativity,
        r.critical_atom_number,
        r.cavity_margin,
        r.atom_margin,
        yes(r.bad_cavity_ok),
    );
    if let Some(w) = r.raman_window {
        s.push_str(&format!(
            "raman_window          kappa/g {:.6} < Omega/Delta {:.6} < g/gamma {:.6}: {}\n",
            w.lower,
            w.ratio,
            w.upper,
            yes(w.inside)
        ));
    }
    s
}
