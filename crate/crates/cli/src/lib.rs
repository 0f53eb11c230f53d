//! Command-line front end for the `optomech` library.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;
pub mod tasks;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use optomech::ModelVariant;

use config::{FigureId, Format, RunConfig, Settings, Task, Unit};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "optomech",
    version,
    about = "Probe response of a membrane-in-the-middle optomechanical cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ε_T, T and R over the grid.
    Response,
    /// Response plus group delay γτ and dispersion slope γK.
    Delay,
    /// Ideal-transparency conditions and delay bounds.
    Omit,
    /// Perfect-transmission points and delays there.
    Transmission,
    /// Two-port output powers for equal probes.
    Omia,
    /// ε_T from direct time integration.
    Oracle,
    /// Data behind one of the figures, with parameters fixed by the figure.
    Figure { id: FigureId },
    /// Run a named identity suite.
    Check { suite: String },
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// JSON file with any of the flag values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long = "omega-m", global = true, allow_negative_numbers = true)]
    pub omega_m: Option<f64>,
    /// Effective drive g₀²|c_s|²; defaults to the ideal-transparency value.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub g0: Option<f64>,
    #[arg(long = "eps-c", global = true, allow_negative_numbers = true)]
    pub eps_c: Option<f64>,
    #[arg(long = "delta-c", global = true, allow_negative_numbers = true)]
    pub delta_c: Option<f64>,
    /// exact, nrwa, rwa or nrwa-n0.
    #[arg(long, global = true)]
    pub variant: Option<ModelVariant>,
    /// start:stop:count in units of --unit.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub unit: Option<Unit>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl Options {
    fn settings(&self) -> Settings {
        Settings {
            gamma: self.gamma,
            kappa: self.kappa,
            omega_m: self.omega_m,
            beta: self.beta,
            g0: self.g0,
            eps_c: self.eps_c,
            delta_c: self.delta_c,
            variant: self.variant,
            grid: self.grid.clone(),
            unit: self.unit,
            format: self.format,
            out: self.out.clone(),
        }
    }

    /// Flags merged over the config file, if any.
    pub fn merged(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        Ok(self.settings().over(file))
    }
}

fn task_of(cmd: &Command) -> Option<Task> {
    Some(match cmd {
        Command::Response => Task::Response,
        Command::Delay => Task::Delay,
        Command::Omit => Task::Omit,
        Command::Transmission => Task::Transmission,
        Command::Omia => Task::Omia,
        Command::Oracle => Task::Oracle,
        Command::Figure { id } => Task::Figure(*id),
        Command::Check { .. } => return None,
    })
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::config("out", format!("{}: {e}", p.display()))
            })?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn execute(config: &RunConfig) -> Result<()> {
    let report = tasks::run(config)?;
    let mut w = open_output(&config.out)?;
    match config.format {
        Format::Csv => report.write_csv(&mut w)?,
        Format::Json => report.write_json(config, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn check(suite: &str, out: &Option<PathBuf>) -> Result<()> {
    let lines = checks::run_suite(suite)?;
    let mut w = open_output(out)?;
    for l in &lines {
        writeln!(w, "{l}")?;
    }
    let failed = lines.iter().filter(|l| !l.passed()).count();
    writeln!(
        w,
        "{} of {} checks passed",
        lines.len() - failed,
        lines.len()
    )?;
    w.flush()?;
    if failed > 0 {
        return Err(CliError::CheckFailed { failed });
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let settings = cli.opts.merged()?;
    match (&cli.command, task_of(&cli.command)) {
        (Command::Check { suite }, _) => check(suite, &settings.out),
        (_, Some(task)) => execute(&settings.resolve(task)?),
        (_, None) => unreachable!("every other command is a task"),
    }
}
