//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use optomech::{omia_conditions, EffectiveParams, ModelVariant, OmiaMode, OptomechParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Gamma,
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig6,
    Fig7,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "task", content = "id")]
pub enum Task {
    Response,
    Delay,
    Omit,
    Transmission,
    Omia,
    Oracle,
    Figure(FigureId),
}

/// Detuning grid `start:stop:count`, in units of γ or κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| CliError::config("grid", format!("`{s}`: {m}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(bad("expected start:stop:count"));
        };
        let start: f64 = start
            .trim()
            .parse()
            .map_err(|_| bad("start is not a number"))?;
        let stop: f64 = stop
            .trim()
            .parse()
            .map_err(|_| bad("stop is not a number"))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| bad("count is not a positive integer"))?;
        let g = GridSpec { start, stop, count };
        g.validate()?;
        Ok(g)
    }
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(CliError::config("grid", "count must be at least 2"));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(CliError::config("grid", "need finite start < stop"));
        }
        Ok(())
    }

    /// Grid values in the declared unit.
    pub fn values(&self) -> Vec<f64> {
        optomech::linspace(self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ParamBlock {
    Effective {
        gamma: f64,
        kappa: f64,
        omega_m: f64,
        beta: f64,
    },
    Physical {
        gamma: f64,
        kappa: f64,
        omega_m: f64,
        g0: f64,
        eps_c: f64,
        delta_c: f64,
    },
}

impl ParamBlock {
    pub fn gamma(&self) -> f64 {
        match *self {
            ParamBlock::Effective { gamma, .. } | ParamBlock::Physical { gamma, .. } => gamma,
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            ParamBlock::Effective { kappa, .. } | ParamBlock::Physical { kappa, .. } => kappa,
        }
    }

    pub fn physical(&self) -> Option<OptomechParams> {
        match *self {
            ParamBlock::Physical {
                gamma,
                kappa,
                omega_m,
                g0,
                eps_c,
                delta_c,
            } => Some(OptomechParams {
                omega_m,
                gamma,
                kappa,
                g0,
                eps_c,
                delta_c,
            }),
            ParamBlock::Effective { .. } => None,
        }
    }

    /// Effective parameters, solving for the steady state in physical mode.
    pub fn effective(&self) -> Result<EffectiveParams> {
        match *self {
            ParamBlock::Effective {
                gamma,
                kappa,
                omega_m,
                beta,
            } => EffectiveParams::new(gamma, kappa, omega_m, beta).context("effective parameters"),
            ParamBlock::Physical { .. } => {
                let p = self.physical().expect("physical block");
                Ok(EffectiveParams::from_physical(&p)
                    .context("steady state")?
                    .0)
            }
        }
    }
}

/// Everything a run needs, fully resolved. Serialized into JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub task: Task,
    pub params: ParamBlock,
    pub variant: ModelVariant,
    pub grid: GridSpec,
    pub unit: Unit,
    pub format: Format,
    /// Not serialized, so the same run written to two paths is identical.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Length of one grid unit in rate units.
    pub fn unit_scale(&self) -> f64 {
        match self.unit {
            Unit::Gamma => self.params.gamma(),
            Unit::Kappa => self.params.kappa(),
        }
    }
}

/// Optional settings, from a JSON file or from flags. Flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub omega_m: Option<f64>,
    pub beta: Option<f64>,
    pub g0: Option<f64>,
    pub eps_c: Option<f64>,
    pub delta_c: Option<f64>,
    pub variant: Option<ModelVariant>,
    pub grid: Option<String>,
    pub unit: Option<Unit>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
    }

    /// Values set here replace those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            gamma: self.gamma.or(base.gamma),
            kappa: self.kappa.or(base.kappa),
            omega_m: self.omega_m.or(base.omega_m),
            beta: self.beta.or(base.beta),
            g0: self.g0.or(base.g0),
            eps_c: self.eps_c.or(base.eps_c),
            delta_c: self.delta_c.or(base.delta_c),
            variant: self.variant.or(base.variant),
            grid: self.grid.or(base.grid),
            unit: self.unit.or(base.unit),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
        }
    }

    pub fn resolve(self, task: Task) -> Result<RunConfig> {
        let gamma = self.gamma.unwrap_or(1.0);
        let kappa = self.kappa.unwrap_or(1e4 * gamma);
        let omega_m = self.omega_m.unwrap_or(1e4 * gamma);
        let variant = self.variant.unwrap_or(ModelVariant::Nrwa);

        let physical = [
            ("g0", self.g0),
            ("eps_c", self.eps_c),
            ("delta_c", self.delta_c),
        ];
        let params = if physical.iter().any(|(_, v)| v.is_some()) {
            if self.beta.is_some() {
                return Err(CliError::config(
                    "beta",
                    "give either beta or g0/eps_c/delta_c, not both",
                ));
            }
            if let Some((name, _)) = physical.iter().find(|(_, v)| v.is_none()) {
                return Err(CliError::config(
                    *name,
                    "physical mode needs g0, eps_c and delta_c",
                ));
            }
            ParamBlock::Physical {
                gamma,
                kappa,
                omega_m,
                g0: self.g0.unwrap(),
                eps_c: self.eps_c.unwrap(),
                delta_c: self.delta_c.unwrap(),
            }
        } else {
            let beta = match self.beta {
                Some(b) => b,
                None => default_beta(&task, variant, gamma, kappa, omega_m)?,
            };
            ParamBlock::Effective {
                gamma,
                kappa,
                omega_m,
                beta,
            }
        };
        for (name, v) in [("gamma", gamma), ("kappa", kappa), ("omega_m", omega_m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::config(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }

        let (default_grid, default_unit) = task_defaults(&task);
        let grid = match self.grid {
            Some(s) => s.parse()?,
            None => default_grid,
        };
        Ok(RunConfig {
            task,
            params,
            variant,
            grid,
            unit: self.unit.unwrap_or(default_unit),
            format: self.format.unwrap_or(Format::Csv),
            out: self.out,
        })
    }
}

/// β when none is given: the two-port absorption drive for `omia`, the
/// ideal transparency drive otherwise.
fn default_beta(
    task: &Task,
    variant: ModelVariant,
    gamma: f64,
    kappa: f64,
    omega_m: f64,
) -> Result<f64> {
    if *task == Task::Omia {
        let mode = if variant.keeps_counter_rotating() {
            OmiaMode::Nrwa
        } else {
            OmiaMode::Rwa
        };
        return Ok(omia_conditions(mode, gamma, kappa, omega_m)
            .context("omia conditions")?
            .beta);
    }
    Ok(optomech::model::ideal_omit_beta(gamma, kappa, omega_m))
}

fn task_defaults(task: &Task) -> (GridSpec, Unit) {
    match task {
        Task::Oracle => (GridSpec::new(-20.0, 20.0, 21), Unit::Gamma),
        Task::Figure(FigureId::Fig4) => (GridSpec::new(-500.0, 500.0, 2001), Unit::Gamma),
        Task::Figure(FigureId::Fig7) => (GridSpec::new(-5.0, 5.0, 1001), Unit::Kappa),
        Task::Figure(_) => (GridSpec::new(-20.0, 20.0, 4001), Unit::Gamma),
        _ => (GridSpec::new(-20.0, 20.0, 401), Unit::Gamma),
    }
}
