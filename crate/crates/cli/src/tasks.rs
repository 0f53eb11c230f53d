//! Task execution: turns a resolved configuration into a report.

use optomech::oracle::integrate_linearized_batch;
use optomech::response::spectrum;
use optomech::{
    delay_bounds, delay_curve, epsilon_t, integrate_nonlinear, omia_conditions, omia_response,
    omit_conditions, steady_state, transmission_points, Complex64, EffectiveParams, Execution,
    IntegrationConfig, ModelVariant, OmiaMode, SidebandSystem, TwoPortDrive,
};

use crate::config::{FigureId, ParamBlock, RunConfig, Task};
use crate::error::{CliError, Context, Result};
use crate::report::{Report, ReportRow};

/// Probe-to-pump ratio used by the nonlinear oracle task.
pub const ORACLE_PROBE_RATIO: f64 = 1e-4;

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match &cfg.task {
        Task::Response => Ok(Report::Rows(response_rows(
            cfg.variant,
            &cfg.params.effective()?,
            cfg,
        )?)),
        Task::Delay => Ok(Report::Rows(delay_rows(
            cfg.variant,
            &cfg.params.effective()?,
            cfg,
        )?)),
        Task::Omit => omit_summary(&cfg.params.effective()?),
        Task::Transmission => transmission_summary(cfg.variant, &cfg.params.effective()?),
        Task::Omia => Ok(Report::Rows(omia_rows(
            cfg.variant,
            &cfg.params.effective()?,
            cfg,
        )?)),
        Task::Oracle => oracle_rows(cfg),
        Task::Figure(id) => figure(*id, cfg),
    }
}

/// Detunings in rate units for the configured grid.
fn rates(cfg: &RunConfig, scale: f64) -> Vec<f64> {
    cfg.grid.values().into_iter().map(|v| v * scale).collect()
}

fn sample_row(x_unit: f64, s: &optomech::ResponseSample) -> ReportRow {
    ReportRow {
        x: x_unit,
        re_eps_t: Some(s.eps_t.re),
        im_eps_t: Some(s.eps_t.im),
        t: Some(s.transmission),
        r: Some(s.reflection),
        ..ReportRow::default()
    }
}

fn response_rows(
    variant: ModelVariant,
    eff: &EffectiveParams,
    cfg: &RunConfig,
) -> Result<Vec<ReportRow>> {
    let units = cfg.grid.values();
    let xs = rates(cfg, unit_length(cfg, eff));
    let spec = spectrum(variant, eff, &xs).context("response spectrum")?;
    Ok(units
        .iter()
        .zip(&spec.samples)
        .map(|(&u, s)| sample_row(u, s))
        .collect())
}

fn delay_rows(
    variant: ModelVariant,
    eff: &EffectiveParams,
    cfg: &RunConfig,
) -> Result<Vec<ReportRow>> {
    let mut rows = response_rows(variant, eff, cfg)?;
    let xs = rates(cfg, unit_length(cfg, eff));
    let curve = delay_curve(variant, eff, &xs).context("delay curve")?;
    for ((row, tau), slope) in rows.iter_mut().zip(&curve.tau).zip(&curve.slope) {
        row.gamma_tau = tau.map(|t| eff.gamma * t);
        row.gamma_k = Some(eff.gamma * slope);
    }
    Ok(rows)
}

fn omia_rows(
    variant: ModelVariant,
    eff: &EffectiveParams,
    cfg: &RunConfig,
) -> Result<Vec<ReportRow>> {
    let mut rows = response_rows(variant, eff, cfg)?;
    let xs = rates(cfg, unit_length(cfg, eff));
    for (row, &x) in rows.iter_mut().zip(&xs) {
        let o = omia_response(
            variant,
            eff,
            &TwoPortDrive::symmetric(Complex64::new(1.0, 0.0), x),
        )
        .context("two-port response")?;
        row.out_l_power = o.power_l;
        row.out_r_power = o.power_r;
    }
    Ok(rows)
}

/// γ or κ of the parameters actually used (figures replace the configured ones).
fn unit_length(cfg: &RunConfig, eff: &EffectiveParams) -> f64 {
    match cfg.unit {
        crate::config::Unit::Gamma => eff.gamma,
        crate::config::Unit::Kappa => eff.kappa,
    }
}

fn omit_summary(eff: &EffectiveParams) -> Result<Report> {
    let c =
        omit_conditions(eff.gamma, eff.kappa, eff.omega_m).context("transparency conditions")?;
    let b = delay_bounds(eff.gamma, eff.kappa, eff.omega_m).context("delay bounds")?;
    Ok(Report::Summary(vec![
        ("x_dip".into(), c.x_dip),
        ("beta_ideal".into(), c.beta_ideal),
        ("beta".into(), eff.beta),
        ("width".into(), c.width),
        ("validity_ratio".into(), c.validity_ratio),
        ("tau_max".into(), b.tau_max),
        ("k_max".into(), b.k_max),
        ("tau_m".into(), b.tau_m),
        ("tau_max_over_tau_m".into(), b.ratio),
    ]))
}

fn transmission_summary(variant: ModelVariant, eff: &EffectiveParams) -> Result<Report> {
    let tp = transmission_points(eff).context("transmission points")?;
    let t_at = |x: f64| epsilon_t(variant, eff, x).map(|s| s.transmission);
    Ok(Report::Summary(vec![
        ("x_plus".into(), tp.x_plus),
        ("x_minus".into(), tp.x_minus),
        ("x_plus_approx".into(), tp.x_plus_approx),
        ("x_minus_approx".into(), tp.x_minus_approx),
        (
            "t_at_x_plus".into(),
            t_at(tp.x_plus).context("transmission")?,
        ),
        (
            "t_at_x_minus".into(),
            t_at(tp.x_minus).context("transmission")?,
        ),
        ("tau_plus".into(), tp.tau_plus),
        ("tau_minus".into(), tp.tau_minus),
        ("tau_approx".into(), tp.tau_approx),
    ]))
}

fn oracle_rows(cfg: &RunConfig) -> Result<Report> {
    let eff = cfg.params.effective()?;
    let units = cfg.grid.values();
    let xs = rates(cfg, unit_length(cfg, &eff));
    let icfg = IntegrationConfig::default();
    let eps_t: Vec<Complex64> = match cfg.params {
        ParamBlock::Effective { .. } => {
            let sys = SidebandSystem::from_effective(&eff);
            let points: Vec<(SidebandSystem, f64)> =
                xs.iter().map(|&x| (sys, eff.omega_m + x)).collect();
            let unit = Complex64::new(1.0, 0.0);
            integrate_linearized_batch(&points, unit, &icfg, Execution::Parallel)
                .into_iter()
                .map(|r| {
                    r.map(|run| run.eps_t(eff.kappa))
                        .context("linearized oracle")
                })
                .collect::<Result<_>>()?
        }
        ParamBlock::Physical { .. } => {
            let p = cfg.params.physical().expect("physical block");
            let ss = steady_state(&p).context("steady state")?;
            let eps_p = Complex64::new(ORACLE_PROBE_RATIO * p.eps_c, 0.0);
            xs.iter()
                .map(|&x| {
                    integrate_nonlinear(&p, &ss, p.omega_m + x, eps_p, &icfg)
                        .map(|run| run.eps_t(p.kappa))
                        .context("nonlinear oracle")
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(Report::Rows(
        units
            .iter()
            .zip(eps_t)
            .map(|(&u, e)| ReportRow {
                x: u,
                re_eps_t: Some(e.re),
                im_eps_t: Some(e.im),
                t: Some(e.norm_sqr()),
                r: Some((e - 1.0).norm_sqr()),
                ..ReportRow::default()
            })
            .collect(),
    ))
}

/// Parameters each figure is drawn with; the configured ones are ignored.
pub fn figure_params(id: FigureId) -> Result<Vec<(String, ModelVariant, EffectiveParams)>> {
    let ideal = |g, k, w| EffectiveParams::ideal_omit(g, k, w).context("figure parameters");
    let omia = |mode, g: f64, k: f64, w: f64| -> Result<EffectiveParams> {
        let c = omia_conditions(mode, g, k, w).context("figure parameters")?;
        EffectiveParams::new(g, k, w, c.beta).context("figure parameters")
    };
    Ok(match id {
        FigureId::Fig2 => {
            let eff = ideal(1.0, 1e4, 1e4)?;
            vec![
                ("nrwa".into(), ModelVariant::Nrwa, eff),
                ("nrwa-n0".into(), ModelVariant::NrwaNoN, eff),
            ]
        }
        FigureId::Fig3 => vec![("nrwa".into(), ModelVariant::Nrwa, ideal(1.0, 1e4, 1e4)?)],
        FigureId::Fig4 => vec![("nrwa".into(), ModelVariant::Nrwa, ideal(1.0, 1e3, 1e4)?)],
        FigureId::Fig6 => {
            let resolved = omia(OmiaMode::Nrwa, 1.0, 1e3, 1e4)?;
            let unresolved = omia(OmiaMode::Nrwa, 1.0, 2e4, 1e4)?;
            vec![
                ("resolved".into(), ModelVariant::Nrwa, resolved),
                ("resolved-n0".into(), ModelVariant::NrwaNoN, resolved),
                ("unresolved".into(), ModelVariant::Nrwa, unresolved),
                ("unresolved-n0".into(), ModelVariant::NrwaNoN, unresolved),
            ]
        }
        FigureId::Fig7 => {
            let kappa = 1.0;
            [
                ("gamma=0.1kappa", 0.1),
                ("gamma=kappa", 1.0),
                ("gamma=2kappa", 2.0),
            ]
            .into_iter()
            .map(|(name, f)| {
                Ok((
                    name.to_string(),
                    ModelVariant::Rwa,
                    omia(OmiaMode::Rwa, f * kappa, kappa, 10.0)?,
                ))
            })
            .collect::<Result<_>>()?
        }
    })
}

fn figure(id: FigureId, cfg: &RunConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (name, variant, eff) in figure_params(id)? {
        let rows = match id {
            FigureId::Fig2 => response_rows(variant, &eff, cfg)?,
            FigureId::Fig3 | FigureId::Fig4 => delay_rows(variant, &eff, cfg)?,
            FigureId::Fig6 | FigureId::Fig7 => omia_rows(variant, &eff, cfg)?,
        };
        out.extend(rows.into_iter().map(|r| (name.clone(), r)));
    }
    if out.is_empty() {
        return Err(CliError::config("figure", "no series"));
    }
    Ok(Report::Series(out))
}
