//! Named identity suites for `check <suite>`.

use optomech::analysis::{slope_at_window, time_delay_numeric, Channel};
use optomech::response::eps_t_value;
use optomech::{
    delay_bounds, find_extremum, integrate_linearized, linspace, omia_conditions, omia_response,
    omit_conditions, solve_sidebands, transmission_points, window_fwhm, Complex64, EffectiveParams,
    ExtremumKind, IntegrationConfig, ModelVariant, OmiaMode, SidebandSystem, TwoPortDrive,
};

use crate::error::{CliError, Context, Result};

pub const SUITES: [&str; 7] = [
    "delay-identities",
    "ringdown",
    "omit",
    "transmission",
    "omia",
    "oracle",
    "all",
];

/// One reported identity: measured residual against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub suite: &'static str,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {}  residual {:.3e}  tolerance {:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.residual,
            self.tolerance
        )
    }
}

struct Lines {
    suite: &'static str,
    out: Vec<CheckLine>,
}

impl Lines {
    fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.out.push(CheckLine {
            suite: self.suite,
            name: name.into(),
            // NaN must fail
            residual: if residual.is_nan() {
                f64::INFINITY
            } else {
                residual
            },
            tolerance,
        });
    }
}

const LADDER: [(f64, f64, f64); 5] = [
    (1.0, 1e4, 1e4),
    (1.0, 1e3, 1e4),
    (1.0, 2e4, 1e4),
    (0.7, 13.0, 250.0),
    (1.0, 1e5, 1e2),
];

fn delay_identities(l: &mut Lines) -> Result<()> {
    for (g, k, w) in LADDER {
        let b = delay_bounds(g, k, w).context("delay bounds")?;
        let c = omit_conditions(g, k, w).context("transparency conditions")?;
        let k_max = slope_at_window(g, k, w);
        let tag = format!("(γ, κ, ω_m) = ({g}, {k}, {w})");
        l.push(
            format!("τ_max + K_max = 0 {tag}"),
            ((b.tau_max + k_max) / b.tau_max).abs(),
            1e-12,
        );
        l.push(
            format!("K_max·Γ_OMIT + 2 = 0 {tag}"),
            (k_max * c.width + 2.0).abs(),
            1e-12,
        );
    }
    Ok(())
}

fn ringdown(l: &mut Lines) -> Result<()> {
    let mut prev = 0.0;
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for e in -2..=8 {
        let (k, w) = (1.0, 10f64.powi(-e));
        let r = delay_bounds(1.0, k, w).context("delay bounds")?.ratio;
        worst = worst.max((r - k * k / (k * k + w * w)).abs());
        monotone &= r > prev;
        prev = r;
    }
    l.push(
        "τ_max/τ_m = κ²/(κ²+ω_m²) on ω_m/κ = 10², …, 10⁻⁸",
        worst,
        1e-12,
    );
    l.push(
        "ratio increases as ω_m/κ decreases",
        if monotone { 0.0 } else { 1.0 },
        0.0,
    );
    l.push("ratio → 1 as ω_m/κ → 0", (1.0 - prev).abs(), 1e-12);
    Ok(())
}

fn omit(l: &mut Lines) -> Result<()> {
    let eff = EffectiveParams::ideal_omit(1.0, 1e4, 1e4).context("parameters")?;
    let xs = linspace(-20.0, 20.0, 4001);
    let re = |x: f64| {
        eps_t_value(ModelVariant::Nrwa, &eff, x)
            .map(|e| e.re)
            .unwrap_or(f64::NAN)
    };
    let ys: Vec<f64> = xs.iter().map(|&x| re(x)).collect();
    let dip = find_extremum(&xs, &ys, ExtremumKind::Min, re).context("dip")?;
    l.push("min Re ε_T = 0 at ω_m = κ = 10⁴γ", dip.value.abs(), 1e-6);
    l.push("dip at x = −γω_m/(2κ)", (dip.x + 0.5).abs(), 1e-3);
    let w = window_fwhm(ModelVariant::Nrwa, &eff, &xs).context("window width")?;
    l.push(
        "FWHM = γ(κ²+ω_m²)/κ² (relative)",
        (w.width / 2.0 - 1.0).abs(),
        1e-2,
    );
    let tau = time_delay_numeric(ModelVariant::Nrwa, &eff, -0.5 + 1e-3, Channel::Transmitted)
        .context("delay")?;
    l.push("γτ = 1 at the window", (tau - 1.0).abs(), 1e-3);
    Ok(())
}

fn transmission(l: &mut Lines) -> Result<()> {
    let eff = EffectiveParams::ideal_omit(1.0, 1e3, 1e4).context("parameters")?;
    let tp = transmission_points(&eff).context("transmission points")?;
    for (name, x, tau) in [
        ("x₊", tp.x_plus, tp.tau_plus),
        ("x₋", tp.x_minus, tp.tau_minus),
    ] {
        let t = eps_t_value(ModelVariant::Nrwa, &eff, x)
            .context("response")?
            .norm_sqr();
        l.push(format!("T = 1 at {name} = {x:.3}γ"), (t - 1.0).abs(), 1e-12);
        l.push(
            format!("κτ ≈ 1 at {name} (relative)"),
            (tau * eff.kappa - 1.0).abs(),
            5e-2,
        );
    }
    let r = (eps_t_value(ModelVariant::Nrwa, &eff, -5.0).context("response")? - 1.0).norm_sqr();
    l.push("R = 1 at x = −γω_m/(2κ)", (r - 1.0).abs(), 1e-3);
    Ok(())
}

fn omia(l: &mut Lines) -> Result<()> {
    let one = Complex64::new(1.0, 0.0);
    let kappa = 1.0;
    for f in [0.1, 1.0, 2.0] {
        let c = omia_conditions(OmiaMode::Rwa, f * kappa, kappa, 10.0).context("conditions")?;
        let eff = EffectiveParams::new(f * kappa, kappa, 10.0, c.beta).context("parameters")?;
        let o = omia_response(ModelVariant::Rwa, &eff, &TwoPortDrive::symmetric(one, c.x))
            .context("response")?;
        l.push(
            format!("RWA output power at β = κγ, γ = {f}κ"),
            o.power_r.unwrap_or(f64::NAN),
            1e-12,
        );
    }
    let c = omia_conditions(OmiaMode::Nrwa, 1.0, 2e4, 1e4).context("conditions")?;
    let eff = EffectiveParams::new(1.0, 2e4, 1e4, c.beta).context("parameters")?;
    let drive = TwoPortDrive::symmetric(one, c.x);
    let with_n = omia_response(ModelVariant::Nrwa, &eff, &drive).context("response")?;
    l.push(
        "NRWA output power at x*, ω_m = κ/2",
        with_n.power_r.unwrap_or(f64::NAN),
        1e-6,
    );
    let o = with_n;
    l.push(
        "ε_outL₊ − ε_outR₊ = ε_r − ε_l",
        (o.out_l_plus - o.out_r_plus - (drive.eps_r - drive.eps_l)).norm(),
        1e-12,
    );
    Ok(())
}

fn oracle(l: &mut Lines) -> Result<()> {
    let eff = EffectiveParams::ideal_omit(1.0, 300.0, 300.0).context("parameters")?;
    let sys = SidebandSystem::from_effective(&eff);
    let one = Complex64::new(1.0, 0.0);
    for x in [-3.0, 1.0, 5.0] {
        let delta = eff.omega_m + x;
        let run = integrate_linearized(&sys, delta, one, &IntegrationConfig::default())
            .context("oracle")?;
        let lin = solve_sidebands(&sys, delta, one).context("sideband solve")?;
        l.push(
            format!("time domain vs 4×4 solve at x = {x}γ (relative)"),
            (run.c.c_plus - lin.c_plus).norm() / lin.c_plus.norm(),
            1e-6,
        );
    }
    Ok(())
}

pub fn run_suite(suite: &str) -> Result<Vec<CheckLine>> {
    let mut all = Vec::new();
    let chosen: Vec<&'static str> = match suite {
        "all" => SUITES[..SUITES.len() - 1].to_vec(),
        s => vec![*SUITES
            .iter()
            .find(|n| **n == s)
            .ok_or_else(|| CliError::UnknownSuite(s.into()))?],
    };
    for name in chosen {
        let mut l = Lines {
            suite: name,
            out: Vec::new(),
        };
        match name {
            "delay-identities" => delay_identities(&mut l)?,
            "ringdown" => ringdown(&mut l)?,
            "omit" => omit(&mut l)?,
            "transmission" => transmission(&mut l)?,
            "omia" => omia(&mut l)?,
            "oracle" => oracle(&mut l)?,
            _ => unreachable!("suite list and dispatch agree"),
        }
        all.extend(l.out);
    }
    Ok(all)
}
