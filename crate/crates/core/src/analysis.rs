//! Transparency conditions, dispersion slopes, group delays and the
//! perfect-transmission points, in closed form and by numerical search.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::model::{ideal_omit_beta, EffectiveParams};
use crate::par::{map_ordered, Execution};
use crate::response::{check_grid, eps_t_value, ModelVariant};

/// Derivative step as a fraction of the transparency-window width.
pub const STEP_FRACTION: f64 = 1e-4;
/// Below this magnitude the phase of ε is treated as undefined.
pub const ZERO_RESPONSE: f64 = 1e-12;
/// Relative tolerance on β when a formula requires the ideal-OMIT drive.
pub const DRIVE_TOLERANCE: f64 = 1e-9;
/// Relative x tolerance of the golden-section refinement.
pub const EXTREMUM_TOLERANCE: f64 = 1e-9;

/// Closed-form ideal-OMIT conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmitConditions {
    /// x = −γω_m/(2κ).
    pub x_dip: f64,
    /// β = γ(κ² + ω_m²)/κ.
    pub beta_ideal: f64,
    /// Γ_OMIT = γ(κ² + ω_m²)/κ².
    pub width: f64,
    /// γω_m²/(4κ³); the width formula needs this to be small.
    pub validity_ratio: f64,
    pub valid: bool,
}

pub fn omit_conditions(gamma: f64, kappa: f64, omega_m: f64) -> Result<OmitConditions> {
    positive("gamma", gamma)?;
    positive("kappa", kappa)?;
    positive("omega_m", omega_m)?;
    let validity_ratio = gamma * omega_m * omega_m / (4.0 * kappa.powi(3));
    Ok(OmitConditions {
        x_dip: -gamma * omega_m / (2.0 * kappa),
        beta_ideal: ideal_omit_beta(gamma, kappa, omega_m),
        width: omit_width(gamma, kappa, omega_m),
        validity_ratio,
        valid: validity_ratio < 1e-2,
    })
}

fn omit_width(gamma: f64, kappa: f64, omega_m: f64) -> f64 {
    gamma * (kappa * kappa + omega_m * omega_m) / (kappa * kappa)
}

/// Step used by every numerical derivative: 10⁻⁴·Γ_OMIT.
pub fn derivative_step(eff: &EffectiveParams) -> f64 {
    STEP_FRACTION * omit_width(eff.gamma, eff.kappa, eff.omega_m)
}

/// Central difference at `x` with one Richardson pass (steps h and h/2).
pub fn richardson_derivative<F>(f: F, x: f64, h: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let half = h / 2.0;
    if !(half > 0.0) || x + half == x || x - half == x {
        return Err(Error::StepUnderflow { x, step: h });
    }
    let central = |h: f64| -> Result<Complex64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(half)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// K = d Im[ε_T]/dx.
pub fn dispersion_slope(variant: ModelVariant, eff: &EffectiveParams, x: f64) -> Result<f64> {
    eff.validate()?;
    finite("x", x)?;
    let d = richardson_derivative(|x| eps_t_value(variant, eff, x), x, derivative_step(eff))?;
    Ok(d.im)
}

/// Output channel whose phase defines the delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    /// ε_T.
    Transmitted,
    /// ε_R = ε_T − 1.
    Reflected,
}

/// Group delay τ = d arg ε / dω_p, computed as Im(ε′/ε).
pub fn time_delay_numeric(
    variant: ModelVariant,
    eff: &EffectiveParams,
    x: f64,
    channel: Channel,
) -> Result<f64> {
    eff.validate()?;
    finite("x", x)?;
    let eval = |x: f64| -> Result<Complex64> {
        let e = eps_t_value(variant, eff, x)?;
        Ok(match channel {
            Channel::Transmitted => e,
            Channel::Reflected => e - 1.0,
        })
    };
    let value = eval(x)?;
    let magnitude = value.norm();
    if magnitude < ZERO_RESPONSE {
        return Err(Error::ZeroResponse { x, magnitude });
    }
    let d = richardson_derivative(eval, x, derivative_step(eff))?;
    Ok((d / value).im)
}

fn require_ideal_drive(eff: &EffectiveParams) -> Result<()> {
    let expected = ideal_omit_beta(eff.gamma, eff.kappa, eff.omega_m);
    if ((eff.beta - expected) / expected).abs() > DRIVE_TOLERANCE {
        return Err(Error::WrongDrive {
            beta: eff.beta,
            expected,
        });
    }
    Ok(())
}

/// Closed-form delay at the ideal-OMIT drive, shared by both channels.
pub fn time_delay_analytic(eff: &EffectiveParams, x: f64) -> Result<f64> {
    eff.validate()?;
    finite("x", x)?;
    require_ideal_drive(eff)?;
    Ok(delay_formula(eff.gamma, eff.kappa, eff.omega_m, x))
}

/// τ(x) = 8κ²(y²κ + γs) / (16y²κ⁴ + (yγω_m − 2y²κ + 2γs)²), with
/// s = κ² + ω_m² and y = x + γω_m/(2κ).
pub fn delay_formula(gamma: f64, kappa: f64, omega_m: f64, x: f64) -> f64 {
    let s = kappa * kappa + omega_m * omega_m;
    let y = x + gamma * omega_m / (2.0 * kappa);
    let y2 = y * y;
    let num = 8.0 * kappa * kappa * (y2 * kappa + gamma * s);
    let inner = y * gamma * omega_m - 2.0 * y2 * kappa + 2.0 * gamma * s;
    num / (16.0 * y2 * kappa.powi(4) + inner * inner)
}

/// Delay and slope extremes at the transparency window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayBounds {
    pub tau_max: f64,
    pub k_max: f64,
    /// Mechanical ringdown time 2/γ.
    pub tau_m: f64,
    /// τ_max/τ_m = κ²/(κ² + ω_m²).
    pub ratio: f64,
}

pub fn delay_bounds(gamma: f64, kappa: f64, omega_m: f64) -> Result<DelayBounds> {
    positive("gamma", gamma)?;
    positive("kappa", kappa)?;
    positive("omega_m", omega_m)?;
    let s = kappa * kappa + omega_m * omega_m;
    let tau_max = 2.0 * kappa * kappa / (gamma * s);
    let tau_m = 2.0 / gamma;
    Ok(DelayBounds {
        tau_max,
        k_max: -tau_max,
        tau_m,
        ratio: tau_max / tau_m,
    })
}

/// K_max = −2κ²/(γ(κ² + ω_m²)) written independently of τ_max.
pub fn slope_at_window(gamma: f64, kappa: f64, omega_m: f64) -> f64 {
    -2.0 * kappa * kappa / (gamma * (kappa * kappa + omega_m * omega_m))
}

/// Perfect-transmission points and the delays there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPoints {
    /// Roots of −ix + β/(γ/2 − ix + 𝒩) = 0.
    pub x_plus: f64,
    pub x_minus: f64,
    /// ±√(γ(κ² + ω_m²)/κ), valid for γ ≪ κ, ω_m.
    pub x_plus_approx: f64,
    pub x_minus_approx: f64,
    /// Slope of Im ε_T at x₊ and x₋.
    pub k_plus: f64,
    pub k_minus: f64,
    /// Delays at x₊ and x₋ (equal to the slopes there).
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// 1/κ, the γ ≪ κ limit of both delays.
    pub tau_approx: f64,
}

pub fn transmission_points(eff: &EffectiveParams) -> Result<TransmissionPoints> {
    eff.validate()?;
    require_ideal_drive(eff)?;
    let (g, k, w) = (eff.gamma, eff.kappa, eff.omega_m);
    let disc = (g * (16.0 * k.powi(3) + 16.0 * k * w * w + g * w * w)).sqrt();
    let x_plus = (-g * w + disc) / (4.0 * k);
    let x_minus = (-g * w - disc) / (4.0 * k);
    let approx = (g * (k * k + w * w) / k).sqrt();
    let shift = (g * k * k * w * w / (16.0 * k.powi(3) + g * w * w + 16.0 * k * w * w)).sqrt();
    let k_plus = 1.0 / (k + shift);
    let k_minus = 1.0 / (k - shift);
    Ok(TransmissionPoints {
        x_plus,
        x_minus,
        x_plus_approx: approx,
        x_minus_approx: -approx,
        k_plus,
        k_minus,
        tau_plus: k_plus,
        tau_minus: k_minus,
        tau_approx: 1.0 / k,
    })
}

/// Delay and slope sampled over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCurve {
    pub x: Vec<f64>,
    /// Transmitted-channel delay; `None` where ε_T vanishes.
    pub tau: Vec<Option<f64>>,
    pub slope: Vec<f64>,
    /// y = x + γω_m/(2κ).
    pub y: Vec<f64>,
    pub variant: ModelVariant,
}

pub fn delay_curve(
    variant: ModelVariant,
    eff: &EffectiveParams,
    grid: &[f64],
) -> Result<DelayCurve> {
    delay_curve_with(variant, eff, grid, Execution::Parallel)
}

pub fn delay_curve_with(
    variant: ModelVariant,
    eff: &EffectiveParams,
    grid: &[f64],
    exec: Execution,
) -> Result<DelayCurve> {
    eff.validate()?;
    check_grid(grid)?;
    let points = map_ordered(grid, exec, |&x| -> Result<(Option<f64>, f64)> {
        let tau = match time_delay_numeric(variant, eff, x, Channel::Transmitted) {
            Ok(t) => Some(t),
            Err(Error::ZeroResponse { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok((tau, dispersion_slope(variant, eff, x)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let shift = eff.gamma * eff.omega_m / (2.0 * eff.kappa);
    Ok(DelayCurve {
        x: grid.to_vec(),
        tau: points.iter().map(|p| p.0).collect(),
        slope: points.iter().map(|p| p.1).collect(),
        y: grid.iter().map(|x| x + shift).collect(),
        variant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// Locates the extremum of a sampled curve and refines it by golden-section
/// search on `f` inside the bracketing triple around the best sample.
pub fn find_extremum<F>(xs: &[f64], ys: &[f64], kind: ExtremumKind, f: F) -> Result<Extremum>
where
    F: Fn(f64) -> f64,
{
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::NoBracket);
    }
    check_grid(xs)?;
    let sign = match kind {
        ExtremumKind::Min => 1.0,
        ExtremumKind::Max => -1.0,
    };
    let (best, _) = ys.iter().enumerate().filter(|(_, y)| y.is_finite()).fold(
        (usize::MAX, f64::INFINITY),
        |acc, (i, &y)| {
            if sign * y < acc.1 {
                (i, sign * y)
            } else {
                acc
            }
        },
    );
    if best == usize::MAX || best == 0 || best == xs.len() - 1 {
        return Err(Error::NoBracket);
    }
    let g = |x: f64| sign * f(x);
    let (x, value) = golden_section(g, xs[best - 1], xs[best + 1]);
    Ok(Extremum {
        x,
        value: sign * value,
    })
}

/// Golden-section minimization of `f` on [a, b].
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let floor = EXTREMUM_TOLERANCE * (b - a).abs();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        let tol = EXTREMUM_TOLERANCE * a.abs().max(b.abs()).max(floor);
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Measured width of the transparency feature of Re ε_T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowWidth {
    pub dip: Extremum,
    pub shoulder: f64,
    pub half_level: f64,
    pub left: f64,
    pub right: f64,
    pub width: f64,
}

/// Full width at half depth of the Re ε_T dip on `grid`.
///
/// The half level sits midway between the dip minimum and the largest
/// Re ε_T on the grid; crossings are refined by bisection.
pub fn window_fwhm(
    variant: ModelVariant,
    eff: &EffectiveParams,
    grid: &[f64],
) -> Result<WindowWidth> {
    eff.validate()?;
    check_grid(grid)?;
    let re = |x: f64| {
        eps_t_value(variant, eff, x)
            .map(|e| e.re)
            .unwrap_or(f64::NAN)
    };
    let ys: Vec<f64> = grid.iter().map(|&x| re(x)).collect();
    let dip = find_extremum(grid, &ys, ExtremumKind::Min, re)?;
    let shoulder = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let half_level = 0.5 * (shoulder + dip.value);
    let centre = grid.partition_point(|&x| x < dip.x);

    let left_out = (0..centre.min(grid.len()))
        .rev()
        .find(|&i| ys[i] >= half_level);
    let right_out = (centre..grid.len()).find(|&i| ys[i] >= half_level);
    let (Some(lo), Some(hi)) = (left_out, right_out) else {
        return Err(Error::NoBracket);
    };
    let cross = |outside: f64, inside: f64| bisect(|x| re(x) - half_level, outside, inside);
    let left = cross(grid[lo], dip.x);
    let right = cross(grid[hi], dip.x);
    Ok(WindowWidth {
        dip,
        shoulder,
        half_level,
        left,
        right,
        width: right - left,
    })
}

/// Bisection for a sign change of `f` between `a` and `b`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m) >= 0.0) == (fa >= 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
