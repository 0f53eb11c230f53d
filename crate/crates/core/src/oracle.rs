//! Time-domain cross-check of the frequency-domain response.
//!
//! The probe-driven equations of motion are integrated directly (DOP853,
//! adaptive) until transients have died out, and the trajectory is then
//! projected by least squares onto {e^{−iδt}, e^{+iδt}, 1}. The `+`
//! coefficient of the cavity deviation is δc₊ and can be compared with
//! [`solve_sidebands`](crate::response::solve_sidebands).
//!
//! Both runs work in deviation variables around the unprobed steady state.
//! For the nonlinear equations this is an exact rewrite, not an
//! approximation: the quadratic terms are kept and any residual of the
//! steady state enters as a constant forcing.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use ode_solvers::{Dop853, OutputType, SVector, System};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{finite, Error, Result};
use crate::model::{OptomechParams, SteadyState};
use crate::par::{map_ordered, Execution};
use crate::response::SidebandSystem;

// The last component carries time. The DOP853 tableau shipped with
// ode_solvers 0.6 has a wrong node for stage 12, which breaks explicitly
// time-dependent right-hand sides; an autonomous system avoids it.
type State = SVector<f64, 5>;

/// Largest probe-to-pump ratio accepted by the nonlinear run.
pub const MAX_PROBE_RATIO: f64 = 1e-3;
/// Relative change of c₊ under probe halving that counts as nonlinear.
pub const LINEARITY_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub rtol: f64,
    /// Absolute tolerance in units of the deviation scale |ε_p|/κ.
    pub atol: f64,
    /// Minimum settling time in units of 1/γ.
    pub settle_time: f64,
    /// Settling is extended in steps of 10/γ until ε_T = 2κc₊/ε_p from
    /// successive projections agrees to this absolute tolerance.
    pub settle_tolerance: f64,
    /// Longest settling time in units of 1/γ before giving up.
    pub max_settle_time: f64,
    /// Number of beat periods 2π/δ used for the projection.
    pub projection_periods: u32,
    pub samples_per_period: u32,
    /// Largest tolerated fraction of deviation power outside the three
    /// harmonics.
    pub leakage_limit: f64,
    pub max_steps: u32,
    /// Initial deviations (δb, δc); zero when `None`.
    pub initial: Option<[Complex64; 2]>,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            settle_time: 20.0,
            settle_tolerance: 1e-6,
            max_settle_time: 200.0,
            projection_periods: 8,
            samples_per_period: 64,
            leakage_limit: 1e-6,
            max_steps: 50_000_000,
            initial: None,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("tolerance", "rtol and atol must be > 0");
        }
        if !(self.settle_time >= 10.0) {
            return bad("settle_time", "must be at least 10/γ");
        }
        if !(self.max_settle_time >= self.settle_time && self.settle_tolerance > 0.0) {
            return bad(
                "max_settle_time",
                "must be at least settle_time, with a positive tolerance",
            );
        }
        if self.projection_periods < 1 {
            return bad("projection_periods", "must be at least 1");
        }
        if self.samples_per_period < 8 {
            return bad("samples_per_period", "must be at least 8");
        }
        Ok(())
    }
}

/// Least-squares coefficients of a trajectory on the three harmonics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicExtract {
    /// Coefficient of e^{−iδt}.
    pub c_plus: Complex64,
    /// Coefficient of e^{+iδt}.
    pub c_minus: Complex64,
    pub dc: Complex64,
    /// Residual power over total power.
    pub leakage: f64,
}

/// Projects samples z(t) onto a·e^{−iδt} + b·e^{iδt} + d.
pub fn project_harmonics(
    times: &[f64],
    values: &[Complex64],
    delta: f64,
) -> Result<HarmonicExtract> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "need at least three (t, z) pairs".into(),
        });
    }
    let basis = |t: f64| {
        let e = Complex64::from_polar(1.0, -delta * t);
        Vector3::new(e, e.conj(), Complex64::new(1.0, 0.0))
    };
    let mut gram = Matrix3::<Complex64>::zeros();
    let mut rhs = Vector3::<Complex64>::zeros();
    for (&t, &z) in times.iter().zip(values) {
        let phi = basis(t);
        gram += phi.conjugate() * phi.transpose();
        rhs += phi.conjugate() * z;
    }
    let coef = gram.lu().solve(&rhs).ok_or(Error::SingularSystem {
        condition: f64::INFINITY,
    })?;
    let mut total = 0.0;
    let mut resid = 0.0;
    for (&t, &z) in times.iter().zip(values) {
        let fit = basis(t).dot(&coef);
        total += z.norm_sqr();
        resid += (z - fit).norm_sqr();
    }
    Ok(HarmonicExtract {
        c_plus: coef[0],
        c_minus: coef[1],
        dc: coef[2],
        leakage: if total > 0.0 { resid / total } else { 0.0 },
    })
}

/// Harmonic content of one time-domain run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub b: HarmonicExtract,
    pub c: HarmonicExtract,
    pub delta: f64,
    pub eps_p: Complex64,
    /// |δb| + |δc| at the end of the minimum settling time.
    pub settled_deviation: f64,
    /// Settling time actually used, in units of 1/γ.
    pub settle_time: f64,
    pub accepted_steps: u64,
}

impl OracleRun {
    /// ε_T = 2κ c₊/ε_p.
    pub fn eps_t(&self, kappa: f64) -> Complex64 {
        2.0 * kappa * self.c.c_plus / self.eps_p
    }
}

fn pack(b: Complex64, c: Complex64, t: f64) -> State {
    State::new(b.re, b.im, c.re, c.im, t)
}

fn unpack(y: &State) -> (Complex64, Complex64) {
    (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

/// Linearized deviations driven by the probe.
#[derive(Clone, Copy)]
struct LinearizedRhs {
    sys: SidebandSystem,
    delta: f64,
    eps_p: Complex64,
}

impl System<f64, State> for LinearizedRhs {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        let t = y[4];
        let (db, dc) = unpack(y);
        let s = &self.sys;
        let g = s.coupling;
        let i = Complex64::i();
        let probe = self.eps_p * Complex64::from_polar(1.0, -self.delta * t);
        let b_dot =
            -Complex64::new(s.gamma / 2.0, s.omega_m) * db + i * (g.conj() * dc + g * dc.conj());
        let c_dot =
            -Complex64::new(2.0 * s.kappa, s.detuning) * dc + i * g * (db + db.conj()) + probe;
        *dy = pack(b_dot, c_dot, 1.0);
    }
}

/// Full mean-field equations written for deviations (u, v) around (b_s, c_s).
#[derive(Clone, Copy)]
struct NonlinearRhs {
    p: OptomechParams,
    c_s: Complex64,
    /// Δ_c − 2g₀ Re b_s.
    shifted: f64,
    force_b: Complex64,
    force_c: Complex64,
    delta: f64,
    eps_p: Complex64,
}

impl NonlinearRhs {
    fn new(p: &OptomechParams, ss: &SteadyState, delta: f64, eps_p: Complex64) -> Self {
        let i = Complex64::i();
        let shifted = p.delta_c - 2.0 * p.g0 * ss.b_s.re;
        Self {
            p: *p,
            c_s: ss.c_s,
            shifted,
            force_b: -Complex64::new(p.gamma / 2.0, p.omega_m) * ss.b_s
                + i * p.g0 * ss.c_s.norm_sqr(),
            force_c: -Complex64::new(2.0 * p.kappa, shifted) * ss.c_s + p.eps_c,
            delta,
            eps_p,
        }
    }
}

impl System<f64, State> for NonlinearRhs {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        let t = y[4];
        let (u, v) = unpack(y);
        let p = &self.p;
        let i = Complex64::i();
        let cs = self.c_s;
        let probe = self.eps_p * Complex64::from_polar(1.0, -self.delta * t);
        let b_dot = self.force_b - Complex64::new(p.gamma / 2.0, p.omega_m) * u
            + i * p.g0 * (cs.conj() * v + cs * v.conj() + v.norm_sqr());
        let c_dot = self.force_c - Complex64::new(2.0 * p.kappa, self.shifted) * v
            + 2.0 * i * p.g0 * u.re * (cs + v)
            + probe;
        *dy = pack(b_dot, c_dot, 1.0);
    }
}

struct Segment {
    times: Vec<f64>,
    states: Vec<State>,
    accepted: u64,
}

fn integrate_segment<F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: State,
    cfg: &IntegrationConfig,
    atol: f64,
    h_max: f64,
) -> Result<Segment>
where
    F: System<f64, State>,
{
    let mut solver = Dop853::from_param(
        f,
        t0,
        t1,
        t1 - t0,
        y0,
        cfg.rtol,
        atol,
        0.9,
        0.0,
        0.333,
        6.0,
        h_max.min(t1 - t0),
        0.0,
        cfg.max_steps,
        u32::MAX,
        // the dense interpolant of this release is unreliable; accepted
        // steps are used directly
        OutputType::Sparse,
    );
    let stats = solver.integrate().map_err(|e| {
        let t = match e {
            ode_solvers::dop_shared::IntegrationError::MaxNumStepReached { x, .. }
            | ode_solvers::dop_shared::IntegrationError::StepSizeUnderflow { x }
            | ode_solvers::dop_shared::IntegrationError::StiffnessDetected { x } => x,
        };
        Error::StiffnessFailure {
            t,
            reason: format!("{e}; retry with a looser tolerance or a longer settling time"),
        }
    })?;
    let (times, states) = solver.results().get();
    Ok(Segment {
        times: times.clone(),
        states: states.clone(),
        accepted: stats.accepted_steps as u64,
    })
}

fn run<F>(
    f: F,
    gamma: f64,
    delta: f64,
    eps_p: Complex64,
    scale: f64,
    cfg: &IntegrationConfig,
) -> Result<OracleRun>
where
    F: System<f64, State> + Copy,
{
    cfg.validate()?;
    finite("delta", delta)?;
    if delta == 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "beat period is undefined at δ = 0".into(),
        });
    }
    let period = 2.0 * PI / delta.abs();
    let atol = cfg.atol * scale;
    let y0 = cfg
        .initial
        .map(|[b, c]| pack(b, c, 0.0))
        .unwrap_or_else(State::zeros);

    let (b_end, c_end, mut t, mut y, mut steps) = {
        let end = cfg.settle_time / gamma;
        let seg = integrate_segment(f, 0.0, end, y0, cfg, atol, period / 4.0)?;
        let (t, y) = segment_end(&seg, end)?;
        let (b, c) = unpack(&y);
        (b, c, t, y, seg.accepted)
    };

    let window = period * cfg.projection_periods as f64;
    // capping the step gives at least `samples_per_period` samples per period
    let h_max = period / cfg.samples_per_period as f64;
    let extension = 10.0 / gamma;
    let mut previous: Option<Complex64> = None;
    loop {
        let proj = integrate_segment(f, t, t + window, y, cfg, atol, h_max)?;
        steps += proj.accepted;
        let (bs, cs): (Vec<Complex64>, Vec<Complex64>) = proj.states.iter().map(unpack).unzip();
        let b = project_harmonics(&proj.times, &bs, delta)?;
        let c = project_harmonics(&proj.times, &cs, delta)?;
        let probed = eps_p != Complex64::new(0.0, 0.0);
        if probed {
            let leakage = b.leakage.max(c.leakage);
            if leakage > cfg.leakage_limit {
                return Err(Error::Unsettled {
                    residual: leakage,
                    limit: cfg.leakage_limit,
                });
            }
        }
        // scale = |ε_p|/κ, so this is the change of ε_T
        let change = previous.map(|p| 2.0 * (c.c_plus - p).norm() / scale);
        if !probed || change.is_some_and(|d| d <= cfg.settle_tolerance) {
            return Ok(OracleRun {
                b,
                c,
                delta,
                eps_p,
                settled_deviation: b_end.norm() + c_end.norm(),
                settle_time: t * gamma,
                accepted_steps: steps,
            });
        }
        if (t + extension) * gamma > cfg.max_settle_time {
            return Err(Error::Unsettled {
                residual: change.unwrap_or(f64::INFINITY),
                limit: cfg.settle_tolerance,
            });
        }
        previous = Some(c.c_plus);
        let seg = integrate_segment(f, t, t + extension, y, cfg, atol, period / 4.0)?;
        steps += seg.accepted;
        (t, y) = segment_end(&seg, t + extension)?;
    }
}

fn segment_end(seg: &Segment, end: f64) -> Result<(f64, State)> {
    match (seg.times.last(), seg.states.last()) {
        (Some(&t), Some(y)) if (t - end).abs() <= 1e-9 * end => Ok((t, *y)),
        _ => Err(Error::StiffnessFailure {
            t: seg.times.last().copied().unwrap_or(0.0),
            reason: "integration ended early".into(),
        }),
    }
}

fn deviation_scale(kappa: f64, eps_p: Complex64, cfg: &IntegrationConfig) -> f64 {
    if eps_p.norm() > 0.0 {
        eps_p.norm() / kappa
    } else {
        cfg.initial
            .map(|[b, c]| b.norm() + c.norm())
            .filter(|s| *s > 0.0)
            .unwrap_or(1.0)
    }
}

/// Integrates the linearized equations from zero deviations (unless
/// `cfg.initial` says otherwise) and extracts the probe harmonics.
pub fn integrate_linearized(
    sys: &SidebandSystem,
    delta: f64,
    eps_p: Complex64,
    cfg: &IntegrationConfig,
) -> Result<OracleRun> {
    crate::error::positive("gamma", sys.gamma)?;
    crate::error::positive("kappa", sys.kappa)?;
    let rhs = LinearizedRhs {
        sys: *sys,
        delta,
        eps_p,
    };
    run(
        rhs,
        sys.gamma,
        delta,
        eps_p,
        deviation_scale(sys.kappa, eps_p, cfg),
        cfg,
    )
}

/// Integrates the full mean-field equations started at the steady state
/// and extracts the probe harmonics of the deviation.
pub fn integrate_nonlinear(
    p: &OptomechParams,
    ss: &SteadyState,
    delta: f64,
    eps_p: Complex64,
    cfg: &IntegrationConfig,
) -> Result<OracleRun> {
    p.validate()?;
    if eps_p.norm() > MAX_PROBE_RATIO * p.eps_c {
        return Err(Error::InvalidParameter {
            name: "eps_p",
            reason: format!(
                "probe {:e} exceeds {MAX_PROBE_RATIO:e} of the pump {:e}",
                eps_p.norm(),
                p.eps_c
            ),
        });
    }
    let rhs = NonlinearRhs::new(p, ss, delta, eps_p);
    run(
        rhs,
        p.gamma,
        delta,
        eps_p,
        deviation_scale(p.kappa, eps_p, cfg),
        cfg,
    )
}

/// Nonlinear runs at ε_p and ε_p/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearityReport {
    pub full: OracleRun,
    pub half: OracleRun,
    /// |ε_T(ε_p) − ε_T(ε_p/2)| / |ε_T(ε_p)|.
    pub change: f64,
}

pub fn check_linearity(
    p: &OptomechParams,
    ss: &SteadyState,
    delta: f64,
    eps_p: Complex64,
    cfg: &IntegrationConfig,
) -> Result<LinearityReport> {
    let full = integrate_nonlinear(p, ss, delta, eps_p, cfg)?;
    let half = integrate_nonlinear(p, ss, delta, eps_p / 2.0, cfg)?;
    let a = full.eps_t(p.kappa);
    let b = half.eps_t(p.kappa);
    let change = (a - b).norm() / a.norm();
    if change > LINEARITY_LIMIT {
        return Err(Error::LinearityBreach { change });
    }
    Ok(LinearityReport { full, half, change })
}

/// Linearized runs for many (system, δ) pairs.
pub fn integrate_linearized_batch(
    points: &[(SidebandSystem, f64)],
    eps_p: Complex64,
    cfg: &IntegrationConfig,
    exec: Execution,
) -> Vec<Result<OracleRun>> {
    map_ordered(points, exec, |(sys, delta)| {
        integrate_linearized(sys, *delta, eps_p, cfg)
    })
}
