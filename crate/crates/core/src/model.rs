//! Physical parameters, derived effective quantities and the mean-field
//! steady state of the driven membrane-in-the-middle cavity.
//!
//! All rates are plain angular-frequency numbers in whatever unit the
//! caller picks; the cavity amplitude decays at `2κ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, non_negative, positive, Error, Result};

/// Reduced Planck constant in SI units (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Damping factor of the steady-state fixed-point iteration.
pub const STEADY_STATE_DAMPING: f64 = 0.5;
/// Relative step tolerance of the steady-state iteration.
pub const STEADY_STATE_TOLERANCE: f64 = 1e-12;
/// Iteration cap of the steady-state solve.
pub const STEADY_STATE_MAX_ITER: usize = 10_000;

/// Cavity and membrane geometry that fixes the single-photon coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembraneGeometry {
    pub cavity_frequency: f64,
    pub cavity_length: f64,
    pub wave_vector: f64,
    pub rest_position: f64,
    pub mass: f64,
    /// Intensity transmission of the membrane, in (0, 1].
    pub membrane_transmission: f64,
    pub hbar: f64,
}

impl MembraneGeometry {
    pub fn new(
        cavity_frequency: f64,
        cavity_length: f64,
        wave_vector: f64,
        rest_position: f64,
        mass: f64,
        membrane_transmission: f64,
    ) -> Self {
        Self {
            cavity_frequency,
            cavity_length,
            wave_vector,
            rest_position,
            mass,
            membrane_transmission,
            hbar: HBAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("cavity_frequency", self.cavity_frequency)?;
        positive("cavity_length", self.cavity_length)?;
        positive("mass", self.mass)?;
        positive("hbar", self.hbar)?;
        finite("wave_vector", self.wave_vector)?;
        finite("rest_position", self.rest_position)?;
        let t = self.membrane_transmission;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "membrane_transmission",
                reason: format!("must lie in (0, 1], got {t}"),
            });
        }
        Ok(())
    }
}

/// Optomechanical coupling rate g₀ of a membrane at `rest_position`.
///
/// The sign follows `sin(2kq₀)`, so moving the membrane to `-q₀` flips it.
pub fn compute_g0(geom: &MembraneGeometry, omega_m: f64) -> Result<f64> {
    geom.validate()?;
    positive("omega_m", omega_m)?;
    let phase = 2.0 * geom.wave_vector * geom.rest_position;
    let (sin, cos) = phase.sin_cos();
    let t = geom.membrane_transmission;
    if t == 1.0 && cos * cos == 1.0 {
        return Err(Error::Domain { bracket: f64::NAN });
    }
    let bracket = 1.0 / (1.0 - t) - cos * cos;
    if !(bracket > 0.0) {
        return Err(Error::Domain { bracket });
    }
    let zero_point = (2.0 * geom.mass * omega_m * bracket / geom.hbar).sqrt();
    Ok(sin / zero_point * (geom.cavity_frequency / (geom.cavity_length / 2.0)))
}

/// Physical parameter set of the pumped system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptomechParams {
    pub omega_m: f64,
    pub gamma: f64,
    /// Half the cavity amplitude decay rate.
    pub kappa: f64,
    pub g0: f64,
    /// Real pump amplitude ε_c.
    pub eps_c: f64,
    /// Bare pump detuning Δ_c = ω₀ − ω_c.
    pub delta_c: f64,
}

impl OptomechParams {
    pub fn validate(&self) -> Result<()> {
        positive("omega_m", self.omega_m)?;
        positive("gamma", self.gamma)?;
        positive("kappa", self.kappa)?;
        finite("g0", self.g0)?;
        non_negative("eps_c", self.eps_c)?;
        finite("delta_c", self.delta_c)
    }

    /// True when γ < 10⁻² · min(κ, ω_m).
    pub fn weak_damping(&self) -> bool {
        weak_damping(self.gamma, self.kappa, self.omega_m)
    }

    /// Physical parameters whose steady state sits exactly at Δ = ω_m with
    /// g₀²|c_s|² = `beta`, for a chosen single-photon coupling `g0`.
    pub fn for_operating_point(
        gamma: f64,
        kappa: f64,
        omega_m: f64,
        beta: f64,
        g0: f64,
    ) -> Result<Self> {
        positive("g0", g0.abs())?;
        non_negative("beta", beta)?;
        let cs2 = beta / (g0 * g0);
        let eps_c = (cs2 * (4.0 * kappa * kappa + omega_m * omega_m)).sqrt();
        let shift = 2.0 * g0 * g0 * cs2 * omega_m / (gamma * gamma / 4.0 + omega_m * omega_m);
        let p = Self {
            omega_m,
            gamma,
            kappa,
            g0,
            eps_c,
            delta_c: omega_m + shift,
        };
        p.validate()?;
        Ok(p)
    }
}

pub(crate) fn weak_damping(gamma: f64, kappa: f64, omega_m: f64) -> bool {
    gamma < 1e-2 * kappa.min(omega_m)
}

/// Effective parameters consumed by the response formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub gamma: f64,
    pub kappa: f64,
    pub omega_m: f64,
    /// Effective pump detuning Δ (equal to ω_m in effective mode).
    pub detuning: f64,
    /// Drive strength β = g₀²|c_s|².
    pub beta: f64,
}

impl EffectiveParams {
    /// Effective-mode parameters: Δ is pinned to ω_m.
    pub fn new(gamma: f64, kappa: f64, omega_m: f64, beta: f64) -> Result<Self> {
        let eff = Self {
            gamma,
            kappa,
            omega_m,
            detuning: omega_m,
            beta,
        };
        eff.validate()?;
        Ok(eff)
    }

    /// Effective-mode parameters at the ideal-OMIT drive β = γ(κ²+ω_m²)/κ.
    pub fn ideal_omit(gamma: f64, kappa: f64, omega_m: f64) -> Result<Self> {
        Self::new(
            gamma,
            kappa,
            omega_m,
            ideal_omit_beta(gamma, kappa, omega_m),
        )
    }

    /// Runs the steady-state solve and derives the effective parameters.
    pub fn from_physical(p: &OptomechParams) -> Result<(Self, SteadyState)> {
        let ss = steady_state(p)?;
        Ok((derive_effective(p, &ss)?.params, ss))
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma", self.gamma)?;
        positive("kappa", self.kappa)?;
        positive("omega_m", self.omega_m)?;
        finite("detuning", self.detuning)?;
        non_negative("beta", self.beta)
    }

    /// Counter-rotating term 𝒩 = −β/(2κ − 2iω_m).
    pub fn nrwa_term(&self) -> Complex64 {
        -self.beta / Complex64::new(2.0 * self.kappa, -2.0 * self.omega_m)
    }

    /// Z = (iδ + iω_m − γ/2)/(2iω_m) at probe detuning δ.
    pub fn z_factor(&self, delta: f64) -> Complex64 {
        Complex64::new(-self.gamma / 2.0, delta + self.omega_m)
            / Complex64::new(0.0, 2.0 * self.omega_m)
    }

    pub fn weak_damping(&self) -> bool {
        weak_damping(self.gamma, self.kappa, self.omega_m)
    }
}

/// β = γ(κ² + ω_m²)/κ, the drive that places the ideal OMIT dip.
pub fn ideal_omit_beta(gamma: f64, kappa: f64, omega_m: f64) -> f64 {
    gamma * (kappa * kappa + omega_m * omega_m) / kappa
}

/// Output of [`derive_effective`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDerivation {
    /// Parameters with β = g₀²|c_s|² from the actual steady state.
    pub params: EffectiveParams,
    /// β = g₀²ε_c²/(4κ² + ω_m²), the value assuming Δ = ω_m.
    pub beta_nominal: f64,
}

/// Effective parameters from a physical parameter set and its steady state.
pub fn derive_effective(p: &OptomechParams, ss: &SteadyState) -> Result<EffectiveDerivation> {
    p.validate()?;
    if !(ss.c_s.re.is_finite() && ss.c_s.im.is_finite()) {
        return Err(Error::NonFinite { what: "c_s" });
    }
    let g2 = p.g0 * p.g0;
    let params = EffectiveParams {
        gamma: p.gamma,
        kappa: p.kappa,
        omega_m: p.omega_m,
        detuning: ss.detuning,
        beta: g2 * ss.c_s.norm_sqr(),
    };
    let beta_nominal = g2 * p.eps_c * p.eps_c / (4.0 * p.kappa * p.kappa + p.omega_m * p.omega_m);
    Ok(EffectiveDerivation {
        params,
        beta_nominal,
    })
}

/// Self-consistent mean amplitudes without the probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub b_s: Complex64,
    pub c_s: Complex64,
    /// Effective detuning Δ = Δ_c − g₀(b_s + b_s*).
    pub detuning: f64,
    /// Relative residual of the detuning relation at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

fn amplitudes_at(p: &OptomechParams, detuning: f64) -> (Complex64, Complex64) {
    let c_s = p.eps_c / Complex64::new(2.0 * p.kappa, detuning);
    let b_s = Complex64::i() * p.g0 * c_s.norm_sqr() / Complex64::new(p.gamma / 2.0, p.omega_m);
    (b_s, c_s)
}

fn shifted_detuning(p: &OptomechParams, b_s: Complex64) -> f64 {
    p.delta_c - p.g0 * 2.0 * b_s.re
}

/// Relative residuals of the three steady-state relations at (b_s, c_s, Δ).
pub fn steady_state_residual(p: &OptomechParams, ss: &SteadyState) -> f64 {
    let (b_ref, c_ref) = amplitudes_at(p, ss.detuning);
    let rel = |a: Complex64, b: Complex64| {
        let scale = a.norm().max(b.norm());
        if scale == 0.0 {
            0.0
        } else {
            (a - b).norm() / scale
        }
    };
    let scale = ss.detuning.abs().max(p.kappa).max(p.omega_m);
    let det = (ss.detuning - shifted_detuning(p, ss.b_s)).abs() / scale;
    rel(ss.b_s, b_ref).max(rel(ss.c_s, c_ref)).max(det)
}

/// Damped fixed-point solve for the steady state, starting at Δ = Δ_c.
///
/// Fails with [`Error::NoConvergence`] when the iteration does not settle,
/// which is how optical bistability shows up.
pub fn steady_state(p: &OptomechParams) -> Result<SteadyState> {
    p.validate()?;
    if p.eps_c == 0.0 {
        return Ok(SteadyState {
            b_s: Complex64::new(0.0, 0.0),
            c_s: Complex64::new(0.0, 0.0),
            detuning: p.delta_c,
            residual: 0.0,
            iterations: 0,
        });
    }
    let scale = |d: f64| d.abs().max(p.kappa).max(p.omega_m);
    let mut detuning = p.delta_c;
    let mut last_step = f64::INFINITY;
    for it in 1..=STEADY_STATE_MAX_ITER {
        let (b_s, _) = amplitudes_at(p, detuning);
        let target = shifted_detuning(p, b_s);
        let next = (1.0 - STEADY_STATE_DAMPING) * detuning + STEADY_STATE_DAMPING * target;
        if !next.is_finite() {
            return Err(Error::NonFinite {
                what: "steady-state detuning",
            });
        }
        last_step = (next - detuning).abs() / scale(next);
        detuning = next;
        if last_step <= STEADY_STATE_TOLERANCE {
            let (b_s, c_s) = amplitudes_at(p, detuning);
            let mut ss = SteadyState {
                b_s,
                c_s,
                detuning,
                residual: 0.0,
                iterations: it,
            };
            ss.residual = steady_state_residual(p, &ss);
            return Ok(ss);
        }
    }
    Err(Error::NoConvergence {
        iterations: STEADY_STATE_MAX_ITER,
        last_detuning: detuning,
        residual: last_step / STEADY_STATE_DAMPING,
    })
}
