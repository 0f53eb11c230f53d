//! Probe response of the cavity: the sideband linear system and the three
//! closed forms for the output quadrature ε_T = 2κδc₊/ε_p.
//!
//! `x = δ − ω_m` is the probe detuning measured from the mechanical
//! sideband; `δ` is the probe–pump detuning. Amplitudes labelled `+` go with
//! `e^{−iδt}`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::model::{EffectiveParams, OptomechParams, SteadyState};
use crate::par::{map_ordered, Execution};

/// Condition-number estimate above which the sideband system is singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which expression produces ε_T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Full elimination of the sideband system, including Z and the
    /// δc₋* back-action denominator.
    Exact,
    /// Closed form with Z = 1 and the counter-rotating term 𝒩.
    Nrwa,
    /// Rotating-wave closed form.
    Rwa,
    /// The NRWA closed form with 𝒩 forced to zero.
    #[serde(rename = "nrwa-n0")]
    NrwaNoN,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::Exact,
        ModelVariant::Nrwa,
        ModelVariant::Rwa,
        ModelVariant::NrwaNoN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Exact => "exact",
            ModelVariant::Nrwa => "nrwa",
            ModelVariant::Rwa => "rwa",
            ModelVariant::NrwaNoN => "nrwa-n0",
        }
    }

    /// Whether the counter-rotating term enters the response.
    pub fn keeps_counter_rotating(self) -> bool {
        matches!(self, ModelVariant::Exact | ModelVariant::Nrwa)
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(ModelVariant::Exact),
            "nrwa" => Ok(ModelVariant::Nrwa),
            "rwa" => Ok(ModelVariant::Rwa),
            "nrwa-n0" => Ok(ModelVariant::NrwaNoN),
            other => Err(format!(
                "unknown variant `{other}` (expected exact, nrwa, rwa or nrwa-n0)"
            )),
        }
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Coefficients of the linearized sideband equations.
///
/// `coupling` is g₀c_s. In effective mode it is the real number √β, which
/// is enough because the response depends on c_s only through g₀²|c_s|².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandSystem {
    pub gamma: f64,
    pub kappa: f64,
    pub omega_m: f64,
    pub detuning: f64,
    pub coupling: Complex64,
}

impl SidebandSystem {
    pub fn from_effective(eff: &EffectiveParams) -> Self {
        Self {
            gamma: eff.gamma,
            kappa: eff.kappa,
            omega_m: eff.omega_m,
            detuning: eff.detuning,
            coupling: Complex64::new(eff.beta.sqrt(), 0.0),
        }
    }

    pub fn from_steady_state(p: &OptomechParams, ss: &SteadyState) -> Self {
        Self {
            gamma: p.gamma,
            kappa: p.kappa,
            omega_m: p.omega_m,
            detuning: ss.detuning,
            coupling: p.g0 * ss.c_s,
        }
    }

    /// Drive strength g₀²|c_s|².
    pub fn beta(&self) -> f64 {
        self.coupling.norm_sqr()
    }

    /// Coefficient matrix in the unknowns (δb₊, δb₋*, δc₊, δc₋*).
    pub fn matrix(&self, delta: f64) -> Matrix4<Complex64> {
        let g = self.coupling;
        let gc = g.conj();
        let z = Complex64::new(0.0, 0.0);
        let half = self.gamma / 2.0;
        let k2 = 2.0 * self.kappa;
        Matrix4::new(
            Complex64::new(half, self.omega_m - delta),
            z,
            -I * gc,
            -I * g,
            //
            z,
            Complex64::new(half, -self.omega_m - delta),
            I * gc,
            I * g,
            //
            -I * g,
            -I * g,
            Complex64::new(k2, self.detuning - delta),
            z,
            //
            I * gc,
            I * gc,
            z,
            Complex64::new(k2, -self.detuning - delta),
        )
    }
}

/// Solution of the sideband system at one probe detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandAmplitudes {
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub delta: f64,
    /// ‖Au − r‖∞ / (‖A‖∞‖u‖∞ + ‖r‖∞).
    pub residual: f64,
    /// 1-norm condition estimate of the coefficient matrix.
    pub condition: f64,
}

fn norm_inf_vec(v: &Vector4<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn norm_inf_mat(m: &Matrix4<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn norm_one_mat(m: &Matrix4<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves the four coupled sideband equations by pivoted LU.
pub fn solve_sidebands(
    sys: &SidebandSystem,
    delta: f64,
    eps_p: Complex64,
) -> Result<SidebandAmplitudes> {
    finite("delta", delta)?;
    let a = sys.matrix(delta);
    let rhs = Vector4::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        eps_p,
        Complex64::new(0.0, 0.0),
    );
    let lu = a.lu();
    let condition = match lu.try_inverse() {
        Some(inv) => norm_one_mat(&a) * norm_one_mat(&inv),
        None => f64::INFINITY,
    };
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::SingularSystem { condition });
    }
    let u = lu.solve(&rhs).ok_or(Error::SingularSystem { condition })?;
    if u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite {
            what: "sideband amplitudes",
        });
    }
    let r = a * u - rhs;
    let denom = norm_inf_mat(&a) * norm_inf_vec(&u) + norm_inf_vec(&rhs);
    let residual = if denom == 0.0 {
        0.0
    } else {
        norm_inf_vec(&r) / denom
    };
    Ok(SidebandAmplitudes {
        b_plus: u[0],
        b_minus: u[1].conj(),
        c_plus: u[2],
        c_minus: u[3].conj(),
        delta,
        residual,
        condition,
    })
}

/// One point of a response spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSample {
    pub x: f64,
    pub eps_t: Complex64,
    /// ε_R = ε_T − 1.
    pub eps_r: Complex64,
    /// T = |ε_T|².
    pub transmission: f64,
    /// R = |ε_T − 1|².
    pub reflection: f64,
    pub variant: ModelVariant,
}

impl ResponseSample {
    fn new(variant: ModelVariant, x: f64, eps_t: Complex64) -> Self {
        let eps_r = eps_t - 1.0;
        Self {
            x,
            eps_t,
            eps_r,
            transmission: eps_t.norm_sqr(),
            reflection: eps_r.norm_sqr(),
            variant,
        }
    }
}

/// ε_T at detuning `x` without building a [`ResponseSample`].
pub fn eps_t_value(variant: ModelVariant, eff: &EffectiveParams, x: f64) -> Result<Complex64> {
    let k2 = 2.0 * eff.kappa;
    let half = eff.gamma / 2.0;
    let beta = eff.beta;
    let value = match variant {
        ModelVariant::Exact => {
            let delta = x + eff.omega_m;
            let cav_plus = Complex64::new(k2, -(delta - eff.detuning));
            let cav_minus = Complex64::new(k2, -(delta + eff.detuning));
            let mech = Complex64::new(half, eff.omega_m - delta);
            let sub = eff.z_factor(delta) * mech - beta / cav_minus;
            k2 * sub / (cav_plus * sub + beta)
        }
        ModelVariant::Nrwa | ModelVariant::NrwaNoN => {
            let n = if variant == ModelVariant::Nrwa {
                eff.nrwa_term()
            } else {
                Complex64::new(0.0, 0.0)
            };
            // written so that the vanishing subfraction denominator at the
            // ideal dip gives ε_T = 0 rather than a 0/0
            let sub = Complex64::new(half, -x) + n;
            k2 * sub / (Complex64::new(k2, -x) * sub + beta)
        }
        ModelVariant::Rwa => k2 / (Complex64::new(k2, -x) + beta / Complex64::new(half, -x)),
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what: "epsilon_T" })
    }
}

/// Output quadrature ε_T and derived quantities at probe detuning `x`.
pub fn epsilon_t(variant: ModelVariant, eff: &EffectiveParams, x: f64) -> Result<ResponseSample> {
    eff.validate()?;
    finite("x", x)?;
    Ok(ResponseSample::new(
        variant,
        x,
        eps_t_value(variant, eff, x)?,
    ))
}

/// Response evaluated over a grid of detunings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSpectrum {
    pub variant: ModelVariant,
    pub samples: Vec<ResponseSample>,
}

impl ResponseSpectrum {
    pub fn x(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn real(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.eps_t.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.eps_t.im).collect()
    }
}

/// Rejects empty or non-increasing grids.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::GridOrder { index: i + 1 });
        }
    }
    if let Some(i) = grid.iter().position(|x| !x.is_finite()) {
        return Err(Error::GridOrder { index: i });
    }
    Ok(())
}

/// Uniform grid of `count` points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        n => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

pub fn spectrum(
    variant: ModelVariant,
    eff: &EffectiveParams,
    grid: &[f64],
) -> Result<ResponseSpectrum> {
    spectrum_with(variant, eff, grid, Execution::Parallel)
}

pub fn spectrum_with(
    variant: ModelVariant,
    eff: &EffectiveParams,
    grid: &[f64],
    exec: Execution,
) -> Result<ResponseSpectrum> {
    eff.validate()?;
    check_grid(grid)?;
    let samples = map_ordered(grid, exec, |&x| {
        eps_t_value(variant, eff, x).map(|e| ResponseSample::new(variant, x, e))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ResponseSpectrum { variant, samples })
}
