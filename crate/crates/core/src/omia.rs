//! Two-port probing: both mirrors are driven at the probe frequency and the
//! system can absorb both inputs completely.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::model::EffectiveParams;
use crate::par::{map_ordered, Execution};
use crate::response::{check_grid, eps_t_value, solve_sidebands, ModelVariant, SidebandSystem};

/// Probe amplitudes entering from the left and right mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPortDrive {
    pub eps_l: Complex64,
    pub eps_r: Complex64,
    /// Probe detuning x = δ − ω_m.
    pub x: f64,
}

impl TwoPortDrive {
    pub fn symmetric(eps: Complex64, x: f64) -> Self {
        Self {
            eps_l: eps,
            eps_r: eps,
            x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPortOutput {
    /// Intracavity amplitude δc₊.
    pub c_plus: Complex64,
    pub out_l_plus: Complex64,
    pub out_r_plus: Complex64,
    /// Output component at ω_c − δ (identical at both ports).
    pub out_minus: Complex64,
    /// |ε_outL₊/ε_l|², `None` when ε_l = 0.
    pub power_l: Option<f64>,
    /// |ε_outR₊/ε_r|², `None` when ε_r = 0.
    pub power_r: Option<f64>,
}

/// Output fields of the two-port configuration.
///
/// The `+` outputs use the closed form of `variant`. The `−` component needs
/// δc₋, which only the sideband solve provides; rotating-wave variants drop
/// the coupling that creates it, so it is zero there.
pub fn omia_response(
    variant: ModelVariant,
    eff: &EffectiveParams,
    drive: &TwoPortDrive,
) -> Result<TwoPortOutput> {
    eff.validate()?;
    finite("x", drive.x)?;
    let inputs = drive.eps_l + drive.eps_r;
    if !(inputs.re.is_finite() && inputs.im.is_finite()) {
        return Err(Error::NonFinite {
            what: "probe amplitudes",
        });
    }
    let k2 = 2.0 * eff.kappa;
    let cavity_out = inputs * eps_t_value(variant, eff, drive.x)?;
    let out_minus = if variant.keeps_counter_rotating() {
        let sys = SidebandSystem::from_effective(eff);
        k2 * solve_sidebands(&sys, drive.x + eff.omega_m, inputs)?.c_minus
    } else {
        Complex64::new(0.0, 0.0)
    };
    let out_l_plus = cavity_out - drive.eps_l;
    let out_r_plus = cavity_out - drive.eps_r;
    let power = |out: Complex64, input: Complex64| {
        (input.norm_sqr() > 0.0).then(|| out.norm_sqr() / input.norm_sqr())
    };
    Ok(TwoPortOutput {
        c_plus: cavity_out / k2,
        out_l_plus,
        out_r_plus,
        out_minus,
        power_l: power(out_l_plus, drive.eps_l),
        power_r: power(out_r_plus, drive.eps_r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmiaMode {
    Nrwa,
    Rwa,
}

/// Drive and detuning for complete absorption of equal probes (ε_l = ε_r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmiaConditions {
    pub mode: OmiaMode,
    pub beta: f64,
    pub x: f64,
    /// γ/min(κ, ω_m); the NRWA conditions assume it is small.
    pub validity_ratio: f64,
}

pub fn omia_conditions(
    mode: OmiaMode,
    gamma: f64,
    kappa: f64,
    omega_m: f64,
) -> Result<OmiaConditions> {
    positive("gamma", gamma)?;
    positive("kappa", kappa)?;
    positive("omega_m", omega_m)?;
    let (k2, w2) = (kappa * kappa, omega_m * omega_m);
    let (beta, x) = match mode {
        OmiaMode::Nrwa => (
            gamma * kappa * (k2 + w2) / (2.0 * k2 + w2),
            -gamma * kappa * omega_m / (4.0 * k2 + 2.0 * w2),
        ),
        OmiaMode::Rwa => (kappa * gamma, 0.0),
    };
    Ok(OmiaConditions {
        mode,
        beta,
        x,
        validity_ratio: gamma / kappa.min(omega_m),
    })
}

/// The large-damping absorption point γ = 4κ, x = ±√(β − 4κ²) of the
/// rotating-wave model, as a predicate.
pub fn is_large_damping_absorption_point(
    gamma: f64,
    kappa: f64,
    beta: f64,
    x: f64,
    rel_tol: f64,
) -> bool {
    let excess = beta - 4.0 * kappa * kappa;
    (gamma - 4.0 * kappa).abs() <= rel_tol * 4.0 * kappa
        && excess >= 0.0
        && (x.abs() - excess.sqrt()).abs() <= rel_tol * excess.sqrt().max(kappa)
}

/// |ε_outR₊/ε_r|² with and without the counter-rotating term under the same
/// drive, for equal unit probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmiaContrast {
    pub x: Vec<f64>,
    pub with_n: Vec<f64>,
    pub without_n: Vec<f64>,
    pub min_with_n: f64,
    pub min_without_n: f64,
}

impl OmiaContrast {
    pub fn max_difference(&self) -> f64 {
        self.with_n
            .iter()
            .zip(&self.without_n)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn omia_contrast(eff: &EffectiveParams, grid: &[f64]) -> Result<OmiaContrast> {
    omia_contrast_with(eff, grid, Execution::Parallel)
}

pub fn omia_contrast_with(
    eff: &EffectiveParams,
    grid: &[f64],
    exec: Execution,
) -> Result<OmiaContrast> {
    eff.validate()?;
    check_grid(grid)?;
    let unit = Complex64::new(1.0, 0.0);
    let pairs = map_ordered(grid, exec, |&x| -> Result<(f64, f64)> {
        let drive = TwoPortDrive::symmetric(unit, x);
        let p = |v| omia_response(v, eff, &drive).map(|o| o.power_r.expect("unit probe"));
        Ok((p(ModelVariant::Nrwa)?, p(ModelVariant::NrwaNoN)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let with_n: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let without_n: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(OmiaContrast {
        x: grid.to_vec(),
        min_with_n: min(&with_n),
        min_without_n: min(&without_n),
        with_n,
        without_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::linspace;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bare_cavity_passes_symmetric_probes() {
        let eff = EffectiveParams::new(1.0, 40.0, 400.0, 0.0).unwrap();
        let eps = c(0.3, 0.4);
        for v in ModelVariant::ALL {
            let o = omia_response(v, &eff, &TwoPortDrive::symmetric(eps, 0.0)).unwrap();
            assert!((o.c_plus - eps / 40.0).norm() < 1e-15);
            assert!((o.out_l_plus - eps).norm() < 1e-15);
            assert!((o.out_r_plus - eps).norm() < 1e-15);
        }
    }

    #[test]
    fn rwa_absorbs_at_weak_drive() {
        for gamma in [0.1, 1.0, 2.0] {
            let cond = omia_conditions(OmiaMode::Rwa, gamma, 1.0, 10.0).unwrap();
            assert_eq!(cond.beta, gamma);
            assert_eq!(cond.x, 0.0);
            let eff = EffectiveParams::new(gamma, 1.0, 10.0, cond.beta).unwrap();
            let o = omia_response(
                ModelVariant::Rwa,
                &eff,
                &TwoPortDrive::symmetric(c(1.0, 0.0), 0.0),
            )
            .unwrap();
            assert!(o.power_l.unwrap() <= 1e-30 && o.power_r.unwrap() <= 1e-30);
            assert_eq!(o.out_minus, c(0.0, 0.0));
        }
    }

    #[test]
    fn nrwa_absorbs_in_unresolved_regime() {
        let cond = omia_conditions(OmiaMode::Nrwa, 1.0, 2e4, 1e4).unwrap();
        assert_relative_eq!(cond.beta, 1e5 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(cond.x, -1.0 / 9.0, max_relative = 1e-14);
        let eff = EffectiveParams::new(1.0, 2e4, 1e4, cond.beta).unwrap();
        let o = omia_response(
            ModelVariant::Nrwa,
            &eff,
            &TwoPortDrive::symmetric(c(1.0, 0.0), cond.x),
        )
        .unwrap();
        assert!(o.power_r.unwrap() <= 1e-6);
        assert!(o.power_l.unwrap() <= 1e-6);
    }

    #[test]
    fn resolved_nrwa_conditions() {
        let cond = omia_conditions(OmiaMode::Nrwa, 1.0, 1.0, 10.0).unwrap();
        assert_relative_eq!(cond.beta, 101.0 / 102.0, max_relative = 1e-15);
        assert_relative_eq!(cond.x, -10.0 / 204.0, max_relative = 1e-15);
    }

    #[test]
    fn nrwa_conditions_approach_rwa() {
        let mut prev = f64::INFINITY;
        for k in 1..8 {
            let cond = omia_conditions(OmiaMode::Nrwa, 0.01, 1.0, 10f64.powi(k)).unwrap();
            let dist = (cond.beta - 0.01).abs() + cond.x.abs();
            assert!(dist < prev);
            prev = dist;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn nrwa_residual_scales_with_damping() {
        for k in 0..=12 {
            let r = 10f64.powf(-6.0 + 0.25 * k as f64);
            let (kappa, omega_m) = (1.0, 0.5);
            let cond = omia_conditions(OmiaMode::Nrwa, r, kappa, omega_m).unwrap();
            let eff = EffectiveParams::new(r, kappa, omega_m, cond.beta).unwrap();
            let o = omia_response(
                ModelVariant::Nrwa,
                &eff,
                &TwoPortDrive::symmetric(c(1.0, 0.0), cond.x),
            )
            .unwrap();
            assert!(
                o.power_r.unwrap() <= 10.0 * r * r,
                "r={r}: {}",
                o.power_r.unwrap()
            );
        }
    }

    #[test]
    fn unresolved_contrast() {
        let cond = omia_conditions(OmiaMode::Nrwa, 1.0, 2e4, 1e4).unwrap();
        let eff = EffectiveParams::new(1.0, 2e4, 1e4, cond.beta).unwrap();
        let grid = linspace(-5.0, 5.0, 1001);
        let mut with_point = grid.clone();
        with_point.push(cond.x);
        with_point.sort_by(f64::total_cmp);
        let con = omia_contrast(&eff, &with_point).unwrap();
        assert!(con.min_with_n <= 1e-6);
        assert!(con.min_without_n >= 100.0 * 1e-6);
    }

    #[test]
    fn contrast_without_drive_is_flat() {
        let eff = EffectiveParams::new(1.0, 2e4, 1e4, 0.0).unwrap();
        let con = omia_contrast(&eff, &linspace(-1e3, 1e3, 501)).unwrap();
        assert_eq!(con.with_n, con.without_n);
        for p in &con.with_n {
            assert!((p - 1.0).abs() < 1e-14);
        }
        assert_eq!(omia_contrast(&eff, &[]), Err(Error::EmptyGrid));
    }

    #[test]
    fn large_damping_point_absorbs_in_rwa() {
        let kappa: f64 = 1.0;
        let beta = 9.0;
        let x = (beta - 4.0 * kappa * kappa).sqrt();
        assert!(is_large_damping_absorption_point(
            4.0, kappa, beta, x, 1e-12
        ));
        assert!(is_large_damping_absorption_point(
            4.0, kappa, beta, -x, 1e-12
        ));
        assert!(!is_large_damping_absorption_point(
            1.0, kappa, beta, x, 1e-12
        ));
        assert!(!is_large_damping_absorption_point(
            4.0, kappa, 3.0, 0.0, 1e-12
        ));
        let eff = EffectiveParams::new(4.0, kappa, 10.0, beta).unwrap();
        let o = omia_response(
            ModelVariant::Rwa,
            &eff,
            &TwoPortDrive::symmetric(c(1.0, 0.0), x),
        )
        .unwrap();
        assert!(o.power_r.unwrap() < 1e-28);
    }

    #[test]
    fn zero_input_port_has_no_normalized_power() {
        let eff = EffectiveParams::new(1.0, 2.0, 5.0, 3.0).unwrap();
        let drive = TwoPortDrive {
            eps_l: c(0.0, 0.0),
            eps_r: c(1.0, 0.0),
            x: 0.3,
        };
        let o = omia_response(ModelVariant::Nrwa, &eff, &drive).unwrap();
        assert!(o.power_l.is_none() && o.power_r.is_some());
    }

    #[test]
    fn minus_sideband_from_sideband_solve() {
        let eff = EffectiveParams::ideal_omit(1.0, 100.0, 150.0).unwrap();
        let o = omia_response(
            ModelVariant::Nrwa,
            &eff,
            &TwoPortDrive::symmetric(c(1.0, 0.0), 0.7),
        )
        .unwrap();
        assert!(o.out_minus.norm() > 0.0 && o.out_minus.norm().is_finite());
    }

    proptest! {
        #[test]
        fn output_identities(
            lr in -3f64..3.0, li in -3f64..3.0, rr in -3f64..3.0, ri in -3f64..3.0,
            x in -1e3f64..1e3, beta in 0f64..1e4,
        ) {
            let eff = EffectiveParams::new(1.0, 50.0, 300.0, beta).unwrap();
            for v in ModelVariant::ALL {
                let drive = TwoPortDrive { eps_l: c(lr, li), eps_r: c(rr, ri), x };
                let o = omia_response(v, &eff, &drive).unwrap();
                let lhs = o.out_l_plus - o.out_r_plus;
                let rhs = drive.eps_r - drive.eps_l;
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + o.out_l_plus.norm()));
                let sym = omia_response(v, &eff, &TwoPortDrive::symmetric(c(lr, li), x)).unwrap();
                prop_assert_eq!(sym.out_l_plus, sym.out_r_plus);
            }
        }
    }
}
