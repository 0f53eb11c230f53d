//! Optical response of a driven membrane-in-the-middle optomechanical
//! cavity to a weak probe.
//!
//! The crate evaluates ε_T, the probe-frequency output quadrature, in three
//! ways: by solving the linearized sideband equations, by the closed form
//! that keeps the counter-rotating term 𝒩, and by the rotating-wave closed
//! form. On top of that it derives transparency conditions, group delays,
//! perfect-transmission points and two-port perfect-absorption conditions,
//! and checks the frequency-domain results against direct time integration.
//!
//! ```
//! use optomech::{epsilon_t, EffectiveParams, ModelVariant};
//!
//! // ω_m = κ = 10⁴γ with β = γ(κ² + ω_m²)/κ: ε_T vanishes at x = −γ/2
//! let eff = EffectiveParams::ideal_omit(1.0, 1e4, 1e4).unwrap();
//! let s = epsilon_t(ModelVariant::Nrwa, &eff, -0.5).unwrap();
//! assert!(s.eps_t.norm() < 1e-12);
//! ```

// `!(a > b)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod model;
pub mod omia;
pub mod oracle;
pub mod par;
pub mod response;

pub use analysis::{
    delay_bounds, delay_curve, dispersion_slope, find_extremum, omit_conditions,
    time_delay_analytic, time_delay_numeric, transmission_points, window_fwhm, Channel,
    DelayBounds, DelayCurve, Extremum, ExtremumKind, OmitConditions, TransmissionPoints,
};
pub use error::{Error, Result};
pub use model::{
    compute_g0, derive_effective, steady_state, EffectiveParams, MembraneGeometry, OptomechParams,
    SteadyState,
};
pub use num_complex::Complex64;
pub use omia::{
    omia_conditions, omia_contrast, omia_response, OmiaConditions, OmiaMode, TwoPortDrive,
    TwoPortOutput,
};
pub use oracle::{integrate_linearized, integrate_nonlinear, IntegrationConfig, OracleRun};
pub use par::Execution;
pub use response::{
    epsilon_t, linspace, solve_sidebands, spectrum, ModelVariant, ResponseSample, ResponseSpectrum,
    SidebandAmplitudes, SidebandSystem,
};
