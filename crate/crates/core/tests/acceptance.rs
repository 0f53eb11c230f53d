//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use optomech::analysis::{delay_formula, slope_at_window};
use optomech::oracle::check_linearity;
use optomech::response::eps_t_value;
use optomech::{
    delay_bounds, find_extremum, integrate_nonlinear, linspace, omia_conditions, omia_contrast,
    omia_response, omit_conditions, solve_sidebands, steady_state, time_delay_analytic,
    time_delay_numeric, transmission_points, window_fwhm, Channel, Complex64, EffectiveParams,
    ExtremumKind, IntegrationConfig, ModelVariant, OmiaMode, OptomechParams, SidebandSystem,
    TwoPortDrive,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn finish(self) -> Outcome {
        if self.failures.is_empty() {
            Ok(self.notes.join("; "))
        } else {
            Err(self.failures.join("; "))
        }
    }
}

fn err(e: optomech::Error) -> String {
    format!("error: {e}")
}

fn ideal_window() -> EffectiveParams {
    EffectiveParams::ideal_omit(1.0, 1e4, 1e4).unwrap()
}

fn transparency_dip() -> Outcome {
    let eff = ideal_window();
    let xs = linspace(-20.0, 20.0, 4001);
    let mut c = Check::new();
    let re =
        |v: ModelVariant| move |x: f64| eps_t_value(v, &eff, x).map(|e| e.re).unwrap_or(f64::NAN);
    let min_of = |v: ModelVariant| {
        let f = re(v);
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        find_extremum(&xs, &ys, ExtremumKind::Min, f)
    };
    let nrwa = min_of(ModelVariant::Nrwa).map_err(err)?;
    c.require(
        nrwa.value <= 1e-6,
        format!("min Re ε_T = {:.3e} (≤ 1e-6)", nrwa.value),
    );
    c.require(
        (nrwa.x + 0.5).abs() <= 1e-3,
        format!("at x = {:.6}γ (−0.5 ± 1e-3)", nrwa.x),
    );
    let no_n = min_of(ModelVariant::NrwaNoN).map_err(err)?;
    c.require(
        no_n.value >= 0.3,
        format!("𝒩 = 0 min Re = {:.4} (≥ 0.3)", no_n.value),
    );
    c.finish()
}

fn window_width() -> Outcome {
    let w = window_fwhm(
        ModelVariant::Nrwa,
        &ideal_window(),
        &linspace(-20.0, 20.0, 4001),
    )
    .map_err(err)?;
    let mut c = Check::new();
    c.require(
        (w.width - 2.0).abs() <= 0.02,
        format!("FWHM = {:.5}γ (2γ ± 1%)", w.width),
    );
    c.finish()
}

fn delay_peak() -> Outcome {
    let eff = ideal_window();
    let mut c = Check::new();
    let x_peak = -0.5 + 1e-3;
    let tau =
        time_delay_numeric(ModelVariant::Nrwa, &eff, x_peak, Channel::Transmitted).map_err(err)?;
    c.require(
        (tau - 1.0).abs() <= 1e-3,
        format!("γτ(−γ/2 + 1e-3γ) = {tau:.6} (1 ± 1e-3)"),
    );
    let mut worst: f64 = 0.0;
    for x in linspace(-20.0, 20.0, 400) {
        let num =
            time_delay_numeric(ModelVariant::Nrwa, &eff, x, Channel::Transmitted).map_err(err)?;
        let ana = time_delay_analytic(&eff, x).map_err(err)?;
        worst = worst.max(((num - ana) / ana).abs());
    }
    c.require(
        worst <= 1e-3,
        format!("numeric vs analytic τ max rel = {worst:.2e} (≤ 1e-3)"),
    );
    // κ = ω_m: τ_max = 1/γ in closed form
    let b = delay_bounds(1.0, 1e4, 1e4).map_err(err)?;
    c.require(
        (b.tau_max - 1.0).abs() <= 1e-12,
        format!("τ_max(κ = ω_m) = {}/γ", b.tau_max),
    );
    c.finish()
}

fn identities() -> Outcome {
    let mut c = Check::new();
    let mut worst = [0.0f64; 4];
    let cases = [
        (1.0, 1e4, 1e4),
        (1.0, 1e3, 1e4),
        (1.0, 2e4, 1e4),
        (0.7, 13.0, 250.0),
        (2e-3, 1.0, 0.3),
        (1.0, 1e5, 1e2),
    ];
    for &(g, k, w) in &cases {
        let b = delay_bounds(g, k, w).map_err(err)?;
        let om = omit_conditions(g, k, w).map_err(err)?;
        let k_max = slope_at_window(g, k, w);
        worst[0] = worst[0].max(((b.tau_max + k_max) / b.tau_max).abs());
        worst[1] = worst[1].max((k_max * om.width + 2.0).abs() / 2.0);
        // ideal β satisfies the transmission condition −ix + β/(γ/2 − ix + 𝒩) = 0 at x±
        let eff = EffectiveParams::ideal_omit(g, k, w).map_err(err)?;
        let tp = transmission_points(&eff).map_err(err)?;
        for x in [tp.x_plus, tp.x_minus] {
            let d = Complex64::new(g / 2.0, -x) + eff.nrwa_term();
            let r = Complex64::new(0.0, -x) + eff.beta / d;
            worst[2] = worst[2].max(r.norm() / x.abs());
        }
        let ratio = k * k / (k * k + w * w);
        worst[3] = worst[3].max(((b.ratio - ratio) / ratio).abs());
    }
    let names = [
        "τ_max + K_max",
        "K_max·Γ + 2",
        "transmission condition at x± with ideal β",
        "τ_max/τ_m − κ²/(κ²+ω²)",
    ];
    for (n, r) in names.iter().zip(worst) {
        c.require(r <= 1e-12, format!("{n}: {r:.1e}"));
    }
    let mut prev = 0.0;
    let mut monotone = true;
    for e in 1..=8 {
        let r = delay_bounds(1.0, 1.0, 10f64.powi(-e)).map_err(err)?.ratio;
        monotone &= r > prev;
        prev = r;
    }
    c.require(
        monotone && (1.0 - prev).abs() <= 1e-12,
        format!("ratio → {prev} as ω_m/κ → 0"),
    );
    c.finish()
}

fn positivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut bad = 0usize;
    let mut smallest = f64::INFINITY;
    for _ in 0..100_000 {
        let g = 10f64.powf(rng.gen_range(-3.0..3.0));
        let k = g * 10f64.powf(rng.gen_range(-2.0..5.0));
        let w = g * 10f64.powf(rng.gen_range(-2.0..5.0));
        let width = g * (k * k + w * w) / (k * k);
        let x = rng.gen_range(-50.0..50.0) * width;
        let t = delay_formula(g, k, w, x);
        if t.is_nan() || t <= 0.0 {
            bad += 1;
        }
        smallest = smallest.min(t * g);
    }
    let mut c = Check::new();
    c.require(
        bad == 0,
        format!("{bad} non-positive of 1e5 (min γτ = {smallest:.2e})"),
    );
    c.finish()
}

fn perfect_transmission() -> Outcome {
    let eff = EffectiveParams::ideal_omit(1.0, 1e3, 1e4).map_err(err)?;
    let mut c = Check::new();
    let t = |x: f64| eps_t_value(ModelVariant::Nrwa, &eff, x).map(|e| e.norm_sqr());
    let mut worst: f64 = 0.0;
    for centre in [317.8, -317.8] {
        for off in [-0.5, 0.0, 0.5] {
            worst = worst.max((t(centre + off).map_err(err)? - 1.0).abs());
        }
    }
    c.require(
        worst <= 1e-4,
        format!("|T − 1| at ±317.8γ ± 0.5γ ≤ {worst:.2e} (1e-4)"),
    );
    let r = (eps_t_value(ModelVariant::Nrwa, &eff, -5.0).map_err(err)? - 1.0).norm_sqr();
    c.require(
        (r - 1.0).abs() <= 1e-3,
        format!("R(−5γ) = {r:.6} (1 ± 1e-3)"),
    );
    let tp = transmission_points(&eff).map_err(err)?;
    let inv_k = 1.0 / eff.kappa;
    for (name, x, closed) in [
        ("+", tp.x_plus, tp.tau_plus),
        ("−", tp.x_minus, tp.tau_minus),
    ] {
        let num =
            time_delay_numeric(ModelVariant::Nrwa, &eff, x, Channel::Transmitted).map_err(err)?;
        c.require(
            ((num - inv_k) / inv_k).abs() <= 0.05 && ((closed - inv_k) / inv_k).abs() <= 0.05,
            format!(
                "κτ{name} = {:.4} numeric, {:.4} closed (1 ± 5%)",
                num * eff.kappa,
                closed * eff.kappa
            ),
        );
    }
    c.finish()
}

fn omia_rwa() -> Outcome {
    let mut c = Check::new();
    let kappa = 1e3;
    for gamma in [kappa / 10.0, kappa, 2.0 * kappa] {
        let cond = omia_conditions(OmiaMode::Rwa, gamma, kappa, 1e4).map_err(err)?;
        let eff = EffectiveParams::new(gamma, kappa, 1e4, cond.beta).map_err(err)?;
        let drive = TwoPortDrive::symmetric(Complex64::new(1.0, 0.0), cond.x);
        let o = omia_response(ModelVariant::Rwa, &eff, &drive).map_err(err)?;
        let p = o.power_l.unwrap().max(o.power_r.unwrap());
        c.require(p <= 1e-12, format!("γ = {}κ: {p:.1e}", gamma / kappa));
    }
    c.finish()
}

fn omia_nrwa() -> Outcome {
    let mut c = Check::new();
    let (g, k, w) = (1.0, 2e4, 1e4);
    let cond = omia_conditions(OmiaMode::Nrwa, g, k, w).map_err(err)?;
    let eff = EffectiveParams::new(g, k, w, cond.beta).map_err(err)?;
    let drive = TwoPortDrive::symmetric(Complex64::new(1.0, 0.0), cond.x);
    let with_n = omia_response(ModelVariant::Nrwa, &eff, &drive)
        .map_err(err)?
        .power_r
        .unwrap();
    let without = omia_response(ModelVariant::NrwaNoN, &eff, &drive)
        .map_err(err)?
        .power_r
        .unwrap();
    c.require(
        with_n <= 1e-6,
        format!("unresolved: power at x* = {with_n:.2e} (≤ 1e-6)"),
    );
    c.require(
        without >= 1e2 * with_n.max(1e-6),
        format!(
            "𝒩 = 0 gives {without:.3e} (≥ 1e2 × {:.1e})",
            with_n.max(1e-6)
        ),
    );

    let (g, k, w) = (1.0, 1e3, 1e4);
    let cond = omia_conditions(OmiaMode::Nrwa, g, k, w).map_err(err)?;
    let eff = EffectiveParams::new(g, k, w, cond.beta).map_err(err)?;
    let con = omia_contrast(&eff, &linspace(-2e3, 2e3, 40001)).map_err(err)?;
    let (i, d) = con
        .with_n
        .iter()
        .zip(&con.without_n)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    c.require(
        d <= 1e-2,
        format!(
            "resolved: max |Δpower| = {d:.4} at x = {:.2}γ (≤ 1e-2)",
            con.x[i]
        ),
    );
    c.finish()
}

fn oracle_equivalence() -> Outcome {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let cfg = IntegrationConfig::default();
    let unit = Complex64::new(1.0, 0.0);
    let points: Vec<(SidebandSystem, f64)> = (0..20)
        .map(|_| {
            let kappa = 10f64.powf(rng.gen_range(2.0..3.0));
            let omega_m = 10f64.powf(rng.gen_range(2.0..3.0));
            let eff = EffectiveParams::ideal_omit(1.0, kappa, omega_m).unwrap();
            let beta = eff.beta * rng.gen_range(0.2..2.0);
            let eff = EffectiveParams::new(1.0, kappa, omega_m, beta).unwrap();
            let width = omit_conditions(1.0, kappa, omega_m).unwrap().width;
            let x = rng.gen_range(-5.0..5.0) * width;
            (SidebandSystem::from_effective(&eff), omega_m + x)
        })
        .collect();
    let runs = optomech::oracle::integrate_linearized_batch(
        &points,
        unit,
        &cfg,
        optomech::Execution::Parallel,
    );
    let mut worst: f64 = 0.0;
    for ((sys, delta), run) in points.iter().zip(runs) {
        let run = run.map_err(err)?;
        let lin = solve_sidebands(sys, *delta, unit).map_err(err)?;
        worst = worst.max((run.c.c_plus - lin.c_plus).norm() / lin.c_plus.norm());
    }
    c.require(
        worst <= 1e-6,
        format!("linearized vs solve max rel = {worst:.2e} (≤ 1e-6)"),
    );

    let p = OptomechParams::for_operating_point(1.0, 1e4, 1e4, 2e4, 1.0).map_err(err)?;
    let ss = steady_state(&p).map_err(err)?;
    let sys = SidebandSystem::from_steady_state(&p, &ss);
    let eps_p = Complex64::new(1e-4 * p.eps_c, 0.0);
    let delta = p.omega_m + 1.0;
    let rep = check_linearity(&p, &ss, delta, eps_p, &cfg).map_err(err)?;
    let want = 2.0 * p.kappa * solve_sidebands(&sys, delta, unit).map_err(err)?.c_plus;
    let got = rep.full.eps_t(p.kappa);
    c.require(
        (got - want).norm() <= 1e-3,
        format!(
            "nonlinear ε_T(x = γ) off by {:.1e} (≤ 1e-3)",
            (got - want).norm()
        ),
    );
    c.require(
        rep.change <= 1e-2 * 1e-4,
        format!("halving ε_p changes ε_T by {:.1e} (≤ 1e-6)", rep.change),
    );
    let dip = integrate_nonlinear(&p, &ss, p.omega_m - 0.5, eps_p, &cfg).map_err(err)?;
    let at_dip = dip.eps_t(p.kappa).norm();
    c.require(
        at_dip <= 1e-3,
        format!("nonlinear |ε_T| at the dip = {at_dip:.1e} (≤ 1e-3)"),
    );
    c.finish()
}

fn hierarchy() -> Outcome {
    let eff = ideal_window();
    let mut c = Check::new();
    let xs = linspace(-20.0, 20.0, 4001);
    let mut worst: f64 = 0.0;
    let mut rwa_min = f64::INFINITY;
    for &x in &xs {
        let ex = eps_t_value(ModelVariant::Exact, &eff, x).map_err(err)?;
        let nr = eps_t_value(ModelVariant::Nrwa, &eff, x).map_err(err)?;
        worst = worst.max((ex - nr).norm());
        rwa_min = rwa_min.min(eps_t_value(ModelVariant::Rwa, &eff, x).map_err(err)?.re);
    }
    c.require(
        worst <= 1e-3,
        format!("|EXACT − NRWA| ≤ {worst:.2e} (1e-3)"),
    );
    c.require(rwa_min >= 0.3, format!("RWA min Re = {rwa_min:.4} (≥ 0.3)"));
    c.finish()
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "1 transparency dip",
            transparency_dip,
            Duration::from_secs(1),
        ),
        ("2 window width", window_width, Duration::from_secs(1)),
        ("3 delay peak", delay_peak, Duration::from_secs(2)),
        ("4 identity suite", identities, Duration::from_secs(1)),
        ("5 delay positivity", positivity, Duration::from_secs(2)),
        (
            "6 perfect transmission",
            perfect_transmission,
            Duration::from_secs(1),
        ),
        ("7 OMIA (RWA)", omia_rwa, Duration::from_secs(1)),
        ("8 OMIA (NRWA)", omia_nrwa, Duration::from_secs(1)),
        (
            "9 oracle equivalence",
            oracle_equivalence,
            Duration::from_secs(60),
        ),
        (
            "10 exact vs approximations",
            hierarchy,
            Duration::from_secs(1),
        ),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > limit => Err(format!("{msg}; runtime {took:.2?} exceeds {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name} [{took:.2?}]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} [{took:.2?}]: {msg}");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
