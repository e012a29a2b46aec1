//! The acceptance criteria as plain functions. Each returns whether it held
//! and a one-line account of the numbers behind the verdict; the
//! `acceptance` test target runs them all and prints one line apiece.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use cavsqueeze::commands;
use cavsqueeze::config::{self, CommandName};
use cavsqueeze::sweep;
use cavsqueeze_core::evolution::{cavity_decay, margin_ladder, quadrature_stats, relax_to_steady_state, StepControl};
use cavsqueeze_core::fock::{annihilation, number, DensityMatrix, HilbertLayout, Mode, StateVector};
use cavsqueeze_core::hamiltonians::Generator;
use cavsqueeze_core::inout::{intracavity_moments, output_variances, reduction_parameter, DriveParams};
use cavsqueeze_core::params::{derive_effective, max_squeeze_ratio, uniform_sites, PhysicalParams};
use cavsqueeze_core::squeeze::{
    apply_displacement, apply_field_exponential, apply_squeeze, convert_ordering, squeeze_generator, SqueezeKind,
    SqueezeSpec,
};
use cavsqueeze_core::{Extended, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Margin-100 infidelities of the dispersive ladder at `|ξ| = 0.1`,
/// `n_max = 10`, frozen from the first derivation (N = 1, N = 2).
pub const FROZEN_MARGIN_100: [f64; 2] = [7.410_666e-5, 3.106_305e-4];

/// Headroom on the frozen values: run-to-run drift is zero by construction,
/// this only absorbs platform libm differences.
pub const FROZEN_HEADROOM: f64 = 1.001;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

type Check = Result<(bool, String), String>;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub budget: Option<Duration>,
    pub run: fn() -> Check,
}

pub fn criteria() -> Vec<Criterion> {
    let secs = |s: f64| Some(Duration::from_secs_f64(s));
    vec![
        Criterion { id: 1, name: "worked example regression", budget: secs(1.0), run: worked_example_regression },
        Criterion { id: 2, name: "self-consistent squeezing estimate", budget: secs(0.1), run: max_squeeze_estimate },
        Criterion { id: 3, name: "input-output closed forms", budget: secs(1.0), run: inout_closed_forms },
        Criterion { id: 4, name: "effective-dynamics verification", budget: secs(300.0), run: margin_monotone },
        Criterion { id: 5, name: "squeeze-operator oracle equivalence", budget: secs(10.0), run: squeeze_oracle },
        Criterion { id: 6, name: "dissipative cross-check", budget: secs(120.0), run: dissipative },
        Criterion { id: 7, name: "operator-ordering equivalence", budget: secs(30.0), run: ordering },
        Criterion { id: 8, name: "determinism", budget: None, run: determinism },
    ]
}

pub fn evaluate(c: &Criterion) -> Outcome {
    let start = Instant::now();
    let res = (c.run)();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match res {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = c.budget {
        if elapsed > b {
            passed = false;
            detail = format!("{detail}; runtime {elapsed:.2?} over budget {b:.2?}");
        }
    }
    Outcome { id: c.id, name: c.name, passed, detail, elapsed, budget: c.budget }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(x: f64, want: f64) -> f64 {
    ((x - want) / want).abs()
}

/// Criterion 1.
pub fn worked_example_regression() -> Check {
    let p = PhysicalParams::rubidium_example();
    let m = derive_effective(&p, &uniform_sites(40_000)).map_err(err)?;
    let dk_err = m.delta_k.iter().map(|&d| rel(d, -(1.0 - 1.0 / 400.0))).fold(0.0, f64::max);
    let dt_err = rel(m.delta_tilde, -0.01);
    let om_err = rel(m.omega_eff.re, -0.2).max(m.omega_eff.im.abs() / 0.2);
    let cond = m.condition.relative;
    let ok = dk_err < 1e-12 && dt_err < 1e-12 && om_err < 1e-12 && cond < 1e-3;
    let mut detail = format!(
        "delta_k rel err {dk_err:.1e}, deltaT rel err {dt_err:.1e}, Omega = {:.10} (rel err {om_err:.1e}), residual/|deltaT| = {cond:.2e}",
        m.omega_eff.re
    );
    if om_err >= 1e-12 {
        // The printed inputs give Ω = −0.2·400/399; the rounded value needs N = 39 900.
        let m399 = derive_effective(&p, &uniform_sites(39_900)).map_err(err)?;
        detail += &format!("; N = 39900 gives Omega = {:.15}", m399.omega_eff.re);
    }
    Ok((ok, detail))
}

/// Criterion 2.
pub fn max_squeeze_estimate() -> Check {
    let m = max_squeeze_ratio(1.0).map_err(err)?;
    // Independent oracle: plain bisection on x sinh²(2x) − 1 over [0, 2].
    let f = |x: f64| x * (2.0 * x).sinh().powi(2) - 1.0;
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let ok = m.residual.abs() < 1e-10 && (m.xi_max - oracle).abs() < 1e-9 && (m.squeezing_fraction - 0.67).abs() <= 0.01;
    Ok((
        ok,
        format!(
            "|xi|_max = {:.12}, oracle {oracle:.12}, residual {:.1e}, fraction {:.4}",
            m.xi_max, m.residual, m.squeezing_fraction
        ),
    ))
}

/// Criterion 3.
pub fn inout_closed_forms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut prod_err, mut r_err) = (0.0f64, 0.0f64);
    let mut eps_exact = true;
    let mut count = 0;
    while count < 1000 {
        let ka = rng.random_range(0.05..5.0);
        let kb = rng.random_range(0.05..5.0);
        let omega = rng.random_range(0.0..3.0) * f64::sqrt(ka * kb);
        let d = DriveParams::undriven(omega, ka, kb).map_err(err)?;
        if d.is_critical() {
            continue;
        }
        count += 1;
        let v = output_variances(&d).map_err(err)?;
        let vx = v.var_x.finite().ok_or("var_x infinite off the critical point")?;
        prod_err = prod_err.max((vx * v.var_y - 1.0 / 16.0).abs());
        let r = reduction_parameter(&d).map_err(err)?.finite().ok_or("r infinite off the critical point")?;
        r_err = r_err.max(((-r).exp() / 4.0 - v.var_y).abs());
        let eps = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let driven = DriveParams::new(omega, ka, kb, eps(&mut rng), eps(&mut rng)).map_err(err)?;
        eps_exact &= output_variances(&driven).map_err(err)? == v;
    }
    let zero = output_variances(&DriveParams::undriven(0.0, 0.7, 1.9).map_err(err)?).map_err(err)?;
    let zero_ok = zero.var_x == Extended::Finite(0.25) && zero.var_y == 0.25;
    let crit = DriveParams::undriven(f64::sqrt(0.7 * 1.9), 0.7, 1.9).map_err(err)?;
    let cv = output_variances(&crit).map_err(err)?;
    let crit_ok = cv.var_y == 0.0 && reduction_parameter(&crit).map_err(err)?.is_infinite();
    let ok = prod_err <= 1e-12 && r_err <= 1e-12 && eps_exact && zero_ok && crit_ok;
    Ok((
        ok,
        format!(
            "1000 points: max |varX varY - 1/16| = {prod_err:.1e}, max |e^-r/4 - varY| = {r_err:.1e}, drive-independent {eps_exact}, Omega=0 {zero_ok}, critical {crit_ok}"
        ),
    ))
}

/// Criterion 4.
pub fn margin_monotone() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, n_atoms) in [1usize, 2].into_iter().enumerate() {
        let pts = margin_ladder(&[10.0, 30.0, 100.0], n_atoms, 0.1, 10).map_err(err)?;
        let inf: Vec<f64> = pts.iter().map(|p| p.infidelity).collect();
        let decreasing = inf.windows(2).all(|w| w[1] < w[0]);
        let frozen = FROZEN_MARGIN_100[i];
        let bound_ok = inf[2] <= frozen * FROZEN_HEADROOM;
        ok &= decreasing && bound_ok;
        parts.push(format!(
            "N={n_atoms}: {:.4e} > {:.4e} > {:.6e} (frozen {frozen:.6e}{})",
            inf[0],
            inf[1],
            inf[2],
            if bound_ok { "" } else { ", exceeded" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

/// Criterion 5.
pub fn squeeze_oracle() -> Check {
    let l = HilbertLayout::new(16, 16, 0).map_err(err)?;
    let vac = StateVector::basis(&l, 0, 0, &[]).map_err(err)?;
    let n_a = number(&l, Mode::A).map_err(err)?;
    let (mut n_err, mut y_err) = (0.0f64, 0.0f64);
    for k in 1..=10 {
        let x = 0.05 * k as f64;
        // Real ξ > 0 squeezes X under exp(ξ* ab − ξ a†b†); ξ = −|ξ| squeezes Y.
        let spec = SqueezeSpec::new(C64::new(-x, 0.0), SqueezeKind::NonDegenerate).map_err(err)?;
        let s = apply_squeeze(&vac, &spec).map_err(err)?;
        n_err = n_err.max((s.expectation(&n_a).map_err(err)?.re - x.sinh().powi(2)).abs());
        let q = quadrature_stats(&s).map_err(err)?;
        y_err = y_err.max((q.var_y - (-2.0 * x).exp() / 4.0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 1.0f64;
    for _ in 0..8 {
        let amps: Vec<C64> = (0..l.dim())
            .map(|i| {
                let (na, nb) = l.photons(i);
                let damp = (-((na + nb) as f64)).exp();
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp
            })
            .collect();
        let s = StateVector::normalized(l, amps).map_err(err)?;
        let xi = C64::from_polar(rng.random_range(0.0..0.5), rng.random_range(0.0..6.3));
        let fwd = SqueezeSpec::new(xi, SqueezeKind::NonDegenerate).map_err(err)?;
        let back = SqueezeSpec::new(-xi, SqueezeKind::NonDegenerate).map_err(err)?;
        let round = apply_squeeze(&apply_squeeze(&s, &fwd).map_err(err)?, &back).map_err(err)?;
        worst = worst.min(s.inner(&round).map_err(err)?.norm_sqr());
    }
    let ok = n_err <= 1e-6 && y_err <= 1e-6 && worst >= 1.0 - 1e-8;
    Ok((ok, format!("max |<n> - sinh^2| = {n_err:.1e}, max |varY - e^-2x/4| = {y_err:.1e}, worst round-trip fidelity 1 - {:.1e}", 1.0 - worst)))
}

/// Criterion 6.
pub fn dissipative() -> Check {
    let l = HilbertLayout::new(10, 10, 0).map_err(err)?;
    let a = annihilation(&l, Mode::A).map_err(err)?;
    let b = annihilation(&l, Mode::B).map_err(err)?;
    let ab = a.matmul(&b).map_err(err)?;
    let (n_a, n_b) = (number(&l, Mode::A).map_err(err)?, number(&l, Mode::B).map_err(err)?);
    let vac = DensityMatrix::from_pure(&StateVector::basis(&l, 0, 0, &[]).map_err(err)?);
    let (ka, kb) = (1.0, 1.3);
    let mut worst = 0.0f64;
    for ratio in [0.1, 0.2, 0.3] {
        let omega_l = ratio * f64::sqrt(ka * kb);
        // Ω_H = iΩ_L/2 gives ȧ = (Ω_L/2) b† − (κ_a/2) a.
        let omega_h = C64::new(0.0, omega_l / 2.0);
        let pair = a.adjoint().matmul(&b.adjoint()).map_err(err)?.into_matrix();
        let h = pair.lin_comb(omega_h, &pair.adjoint(), omega_h.conj());
        let g = Generator::constant(l, h).map_err(err)?;
        let decay = cavity_decay(&l, ka, kb).map_err(err)?;
        let ss = relax_to_steady_state(&vac, &g, &decay, 10.0, 1e-8, 60, &StepControl::default()).map_err(err)?;
        let m = intracavity_moments(&DriveParams::from_effective(omega_h, ka, kb, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).map_err(err)?)
            .map_err(err)?;
        // ⟨ab⟩ carries the phase of Ω_H; compare magnitudes.
        let got = [ss.expectation(&n_a).map_err(err)?.re, ss.expectation(&n_b).map_err(err)?.re, ss.expectation(&ab).map_err(err)?.norm()];
        for (g, w) in got.iter().zip([m.n_a, m.n_b, m.ab.abs()]) {
            worst = worst.max(rel(*g, w));
        }
    }
    Ok((worst <= 0.05, format!("worst relative deviation of (n_a, n_b, |<ab>|) over Omega/kappa in {{0.1, 0.2, 0.3}}: {worst:.1e} (limit 5e-2)")))
}

fn ordering_worst(n_max: usize) -> Result<f64, String> {
    let l = HilbertLayout::new(n_max, n_max, 0).map_err(err)?;
    let vac = StateVector::basis(&l, 0, 0, &[]).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 1.0f64;
    let cplx = |rng: &mut ChaCha8Rng| C64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..6.3));
    for k in 0..6 {
        let mag = if k == 0 { 0.8 } else { rng.random_range(0.0..0.8) };
        let spec = SqueezeSpec::new(C64::from_polar(mag, rng.random_range(0.0..6.3)), SqueezeKind::NonDegenerate).map_err(err)?;
        let (alpha, beta) = if k == 0 { (C64::new(1.0, 0.0), C64::new(0.0, -1.0)) } else { (cplx(&mut rng), cplx(&mut rng)) };
        let gen = squeeze_generator(&l, &spec).map_err(err)?;
        let lhs = apply_displacement(&vac, Mode::B, beta).map_err(err)?;
        let lhs = apply_displacement(&lhs, Mode::A, alpha).map_err(err)?;
        let lhs = apply_field_exponential(&lhs, &gen).map_err(err)?;
        let (ap, bp) = convert_ordering(&spec, alpha, beta);
        let rhs = apply_field_exponential(&vac, &gen).map_err(err)?;
        let rhs = apply_displacement(&rhs, Mode::B, bp).map_err(err)?;
        let rhs = apply_displacement(&rhs, Mode::A, ap).map_err(err)?;
        worst = worst.min(lhs.inner(&rhs).map_err(err)?.norm_sqr());
    }
    Ok(worst)
}

/// Criterion 7.
pub fn ordering() -> Check {
    let worst = ordering_worst(25)?;
    let ok = worst >= 1.0 - 1e-6;
    let mut detail = format!("worst fidelity over 6 draws (|xi| <= 0.8, |alpha|,|beta| <= 1) at n_max = 25: 1 - {:.1e}", 1.0 - worst);
    if !ok {
        // Same draws with a larger cutoff separate truncation from a wrong conversion.
        detail += &format!("; at n_max = 45: 1 - {:.1e}", 1.0 - ordering_worst(45)?);
    }
    Ok((ok, detail))
}

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Every emitted CSV and JSON string for the shipped configs.
fn emitted() -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let runs = [
        ("worked_example.toml", CommandName::Validate),
        ("worked_example.toml", CommandName::Effective),
        ("simulate_small.toml", CommandName::Simulate),
        ("critical.toml", CommandName::Inout),
    ];
    for (file, cmd) in runs {
        let loaded = config::load(&config_dir().join(file)).map_err(err)?;
        let o = commands::run(cmd, &loaded.config).map_err(err)?;
        out.push((format!("{file} {} csv", cmd.as_str()), o.table.to_csv()));
        out.push((format!("{file} {} json", cmd.as_str()), o.json));
    }
    let loaded = config::load(&config_dir().join("sweep_inout.toml")).map_err(err)?;
    let s = sweep::run(&loaded, 4, false).map_err(err)?;
    out.push(("sweep csv".into(), s.table.to_csv()));
    out.push(("sweep json".into(), cavsqueeze::output::to_json(&s.report).map_err(err)?));
    Ok(out)
}

/// Criterion 8.
pub fn determinism() -> Check {
    let first = emitted()?;
    let second = emitted()?;
    let differing: Vec<&str> = first.iter().zip(&second).filter(|(a, b)| a.1 != b.1).map(|(a, _)| a.0.as_str()).collect();
    let bytes: usize = first.iter().map(|f| f.1.len()).sum();
    Ok((
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} outputs, {bytes} bytes, identical across two runs", first.len())
        } else {
            format!("outputs differ: {}", differing.join(", "))
        },
    ))
}
