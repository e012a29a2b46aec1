use num_traits::Float;

use super::effective::{condition_residual, derive_effective};
use super::geometry::{uniform_sites, AtomSite};
use super::physical::{DetuningSpec, PhysicalParams};
use crate::error::{Error, Result};
use crate::C64;

/// Target of [`solve_condition`]: `|residual| ≤ SOLVE_TOL · |δ̃|`.
pub const SOLVE_TOL: f64 = 1e-6;

/// Knob adjusted by [`solve_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreeParameter {
    /// `Ω_2`, i.e. the laser ratio `Ω_1/Ω_2`.
    #[default]
    Rabi2,
    /// `Δ_2` at fixed `δ_2`, i.e. the ratio `Δ_1/Δ_2`.
    Detuning2,
}

fn with_free(params: &PhysicalParams, free: FreeParameter, x: f64) -> Result<PhysicalParams> {
    match free {
        FreeParameter::Rabi2 => {
            let mut p = *params;
            p.rabi_2 = x;
            p.validate()?;
            Ok(p)
        }
        FreeParameter::Detuning2 => params.with_detuning_2(x),
    }
}

/// Adjusts one parameter until the matching condition holds.
///
/// The search walks a logarithmic grid outward from the current value in both
/// directions (up to a factor 10⁶), bisects every sign change and keeps the
/// first whose limit is a genuine root rather than a pole of some `1/δ_k`.
pub fn solve_condition(params: &PhysicalParams, sites: &[AtomSite], free: FreeParameter) -> Result<PhysicalParams> {
    let base = condition_residual(params, sites)?;
    let scale = if base.delta_tilde != 0.0 { base.delta_tilde.abs() } else { 1.0 };
    if base.residual.abs() <= SOLVE_TOL * scale {
        return Ok(*params);
    }
    let x0 = match free {
        FreeParameter::Rabi2 if params.rabi_2 == 0.0 => params.rabi_1.abs().max(1.0),
        FreeParameter::Rabi2 => params.rabi_2,
        FreeParameter::Detuning2 => params.detuning_2,
    };
    let f = |s: f64| -> Option<f64> {
        let p = with_free(params, free, x0 * s.exp()).ok()?;
        let r = condition_residual(&p, sites).ok()?;
        r.residual.is_finite().then_some(r.residual / scale)
    };

    const STEP: f64 = core::f64::consts::LN_2 / 8.0;
    let limit = (1e6f64).ln();
    let steps = (limit / STEP).ceil() as i32;
    let mut right = (0.0, f(0.0));
    let mut left = right;
    for j in 1..=steps {
        for dir in [1.0, -1.0] {
            let prev = if dir > 0.0 { right } else { left };
            let s = dir * f64::from(j) * STEP;
            let cur = (s, f(s));
            if let (Some(fa), Some(fb)) = (prev.1, cur.1) {
                if fa == 0.0 {
                    return with_free(params, free, x0 * prev.0.exp());
                }
                if fa.signum() != fb.signum() {
                    if let Some(s_root) = bisect(&f, prev.0, fa, cur.0) {
                        return with_free(params, free, x0 * s_root.exp());
                    }
                }
            }
            if dir > 0.0 {
                right = cur;
            } else {
                left = cur;
            }
        }
    }
    Err(Error::NoRoot {
        lo: x0 * left.0.exp(),
        hi: x0 * right.0.exp(),
        f_lo: left.1.unwrap_or(f64::NAN) * scale,
        f_hi: right.1.unwrap_or(f64::NAN) * scale,
    })
}

/// Bisects a sign change of `f` on `[a, b]`; `None` when the limit point is
/// a pole.
fn bisect(f: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut fa: f64, mut b: f64) -> Option<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let (s, fs) = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    (fs.abs() <= SOLVE_TOL).then_some(s)
}

/// A parameter point of the dispersive test family together with its sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderDesign {
    pub params: PhysicalParams,
    pub sites: alloc::vec::Vec<AtomSite>,
    pub margin: f64,
    pub omega_eff: C64,
}

/// Uniformly coupled ensemble of `n_atoms` whose every `≫` inequality holds
/// with ratio at least `margin`, with both sides of the matching condition
/// equal to `δ̃` and `τ` chosen so that `|ξ| = xi_target`.
///
/// With `g = 1`, `Ω_1 = Ω_2 = 1.4 M`, `Δ_1 = 1.05 M Ω_1` and `Δ_2 = 2Δ_1`
/// the Raman couplings satisfy `Ω̃_kb = Ω̃_ka/2`, and `|δ_k|/|Ω̃_ka| ≈ 1.05 M`.
/// The two-photon detunings follow from a fixed-point iteration.
pub fn dispersive_design(margin: f64, n_atoms: usize, xi_target: f64) -> Result<LadderDesign> {
    if !(margin.is_finite() && margin >= 1.0) {
        return Err(Error::InvalidParameter { name: "margin", reason: alloc::format!("must be at least 1 ({margin})") });
    }
    if n_atoms == 0 {
        return Err(Error::InvalidParameter { name: "n_atoms", reason: alloc::string::String::from("must be positive") });
    }
    let n = n_atoms as f64;
    let rabi = 1.4 * margin;
    let d1 = 1.05 * margin * rabi;
    let d2 = 2.0 * d1;
    let s1 = rabi * rabi / d1;
    let s2 = rabi * rabi / d2;
    let ta = rabi / d1;
    let tb = rabi / d2;
    let (mut delta_tilde, mut split) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let dt1 = d1 - (delta_tilde - split);
        let delta_k = (tb * tb - ta * ta) * dt1;
        let new_tilde = n * tb * tb / delta_k;
        let new_split = delta_k - s2 + s1;
        let done = new_tilde == delta_tilde && new_split == split;
        delta_tilde = new_tilde;
        split = new_split;
        if done {
            break;
        }
    }
    let mut params = PhysicalParams::from_detunings(DetuningSpec {
        g_a: 1.0,
        g_b: 1.0,
        rabi_1: rabi,
        rabi_2: rabi,
        detuning_1: d1,
        detuning_2: d2,
        two_photon_1: delta_tilde - split,
        two_photon_2: delta_tilde + split,
        ..DetuningSpec::default()
    })?;
    let sites = uniform_sites(n_atoms);
    let model = derive_effective(&params, &sites)?;
    params.tau = xi_target / model.omega_eff.norm();
    params.validate()?;
    Ok(LadderDesign { params, sites, margin, omega_eff: model.omega_eff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::regime::{regime_report, Hierarchy};

    #[test]
    fn restores_perturbed_example() {
        let sites = uniform_sites(3);
        let mut p = PhysicalParams::rubidium_example();
        p.rabi_2 *= 1.1;
        let before = condition_residual(&p, &sites).unwrap();
        assert!(before.relative > 10.0 * SOLVE_TOL);
        let solved = solve_condition(&p, &sites, FreeParameter::Rabi2).unwrap();
        assert!(condition_residual(&solved, &sites).unwrap().relative <= SOLVE_TOL);
        assert_eq!(solved.rabi_1, p.rabi_1);
        let solved = solve_condition(&p, &sites, FreeParameter::Detuning2).unwrap();
        assert!(condition_residual(&solved, &sites).unwrap().relative <= SOLVE_TOL);
        assert_eq!(solved.two_photon_2, p.two_photon_2);
    }

    #[test]
    fn satisfied_params_unchanged() {
        let sites = uniform_sites(2);
        let mut p = PhysicalParams::rubidium_example();
        p.rabi_2 *= 1.3;
        let solved = solve_condition(&p, &sites, FreeParameter::Rabi2).unwrap();
        assert_eq!(solve_condition(&solved, &sites, FreeParameter::Rabi2).unwrap(), solved);
    }

    #[test]
    fn design_meets_margin_and_matches_frame() {
        for margin in [10.0, 30.0, 100.0] {
            for n in [1, 2] {
                let d = dispersive_design(margin, n, 0.1).unwrap();
                let m = derive_effective(&d.params, &d.sites).unwrap();
                assert!(m.condition.matches_frame(1e-12), "{margin} {n}: {:?}", m.condition);
                assert!((m.xi.norm() - 0.1).abs() < 1e-12);
                let r = regime_report(&d.params, &d.sites, d.params.tau, margin).unwrap();
                assert!(r.ok(), "{:?}", r.failures().collect::<alloc::vec::Vec<_>>());
                let first = r.min_ratio(Hierarchy::Dispersive).finite().unwrap();
                assert!(first < 1.2 * margin);
            }
        }
    }
}
