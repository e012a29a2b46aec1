use alloc::vec::Vec;


use super::geometry::AtomSite;
use super::physical::PhysicalParams;
use super::regime::{regime_from_parts, RegimeReport, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::C64;

/// Position-dependent couplings of one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomCouplings {
    /// `Ω_k1 = Ω_1 v_1(r_k)`.
    pub rabi_1: C64,
    /// `Ω_k2 = Ω_2 v_2(r_k)`.
    pub rabi_2: C64,
    /// `g_ka = g_a u_a(r_k)`.
    pub g_a: C64,
    /// `g_kb = g_b u_b(r_k)`.
    pub g_b: C64,
}

pub fn atom_couplings(params: &PhysicalParams, site: &AtomSite) -> AtomCouplings {
    AtomCouplings {
        rabi_1: site.v_1 * params.rabi_1,
        rabi_2: site.v_2 * params.rabi_2,
        g_a: site.u_a * params.g_a,
        g_b: site.u_b * params.g_b,
    }
}

/// The two sides of the matching condition that makes the ensemble generate
/// pure two-mode squeezing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// `Σ_k (|Ω̃_ka|²/δ_k + |g_ka|²/Δ̃_1)`.
    pub lhs: f64,
    /// `Σ_k |Ω̃_kb|²/δ_k`.
    pub rhs: f64,
    /// `lhs − rhs`.
    pub residual: f64,
    /// `|lhs − rhs| / |δ̃|` (or relative to the larger side when `δ̃ = 0`).
    pub relative: f64,
    pub delta_tilde: f64,
}

impl ConditionReport {
    /// Both sides also equal `δ̃`, so the frame shift cancels the number
    /// terms exactly and only `Ω a†b† + h.c.` survives.
    pub fn matches_frame(&self, rel_tol: f64) -> bool {
        let s = self.delta_tilde.abs().max(f64::MIN_POSITIVE);
        (self.lhs - self.delta_tilde).abs() <= rel_tol * s && (self.rhs - self.delta_tilde).abs() <= rel_tol * s
    }
}

/// Everything the reduced models need, derived from parameters and sites.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    pub couplings: Vec<AtomCouplings>,
    /// `δ_k = (δ_2 − δ_1)/2 + |Ω_k2|²/Δ_2 − |Ω_k1|²/Δ_1`.
    pub delta_k: Vec<f64>,
    /// `Ω̃_ka = Ω_k1* g_ka / Δ_1`.
    pub omega_tilde_a: Vec<C64>,
    /// `Ω̃_kb = Ω_k2* g_kb / Δ_2`.
    pub omega_tilde_b: Vec<C64>,
    /// Light shifts `|Ω_k1|²/Δ_1` of level 1 and `|Ω_k2|²/Δ_2` of level 2.
    pub stark_1: Vec<f64>,
    pub stark_2: Vec<f64>,
    pub delta_tilde: f64,
    /// `Ω = Σ_k Ω̃_ka* Ω̃_kb* / δ_k`.
    pub omega_eff: C64,
    /// `ξ = iΩτ`.
    pub xi: C64,
    pub condition: ConditionReport,
    pub regime: RegimeReport,
}

impl EffectiveModel {
    pub fn n_atoms(&self) -> usize {
        self.couplings.len()
    }
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.s + self.c
    }
}

pub fn derive_effective(params: &PhysicalParams, sites: &[AtomSite]) -> Result<EffectiveModel> {
    params.validate()?;
    let n = sites.len();
    let mut model = EffectiveModel {
        couplings: Vec::with_capacity(n),
        delta_k: Vec::with_capacity(n),
        omega_tilde_a: Vec::with_capacity(n),
        omega_tilde_b: Vec::with_capacity(n),
        stark_1: Vec::with_capacity(n),
        stark_2: Vec::with_capacity(n),
        delta_tilde: params.delta_tilde(),
        omega_eff: C64::new(0.0, 0.0),
        xi: C64::new(0.0, 0.0),
        condition: ConditionReport { lhs: 0.0, rhs: 0.0, residual: 0.0, relative: 0.0, delta_tilde: 0.0 },
        regime: RegimeReport::default(),
    };
    let split = 0.5 * (params.two_photon_2 - params.two_photon_1);
    let (mut re, mut im, mut lhs, mut rhs) = (Sum::default(), Sum::default(), Sum::default(), Sum::default());
    for (k, site) in sites.iter().enumerate() {
        let c = atom_couplings(params, site);
        let s1 = c.rabi_1.norm_sqr() / params.detuning_1;
        let s2 = c.rabi_2.norm_sqr() / params.detuning_2;
        let delta_k = split + s2 - s1;
        let scale = split.abs() + s1.abs() + s2.abs();
        if delta_k.abs() <= f64::EPSILON * scale || delta_k == 0.0 {
            return Err(Error::ResonantAtom { atom: k });
        }
        let ta = c.rabi_1.conj() * c.g_a / params.detuning_1;
        let tb = c.rabi_2.conj() * c.g_b / params.detuning_2;
        let w = ta.conj() * tb.conj() / delta_k;
        re.add(w.re);
        im.add(w.im);
        lhs.add(ta.norm_sqr() / delta_k);
        lhs.add(c.g_a.norm_sqr() / params.cavity_detuning_1);
        rhs.add(tb.norm_sqr() / delta_k);
        model.couplings.push(c);
        model.delta_k.push(delta_k);
        model.omega_tilde_a.push(ta);
        model.omega_tilde_b.push(tb);
        model.stark_1.push(s1);
        model.stark_2.push(s2);
    }
    model.omega_eff = C64::new(re.value(), im.value());
    model.xi = squeeze_parameter(model.omega_eff, params.tau);
    model.condition = condition_from_sides(lhs.value(), rhs.value(), model.delta_tilde);
    model.regime = regime_from_parts(params, &model, params.tau, DEFAULT_MARGIN);
    Ok(model)
}

fn condition_from_sides(lhs: f64, rhs: f64, delta_tilde: f64) -> ConditionReport {
    let residual = lhs - rhs;
    let scale = if delta_tilde != 0.0 { delta_tilde.abs() } else { lhs.abs().max(rhs.abs()) };
    let relative = if residual == 0.0 { 0.0 } else { residual.abs() / scale };
    ConditionReport { lhs, rhs, residual, relative, delta_tilde }
}

/// Evaluates the matching condition for `params` and `sites`.
pub fn condition_residual(params: &PhysicalParams, sites: &[AtomSite]) -> Result<ConditionReport> {
    Ok(derive_effective(params, sites)?.condition)
}

/// `ξ = iΩτ`, the argument of the squeeze operator generated by
/// `Ω a†b† + Ω* ab` in time `τ`.
pub fn squeeze_parameter(omega_eff: C64, tau: f64) -> C64 {
    C64::new(0.0, tau) * omega_eff
}
