use alloc::string::String;
use alloc::vec::Vec;


use super::effective::{derive_effective, EffectiveModel};
use super::geometry::AtomSite;
use super::physical::PhysicalParams;
use crate::error::{Error, Result};
use crate::Extended;

/// Default required ratio for a `≫` inequality.
pub const DEFAULT_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hierarchy {
    /// Large detunings against couplings and two-photon detunings; justifies
    /// eliminating level `|0>`.
    Dispersive,
    /// `|δ_k|` against the Raman couplings and shifts; justifies the second
    /// time average.
    TimeAveraging,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCheck {
    pub name: String,
    pub hierarchy: Hierarchy,
    pub required: f64,
    /// Worst case over atoms; infinite when the small side vanishes.
    pub actual: Extended,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    /// Smallest finite ratio within `hierarchy`.
    pub fn min_ratio(&self, hierarchy: Hierarchy) -> Extended {
        self.checks
            .iter()
            .filter(|c| c.hierarchy == hierarchy)
            .filter_map(|c| c.actual.finite())
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))))
            .map_or(Extended::Infinite, Extended::Finite)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RegimeCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

fn ratio(big: f64, small: f64) -> Extended {
    if small == 0.0 {
        Extended::Infinite
    } else {
        Extended::Finite(big / small)
    }
}

fn check(name: String, hierarchy: Hierarchy, actual: Extended, margin: f64) -> RegimeCheck {
    let ok = match actual {
        Extended::Infinite => true,
        Extended::Finite(r) => r >= margin,
    };
    RegimeCheck { name, hierarchy, required: margin, actual, ok }
}

fn max_over<I: Iterator<Item = f64>>(it: I) -> f64 {
    it.fold(0.0, f64::max)
}

pub(crate) fn regime_from_parts(params: &PhysicalParams, model: &EffectiveModel, t: f64, margin: f64) -> RegimeReport {
    let p = params;
    let (d1, d2, dt1, dt2) = (p.detuning_1, p.detuning_2, p.cavity_detuning_1, p.cavity_detuning_2);
    let c = &model.couplings;
    let smalls = [
        ("|delta_1|", p.two_photon_1.abs()),
        ("|delta_2|", p.two_photon_2.abs()),
        ("|g_ka|", max_over(c.iter().map(|c| c.g_a.norm()))),
        ("|g_kb|", max_over(c.iter().map(|c| c.g_b.norm()))),
        ("|Omega_k1|", max_over(c.iter().map(|c| c.rabi_1.norm()))),
        ("|Omega_k2|", max_over(c.iter().map(|c| c.rabi_2.norm()))),
    ];
    let (small_name, small) = smalls.iter().copied().fold(("none", 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let bigs = [
        ("|Delta_1 - Delta_2|", (d1 - d2).abs()),
        ("|DeltaT_1 - DeltaT_2|", (dt1 - dt2).abs()),
        ("|DeltaT_1 - Delta_2|", (dt1 - d2).abs()),
        ("|DeltaT_2 - Delta_1|", (dt2 - d1).abs()),
        ("|Delta_1|", d1.abs()),
        ("|Delta_2|", d2.abs()),
        ("|DeltaT_1|", dt1.abs()),
        ("|DeltaT_2|", dt2.abs()),
    ];
    let mut checks: Vec<RegimeCheck> = bigs
        .iter()
        .map(|&(name, big)| {
            check(alloc::format!("{name} / {small_name}"), Hierarchy::Dispersive, ratio(big, small), margin)
        })
        .collect();

    // Second hierarchy: worst case over atoms of |δ_k| against each small quantity.
    let worst = |small_of: &dyn Fn(usize) -> f64| -> Extended {
        let mut r = Extended::Infinite;
        for (k, dk) in model.delta_k.iter().enumerate() {
            if let Extended::Finite(x) = ratio(dk.abs(), small_of(k)) {
                r = match r {
                    Extended::Infinite => Extended::Finite(x),
                    Extended::Finite(y) => Extended::Finite(y.min(x)),
                };
            }
        }
        r
    };
    let min_dk = model.delta_k.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
    let dk_t = if model.delta_k.is_empty() { Extended::Infinite } else { Extended::Finite(min_dk * t) };
    checks.push(check(String::from("|delta_k| t"), Hierarchy::TimeAveraging, dk_t, margin));
    let second: [(&str, &dyn Fn(usize) -> f64); 5] = [
        ("|delta_k| / |OmegaT_ka|", &|k| model.omega_tilde_a[k].norm()),
        ("|delta_k| / |OmegaT_kb|", &|k| model.omega_tilde_b[k].norm()),
        ("|delta_k| / (|g_ka|^2/|DeltaT_1|)", &|k| c[k].g_a.norm_sqr() / dt1.abs()),
        ("|delta_k| / (|g_kb|^2/|DeltaT_2|)", &|k| c[k].g_b.norm_sqr() / dt2.abs()),
        ("|delta_k| / |deltaT|", &|_| model.delta_tilde.abs()),
    ];
    for (name, f) in second {
        checks.push(check(String::from(name), Hierarchy::TimeAveraging, worst(f), margin));
    }
    RegimeReport { checks }
}

/// Every inequality of both hierarchies with the worst-case ratio at time
/// `t`; `ok` when the ratio reaches `margin`.
pub fn regime_report(params: &PhysicalParams, sites: &[AtomSite], t: f64, margin: f64) -> Result<RegimeReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter { name: "t", reason: alloc::format!("must be positive ({t})") });
    }
    let model = derive_effective(params, sites)?;
    Ok(regime_from_parts(params, &model, t, margin))
}
