use num_traits::Float;

use super::effective::derive_effective;
use super::geometry::AtomSite;
use super::physical::PhysicalParams;
use crate::error::{Error, Result};
use crate::{Extended, C64};

/// Order-of-magnitude dissipation budget for a squeezing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    /// Mean photon number of the squeezed state, `sinh²(2|ξ|)`.
    pub n_bar: f64,
    /// `1/(κ n̄)`; unbounded when nothing is squeezed.
    pub tau_diss: Extended,
    /// Spontaneously emitted photons during `τ_diss`.
    pub n_gamma: Extended,
    pub xi_max: Option<MaxSqueeze>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxSqueeze {
    /// Solution of `x sinh²(2x) = |Ω|/κ`.
    pub xi_max: f64,
    /// `1 − e^{−2 x}`.
    pub squeezing_fraction: f64,
    /// `x sinh²(2x) − |Ω|/κ` at the returned `x`.
    pub residual: f64,
}

fn positive_kappa(params: &PhysicalParams) -> Result<f64> {
    let kappa = params.kappa();
    if kappa > 0.0 {
        Ok(kappa)
    } else {
        Err(Error::InvalidParameter {
            name: "kappa",
            reason: alloc::format!("sqrt(kappa_a kappa_b) must be positive ({kappa})"),
        })
    }
}

/// Dissipation time and spontaneous-emission count at squeeze parameter `xi`.
/// Also fills `xi_max` when the ensemble couples the modes.
pub fn dissipation_estimate(params: &PhysicalParams, sites: &[AtomSite], xi: C64) -> Result<NoiseEstimate> {
    let kappa = positive_kappa(params)?;
    let model = derive_effective(params, sites)?;
    let n_bar = (2.0 * xi.norm()).sinh().powi(2);
    let worst = model.couplings.iter().map(|c| c.rabi_1.norm() / params.detuning_1.abs()).fold(0.0, f64::max);
    let (tau_diss, n_gamma) = if n_bar > 0.0 {
        let t = 1.0 / (kappa * n_bar);
        (Extended::Finite(t), Extended::Finite(sites.len() as f64 * params.gamma * worst * worst * t))
    } else if params.gamma == 0.0 || worst == 0.0 || sites.is_empty() {
        (Extended::Infinite, Extended::Finite(0.0))
    } else {
        (Extended::Infinite, Extended::Infinite)
    };
    let xi_max = if model.omega_eff.norm() > 0.0 { Some(max_squeeze_ratio(model.omega_eff.norm() / kappa)?) } else { None };
    Ok(NoiseEstimate { n_bar, tau_diss, n_gamma, xi_max })
}

/// Self-consistent largest squeeze parameter: squeezing accumulates at rate
/// `|Ω|` until the dissipation time `1/(κ sinh²(2|ξ|))`.
pub fn max_squeeze(params: &PhysicalParams, sites: &[AtomSite]) -> Result<MaxSqueeze> {
    let kappa = positive_kappa(params)?;
    let model = derive_effective(params, sites)?;
    max_squeeze_ratio(model.omega_eff.norm() / kappa)
}

/// Solves `x sinh²(2x) = ratio` by bisection; the left side is strictly
/// increasing on `x ≥ 0`.
pub fn max_squeeze_ratio(ratio: f64) -> Result<MaxSqueeze> {
    if !(ratio.is_finite() && ratio >= 0.0) {
        return Err(Error::InvalidParameter { name: "ratio", reason: alloc::format!("must be finite and nonnegative ({ratio})") });
    }
    let f = |x: f64| x * (2.0 * x).sinh().powi(2) - ratio;
    if ratio == 0.0 {
        return Ok(MaxSqueeze { xi_max: 0.0, squeezing_fraction: 0.0, residual: 0.0 });
    }
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::NoConvergence("max_squeeze bracket"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(MaxSqueeze { xi_max: x, squeezing_fraction: 1.0 - (-2.0 * x).exp(), residual: f(x) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::geometry::uniform_sites;

    #[test]
    fn n_bar_and_tau_diss() {
        let mut p = PhysicalParams::rubidium_example();
        p.kappa_a = 0.2;
        p.kappa_b = 0.2;
        let e = dissipation_estimate(&p, &uniform_sites(1), C64::new(0.0, 0.5)).unwrap();
        assert!((e.n_bar - 1.381_097_845_541_816).abs() < 1e-12);
        assert!((e.tau_diss.finite().unwrap() - 3.620_308_304_831_552).abs() < 1e-12);
        assert_eq!(e.n_gamma, Extended::Finite(0.0));
    }

    #[test]
    fn zero_xi_is_unbounded() {
        let mut p = PhysicalParams::rubidium_example();
        p.kappa_a = 0.2;
        p.kappa_b = 0.2;
        p.gamma = 1.0;
        let e = dissipation_estimate(&p, &uniform_sites(1), C64::new(0.0, 0.0)).unwrap();
        assert!(e.tau_diss.is_infinite());
        assert!(e.n_gamma.is_infinite());
    }

    #[test]
    fn max_squeeze_fixed_point() {
        let m = max_squeeze_ratio(1.0).unwrap();
        assert!(m.residual.abs() < 1e-10);
        assert!((m.xi_max - 0.553).abs() < 1e-3);
        assert!((m.squeezing_fraction - 0.67).abs() < 5e-3);
        let m = max_squeeze_ratio(8.0).unwrap();
        assert!(m.residual.abs() < 1e-10 * 8.0);
        let m = max_squeeze_ratio(1e-12).unwrap();
        assert!(m.xi_max < 1e-3);
    }

    #[test]
    fn kappa_required() {
        let p = PhysicalParams::rubidium_example();
        assert!(dissipation_estimate(&p, &uniform_sites(1), C64::new(0.1, 0.0)).is_err());
    }
}
