//! Input-output theory of the driven two-mode parametric cavity.
//!
//! The Langevin model is
//!
//! ```text
//! ȧ = −iε_a* + (Ω/2) b† − (κ_a/2) a − √κ_a c_in
//! ḃ = −iε_b* + (Ω/2) a† − (κ_b/2) b − √κ_b d_in
//! ```
//!
//! with a real, non-negative `Ω`. It corresponds to the Hamiltonian
//! `Ω_H a†b† + Ω_H* ab` with `Ω_H = iΩ/2`; [`DriveParams::from_effective`]
//! performs that conversion (`Ω = 2|Ω_H|`, the phase of `Ω_H` is absorbed
//! into the mode operators).
//!
//! Inputs are vacuum. Fourier amplitudes use `α = κ_a − 2iω`,
//! `β = κ_b − 2iω` and `D = Ω² − αβ`.

use alloc::vec::Vec;

use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::squeeze::{convert_ordering, SqueezeKind, SqueezeSpec};
use crate::{Extended, C64};

/// Relative tolerance of the critical-point test `|Ω² − κ_aκ_b| ≤ tol·κ_aκ_b`.
pub const CRITICAL_TOL: f64 = 1e-12;

/// 2×2 complex matrix, row major.
pub type Mat2 = [[C64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub omega: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub eps_a: C64,
    pub eps_b: C64,
}

impl DriveParams {
    pub fn new(omega: f64, kappa_a: f64, kappa_b: f64, eps_a: C64, eps_b: C64) -> Result<Self> {
        let d = Self { omega, kappa_a, kappa_b, eps_a, eps_b };
        d.validate()?;
        Ok(d)
    }

    pub fn undriven(omega: f64, kappa_a: f64, kappa_b: f64) -> Result<Self> {
        Self::new(omega, kappa_a, kappa_b, C64::zero(), C64::zero())
    }

    /// Drive for the Hamiltonian coupling `Ω_H a†b† + h.c.`.
    pub fn from_effective(omega_h: C64, kappa_a: f64, kappa_b: f64, eps_a: C64, eps_b: C64) -> Result<Self> {
        Self::new(2.0 * omega_h.norm(), kappa_a, kappa_b, eps_a, eps_b)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(self.kappa_a > 0.0 && self.kappa_a.is_finite()) {
            return bad("kappa_a", "must be positive and finite");
        }
        if !(self.kappa_b > 0.0 && self.kappa_b.is_finite()) {
            return bad("kappa_b", "must be positive and finite");
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return bad("omega", "must be real, non-negative and finite");
        }
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.eps_a) || !finite(self.eps_b) {
            return bad("eps", "drive strengths must be finite");
        }
        Ok(())
    }

    /// `√(κ_aκ_b)`.
    pub fn kappa(&self) -> f64 {
        (self.kappa_a * self.kappa_b).sqrt()
    }

    pub fn is_critical(&self) -> bool {
        let kk = self.kappa_a * self.kappa_b;
        (self.omega * self.omega - kk).abs() <= CRITICAL_TOL * kk
    }

    /// Below threshold the undriven steady state exists.
    pub fn is_below_threshold(&self) -> bool {
        self.omega * self.omega < self.kappa_a * self.kappa_b && !self.is_critical()
    }

    fn resolvent(&self, omega: f64) -> Result<(C64, C64, C64)> {
        let alpha = C64::new(self.kappa_a, -2.0 * omega);
        let beta = C64::new(self.kappa_b, -2.0 * omega);
        let d = self.omega * self.omega - alpha * beta;
        if d.norm() <= CRITICAL_TOL * self.kappa_a * self.kappa_b {
            return Err(Error::ResolventPole { omega });
        }
        Ok((alpha, beta, d))
    }

    fn swapped(&self) -> Self {
        Self { kappa_a: self.kappa_b, kappa_b: self.kappa_a, eps_a: self.eps_b, eps_b: self.eps_a, ..*self }
    }
}

/// Intracavity steady displacements `(α_0, β_0)`.
pub fn steady_displacements(drive: &DriveParams) -> Result<(C64, C64)> {
    drive.validate()?;
    if drive.is_critical() {
        return Err(Error::CriticalPoint);
    }
    let DriveParams { omega, kappa_a, kappa_b, eps_a, eps_b } = *drive;
    let den = omega * omega - kappa_a * kappa_b;
    let i2 = C64::new(0.0, 2.0);
    let alpha0 = i2 * (eps_a.conj() * kappa_b - eps_b * omega) / den;
    let beta0 = i2 * (eps_b.conj() * kappa_a - eps_a * omega) / den;
    Ok((alpha0, beta0))
}

/// Maps `(c_in(ω), d_in†(−ω))` to `(a′(ω), b′†(−ω))`.
pub fn intracavity_transfer(drive: &DriveParams, omega: f64) -> Result<Mat2> {
    drive.validate()?;
    let (alpha, beta, d) = drive.resolvent(omega)?;
    let (sa, sb) = (drive.kappa_a.sqrt(), drive.kappa_b.sqrt());
    let o = C64::new(drive.omega, 0.0);
    Ok([[beta * 2.0 * sa / d, o * 2.0 * sb / d], [o * 2.0 * sa / d, alpha * 2.0 * sb / d]])
}

/// Output transfer at sideband `omega`: `(c_out(ω), d_out†(−ω)) = M (c_in(ω), d_in†(−ω))`.
/// The `δ(ω)` displacement terms are kept apart, see [`effective_displacements`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub omega: f64,
    pub m: Mat2,
    pub alpha: C64,
    pub beta: C64,
}

impl TransferMatrix {
    /// `max(| |M₁₁|² − |M₁₂|² − 1 |, | |M₂₂|² − |M₂₁|² − 1 |)`.
    pub fn bogoliubov_defect(&self) -> f64 {
        let [[m11, m12], [m21, m22]] = self.m;
        let top = (m11.norm_sqr() - m12.norm_sqr() - 1.0).abs();
        let bottom = (m22.norm_sqr() - m21.norm_sqr() - 1.0).abs();
        top.max(bottom)
    }
}

pub fn output_transfer(drive: &DriveParams, omega: f64) -> Result<TransferMatrix> {
    drive.validate()?;
    let (alpha, beta, d) = drive.resolvent(omega)?;
    let o2 = drive.omega * drive.omega;
    let cross = C64::new(2.0 * drive.omega * drive.kappa(), 0.0) / d;
    let m = [[(alpha.conj() * beta + o2) / d, cross], [cross, (alpha * beta.conj() + o2) / d]];
    Ok(TransferMatrix { omega, m, alpha, beta })
}

/// Output quadrature variances at resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputVariances {
    pub var_x: Extended,
    pub var_y: f64,
}

/// `(ΔX_out)² = ¼((Ω + κ)/(Ω − κ))²`, `(ΔY_out)² = ¼((Ω − κ)/(Ω + κ))²`, `κ = √(κ_aκ_b)`.
pub fn output_variances(drive: &DriveParams) -> Result<OutputVariances> {
    drive.validate()?;
    let k = drive.kappa();
    let o = drive.omega;
    let var_y = 0.25 * ((o - k) / (o + k)).powi(2);
    let var_x = if drive.is_critical() { Extended::Infinite } else { Extended::Finite(0.25 * ((o + k) / (o - k)).powi(2)) };
    Ok(OutputVariances { var_x, var_y })
}

/// Spectral variances `(S_X(ω), S_Y(ω))` of the output with vacuum inputs,
/// assembled from the transfer matrices of both output modes.
pub fn spectral_variances(drive: &DriveParams, omega: f64) -> Result<(f64, f64)> {
    let c = output_transfer(drive, omega)?.m;
    let d = output_transfer(&drive.swapped(), omega)?.m;
    // Only the annihilation parts c_in(ω), d_in(ω) act non-trivially on vacuum.
    let sx = ((c[0][0] + c[1][0]).norm_sqr() + (d[0][0] + d[1][0]).norm_sqr()) / 8.0;
    let sy = ((c[0][0] - c[1][0]).norm_sqr() + (d[0][0] - d[1][0]).norm_sqr()) / 8.0;
    Ok((sx, sy))
}

/// `r = −2 ln|(Ω − κ)/(Ω + κ)|`, so that `(ΔY_out)² = e^{−r}/4`.
pub fn reduction_parameter(drive: &DriveParams) -> Result<Extended> {
    drive.validate()?;
    if drive.is_critical() {
        return Ok(Extended::Infinite);
    }
    let k = drive.kappa();
    let ratio = ((drive.omega - k) / (drive.omega + k)).abs();
    // `0.0 - x` keeps r = +0 at Ω = 0.
    Ok(Extended::Finite(0.0 - 2.0 * ratio.ln()))
}

/// `(α_eff, β_eff) = (√κ_a α_0, √κ_b β_0)`.
pub fn effective_displacements(drive: &DriveParams) -> Result<(C64, C64)> {
    let (a0, b0) = steady_displacements(drive)?;
    Ok((a0 * drive.kappa_a.sqrt(), b0 * drive.kappa_b.sqrt()))
}

/// The output as an ideal two-mode squeezed state.
///
/// `before` holds the displacements of `S(ξ) D_a(α) D_b(β)|0>`, `after` those
/// of the equivalent `D_a(α′) D_b(β′) S(ξ)|0>` (equal up to a global phase).
/// `S(ξ) = exp(ξ* ab − ξ a†b†)` and `ξ = −r/2`, which squeezes `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputState {
    pub xi: C64,
    pub before: (C64, C64),
    pub after: (C64, C64),
}

pub fn output_state_description(drive: &DriveParams) -> Result<OutputState> {
    let (a, b) = effective_displacements(drive)?;
    let r = reduction_parameter(drive)?.finite().ok_or(Error::CriticalPoint)?;
    let xi = C64::new(-r / 2.0, 0.0);
    let spec = SqueezeSpec { xi, kind: SqueezeKind::NonDegenerate, max_magnitude: f64::INFINITY };
    Ok(OutputState { xi, before: (a, b), after: convert_ordering(&spec, a, b) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub var_x: f64,
    pub var_y: f64,
}

pub fn variance_spectrum(drive: &DriveParams, omega_grid: &[f64]) -> Result<Vec<SpectrumPoint>> {
    omega_grid
        .iter()
        .map(|&omega| {
            let (var_x, var_y) = spectral_variances(drive, omega)?;
            Ok(SpectrumPoint { omega, var_x, var_y })
        })
        .collect()
}

/// Steady-state fluctuation moments inside the cavity (displacements removed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntracavityMoments {
    pub n_a: f64,
    pub n_b: f64,
    /// `<a′b′>`.
    pub ab: f64,
}

/// Closed-form moments of the undriven steady state; needs `Ω² < κ_aκ_b`.
pub fn intracavity_moments(drive: &DriveParams) -> Result<IntracavityMoments> {
    drive.validate()?;
    if drive.is_critical() {
        return Err(Error::CriticalPoint);
    }
    if !drive.is_below_threshold() {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: "above threshold there is no steady state".into(),
        });
    }
    let (ka, kb, o) = (drive.kappa_a, drive.kappa_b, drive.omega);
    let den = (ka + kb) * (ka * kb - o * o);
    Ok(IntracavityMoments { n_a: o * o * kb / den, n_b: o * o * ka / den, ab: o * ka * kb / den })
}

/// Everything at resonance in one record. Displacements are `None` at the
/// critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoResult {
    pub alpha_0: Option<C64>,
    pub beta_0: Option<C64>,
    pub var_x_out: Extended,
    pub var_y_out: f64,
    pub r: Extended,
    pub alpha_eff: Option<C64>,
    pub beta_eff: Option<C64>,
    pub is_critical: bool,
}

pub fn analyze(drive: &DriveParams) -> Result<IoResult> {
    let v = output_variances(drive)?;
    let r = reduction_parameter(drive)?;
    let steady = steady_displacements(drive).ok();
    let eff = effective_displacements(drive).ok();
    Ok(IoResult {
        alpha_0: steady.map(|s| s.0),
        beta_0: steady.map(|s| s.1),
        var_x_out: v.var_x,
        var_y_out: v.var_y,
        r,
        alpha_eff: eff.map(|e| e.0),
        beta_eff: eff.map(|e| e.1),
        is_critical: drive.is_critical(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gauss_legendre;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn steady_examples() {
        let d = DriveParams::undriven(0.3, 1.0, 2.0).unwrap();
        assert_eq!(steady_displacements(&d).unwrap(), (C64::zero(), C64::zero()));
        let eps = C64::new(0.4, 0.7);
        let d = DriveParams::new(0.0, 2.0, 2.0, eps, C64::zero()).unwrap();
        let (a0, b0) = steady_displacements(&d).unwrap();
        assert!(close(a0, C64::new(0.0, -2.0) * eps.conj() / 2.0, 1e-15));
        assert_eq!(b0, C64::zero());
        let d = DriveParams::new(2.0f64.sqrt(), 1.0, 2.0, eps, eps).unwrap();
        assert_eq!(steady_displacements(&d), Err(Error::CriticalPoint));
    }

    #[test]
    fn intracavity_examples() {
        let d = DriveParams::undriven(0.0, 1.0, 1.0).unwrap();
        let m = intracavity_transfer(&d, 0.0).unwrap();
        assert!(close(m[0][0], C64::new(-2.0, 0.0), 1e-15));
        assert_eq!(m[0][1], C64::zero());
        assert_eq!(m[1][0], C64::zero());
        let d = DriveParams::undriven(0.4, 0.7, 1.3).unwrap();
        let (p, q) = (intracavity_transfer(&d, 0.9).unwrap(), intracavity_transfer(&d, -0.9).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(p[i][j], q[i][j].conj(), 1e-15));
            }
        }
    }

    #[test]
    fn transfer_examples() {
        let d = DriveParams::undriven(0.0, 0.6, 1.7).unwrap();
        let t = output_transfer(&d, 0.0).unwrap();
        assert!(close(t.m[0][0], C64::new(-1.0, 0.0), 1e-15));
        assert_eq!(t.m[0][1], C64::zero());
        let d = DriveParams::undriven(0.5, 0.6, 1.7).unwrap();
        let far = output_transfer(&d, 1e8).unwrap();
        assert!(close(far.m[0][0], C64::new(1.0, 0.0), 1e-7));
        assert!(far.m[0][1].norm() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let v = output_variances(&DriveParams::undriven(0.0, 1.0, 3.0).unwrap()).unwrap();
        assert_eq!(v.var_x, Extended::Finite(0.25));
        assert_eq!(v.var_y, 0.25);
        let v = output_variances(&DriveParams::undriven(1.0, 0.5, 2.0).unwrap()).unwrap();
        assert_eq!(v.var_x, Extended::Infinite);
        assert_eq!(v.var_y, 0.0);
        let d = DriveParams::undriven(1.0 / 3.0, 1.0, 1.0).unwrap();
        let v = output_variances(&d).unwrap();
        assert!((v.var_y - 1.0 / 16.0).abs() < 1e-15);
        assert!((v.var_x.finite().unwrap() - 1.0).abs() < 1e-15);
        let r = reduction_parameter(&d).unwrap().finite().unwrap();
        assert!((r - 2.0 * 2.0f64.ln()).abs() < 1e-14);
        assert_eq!(reduction_parameter(&DriveParams::undriven(0.0, 1.0, 1.0).unwrap()).unwrap(), Extended::Finite(0.0));
        assert_eq!(reduction_parameter(&DriveParams::undriven(1.0, 1.0, 1.0).unwrap()).unwrap(), Extended::Infinite);
    }

    #[test]
    fn effective_displacement_examples() {
        let d = DriveParams::new(0.5, 1.0, 1.0, C64::new(1.0, 0.0), C64::zero()).unwrap();
        let (a, _) = effective_displacements(&d).unwrap();
        assert!(close(a, C64::new(0.0, -8.0 / 3.0), 1e-15));
        // Both numerators vanish only when Ω² = κ_aκ_b, where the closed
        // forms are 0/0; the critical-point error wins.
        let eps_a = C64::new(0.3, 0.4);
        let (ka, kb) = (2.0, 0.125);
        let o = (ka * kb as f64).sqrt();
        let eps_b = eps_a.conj() * kb / o;
        assert!((eps_b.conj() * ka - eps_a * o).norm() < 1e-15);
        let d = DriveParams::new(o, ka, kb, eps_a, eps_b).unwrap();
        assert_eq!(effective_displacements(&d), Err(Error::CriticalPoint));
    }

    #[test]
    fn state_description_limits() {
        let d = DriveParams::new(0.0, 1.0, 1.0, C64::new(0.2, 0.1), C64::new(-0.3, 0.0)).unwrap();
        let s = output_state_description(&d).unwrap();
        assert_eq!(s.xi, C64::zero());
        assert!(close(s.after.0, s.before.0, 1e-15) && close(s.after.1, s.before.1, 1e-15));
        let d = DriveParams::undriven(0.4, 1.0, 1.0).unwrap();
        let s = output_state_description(&d).unwrap();
        assert_eq!(s.after, (C64::zero(), C64::zero()));
        assert!(s.xi.re < 0.0);
        let r = reduction_parameter(&d).unwrap().finite().unwrap();
        assert!((s.xi.norm() - r / 2.0).abs() < 1e-15);
        assert!(output_state_description(&DriveParams::undriven(1.0, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn spectrum_limits() {
        let d = DriveParams::undriven(0.0, 0.8, 1.1).unwrap();
        for p in variance_spectrum(&d, &[-3.0, 0.0, 0.2, 7.0]).unwrap() {
            assert!((p.var_x - 0.25).abs() < 1e-15 && (p.var_y - 0.25).abs() < 1e-15);
        }
        let d = DriveParams::undriven(0.6, 0.8, 1.1).unwrap();
        let s = variance_spectrum(&d, &[0.0, 1e7]).unwrap();
        let v = output_variances(&d).unwrap();
        assert!((s[0].var_x - v.var_x.finite().unwrap()).abs() < 1e-12);
        assert!((s[0].var_y - v.var_y).abs() < 1e-12);
        assert!((s[1].var_x - 0.25).abs() < 1e-12 && (s[1].var_y - 0.25).abs() < 1e-12);
        let crit = DriveParams::undriven(1.0, 1.0, 1.0).unwrap();
        assert_eq!(variance_spectrum(&crit, &[0.5, 0.0]), Err(Error::ResolventPole { omega: 0.0 }));
    }

    #[test]
    fn moments_match_spectral_integral() {
        let d = DriveParams::undriven(0.5, 1.0, 1.6).unwrap();
        let m = intracavity_moments(&d).unwrap();
        // n_a = (1/2π) ∫ |K_{a,d†}(ω)|² dω with ω = tan θ.
        let integrand = |th: f64| {
            let w = th.tan();
            let k = intracavity_transfer(&d, w).unwrap()[0][1].norm_sqr();
            k / th.cos().powi(2)
        };
        let h = core::f64::consts::FRAC_PI_2;
        let n_a = gauss_legendre(integrand, -h, h, 64) / (2.0 * core::f64::consts::PI);
        assert!((n_a - m.n_a).abs() < 1e-10 * m.n_a, "{n_a} vs {}", m.n_a);
        assert!(intracavity_moments(&DriveParams::undriven(2.0, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn from_effective_doubles_magnitude() {
        let d = DriveParams::from_effective(C64::new(-0.2, 0.0), 1.0, 1.0, C64::zero(), C64::zero()).unwrap();
        assert_eq!(d.omega, 0.4);
        assert!(DriveParams::undriven(0.1, 0.0, 1.0).is_err());
        assert!(DriveParams::undriven(-0.1, 1.0, 1.0).is_err());
    }

    fn drive() -> impl Strategy<Value = DriveParams> {
        (0.0..3.0f64, 0.05..3.0f64, 0.05..3.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_filter_map("near critical", |(o, ka, kb, a, b, c, e)| {
                let d = DriveParams::new(o, ka, kb, C64::new(a, b), C64::new(c, e)).ok()?;
                let k = d.kappa();
                ((o - k).abs() > 1e-3 * k).then_some(d)
            })
    }

    proptest! {
        #[test]
        fn minimum_uncertainty(d in drive()) {
            let v = output_variances(&d).unwrap();
            let x = v.var_x.finite().unwrap();
            prop_assert!((x * v.var_y - 1.0 / 16.0).abs() <= 1e-12 * (1.0 / 16.0) * x.max(1.0));
            prop_assert!(x >= 0.25 - 1e-15);
            prop_assert!(v.var_y <= 0.25 + 1e-15 && v.var_y >= 0.0);
            let r = reduction_parameter(&d).unwrap().finite().unwrap();
            prop_assert!(r >= 0.0);
            prop_assert!(((-r).exp() / 4.0 - v.var_y).abs() <= 1e-12);
        }

        #[test]
        fn transfer_is_bogoliubov(d in drive(), w in -5.0..5.0f64) {
            let t = output_transfer(&d, w).unwrap();
            let scale = t.m[0][0].norm_sqr().max(1.0);
            prop_assert!(t.bogoliubov_defect() <= 1e-10 * scale);
        }

        #[test]
        fn assembled_variances_match_closed_form(d in drive()) {
            let v = output_variances(&d).unwrap();
            let (sx, sy) = spectral_variances(&d, 0.0).unwrap();
            let x = v.var_x.finite().unwrap();
            prop_assert!((sx - x).abs() <= 1e-10 * x.max(1.0));
            prop_assert!((sy - v.var_y).abs() <= 1e-10);
        }

        #[test]
        fn spectrum_is_even(d in drive(), w in 0.01..5.0f64) {
            let (a, b) = spectral_variances(&d, w).unwrap();
            let (c, e) = spectral_variances(&d, -w).unwrap();
            prop_assert!((a - c).abs() <= 1e-12 * a.max(1.0));
            prop_assert!((b - e).abs() <= 1e-12 * b.max(1.0));
        }

        #[test]
        fn fluctuations_ignore_drive(d in drive()) {
            let bare = DriveParams { eps_a: C64::zero(), eps_b: C64::zero(), ..d };
            prop_assert_eq!(output_variances(&d).unwrap(), output_variances(&bare).unwrap());
            prop_assert_eq!(spectral_variances(&d, 0.3).unwrap(), spectral_variances(&bare, 0.3).unwrap());
        }
    }
}
