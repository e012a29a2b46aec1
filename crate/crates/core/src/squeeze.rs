//! Squeeze and displacement operators applied exactly on the truncated field,
//! and closed-form squeezed-vacuum moments.
//!
//! Conventions:
//!
//! * two-mode: `U^ND(ξ) = exp(ξ* ab − ξ a†b†)`, `ξ = r e^{iθ}`;
//! * single-mode: `U^D(ξ) = exp(ξ* a² − ξ a†²)`, which is the textbook
//!   `exp((ζ* a² − ζ a†²)/2)` at `ζ = 2ξ`;
//! * quadratures `X = (a + b + a† + b†)/2^{3/2}`, `Y = −i(a + b − a† − b†)/2^{3/2}`
//!   (two-mode) and `X = (a + a†)/2`, `Y = −i(a − a†)/2` (single mode),
//!   both with vacuum variance `1/4`.
//!
//! With these, real `ξ > 0` squeezes `X` and real `ξ < 0` squeezes `Y`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::fock::{annihilation, CsrMatrix, HilbertLayout, Mode, StateVector};
use crate::linalg::{expm_action, expm_dense};
use crate::C64;

/// Default bound on `|ξ|`.
pub const DEFAULT_MAX_XI: f64 = 3.0;

/// Field dimension up to which the propagator is formed densely.
pub const DENSE_FIELD_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeKind {
    NonDegenerate,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSpec {
    pub xi: C64,
    pub kind: SqueezeKind,
    pub max_magnitude: f64,
}

impl SqueezeSpec {
    pub fn new(xi: C64, kind: SqueezeKind) -> Result<Self> {
        Self::with_max(xi, kind, DEFAULT_MAX_XI)
    }

    pub fn with_max(xi: C64, kind: SqueezeKind, max_magnitude: f64) -> Result<Self> {
        if !(xi.re.is_finite() && xi.im.is_finite()) {
            return Err(Error::InvalidParameter { name: "xi", reason: alloc::format!("not finite ({xi})") });
        }
        if xi.norm() > max_magnitude {
            return Err(Error::SqueezeTooLarge { magnitude: xi.norm(), max: max_magnitude });
        }
        Ok(Self { xi, kind, max_magnitude })
    }

    /// Squeeze parameter of the equivalent textbook operator.
    pub fn standard_r(&self) -> f64 {
        match self.kind {
            SqueezeKind::NonDegenerate => self.xi.norm(),
            SqueezeKind::Degenerate => 2.0 * self.xi.norm(),
        }
    }
}

/// Closed-form moments of `U|0>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedVacuumAnalytics {
    /// Mean photon number in each squeezed mode.
    pub n_bar_per_mode: f64,
    /// Mean photon number summed over the squeezed modes.
    pub n_bar_total: f64,
    /// `sinh²(2|ξ|)`, the estimate used for the dissipation time.
    pub n_bar_two_xi: f64,
    pub var_x: f64,
    pub var_y: f64,
    /// Reduction parameter `r` with `min(var) = e^{−r}/4`.
    pub r: f64,
    /// `1 − e^{−r}`.
    pub squeezing_fraction: f64,
}

pub fn squeezed_vacuum_analytics(spec: &SqueezeSpec) -> SqueezedVacuumAnalytics {
    let r = spec.standard_r();
    let theta = if spec.xi == C64::zero() { 0.0 } else { spec.xi.arg() };
    let (c2, s2) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let var_x = (c2 - s2 * theta.cos()) / 4.0;
    let var_y = (c2 + s2 * theta.cos()) / 4.0;
    let n = r.sinh().powi(2);
    let modes = match spec.kind {
        SqueezeKind::NonDegenerate => 2.0,
        SqueezeKind::Degenerate => 1.0,
    };
    SqueezedVacuumAnalytics {
        n_bar_per_mode: n,
        n_bar_total: modes * n,
        n_bar_two_xi: (2.0 * spec.xi.norm()).sinh().powi(2),
        var_x,
        var_y,
        r: 2.0 * r,
        squeezing_fraction: 1.0 - (-2.0 * r).exp(),
    }
}

/// Anti-Hermitian field generator of `spec` on `field` (no atoms).
pub fn squeeze_generator(field: &HilbertLayout, spec: &SqueezeSpec) -> Result<CsrMatrix> {
    let a = annihilation(field, Mode::A)?.into_matrix();
    let (pair, pair_dag) = match spec.kind {
        SqueezeKind::NonDegenerate => {
            let b = annihilation(field, Mode::B)?.into_matrix();
            (a.matmul(&b), a.adjoint().matmul(&b.adjoint()))
        }
        SqueezeKind::Degenerate => (a.matmul(&a), a.adjoint().matmul(&a.adjoint())),
    };
    Ok(pair.lin_comb(spec.xi.conj(), &pair_dag, -spec.xi))
}

/// Anti-Hermitian generator `α a† − α* a` of a displacement of `mode`.
pub fn displacement_generator(field: &HilbertLayout, mode: Mode, alpha: C64) -> Result<CsrMatrix> {
    let a = annihilation(field, mode)?.into_matrix();
    Ok(a.adjoint().lin_comb(alpha, &a, -alpha.conj()))
}

/// `exp(G) ⊗ 1_atoms` applied to `state`, with `G` acting on the field only.
pub fn apply_field_exponential(state: &StateVector, generator: &CsrMatrix) -> Result<StateVector> {
    let layout = *state.layout();
    let fd = layout.field_dim();
    let ad = layout.atom_dim();
    if generator.dim() != fd {
        return Err(Error::DimensionMismatch { expected: fd, found: generator.dim() });
    }
    let amps = state.amplitudes();
    let mut out = vec![C64::zero(); layout.dim()];
    let column = |alpha: usize| -> Vec<C64> { (0..fd).map(|f| amps[f * ad + alpha]).collect() };
    let occupied = (0..ad).filter(|&alpha| (0..fd).any(|f| amps[f * ad + alpha] != C64::zero())).count();
    // Rough operation counts: ~25 dense products against ~20 sparse products
    // per unit of norm for every occupied atomic column.
    let dense_cost = 25.0 * (fd as f64).powi(3);
    let action_cost = 20.0 * occupied as f64 * generator.norm_one().ceil().max(1.0) * generator.nnz() as f64;
    if fd <= DENSE_FIELD_LIMIT && dense_cost < action_cost {
        let u = expm_dense(&generator.to_dense());
        for alpha in 0..ad {
            let v = DVector::from_vec(column(alpha));
            if v.iter().all(|z| *z == C64::zero()) {
                continue;
            }
            let w = &u * v;
            for f in 0..fd {
                out[f * ad + alpha] = w[f];
            }
        }
    } else {
        let norm = generator.norm_one();
        for alpha in 0..ad {
            let v = column(alpha);
            if v.iter().all(|z| *z == C64::zero()) {
                continue;
            }
            let w = expm_action(|x, y| generator.mul_vec_into(x, y), norm, &v, 1e-15)?;
            for f in 0..fd {
                out[f * ad + alpha] = w[f];
            }
        }
    }
    StateVector::from_amplitudes(layout, out)
}

fn photon_number(state: &StateVector, mode: Mode) -> f64 {
    let l = state.layout();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let (na, nb) = l.photons(i);
            z.norm_sqr() * match mode {
                Mode::A => na,
                Mode::B => nb,
            } as f64
        })
        .sum()
}

/// Predicted largest mean photon number per mode after squeezing `state`.
pub fn predicted_photons(state: &StateVector, spec: &SqueezeSpec) -> f64 {
    let r = spec.standard_r();
    let n_in = match spec.kind {
        SqueezeKind::NonDegenerate => photon_number(state, Mode::A).max(photon_number(state, Mode::B)),
        SqueezeKind::Degenerate => photon_number(state, Mode::A),
    };
    // Each output mode mixes cosh r of itself with sinh r of its partner.
    r.sinh().powi(2) + (r.cosh() + r.sinh()).powi(2) * n_in
}

/// `U|ψ>` for the squeeze operator of `spec`, acting as the identity on the
/// atoms. Fails when the predicted photon number leaves too little room
/// below the cutoff (`n̄ + 4√n̄ ≥ n_max`).
pub fn apply_squeeze(state: &StateVector, spec: &SqueezeSpec) -> Result<StateVector> {
    let layout = *state.layout();
    if spec.xi == C64::zero() {
        return Ok(state.clone());
    }
    let n_max = match spec.kind {
        SqueezeKind::NonDegenerate => {
            layout.check_mode(Mode::B)?;
            layout.n_max_a().min(layout.n_max_b())
        }
        SqueezeKind::Degenerate => layout.n_max_a(),
    };
    let predicted = predicted_photons(state, spec);
    if predicted + 4.0 * predicted.sqrt() >= n_max as f64 {
        return Err(Error::Truncation { predicted, n_max });
    }
    let g = squeeze_generator(&layout.field_only(), spec)?;
    let out = apply_field_exponential(state, &g)?;
    let drift = (out.norm() - state.norm()).abs();
    if drift > 1e-8 {
        return Err(Error::NotNormalized { norm: out.norm() });
    }
    Ok(out)
}

/// `D(α)|ψ>` on `mode`.
pub fn apply_displacement(state: &StateVector, mode: Mode, alpha: C64) -> Result<StateVector> {
    let g = displacement_generator(&state.layout().field_only(), mode, alpha)?;
    apply_field_exponential(state, &g)
}

/// Displacements `(α′, β′)` with `U(ξ) D_a(α) D_b(β) = D_a(α′) D_b(β′) U(ξ)`
/// up to a global phase. For the single-mode kind only `α` is used and
/// `β′ = 0`.
pub fn convert_ordering(spec: &SqueezeSpec, alpha: C64, beta: C64) -> (C64, C64) {
    let r = spec.standard_r();
    let phase = if spec.xi == C64::zero() { C64::new(1.0, 0.0) } else { spec.xi / spec.xi.norm() };
    let (c, s) = (r.cosh(), r.sinh());
    match spec.kind {
        SqueezeKind::NonDegenerate => (alpha * c - beta.conj() * phase * s, beta * c - alpha.conj() * phase * s),
        SqueezeKind::Degenerate => (alpha * c - alpha.conj() * phase * s, C64::zero()),
    }
}
