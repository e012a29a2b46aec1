use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{annihilation, DensityMatrix, HilbertLayout, Mode, OperatorMatrix, StateVector};
use crate::linalg::psd_sqrt;
use crate::C64;

/// Borrowed pure or mixed state.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

impl StateRef<'_> {
    pub fn layout(&self) -> &HilbertLayout {
        match self {
            StateRef::Pure(s) => s.layout(),
            StateRef::Mixed(r) => r.layout(),
        }
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        match self {
            StateRef::Pure(s) => s.expectation(op),
            StateRef::Mixed(r) => r.expectation(op),
        }
    }
}

/// `|<ψ|φ>|²` for pure states, `<ψ|ρ|ψ>` for pure against mixed and the
/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` for two mixed states. Clamped to `[0, 1]`.
pub fn fidelity<'a, 'b>(a: impl Into<StateRef<'a>>, b: impl Into<StateRef<'b>>) -> Result<f64> {
    let (a, b) = (a.into(), b.into());
    if a.layout() != b.layout() {
        return Err(Error::LayoutMismatch);
    }
    let f = match (a, b) {
        (StateRef::Pure(x), StateRef::Pure(y)) => x.inner(y)?.norm_sqr(),
        (StateRef::Pure(x), StateRef::Mixed(r)) | (StateRef::Mixed(r), StateRef::Pure(x)) => {
            let v = nalgebra::DVector::from_column_slice(x.amplitudes());
            (v.adjoint() * r.matrix() * &v)[(0, 0)].re
        }
        (StateRef::Mixed(r), StateRef::Mixed(s)) => {
            let sr = psd_sqrt(r.matrix());
            let inner = &sr * s.matrix() * &sr;
            let t = psd_sqrt(&inner).trace().re;
            t * t
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Which quadrature pair to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// `X = (a + b + a† + b†)/2^{3/2}`, `Y = −i(a + b − a† − b†)/2^{3/2}`.
    TwoMode,
    /// `X = (a + a†)/2`, `Y = −i(a − a†)/2`.
    SingleMode,
}

impl QuadratureKind {
    /// Two-mode when mode `b` exists.
    pub fn for_layout(layout: &HilbertLayout) -> Self {
        if layout.has_mode_b() {
            QuadratureKind::TwoMode
        } else {
            QuadratureKind::SingleMode
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureStats {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub product: f64,
    /// Symmetrized covariance `½⟨XY + YX⟩ − ⟨X⟩⟨Y⟩`.
    pub cov_xy: f64,
    /// Smallest variance over all rotated quadratures `X cos φ + Y sin φ`.
    pub var_min: f64,
}

/// `(X, Y)` as truncated operators on `layout`.
pub fn quadrature_operators(layout: &HilbertLayout, kind: QuadratureKind) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (field, scale) = match kind {
        QuadratureKind::TwoMode => {
            let sum = annihilation(layout, Mode::A)?.add(&annihilation(layout, Mode::B)?)?;
            (sum, 1.0 / 8.0f64.sqrt())
        }
        QuadratureKind::SingleMode => (annihilation(layout, Mode::A)?, 0.5),
    };
    let dag = field.adjoint();
    let x = field.add(&dag)?.scale(C64::new(scale, 0.0)).with_hint(true)?;
    let y = field.sub(&dag)?.scale(C64::new(0.0, -scale)).with_hint(true)?;
    Ok((x, y))
}

/// Quadrature means and variances from the truncated operators, using the
/// pair that matches the layout.
pub fn quadrature_stats<'a>(state: impl Into<StateRef<'a>>) -> Result<QuadratureStats> {
    let state = state.into();
    let kind = QuadratureKind::for_layout(state.layout());
    let (x, y) = quadrature_operators(state.layout(), kind)?;
    quadrature_stats_with(state, &x, &y)
}

/// As [`quadrature_stats`] with precomputed operators.
pub fn quadrature_stats_with(state: StateRef<'_>, x: &OperatorMatrix, y: &OperatorMatrix) -> Result<QuadratureStats> {
    // (⟨X⟩, ⟨X²⟩, ⟨Y⟩, ⟨Y²⟩, Re⟨XY⟩)
    let (mean_x, sx, mean_y, sy, xy) = match state {
        StateRef::Pure(s) => {
            let px = s.apply(x)?;
            let py = s.apply(y)?;
            (s.inner(&px)?.re, px.norm().powi(2), s.inner(&py)?.re, py.norm().powi(2), px.inner(&py)?.re)
        }
        StateRef::Mixed(r) => (
            r.expectation(x)?.re,
            r.expectation(&x.matmul(x)?)?.re,
            r.expectation(y)?.re,
            r.expectation(&y.matmul(y)?)?.re,
            r.expectation(&x.matmul(y)?)?.re,
        ),
    };
    let var_x = (sx - mean_x * mean_x).max(0.0);
    let var_y = (sy - mean_y * mean_y).max(0.0);
    let cov_xy = xy - mean_x * mean_y;
    let half_gap = 0.5 * (var_x - var_y);
    let var_min = (0.5 * (var_x + var_y) - (half_gap * half_gap + cov_xy * cov_xy).sqrt()).max(0.0);
    Ok(QuadratureStats { mean_x, mean_y, var_x, var_y, product: var_x * var_y, cov_xy, var_min })
}
