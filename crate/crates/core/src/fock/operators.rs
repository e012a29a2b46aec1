use num_traits::Float;

use super::layout::{HilbertLayout, Mode, Subsystem, ATOM_LEVELS};
use super::sparse::{CsrMatrix, TripletBuilder};
use crate::error::{Error, Result};
use crate::C64;

/// Relative tolerance used to verify a claimed Hermitian operator.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A sparse operator on a [`HilbertLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    layout: HilbertLayout,
    matrix: CsrMatrix,
    hermitian_hint: bool,
}

impl OperatorMatrix {
    /// Wraps `matrix`; when `hermitian_hint` is set the claim is verified.
    pub fn new(layout: HilbertLayout, matrix: CsrMatrix, hermitian_hint: bool) -> Result<Self> {
        if matrix.dim() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: matrix.dim() });
        }
        let op = Self { layout, matrix, hermitian_hint };
        if hermitian_hint && !op.is_hermitian() {
            return Err(Error::InvalidParameter {
                name: "hermitian_hint",
                reason: alloc::format!("operator is not Hermitian (defect {:e})", op.matrix.hermitian_defect()),
            });
        }
        Ok(op)
    }

    pub(crate) fn from_parts(layout: HilbertLayout, matrix: CsrMatrix, hermitian_hint: bool) -> Self {
        debug_assert_eq!(matrix.dim(), layout.dim());
        Self { layout, matrix, hermitian_hint }
    }

    pub fn zeros(layout: HilbertLayout) -> Self {
        Self::from_parts(layout, CsrMatrix::zeros(layout.dim()), true)
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        Self::from_parts(layout, CsrMatrix::identity(layout.dim()), true)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// `max |M − M†| ≤ 10⁻¹² · max |M|`.
    pub fn is_hermitian(&self) -> bool {
        self.matrix.hermitian_defect() <= HERMITIAN_TOL * self.matrix.max_abs()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.layout, self.matrix.adjoint(), self.hermitian_hint)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_parts(self.layout, self.matrix.scale(s), self.hermitian_hint && s.im == 0.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_layout(other)?;
        Ok(Self::from_parts(
            self.layout,
            self.matrix.add(&other.matrix),
            self.hermitian_hint && other.hermitian_hint,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_layout(other)?;
        Ok(Self::from_parts(
            self.layout,
            self.matrix.sub(&other.matrix),
            self.hermitian_hint && other.hermitian_hint,
        ))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_layout(other)?;
        Ok(Self::from_parts(self.layout, self.matrix.matmul(&other.matrix), false))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_layout(other)?;
        Ok(Self::from_parts(self.layout, self.matrix.commutator(&other.matrix), false))
    }

    /// `self + self†`, flagged Hermitian.
    pub fn plus_adjoint(&self) -> Self {
        Self::from_parts(self.layout, self.matrix.add(&self.matrix.adjoint()), true)
    }

    pub fn with_hint(mut self, hermitian_hint: bool) -> Result<Self> {
        self.hermitian_hint = hermitian_hint;
        if hermitian_hint && !self.is_hermitian() {
            return Err(Error::InvalidParameter {
                name: "hermitian_hint",
                reason: alloc::format!("operator is not Hermitian (defect {:e})", self.matrix.hermitian_defect()),
            });
        }
        Ok(self)
    }

    pub(crate) fn check_layout(&self, other: &Self) -> Result<()> {
        if self.layout == other.layout {
            Ok(())
        } else {
            Err(Error::LayoutMismatch)
        }
    }
}

/// Truncated single-mode annihilation operator on `n_max + 1` levels.
pub fn local_annihilation(n_max: usize) -> CsrMatrix {
    let mut t = TripletBuilder::new(n_max + 1);
    for n in 1..=n_max {
        t.push(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    t.build()
}

/// `|bra><ket|` on a single three-level atom.
pub fn local_transition(bra: usize, ket: usize) -> Result<CsrMatrix> {
    for l in [bra, ket] {
        if l >= ATOM_LEVELS {
            return Err(Error::AtomicLevel(l));
        }
    }
    let mut t = TripletBuilder::new(ATOM_LEVELS);
    t.push(bra, ket, C64::new(1.0, 0.0));
    Ok(t.build())
}

/// `I ⊗ … ⊗ local_op ⊗ … ⊗ I` in the layout's fixed subsystem order.
pub fn embed(layout: &HilbertLayout, local_op: &CsrMatrix, subsystem: Subsystem) -> Result<OperatorMatrix> {
    match subsystem {
        Subsystem::Mode(m) => layout.check_mode(m).or_else(|e| {
            // An absent mode b still has local dimension 1; only a 1x1 operator fits.
            if local_op.dim() == 1 { Ok(()) } else { Err(e) }
        })?,
        Subsystem::Atom(k) => layout.check_atom(k)?,
    }
    let d = layout.local_dim(subsystem);
    if local_op.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: local_op.dim() });
    }
    let stride = layout.stride(subsystem);
    let mut t = TripletBuilder::with_capacity(layout.dim(), local_op.nnz() * (layout.dim() / d));
    for i in 0..layout.dim() {
        let l = layout.digit(i, subsystem);
        let base = i - l * stride;
        for (l2, v) in local_op.row(l) {
            t.push(i, base + l2 * stride, v);
        }
    }
    let hermitian = local_op.hermitian_defect() == 0.0;
    Ok(OperatorMatrix::from_parts(*layout, t.build(), hermitian))
}

/// Annihilation operator of `mode`, embedded in the full space.
pub fn annihilation(layout: &HilbertLayout, mode: Mode) -> Result<OperatorMatrix> {
    layout.check_mode(mode)?;
    let n_max = match mode {
        Mode::A => layout.n_max_a(),
        Mode::B => layout.n_max_b(),
    };
    embed(layout, &local_annihilation(n_max), Subsystem::Mode(mode))
}

pub fn creation(layout: &HilbertLayout, mode: Mode) -> Result<OperatorMatrix> {
    Ok(annihilation(layout, mode)?.adjoint())
}

/// Photon-number operator `a†a` (diagonal, exact integers).
pub fn number(layout: &HilbertLayout, mode: Mode) -> Result<OperatorMatrix> {
    layout.check_mode(mode)?;
    let n_max = match mode {
        Mode::A => layout.n_max_a(),
        Mode::B => layout.n_max_b(),
    };
    let local = CsrMatrix::from_diagonal(
        &(0..=n_max).map(|n| C64::new(n as f64, 0.0)).collect::<alloc::vec::Vec<_>>(),
    );
    embed(layout, &local, Subsystem::Mode(mode))
}

/// `|bra><ket|` acting on atom `k` (zero-based).
pub fn atomic_op(layout: &HilbertLayout, k: usize, bra: usize, ket: usize) -> Result<OperatorMatrix> {
    layout.check_atom(k)?;
    embed(layout, &local_transition(bra, ket)?, Subsystem::Atom(k))
}

/// Raising operator `σ_k⁺ = |1><2|`.
pub fn sigma_plus(layout: &HilbertLayout, k: usize) -> Result<OperatorMatrix> {
    atomic_op(layout, k, 1, 2)
}

/// Lowering operator `σ_k⁻ = |2><1|`.
pub fn sigma_minus(layout: &HilbertLayout, k: usize) -> Result<OperatorMatrix> {
    atomic_op(layout, k, 2, 1)
}

/// `σ_k^z = |1><1| − |2><2|`.
pub fn sigma_z(layout: &HilbertLayout, k: usize) -> Result<OperatorMatrix> {
    atomic_op(layout, k, 1, 1)?.sub(&atomic_op(layout, k, 2, 2)?)
}
