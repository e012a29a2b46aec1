use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::{Float, Zero};

use super::layout::{HilbertLayout, Mode, ATOM_LEVELS};
use super::operators::OperatorMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// Norm tolerance for states that claim to be normalized.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: HilbertLayout,
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(layout: HilbertLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: amps.len() });
        }
        Ok(Self { layout, amps })
    }

    /// Wraps and normalizes; fails on the zero vector.
    pub fn normalized(layout: HilbertLayout, amps: Vec<C64>) -> Result<Self> {
        let mut s = Self::from_amplitudes(layout, amps)?;
        let n = s.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm: n });
        }
        s.amps.iter_mut().for_each(|z| *z /= n);
        Ok(s)
    }

    pub fn basis(layout: &HilbertLayout, n_a: usize, n_b: usize, levels: &[usize]) -> Result<Self> {
        let i = layout.index(n_a, n_b, levels)?;
        let mut amps = vec![C64::zero(); layout.dim()];
        amps[i] = C64::new(1.0, 0.0);
        Ok(Self { layout: *layout, amps })
    }

    /// `|field> ⊗ |atom_0> ⊗ … ⊗ |atom_{N-1}>`, normalized.
    ///
    /// `field` is indexed `n_a * (n_max_b + 1) + n_b`.
    pub fn product(layout: &HilbertLayout, field: &[C64], atoms: &[[C64; ATOM_LEVELS]]) -> Result<Self> {
        if field.len() != layout.field_dim() {
            return Err(Error::DimensionMismatch { expected: layout.field_dim(), found: field.len() });
        }
        if atoms.len() != layout.n_atoms() {
            return Err(Error::DimensionMismatch { expected: layout.n_atoms(), found: atoms.len() });
        }
        let mut atom_vec = vec![C64::new(1.0, 0.0)];
        for a in atoms {
            atom_vec = atom_vec.iter().flat_map(|x| a.iter().map(move |y| x * y)).collect();
        }
        let amps = field.iter().flat_map(|f| atom_vec.iter().map(move |x| f * x)).collect();
        Self::normalized(*layout, amps)
    }

    /// Field vacuum with every atom in `level`.
    pub fn vacuum_with_atoms_in(layout: &HilbertLayout, level: usize) -> Result<Self> {
        Self::basis(layout, 0, 0, &vec![level; layout.n_atoms()])
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<Self> {
        if *op.layout() != self.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(Self { layout: self.layout, amps: op.matrix().mul_vec(&self.amps) })
    }

    /// `<ψ|M|ψ>`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        if *op.layout() != self.layout {
            return Err(Error::LayoutMismatch);
        }
        let m = op.matrix();
        let mut acc = C64::zero();
        for i in 0..self.amps.len() {
            let mut row = C64::zero();
            for (j, v) in m.row(i) {
                row += v * self.amps[j];
            }
            acc += self.amps[i].conj() * row;
        }
        Ok(acc)
    }

    /// Population of the top two Fock levels of `mode`.
    pub fn leakage(&self, mode: Mode) -> f64 {
        let probs: Vec<f64> = self.amps.iter().map(|z| z.norm_sqr()).collect();
        leakage_from_diagonal(&self.layout, &probs, mode)
    }

    /// Worst cutoff leakage over the modes present.
    pub fn max_leakage(&self) -> f64 {
        let probs: Vec<f64> = self.amps.iter().map(|z| z.norm_sqr()).collect();
        max_leakage_from_diagonal(&self.layout, &probs)
    }

    /// Expected number of atoms in `level`.
    pub fn level_population(&self, level: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, z)| z.norm_sqr() * self.layout.level_count(i, level) as f64)
            .sum()
    }

    /// Multiplies amplitude `i` by `exp(-i · phase[i] · t)`.
    pub fn rotate_diagonal(&mut self, phase: &[f64], t: f64) {
        for (z, p) in self.amps.iter_mut().zip(phase) {
            *z *= C64::from_polar(1.0, -p * t);
        }
    }
}

pub(crate) fn leakage_from_diagonal(layout: &HilbertLayout, probs: &[f64], mode: Mode) -> f64 {
    let n_max = match mode {
        Mode::A => layout.n_max_a(),
        Mode::B => layout.n_max_b(),
    };
    if mode == Mode::B && !layout.has_mode_b() {
        return 0.0;
    }
    let threshold = n_max.saturating_sub(1);
    probs
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let (na, nb) = layout.photons(*i);
            match mode {
                Mode::A => na >= threshold,
                Mode::B => nb >= threshold,
            }
        })
        .map(|(_, p)| p)
        .sum()
}

pub(crate) fn max_leakage_from_diagonal(layout: &HilbertLayout, probs: &[f64]) -> f64 {
    leakage_from_diagonal(layout, probs, Mode::A).max(leakage_from_diagonal(layout, probs, Mode::B))
}

/// Truncated coherent-state amplitudes on `n_max + 1` levels, renormalized.
pub fn coherent_amplitudes(n_max: usize, alpha: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    out.iter_mut().for_each(|z| *z /= norm);
    out
}

/// Kronecker product of single-mode amplitude vectors in layout field order.
pub fn field_product(mode_a: &[C64], mode_b: &[C64]) -> Vec<C64> {
    mode_a.iter().flat_map(|x| mode_b.iter().map(move |y| x * y)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    rho: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(layout: HilbertLayout, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != layout.dim() || rho.ncols() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: rho.nrows() });
        }
        Ok(Self { layout, rho })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self { layout: *state.layout(), rho: &v * v.adjoint() }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.rho.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::hermitian_eigenvalues(&self.rho).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `Tr(ρ M)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        if *op.layout() != self.layout {
            return Err(Error::LayoutMismatch);
        }
        let mut acc = C64::zero();
        for (i, j, v) in op.matrix().iter() {
            acc += v * self.rho[(j, i)];
        }
        Ok(acc)
    }

    pub fn purity(&self) -> f64 {
        let n = self.rho.nrows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.rho[(i, j)] * self.rho[(j, i)]).re;
            }
        }
        acc
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn leakage(&self, mode: Mode) -> f64 {
        leakage_from_diagonal(&self.layout, &self.populations(), mode)
    }

    pub fn max_leakage(&self) -> f64 {
        max_leakage_from_diagonal(&self.layout, &self.populations())
    }

    pub fn level_population(&self, level: usize) -> f64 {
        self.populations()
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.layout.level_count(i, level) as f64)
            .sum()
    }
}
