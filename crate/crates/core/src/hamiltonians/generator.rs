use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{CsrMatrix, HilbertLayout, OperatorMatrix, TripletBuilder, HERMITIAN_TOL};
use crate::C64;

/// `e^{−iωt} M + e^{iωt} M†`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingTerm {
    frequency: f64,
    matrix: CsrMatrix,
    adjoint: CsrMatrix,
}

impl RotatingTerm {
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }
}

/// A Hermitian generator `H(t) = H_c + Σ_j (e^{−iω_j t} M_j + h.c.)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    layout: HilbertLayout,
    constant: CsrMatrix,
    rotating: Vec<RotatingTerm>,
}

impl Generator {
    /// `constant` must be Hermitian; terms sharing a frequency are merged.
    pub fn new(layout: HilbertLayout, constant: CsrMatrix, terms: Vec<(f64, CsrMatrix)>) -> Result<Self> {
        if constant.dim() != layout.dim() {
            return Err(Error::DimensionMismatch { expected: layout.dim(), found: constant.dim() });
        }
        if constant.hermitian_defect() > HERMITIAN_TOL * constant.max_abs() {
            return Err(Error::InvalidParameter {
                name: "constant",
                reason: alloc::format!("not Hermitian (defect {:e})", constant.hermitian_defect()),
            });
        }
        let mut grouped: Vec<(f64, CsrMatrix)> = Vec::new();
        for (f, m) in terms {
            if m.dim() != layout.dim() {
                return Err(Error::DimensionMismatch { expected: layout.dim(), found: m.dim() });
            }
            if !f.is_finite() {
                return Err(Error::InvalidParameter { name: "frequency", reason: alloc::format!("not finite ({f})") });
            }
            if m.nnz() == 0 {
                continue;
            }
            match grouped.iter_mut().find(|(g, _)| *g == f) {
                Some((_, acc)) => *acc = acc.add(&m),
                None => grouped.push((f, m)),
            }
        }
        let rotating = grouped
            .into_iter()
            .filter(|(_, m)| m.nnz() > 0)
            .map(|(frequency, matrix)| RotatingTerm { frequency, adjoint: matrix.adjoint(), matrix })
            .collect();
        Ok(Self { layout, constant, rotating })
    }

    pub fn constant(layout: HilbertLayout, matrix: CsrMatrix) -> Result<Self> {
        Self::new(layout, matrix, Vec::new())
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn constant_part(&self) -> &CsrMatrix {
        &self.constant
    }

    pub fn rotating(&self) -> &[RotatingTerm] {
        &self.rotating
    }

    pub fn is_static(&self) -> bool {
        self.rotating.is_empty()
    }

    /// Upper bound on `‖H(t)‖₁` for all `t`.
    pub fn norm_bound(&self) -> f64 {
        self.constant.norm_one()
            + self.rotating.iter().map(|r| r.matrix.norm_one() + r.adjoint.norm_one()).sum::<f64>()
    }

    /// The generator at time `t` as a sparse matrix.
    pub fn at(&self, t: f64) -> OperatorMatrix {
        let mut acc = self.constant.clone();
        for r in &self.rotating {
            let ph = C64::from_polar(1.0, -r.frequency * t);
            acc = acc.lin_comb(C64::new(1.0, 0.0), &r.matrix, ph);
            acc = acc.lin_comb(C64::new(1.0, 0.0), &r.adjoint, ph.conj());
        }
        OperatorMatrix::from_parts(self.layout, acc, true)
    }

    /// `y = H(t) x`.
    pub fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        self.constant.mul_vec_into(x, y);
        for r in &self.rotating {
            let ph = C64::from_polar(1.0, -r.frequency * t);
            r.matrix.mul_vec_add(ph, x, y);
            r.adjoint.mul_vec_add(ph.conj(), x, y);
        }
    }

    /// `y = −i H(t) x`.
    pub fn apply_skew(&self, t: f64, x: &[C64], y: &mut [C64]) {
        self.apply(t, x, y);
        for v in y.iter_mut() {
            *v = C64::new(v.im, -v.re);
        }
    }

    /// Time-independent generator in the frame `ψ_R = e^{iFt} ψ` for a
    /// diagonal `F`, i.e. `e^{iFt} H(t) e^{−iFt} − F`. Fails unless every
    /// rotating entry `(i, j)` satisfies `F_i − F_j = ω` to within `rel_tol`
    /// of the frequency scale.
    pub fn static_in_frame(&self, frame: &[f64], rel_tol: f64) -> Result<CsrMatrix> {
        let dim = self.layout.dim();
        if frame.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: frame.len() });
        }
        for (i, j, v) in self.constant.iter() {
            if i != j && v != C64::zero() && frame[i] != frame[j] {
                let scale = frame[i].abs().max(frame[j].abs());
                if (frame[i] - frame[j]).abs() > rel_tol * scale {
                    return Err(Error::InvalidParameter {
                        name: "frame",
                        reason: alloc::format!("constant entry ({i}, {j}) would rotate"),
                    });
                }
            }
        }
        let mut acc = self.constant.clone();
        for r in &self.rotating {
            for (i, j, _) in r.matrix.iter() {
                let diff = frame[i] - frame[j];
                let scale = r.frequency.abs().max(frame[i].abs()).max(frame[j].abs()).max(1.0);
                if (diff - r.frequency).abs() > rel_tol * scale {
                    return Err(Error::InvalidParameter {
                        name: "frame",
                        reason: alloc::format!(
                            "entry ({i}, {j}) rotates at {} in the frame, term frequency {}",
                            diff,
                            r.frequency
                        ),
                    });
                }
            }
            acc = acc.add(&r.matrix).add(&r.adjoint);
        }
        let mut t = TripletBuilder::new(dim);
        for (i, &f) in frame.iter().enumerate() {
            t.push(i, i, C64::new(-f, 0.0));
        }
        Ok(acc.add(&t.build()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, number, Mode};

    #[test]
    fn rotating_term_evaluation() {
        let l = crate::fock::HilbertLayout::single_mode(3).unwrap();
        let a = annihilation(&l, Mode::A).unwrap().into_matrix();
        let n = number(&l, Mode::A).unwrap().into_matrix();
        let g = Generator::new(l, n.clone(), alloc::vec![(2.0, a.clone())]).unwrap();
        let t = 0.3;
        let h = g.at(t);
        let expected = C64::from_polar(1.0, -0.6) * a.get(0, 1);
        assert!((h.matrix().get(0, 1) - expected).norm() < 1e-15);
        assert!(h.is_hermitian());
        let x: Vec<C64> = (0..4).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut y = alloc::vec![C64::zero(); 4];
        g.apply(t, &x, &mut y);
        let direct = h.matrix().mul_vec(&x);
        for (u, v) in y.iter().zip(&direct) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn static_frame_of_rotating_ladder() {
        // e^{iFt}(e^{-iωt} a + h.c.)e^{-iFt} with F = -ω n is static.
        let l = crate::fock::HilbertLayout::single_mode(4).unwrap();
        let a = annihilation(&l, Mode::A).unwrap().into_matrix();
        let g = Generator::new(l, CsrMatrix::zeros(l.dim()), alloc::vec![(1.5, a)]).unwrap();
        let frame: Vec<f64> = (0..l.dim()).map(|n| -1.5 * n as f64).collect();
        let h_r = g.static_in_frame(&frame, 1e-14).unwrap();
        assert!((h_r.get(2, 2).re - 3.0).abs() < 1e-15);
        let wrong: Vec<f64> = (0..l.dim()).map(|n| n as f64).collect();
        assert!(g.static_in_frame(&wrong, 1e-14).is_err());
    }

    #[test]
    fn non_hermitian_constant_rejected() {
        let l = crate::fock::HilbertLayout::single_mode(2).unwrap();
        let a = annihilation(&l, Mode::A).unwrap().into_matrix();
        assert!(Generator::constant(l, a).is_err());
    }
}
