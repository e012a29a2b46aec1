//! Dense helpers: Hermitian eigendecomposition, matrix exponentials and the
//! exponential action on a vector.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::C64;

/// Eigenvalues (ascending) and eigenvectors (columns) of the Hermitian part
/// of `m`.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Principal square root of a positive semidefinite Hermitian matrix;
/// negative round-off eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let roots = DVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)));
    &vecs * DMatrix::from_diagonal(&roots) * vecs.adjoint()
}

/// `exp(A)` by scaling and squaring with a degree-18 Taylor polynomial.
pub fn expm_dense(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a * C64::new(scale, 0.0);
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(M) v` for an operator available only through `apply(x, y): y = M x`.
///
/// The interval is split into `s ≥ ‖M‖₁` substeps and each substep sums the
/// Taylor series until two consecutive terms fall below `tol` relative to the
/// partial sum. Exact to `tol` for any `M`, and norm preserving to the same
/// order when `M` is anti-Hermitian.
pub fn expm_action<F>(apply: F, norm_one: f64, v: &[C64], tol: f64) -> Result<Vec<C64>>
where
    F: Fn(&[C64], &mut [C64]),
{
    const MAX_TERMS: usize = 80;
    let steps = (norm_one.ceil() as usize).max(1);
    let inv_steps = 1.0 / steps as f64;
    let mut w = v.to_vec();
    let mut term = vec![C64::zero(); v.len()];
    let mut next = vec![C64::zero(); v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&w);
        let mut small_in_a_row = 0;
        let mut converged = false;
        for k in 1..=MAX_TERMS {
            apply(&term, &mut next);
            let f = inv_steps / k as f64;
            let mut term_norm: f64 = 0.0;
            let mut w_norm: f64 = 0.0;
            for ((t, n), wi) in term.iter_mut().zip(&next).zip(w.iter_mut()) {
                *t = n * f;
                *wi += *t;
                term_norm = term_norm.max(t.norm());
                w_norm = w_norm.max(wi.norm());
            }
            if term_norm <= tol * w_norm.max(f64::MIN_POSITIVE) {
                small_in_a_row += 1;
                if small_in_a_row == 2 {
                    converged = true;
                    break;
                }
            } else {
                small_in_a_row = 0;
            }
        }
        if !converged {
            return Err(Error::NoConvergence("Taylor exponential action"));
        }
    }
    Ok(w)
}

/// Composite Gauss–Legendre (8-point) quadrature of `f` over `[a, b]` with
/// `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in X.iter().zip(W.iter()) {
            acc += w * half * (f(mid - half * x) + f(mid + half * x));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expm_of_pauli_rotation() {
        // exp(-i θ σ_x) = cos θ I − i sin θ σ_x
        let th = 0.7;
        let a = DMatrix::from_row_slice(2, 2, &[C64::zero(), c(0.0, -th), c(0.0, -th), C64::zero()]);
        let e = expm_dense(&a);
        assert!((e[(0, 0)] - c(th.cos(), 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - c(0.0, -th.sin())).norm() < 1e-14);
    }

    #[test]
    fn action_matches_dense_exponential() {
        let n = 6;
        let m = DMatrix::from_fn(n, n, |i, j| c((i * 3 + j) as f64 * 0.1 - 1.0, (i as f64 - j as f64) * 0.2));
        let v: Vec<C64> = (0..n).map(|i| c(i as f64, 1.0)).collect();
        let dense = expm_dense(&m) * DVector::from_column_slice(&v);
        let norm = (0..n).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        let act = expm_action(
            |x, y| {
                let r = &m * DVector::from_column_slice(x);
                y.copy_from_slice(r.as_slice());
            },
            norm,
            &v,
            1e-15,
        )
        .unwrap();
        for i in 0..n {
            assert!((act[i] - dense[i]).norm() < 1e-10 * dense.norm());
        }
    }

    #[test]
    fn eigen_reconstructs() {
        let m = DMatrix::from_fn(5, 5, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let (vals, vecs) = hermitian_eigen(&m);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(5, vals.iter().map(|&x| c(x, 0.0))));
        let back = &vecs * d * vecs.adjoint();
        assert!((back - m).norm() < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn quadrature_of_lorentzian() {
        let v = gauss_legendre(|x| 1.0 / (1.0 + x * x), -1.0, 1.0, 4);
        assert!((v - core::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }
}
