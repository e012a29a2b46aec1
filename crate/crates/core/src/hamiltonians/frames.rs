use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fock::{CsrMatrix, HilbertLayout, OperatorMatrix, Subsystem, TripletBuilder};
use crate::params::{derive_effective, AtomSite, EffectiveModel, PhysicalParams};
use crate::C64;

/// Builds a real diagonal from a function of `(n_a, n_b, atomic levels)`.
pub(crate) fn diagonal_from_fn<F>(layout: &HilbertLayout, mut f: F) -> Vec<f64>
where
    F: FnMut(usize, usize, &[usize]) -> f64,
{
    let mut levels = alloc::vec![0usize; layout.n_atoms()];
    (0..layout.dim())
        .map(|i| {
            let (na, nb) = layout.photons(i);
            for (k, l) in levels.iter_mut().enumerate() {
                *l = layout.digit(i, Subsystem::Atom(k));
            }
            f(na, nb, &levels)
        })
        .collect()
}

pub(crate) fn diagonal_operator(layout: &HilbertLayout, diag: &[f64]) -> OperatorMatrix {
    let m = CsrMatrix::from_diagonal(&diag.iter().map(|&d| C64::new(d, 0.0)).collect::<Vec<_>>());
    OperatorMatrix::from_parts(*layout, m, true)
}

pub(crate) fn check_sites(layout: &HilbertLayout, sites: &[AtomSite]) -> Result<()> {
    if sites.len() == layout.n_atoms() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: layout.n_atoms(), found: sites.len() })
    }
}

pub(crate) fn frame_a_diagonal(model: &EffectiveModel, layout: &HilbertLayout) -> Vec<f64> {
    let dt = model.delta_tilde;
    diagonal_from_fn(layout, |na, nb, levels| {
        let mut v = dt * (na + nb) as f64;
        for (k, &l) in levels.iter().enumerate() {
            v += match l {
                1 => model.stark_1[k],
                2 => model.stark_2[k],
                _ => 0.0,
            };
        }
        v
    })
}

/// `A = δ̃(a†a + b†b) + Σ_k (|Ω_k1|²/Δ_1 |1><1|_k + |Ω_k2|²/Δ_2 |2><2|_k)`.
pub fn frame_generator_a(params: &PhysicalParams, sites: &[AtomSite], layout: &HilbertLayout) -> Result<OperatorMatrix> {
    check_sites(layout, sites)?;
    let model = derive_effective(params, sites)?;
    Ok(diagonal_operator(layout, &frame_a_diagonal(&model, layout)))
}

/// Free Hamiltonian of cavity and atoms.
pub fn free_hamiltonian(params: &PhysicalParams, layout: &HilbertLayout) -> OperatorMatrix {
    let omega = [params.omega_0, params.omega_1, params.omega_2];
    let diag = diagonal_from_fn(layout, |na, nb, levels| {
        params.omega_a * na as f64 + params.omega_b * nb as f64 + levels.iter().map(|&l| omega[l]).sum::<f64>()
    });
    diagonal_operator(layout, &diag)
}

/// `H̃_0 = H_0 + A`.
pub fn frame_h0_tilde(params: &PhysicalParams, sites: &[AtomSite], layout: &HilbertLayout) -> Result<OperatorMatrix> {
    free_hamiltonian(params, layout).add(&frame_generator_a(params, sites, layout)?)
}

/// `e^{iAt}(H − A)e^{−iAt}` for diagonal `A`.
pub fn transform_frame(h: &OperatorMatrix, a: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    h.check_layout(a)?;
    if !a.matrix().is_diagonal() {
        return Err(Error::NonDiagonalGenerator);
    }
    let phases: Vec<C64> = a.matrix().diagonal();
    let diff = h.matrix().sub(a.matrix());
    let mut out = TripletBuilder::with_capacity(diff.dim(), diff.nnz());
    for (i, j, v) in diff.iter() {
        out.push(i, j, v * (C64::new(0.0, t) * (phases[i] - phases[j])).exp());
    }
    Ok(OperatorMatrix::from_parts(*h.layout(), out.build(), h.hermitian_hint() && a.hermitian_hint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::uniform_sites;

    #[test]
    fn a_vanishes_without_shifts() {
        let mut p = PhysicalParams::rubidium_example().with_two_photon(0.1, -0.1).unwrap();
        p.rabi_1 = 0.0;
        p.rabi_2 = 0.0;
        let l = HilbertLayout::new(2, 2, 1).unwrap();
        let a = frame_generator_a(&p, &uniform_sites(1), &l).unwrap();
        assert_eq!(a.matrix().max_abs(), 0.0);
    }

    #[test]
    fn example_field_coefficient() {
        let p = PhysicalParams::rubidium_example();
        let l = HilbertLayout::new(2, 2, 1).unwrap();
        let a = frame_generator_a(&p, &uniform_sites(1), &l).unwrap();
        assert!(a.matrix().is_diagonal());
        let vac = l.index(0, 0, &[0]).unwrap();
        let one = l.index(1, 0, &[0]).unwrap();
        let coef = a.matrix().get(one, one) - a.matrix().get(vac, vac);
        assert!((coef.re + 0.01).abs() < 1e-15);
    }

    #[test]
    fn h0_tilde_entry() {
        let p = PhysicalParams::rubidium_example();
        let l = HilbertLayout::new(2, 2, 1).unwrap();
        let h = frame_h0_tilde(&p, &uniform_sites(1), &l).unwrap();
        let i = l.index(1, 0, &[2]).unwrap();
        let expected = p.omega_a + p.delta_tilde() + p.omega_2 + 100.0 / 2e4;
        assert!((h.matrix().get(i, i).re - expected).abs() < 1e-9);
    }

    #[test]
    fn zero_generator_frame_is_identity_map() {
        let l = HilbertLayout::new(1, 1, 1).unwrap();
        let h = crate::fock::annihilation(&l, crate::fock::Mode::A).unwrap().plus_adjoint();
        let z = OperatorMatrix::zeros(l);
        assert_eq!(transform_frame(&h, &z, 3.0).unwrap().matrix(), h.matrix());
        let n = crate::fock::number(&l, crate::fock::Mode::A).unwrap();
        assert!(transform_frame(&h, &h, 0.0).is_err());
        let at_zero = transform_frame(&h, &n, 0.0).unwrap();
        assert_eq!(at_zero.matrix(), &h.matrix().sub(n.matrix()));
    }
}
