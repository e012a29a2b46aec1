use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::*;
use crate::fock::{annihilation, coherent_amplitudes, CsrMatrix, DensityMatrix, StateVector};
use crate::hamiltonians::{Generator, HamiltonianSpec, Level};
use crate::inout::{intracavity_moments, DriveParams};
use crate::params::dispersive_design;
use crate::C64;

fn a_op(l: &HilbertLayout) -> CsrMatrix {
    annihilation(l, Mode::A).unwrap().into_matrix()
}

fn two_mode_coupling(l: &HilbertLayout, omega: C64) -> CsrMatrix {
    let a = a_op(l);
    let b = annihilation(l, Mode::B).unwrap().into_matrix();
    let pair = a.adjoint().matmul(&b.adjoint());
    pair.lin_comb(omega, &pair.adjoint(), omega.conj())
}

#[test]
fn zero_generator_leaves_state() {
    let l = HilbertLayout::new(5, 5, 1).unwrap();
    let s = StateVector::basis(&l, 1, 2, &[1]).unwrap();
    let g = Generator::constant(l, CsrMatrix::zeros(l.dim())).unwrap();
    let r = propagate_unitary(&s, &g, 4.0, &StepControl::default()).unwrap();
    assert_eq!(r.final_state, s);
    assert_eq!(r.times.len(), 11);
    assert_eq!(r.norm_drift, 0.0);
}

#[test]
fn free_rotation_of_coherent_state() {
    let l = HilbertLayout::single_mode(10).unwrap();
    let alpha = C64::new(0.3, 0.0);
    let s = StateVector::from_amplitudes(l, coherent_amplitudes(10, alpha)).unwrap();
    let w = 1.7;
    let n = crate::fock::number(&l, Mode::A).unwrap().into_matrix().scale(C64::new(w, 0.0));
    let g = Generator::constant(l, n).unwrap();
    let a = annihilation(&l, Mode::A).unwrap();
    let a0 = s.expectation(&a).unwrap();
    for t in [0.3, 2.0, 7.5] {
        let r = propagate_unitary(&s, &g, t, &StepControl::default()).unwrap();
        let at = r.final_state.expectation(&a).unwrap();
        assert!((at - a0 * C64::from_polar(1.0, -w * t)).norm() < 1e-7, "t = {t}");
        assert!(r.norm_drift < 1e-12);
    }
}

#[test]
fn driven_oscillator_through_adaptive_path() {
    // H = f (e^{−iνt} a† + e^{iνt} a): <a>(t) = (f/ν)(e^{−iνt} − 1).
    let l = HilbertLayout::single_mode(14).unwrap();
    let (f, nu) = (0.3, 2.0);
    let g = Generator::new(l, CsrMatrix::zeros(l.dim()), vec![(nu, a_op(&l).adjoint().scale(C64::new(f, 0.0)))]).unwrap();
    assert!(!g.is_static());
    let vac = StateVector::basis(&l, 0, 0, &[]).unwrap();
    let r = propagate_unitary(&vac, &g, 3.0, &StepControl::default()).unwrap();
    let a = annihilation(&l, Mode::A).unwrap();
    let expected = (C64::from_polar(1.0, -nu * 3.0) - 1.0) * (f / nu);
    assert!((r.final_state.expectation(&a).unwrap() - expected).norm() < 1e-7);
    assert!(r.norm_drift < 1e-8);
    assert!(r.steps > 0);
}

#[test]
fn reduced_hamiltonian_grows_two_mode_squeezed_vacuum() {
    let l = HilbertLayout::new(30, 30, 0).unwrap();
    let omega = -0.2;
    let g = Generator::constant(l, two_mode_coupling(&l, C64::new(omega, 0.0))).unwrap();
    let vac = StateVector::basis(&l, 0, 0, &[]).unwrap();
    let t_final = 5.0;
    let r = propagate_unitary(&vac, &g, t_final, &StepControl::default()).unwrap();
    for (t, (na, nb)) in r.times.iter().zip(r.observables.n_a.iter().zip(&r.observables.n_b)) {
        let expected = (omega.abs() * t).sinh().powi(2);
        assert!((na - expected).abs() < 1e-6, "t = {t}: {na} vs {expected}");
        assert!((na - nb).abs() < 1e-8);
    }
    let s = &r.final_state;
    let b = annihilation(&l, Mode::B).unwrap();
    let a = annihilation(&l, Mode::A).unwrap();
    let cross = [
        s.expectation(&a).unwrap(),
        s.expectation(&b).unwrap(),
        s.expectation(&a.matmul(&a).unwrap()).unwrap(),
        s.expectation(&b.matmul(&b).unwrap()).unwrap(),
        s.expectation(&a.adjoint().matmul(&b).unwrap()).unwrap(),
    ];
    for c in cross {
        assert!(c.norm() < 1e-12);
    }
    assert!(s.expectation(&a.matmul(&b).unwrap()).unwrap().norm() > 0.5);
}

#[test]
fn energy_is_conserved_for_static_generators() {
    let l = HilbertLayout::new(6, 6, 1).unwrap();
    let p = crate::params::PhysicalParams::rubidium_example();
    let spec = HamiltonianSpec::new(Level::IvFull, p, crate::params::uniform_sites(1), l).unwrap();
    let g = spec.generator().unwrap();
    assert!(g.is_static());
    let amps: Vec<C64> = (0..l.dim()).map(|i| C64::new(((i * 7) % 5) as f64, ((i * 3) % 4) as f64 - 1.5)).collect();
    let s = StateVector::normalized(l, amps).unwrap();
    let h = g.at(0.0);
    let e0 = s.expectation(&h).unwrap().re;
    let lenient = StepControl { leakage_limit: 1.0, ..StepControl::default() };
    let r = propagate_unitary(&s, &g, 50.0, &lenient).unwrap();
    let e1 = r.final_state.expectation(&h).unwrap().re;
    assert!((e1 - e0).abs() <= 1e-6 * e0.abs().max(1e-3));
    assert!(r.norm_drift < 1e-8);
}

#[test]
fn leakage_escalates() {
    let l = HilbertLayout::new(4, 4, 0).unwrap();
    let g = Generator::constant(l, two_mode_coupling(&l, C64::new(1.0, 0.0))).unwrap();
    let vac = StateVector::basis(&l, 0, 0, &[]).unwrap();
    assert!(matches!(propagate_unitary(&vac, &g, 3.0, &StepControl::default()), Err(crate::Error::Leakage { .. })));
    let lenient = StepControl { leakage_limit: 1.0, ..StepControl::default() };
    let r = propagate_unitary(&vac, &g, 3.0, &lenient).unwrap();
    assert!(!r.warnings.is_empty());
}

#[test]
fn lindblad_without_decay_matches_unitary() {
    let l = HilbertLayout::new(5, 5, 0).unwrap();
    let g = Generator::new(l, two_mode_coupling(&l, C64::new(0.1, 0.05)), vec![(0.7, a_op(&l).scale(C64::new(0.2, 0.0)))]).unwrap();
    let vac = StateVector::basis(&l, 0, 0, &[]).unwrap();
    let pure = propagate_unitary(&vac, &g, 2.0, &StepControl::default()).unwrap();
    let mixed = propagate_lindblad(&DensityMatrix::from_pure(&vac), &g, &[], 2.0, &StepControl::default()).unwrap();
    assert!(fidelity(&pure.final_state, &mixed.final_state).unwrap() >= 1.0 - 1e-8);
    assert!(mixed.norm_drift < 1e-7);
    assert!(mixed.hermitian_defect < 1e-8);
}

#[test]
fn photon_decays_exponentially() {
    let l = HilbertLayout::single_mode(3).unwrap();
    let kappa = 0.8;
    let g = Generator::constant(l, CsrMatrix::zeros(l.dim())).unwrap();
    let rho = DensityMatrix::from_pure(&StateVector::basis(&l, 1, 0, &[]).unwrap());
    let decay = cavity_decay(&l, kappa, 0.0).unwrap();
    let r = propagate_lindblad(&rho, &g, &decay, 4.0, &StepControl::default()).unwrap();
    for (t, n) in r.times.iter().zip(&r.observables.n_a) {
        assert!((n - (-kappa * t).exp()).abs() < 1e-6);
    }
    assert!(r.norm_drift < 1e-7);
    assert!(r.min_eigenvalue.unwrap() > -1e-6);
}

#[test]
fn steady_state_matches_langevin_moments() {
    let l = HilbertLayout::new(10, 10, 0).unwrap();
    let (ka, kb) = (1.0, 1.0);
    for ratio in [0.1, 0.3] {
        let omega_l = ratio * (ka * kb as f64).sqrt();
        // Ω_H = iΩ_L/2 reproduces ȧ = (Ω_L/2) b† − (κ_a/2) a.
        let omega_h = C64::new(0.0, omega_l / 2.0);
        let g = Generator::constant(l, two_mode_coupling(&l, omega_h)).unwrap();
        let vac = DensityMatrix::from_pure(&StateVector::basis(&l, 0, 0, &[]).unwrap());
        let decay = cavity_decay(&l, ka, kb).unwrap();
        let ss = relax_to_steady_state(&vac, &g, &decay, 10.0, 1e-9, 20, &StepControl::default()).unwrap();
        let n_a = ss.expectation(&crate::fock::number(&l, Mode::A).unwrap()).unwrap().re;
        let m = intracavity_moments(&DriveParams::from_effective(omega_h, ka, kb, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap()).unwrap();
        assert!((n_a - m.n_a).abs() <= 0.05 * m.n_a, "{n_a} vs {}", m.n_a);
    }
}

#[test]
fn comparison_at_zero_time_is_exact() {
    let d = dispersive_design(10.0, 1, 0.1).unwrap();
    let l = HilbertLayout::new(6, 6, 1).unwrap();
    let c = compare_full_vs_effective(&d.params, &d.sites, &l, &[0.0], None).unwrap();
    assert!(c.points[0].infidelity < 1e-14);
    assert!(c.regime.checks.is_empty());
}

#[test]
fn reduced_level_reproduces_reference() {
    let d = dispersive_design(10.0, 1, 0.3).unwrap();
    let l = HilbertLayout::new(12, 12, 1).unwrap();
    let c = compare_level(Level::IvReduced, &d.params, &d.sites, &l, &[d.params.tau / 2.0, d.params.tau], None).unwrap();
    for p in &c.points {
        assert!(p.infidelity < 1e-12, "{p:?}");
    }
}

#[test]
fn adaptive_and_exact_agree_on_level_i() {
    let d = dispersive_design(10.0, 1, 0.1).unwrap();
    let l = HilbertLayout::new(4, 4, 1).unwrap();
    let spec = HamiltonianSpec::new(Level::I, d.params, d.sites.clone(), l).unwrap();
    let g = spec.generator().unwrap();
    let exact = FrameEvolution::new(&g, &spec.static_frame().unwrap()).unwrap();
    let init = StateVector::vacuum_with_atoms_in(&l, 2).unwrap();
    let t = 2.0;
    let control = StepControl { tol: 1e-10, samples: 2, ..StepControl::default() };
    let rk = propagate_unitary(&init, &g, t, &control).unwrap();
    let ex = exact.evolve(&init, t).unwrap();
    assert!(fidelity(&rk.final_state, &ex).unwrap() > 1.0 - 1e-8);
    assert!(rk.norm_drift < 1e-8);
}

#[test]
fn ladder_rungs_agree_with_reference() {
    let d = dispersive_design(30.0, 1, 0.1).unwrap();
    let l = HilbertLayout::new(6, 6, 1).unwrap();
    let tau = d.params.tau;
    let full = compare_full_vs_effective(&d.params, &d.sites, &l, &[tau], None).unwrap();
    let ii = compare_level(Level::II, &d.params, &d.sites, &l, &[tau], None).unwrap();
    let iii = compare_level(Level::III, &d.params, &d.sites, &l, &[tau], None).unwrap();
    let ivf = compare_level(Level::IvFull, &d.params, &d.sites, &l, &[tau], None).unwrap();
    for c in [&full, &ii, &iii, &ivf] {
        assert!(c.points[0].infidelity < 1e-2, "{:?}: {}", c.level, c.points[0].infidelity);
        assert!(!c.flagged);
    }
    // II and III are the same dynamics in two frames.
    assert!((ii.points[0].infidelity - iii.points[0].infidelity).abs() < 1e-9);
}

#[test]
fn infidelity_falls_with_margin() {
    let pts = margin_ladder(&[10.0, 30.0, 100.0], 1, 0.1, 6).unwrap();
    assert!(pts[0].infidelity > pts[1].infidelity && pts[1].infidelity > pts[2].infidelity, "{pts:?}");
    assert!(pts.iter().all(|p| p.regime_ok));
}
