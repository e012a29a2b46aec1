use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fock::Subsystem;
use crate::params::{dispersive_design, uniform_sites, DetuningSpec, Position};

fn random_case(rng: &mut ChaCha8Rng, n_atoms: usize) -> (PhysicalParams, Vec<AtomSite>) {
    let mut r = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let p = PhysicalParams::from_detunings(DetuningSpec {
        g_a: r(0.5, 1.5),
        g_b: r(0.5, 1.5),
        rabi_1: r(1.0, 20.0),
        rabi_2: r(1.0, 20.0),
        detuning_1: r(50.0, 200.0),
        detuning_2: r(250.0, 400.0),
        two_photon_1: r(-0.5, 0.5),
        two_photon_2: r(-0.5, 0.5),
        ..DetuningSpec::default()
    })
    .unwrap();
    let sites = (0..n_atoms)
        .map(|_| {
            let mut c = || C64::from_polar(r(0.2, 1.0), r(-3.0, 3.0));
            AtomSite { position: Position::default(), u_a: c(), u_b: c(), v_1: c(), v_2: c() }
        })
        .collect();
    (p, sites)
}

fn max_entry_diff(x: &CsrMatrix, y: &CsrMatrix) -> f64 {
    x.sub(y).max_abs()
}

#[test]
fn reduced_equals_parametric_coupling() {
    let p = PhysicalParams::rubidium_example();
    let l = HilbertLayout::new(3, 3, 1).unwrap();
    let spec = HamiltonianSpec::new(Level::IvReduced, p, uniform_sites(1), l).unwrap();
    let h = spec.build(0.0).unwrap();
    let omega = spec.model().unwrap().omega_eff;
    assert_eq!(omega.im, 0.0);
    let a = annihilation(&l, Mode::A).unwrap().into_matrix();
    let b = annihilation(&l, Mode::B).unwrap().into_matrix();
    let expected = a.adjoint().matmul(&b.adjoint()).add(&b.matmul(&a)).scale(omega);
    assert!(max_entry_diff(h.matrix(), &expected) <= 1e-15 * omega.norm());
}

#[test]
fn zero_couplings_build_zero_interaction() {
    let mut p = PhysicalParams::rubidium_example();
    p.g_a = 0.0;
    p.g_b = 0.0;
    p.rabi_1 = 0.0;
    p.rabi_2 = 0.0;
    let l = HilbertLayout::new(2, 2, 2).unwrap();
    let h = HamiltonianSpec::new(Level::I, p, uniform_sites(2), l).unwrap().build(1.3).unwrap();
    assert_eq!(h.matrix().nnz(), 0);
    let h2 = HamiltonianSpec::new(Level::II, p, uniform_sites(2), l).unwrap().build(1.3).unwrap();
    assert_eq!(h2.matrix().nnz(), 0);
    // III keeps only the −δ̃ (a†a + b†b) frame term.
    let h3 = HamiltonianSpec::new(Level::III, p, uniform_sites(2), l).unwrap().build(1.3).unwrap();
    assert!(h3.matrix().is_diagonal());
    let i = l.index(1, 2, &[1, 2]).unwrap();
    assert!((h3.matrix().get(i, i).re + 3.0 * p.delta_tilde()).abs() < 1e-15);
}

#[test]
fn every_level_is_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let (p, sites) = random_case(&mut rng, 2);
        let l = HilbertLayout::new(2, 2, 2).unwrap();
        for level in Level::ALL {
            let spec = HamiltonianSpec::with_condition_gate(level, p, sites.clone(), l, f64::INFINITY).unwrap();
            for t in [0.0, 0.37, 5.0] {
                let h = spec.build(t).unwrap();
                assert!(h.matrix().hermitian_defect() <= 1e-12 * h.matrix().max_abs().max(1.0), "{level:?}");
            }
        }
    }
}

#[test]
fn frame_a_maps_level_ii_to_level_iii() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let (p, sites) = random_case(&mut rng, 2);
        let l = HilbertLayout::new(3, 2, 2).unwrap();
        let ii = HamiltonianSpec::new(Level::II, p, sites.clone(), l).unwrap();
        let iii = HamiltonianSpec::new(Level::III, p, sites.clone(), l).unwrap();
        let a = frame_generator_a(&p, &sites, &l).unwrap();
        for t in [0.0, 0.37, 5.0, 123.4] {
            let mapped = transform_frame(&ii.build(t).unwrap(), &a, t).unwrap();
            let direct = iii.build(t).unwrap();
            assert!(max_entry_diff(mapped.matrix(), direct.matrix()) < 1e-10);
        }
    }
}

#[test]
fn static_frames_remove_time_dependence() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (p, sites) = random_case(&mut rng, 2);
    let l = HilbertLayout::new(2, 2, 2).unwrap();
    for level in [Level::I, Level::II, Level::III] {
        let spec = HamiltonianSpec::new(level, p, sites.clone(), l).unwrap();
        let frame = spec.static_frame().unwrap();
        let h_r = spec.generator().unwrap().static_in_frame(&frame, 1e-12).unwrap();
        let f = diagonal_operator(&l, &frame);
        for t in [0.0, 0.37, 5.0] {
            let rotated = transform_frame(&spec.build(t).unwrap(), &f, t).unwrap();
            let scale = h_r.max_abs().max(1.0);
            assert!(max_entry_diff(rotated.matrix(), &h_r) < 1e-11 * scale, "{level:?} t={t}");
        }
    }
}

#[test]
fn full_iv_reduces_on_ground_manifold() {
    let d = dispersive_design(10.0, 2, 0.1).unwrap();
    let l = HilbertLayout::new(3, 3, 2).unwrap();
    let full = HamiltonianSpec::new(Level::IvFull, d.params, d.sites.clone(), l).unwrap().build(0.0).unwrap();
    let reduced = HamiltonianSpec::new(Level::IvReduced, d.params, d.sites.clone(), l).unwrap().build(0.0).unwrap();
    let ground: Vec<usize> = (0..l.dim())
        .filter(|&i| (0..2).all(|k| l.digit(i, Subsystem::Atom(k)) == 2))
        .collect();
    let model = derive_effective(&d.params, &d.sites).unwrap();
    let constant: f64 = model.omega_tilde_b.iter().zip(&model.delta_k).map(|(t, dk)| t.norm_sqr() / dk).sum();
    let scale = model.omega_eff.norm();
    for &i in &ground {
        for &j in &ground {
            let mut expected = reduced.matrix().get(i, j);
            if i == j {
                expected += constant;
            }
            assert!((full.matrix().get(i, j) - expected).norm() < 1e-9 * scale, "({i},{j})");
        }
    }
}

#[test]
fn linear_in_cavity_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (p, sites) = random_case(&mut rng, 1);
    let l = HilbertLayout::new(2, 2, 1).unwrap();
    let at = |g: f64| {
        let mut q = p;
        q.g_a = g;
        HamiltonianSpec::new(Level::I, q, sites.clone(), l).unwrap().build(0.7).unwrap().into_matrix()
    };
    let lhs = at(0.3).add(&at(0.9));
    let rhs = at(1.2).add(&at(0.0));
    assert!(max_entry_diff(&lhs, &rhs) < 1e-13);
}

#[test]
fn gate_and_site_checks() {
    let mut p = PhysicalParams::rubidium_example();
    p.rabi_2 *= 30.0;
    let l = HilbertLayout::new(2, 2, 1).unwrap();
    assert!(matches!(
        HamiltonianSpec::new(Level::IvReduced, p, uniform_sites(1), l),
        Err(Error::ConditionGate { .. })
    ));
    assert!(HamiltonianSpec::new(Level::IvFull, p, uniform_sites(1), l).is_ok());
    assert_eq!(
        HamiltonianSpec::new(Level::I, p, uniform_sites(2), l).unwrap_err(),
        Error::DimensionMismatch { expected: 1, found: 2 }
    );
    let spec = HamiltonianSpec::new(Level::I, p, uniform_sites(1), l).unwrap();
    assert!(spec.build(-1.0).is_err());
}
