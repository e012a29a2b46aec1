use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use super::rk45::Rk45;
use super::{PropagationResult, Recorder, StateRef, StepControl};
use crate::error::{Error, Result};
use crate::fock::{StateVector, NORM_TOL};
use crate::hamiltonians::Generator;
use crate::linalg::{expm_action, hermitian_eigen};
use crate::C64;

/// Largest dimension diagonalized densely by [`FrameEvolution`].
pub const EXACT_DIM_LIMIT: usize = 6000;

fn check_start(state: &StateVector, t_final: f64) -> Result<()> {
    if (state.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: state.norm() });
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter { name: "t_final", reason: alloc::format!("must be finite and nonnegative ({t_final})") });
    }
    Ok(())
}

/// `ψ(t) = T exp(−i∫H) ψ(0)`.
///
/// Static generators use the Taylor exponential action between samples;
/// time-dependent ones use the adaptive Dormand–Prince integrator with local
/// error `control.tol`.
pub fn propagate_unitary(
    state: &StateVector,
    generator: &Generator,
    t_final: f64,
    control: &StepControl,
) -> Result<PropagationResult<StateVector>> {
    check_start(state, t_final)?;
    let layout = *state.layout();
    if *generator.layout() != layout {
        return Err(Error::LayoutMismatch);
    }
    let times = control.grid(t_final);
    let mut rec = Recorder::new(&layout, control)?;
    rec.record(0.0, StateRef::Pure(state))?;
    let mut psi = state.amplitudes().to_vec();
    let mut drift: f64 = 0.0;
    let mut steps = 0;
    let norm = generator.norm_bound();
    let mut rk = Rk45::new(layout.dim(), control.tol, control.max_steps, initial_step(norm, control.tol, t_final));
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if generator.is_static() {
            let dt = t1 - t0;
            let h = generator.constant_part();
            psi = expm_action(
                |x, y| {
                    h.mul_vec_into(x, y);
                    for v in y.iter_mut() {
                        *v = C64::new(v.im * dt, -v.re * dt);
                    }
                },
                norm * dt,
                &psi,
                1e-15,
            )?;
            steps += (norm * dt).ceil() as usize;
        } else {
            let mut f = |t: f64, x: &[C64], y: &mut [C64]| generator.apply_skew(t, x, y);
            rk.advance(&mut f, t0, t1, &mut psi)?;
            steps = rk.steps;
        }
        let s = StateVector::from_amplitudes(layout, psi.clone())?;
        drift = drift.max((1.0 - s.norm()).abs());
        rec.record(t1, StateRef::Pure(&s))?;
    }
    let final_state = StateVector::from_amplitudes(layout, psi)?;
    let (observables, max_leakage, warnings) = rec.finish();
    Ok(PropagationResult {
        final_state,
        times,
        observables,
        norm_drift: drift,
        max_leakage,
        min_eigenvalue: None,
        hermitian_defect: 0.0,
        steps,
        warnings,
    })
}

pub(crate) fn initial_step(norm: f64, tol: f64, span: f64) -> f64 {
    let h = tol.powf(0.2) / norm.max(f64::MIN_POSITIVE);
    if span > 0.0 {
        h.min(span)
    } else {
        h
    }
}

/// Exact propagation of a generator that is static in a diagonal frame `F`:
/// `ψ(t) = e^{−iFt} V e^{−iΛt} V† ψ(0)` with `H_R = e^{iFt}H(t)e^{−iFt} − F = VΛV†`.
#[derive(Debug, Clone)]
pub struct FrameEvolution {
    frame: Vec<f64>,
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl FrameEvolution {
    pub fn new(generator: &Generator, frame: &[f64]) -> Result<Self> {
        let dim = generator.layout().dim();
        if dim > EXACT_DIM_LIMIT {
            return Err(Error::DimensionLimit { dim, limit: EXACT_DIM_LIMIT });
        }
        let h_r = generator.static_in_frame(frame, 1e-9)?;
        let (values, vectors) = hermitian_eigen(&h_r.to_dense());
        Ok(Self { frame: frame.to_vec(), values, vectors })
    }

    pub fn frame(&self) -> &[f64] {
        &self.frame
    }

    /// Eigenvalues of the static generator, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.layout().dim() != self.values.len() {
            return Err(Error::DimensionMismatch { expected: self.values.len(), found: state.layout().dim() });
        }
        let v = DVector::from_column_slice(state.amplitudes());
        let mut c = self.vectors.adjoint() * v;
        for (ci, e) in c.iter_mut().zip(&self.values) {
            *ci *= C64::from_polar(1.0, -e * t);
        }
        let w = &self.vectors * c;
        let mut out = StateVector::from_amplitudes(*state.layout(), w.iter().copied().collect())?;
        out.rotate_diagonal(&self.frame, t);
        Ok(out)
    }
}
