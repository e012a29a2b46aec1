use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;

use super::rk45::Rk45;
use super::unitary::initial_step;
use super::{PropagationResult, Recorder, StateRef, StepControl};
use crate::error::{Error, Result};
use crate::fock::{annihilation, atomic_op, CsrMatrix, DensityMatrix, HilbertLayout, Mode, OperatorMatrix};
use crate::hamiltonians::Generator;
use crate::C64;

/// Largest Hilbert-space dimension accepted for density-matrix runs.
pub const DENSITY_DIM_LIMIT: usize = 4000;

/// Positivity is checked at every sample up to this dimension, and only at
/// the end above it.
const EIGEN_EVERY_SAMPLE: usize = 1000;

/// A dissipator `rate · (L ρ L† − ½{L†L, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decay {
    pub label: String,
    pub op: OperatorMatrix,
    pub rate: f64,
}

/// Cavity decay `(a, κ_a)` and, when mode `b` exists, `(b, κ_b)`.
pub fn cavity_decay(layout: &HilbertLayout, kappa_a: f64, kappa_b: f64) -> Result<Vec<Decay>> {
    let mut out = alloc::vec![Decay { label: "a".into(), op: annihilation(layout, Mode::A)?, rate: kappa_a }];
    if layout.has_mode_b() {
        out.push(Decay { label: "b".into(), op: annihilation(layout, Mode::B)?, rate: kappa_b });
    }
    Ok(out)
}

/// Spontaneous emission from `|0>` of every atom, split evenly between the
/// two lower levels: `(|1><0|_k, Γ/2)` and `(|2><0|_k, Γ/2)`.
pub fn spontaneous_emission(layout: &HilbertLayout, gamma: f64) -> Result<Vec<Decay>> {
    let mut out = Vec::new();
    for k in 0..layout.n_atoms() {
        for lower in [1, 2] {
            out.push(Decay {
                label: alloc::format!("atom{k}:{lower}<-0"),
                op: atomic_op(layout, k, lower, 0)?,
                rate: gamma / 2.0,
            });
        }
    }
    Ok(out)
}

struct Liouvillian<'a> {
    generator: &'a Generator,
    /// `½ Σ γ L†L`.
    damping: CsrMatrix,
    jumps: Vec<(f64, CsrMatrix)>,
    dim: usize,
    scratch: DMatrix<C64>,
}

impl<'a> Liouvillian<'a> {
    fn new(generator: &'a Generator, decays: &[Decay]) -> Result<Self> {
        let dim = generator.layout().dim();
        let mut damping = CsrMatrix::zeros(dim);
        let mut jumps = Vec::new();
        for d in decays {
            if *d.op.layout() != *generator.layout() {
                return Err(Error::LayoutMismatch);
            }
            if !(d.rate >= 0.0 && d.rate.is_finite()) {
                return Err(Error::InvalidParameter { name: "rate", reason: alloc::format!("{} has rate {}", d.label, d.rate) });
            }
            if d.rate == 0.0 {
                continue;
            }
            let l = d.op.matrix();
            damping = damping.lin_comb(C64::new(1.0, 0.0), &l.adjoint().matmul(l), C64::new(0.5 * d.rate, 0.0));
            jumps.push((d.rate, l.clone()));
        }
        Ok(Self { generator, damping, jumps, dim, scratch: DMatrix::zeros(dim, dim) })
    }

    fn norm_bound(&self) -> f64 {
        2.0 * (self.generator.norm_bound() + self.damping.norm_one())
            + self.jumps.iter().map(|(g, l)| g * l.norm_one() * l.norm_one()).sum::<f64>()
    }

    /// `dρ/dt` for column-major `ρ`. Only the Hermitian part of `ρ` is used,
    /// so rounding noise in the anti-Hermitian part is frozen instead of fed
    /// back into the trace.
    fn rhs(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        let r = DMatrix::from_fn(n, n, |i, j| (rho[j * n + i] + rho[i * n + j].conj()) * 0.5);
        // K ρ with K = −iH − ½ΣγL†L, one column at a time.
        for j in 0..n {
            let col = &r.as_slice()[j * n..(j + 1) * n];
            let dst = &mut self.scratch.as_mut_slice()[j * n..(j + 1) * n];
            self.generator.apply_skew(t, col, dst);
            self.damping.mul_vec_add(C64::new(-1.0, 0.0), col, dst);
        }
        for j in 0..n {
            for i in 0..n {
                out[j * n + i] = self.scratch[(i, j)] + self.scratch[(j, i)].conj();
            }
        }
        for (rate, l) in &self.jumps {
            // L ρ L† = L (L ρ)† for Hermitian ρ.
            let lr = l.mul_dense(&r);
            let lrl = l.mul_dense(&lr.adjoint());
            for (o, v) in out.iter_mut().zip(lrl.iter()) {
                *o += v * *rate;
            }
        }
    }
}

/// `dρ/dt = −i[H(t), ρ] + Σ γ (L ρ L† − ½{L†L, ρ})` with the adaptive
/// integrator. Trace, Hermiticity and positivity are monitored.
pub fn propagate_lindblad(
    rho: &DensityMatrix,
    generator: &Generator,
    decays: &[Decay],
    t_final: f64,
    control: &StepControl,
) -> Result<PropagationResult<DensityMatrix>> {
    let layout = *rho.layout();
    if layout.dim() > DENSITY_DIM_LIMIT {
        return Err(Error::DimensionLimit { dim: layout.dim(), limit: DENSITY_DIM_LIMIT });
    }
    if *generator.layout() != layout {
        return Err(Error::LayoutMismatch);
    }
    if (rho.trace() - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::NotNormalized { norm: rho.trace().re });
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter { name: "t_final", reason: alloc::format!("must be finite and nonnegative ({t_final})") });
    }
    let mut liouv = Liouvillian::new(generator, decays)?;
    let times = control.grid(t_final);
    let mut rec = Recorder::new(&layout, control)?;
    rec.record(0.0, StateRef::Mixed(rho))?;
    let every = layout.dim() <= EIGEN_EVERY_SAMPLE;
    let mut min_eig = if every { rho.min_eigenvalue() } else { f64::INFINITY };
    let mut herm = rho.hermitian_defect();
    let mut drift = (1.0 - rho.trace().re).abs();
    let mut y: Vec<C64> = rho.matrix().as_slice().to_vec();
    let mut rk = Rk45::new(y.len(), control.tol, control.max_steps, initial_step(liouv.norm_bound(), control.tol, t_final));
    let mut current = rho.clone();
    for (idx, w) in times.windows(2).enumerate() {
        let mut f = |t: f64, x: &[C64], out: &mut [C64]| liouv.rhs(t, x, out);
        rk.advance(&mut f, w[0], w[1], &mut y)?;
        current = DensityMatrix::from_matrix(layout, DMatrix::from_column_slice(layout.dim(), layout.dim(), &y))?;
        drift = drift.max((1.0 - current.trace().re).abs());
        herm = herm.max(current.hermitian_defect());
        if every || idx + 2 == times.len() {
            min_eig = min_eig.min(current.min_eigenvalue());
        }
        rec.record(w[1], StateRef::Mixed(&current))?;
    }
    if min_eig == f64::INFINITY {
        min_eig = current.min_eigenvalue();
    }
    let (observables, max_leakage, mut warnings) = rec.finish();
    if min_eig < -1e-6 {
        warnings.push(alloc::format!("density matrix lost positivity (min eigenvalue {min_eig:e})"));
    }
    if drift > 1e-7 {
        warnings.push(alloc::format!("trace drifted by {drift:e}"));
    }
    Ok(PropagationResult {
        final_state: current,
        times,
        observables,
        norm_drift: drift,
        max_leakage,
        min_eigenvalue: Some(min_eig),
        hermitian_defect: herm,
        steps: rk.steps,
        warnings,
    })
}

/// Propagates in chunks of `chunk` until the Frobenius change of `ρ` over one
/// chunk falls below `tol`, or `max_chunks` is exhausted.
pub fn relax_to_steady_state(
    rho: &DensityMatrix,
    generator: &Generator,
    decays: &[Decay],
    chunk: f64,
    tol: f64,
    max_chunks: usize,
    control: &StepControl,
) -> Result<DensityMatrix> {
    let control = StepControl { samples: 2, ..*control };
    let mut current = rho.clone();
    for _ in 0..max_chunks {
        let next = propagate_lindblad(&current, generator, decays, chunk, &control)?.final_state;
        let change = (next.matrix() - current.matrix()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        current = next;
        if change <= tol {
            return Ok(current);
        }
    }
    Err(Error::NoConvergence("relaxation to the steady state"))
}
