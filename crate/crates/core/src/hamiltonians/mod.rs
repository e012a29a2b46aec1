//! The reduction ladder `H_I → H_II → H_III → H_IV`, all on one layout with
//! atomic level `|0>` kept, plus the diagonal frame generators.
//!
//! | level        | picture                                   |
//! |--------------|-------------------------------------------|
//! | `I`, `II`    | interaction picture of `H_0`              |
//! | `III`, `IV*` | additionally rotated by `e^{iAt}`         |

mod frames;
mod generator;

use alloc::vec;
use alloc::vec::Vec;

pub use frames::{frame_generator_a, frame_h0_tilde, free_hamiltonian, transform_frame};
pub(crate) use frames::{diagonal_from_fn, frame_a_diagonal};
#[cfg(test)]
pub(crate) use frames::diagonal_operator;
pub use generator::{Generator, RotatingTerm};

use crate::error::{Error, Result};
use crate::fock::{annihilation, atomic_op, number, CsrMatrix, HilbertLayout, Mode, OperatorMatrix};
use crate::params::{derive_effective, AtomSite, EffectiveModel, PhysicalParams};
use crate::C64;

/// Default gate on `|LHS − RHS|/|δ̃|` for building the reduced Hamiltonian.
pub const DEFAULT_CONDITION_GATE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Full three-level interaction-picture Hamiltonian.
    I,
    /// Level `|0>` adiabatically eliminated.
    II,
    /// `II` rotated by the frame generator `A`.
    III,
    /// Time-averaged, atoms still dynamical.
    IvFull,
    /// `Ω a†b† + Ω* ba`.
    IvReduced,
}

impl Level {
    pub const ALL: [Level; 5] = [Level::I, Level::II, Level::III, Level::IvFull, Level::IvReduced];

    /// Levels whose states are rotated by `e^{iAt}` relative to `I`/`II`.
    pub fn in_a_frame(self) -> bool {
        matches!(self, Level::III | Level::IvFull | Level::IvReduced)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    level: Level,
    params: PhysicalParams,
    sites: Vec<AtomSite>,
    layout: HilbertLayout,
    condition_gate: f64,
}

impl HamiltonianSpec {
    pub fn new(level: Level, params: PhysicalParams, sites: Vec<AtomSite>, layout: HilbertLayout) -> Result<Self> {
        Self::with_condition_gate(level, params, sites, layout, DEFAULT_CONDITION_GATE)
    }

    pub fn with_condition_gate(
        level: Level,
        params: PhysicalParams,
        sites: Vec<AtomSite>,
        layout: HilbertLayout,
        condition_gate: f64,
    ) -> Result<Self> {
        frames::check_sites(&layout, &sites)?;
        layout.check_mode(Mode::B)?;
        let spec = Self { level, params, sites, layout, condition_gate };
        let model = spec.model()?;
        if level == Level::IvReduced && model.condition.relative > condition_gate {
            return Err(Error::ConditionGate { relative: model.condition.relative, gate: condition_gate });
        }
        Ok(spec)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn sites(&self) -> &[AtomSite] {
        &self.sites
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn model(&self) -> Result<EffectiveModel> {
        derive_effective(&self.params, &self.sites)
    }

    /// The generator as a function of time.
    pub fn generator(&self) -> Result<Generator> {
        let model = self.model()?;
        let ops = FieldOps::new(&self.layout)?;
        match self.level {
            Level::I => level_i(&self.params, &model, &self.layout, &ops),
            Level::II => level_ii(&self.params, &model, &self.layout, &ops),
            Level::III => level_iii(&self.params, &model, &self.layout, &ops),
            Level::IvFull => level_iv_full(&self.params, &model, &self.layout, &ops),
            Level::IvReduced => level_iv_reduced(&model, &self.layout, &ops),
        }
    }

    /// Diagonal `F` such that `e^{iFt} H(t) e^{−iFt} − F` is time independent.
    pub fn static_frame(&self) -> Result<Vec<f64>> {
        let p = &self.params;
        let model = self.model()?;
        let frame = match self.level {
            Level::I => {
                let phi = [p.detuning_1, 0.0, p.detuning_1 - p.detuning_2];
                let (fa, fb) = (p.detuning_2 - p.cavity_detuning_1, p.detuning_1 - p.cavity_detuning_2);
                diagonal_from_fn(&self.layout, |na, nb, levels| {
                    fa * na as f64 + fb * nb as f64 + levels.iter().map(|&l| phi[l]).sum::<f64>()
                })
            }
            Level::II => diagonal_from_fn(&self.layout, |na, nb, _| p.two_photon_1 * na as f64 + p.two_photon_2 * nb as f64),
            Level::III => diagonal_from_fn(&self.layout, |_, _, levels| {
                levels.iter().enumerate().filter(|(_, &l)| l == 1).map(|(k, _)| model.delta_k[k]).sum::<f64>()
            }),
            Level::IvFull | Level::IvReduced => vec![0.0; self.layout.dim()],
        };
        Ok(frame)
    }

    /// The Hermitian generator at time `t ≥ 0`.
    pub fn build(&self, t: f64) -> Result<OperatorMatrix> {
        build(self, t)
    }
}

/// Builds the Hamiltonian of `spec` at time `t`.
pub fn build(spec: &HamiltonianSpec, t: f64) -> Result<OperatorMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter { name: "t", reason: alloc::format!("must be finite and nonnegative ({t})") });
    }
    let h = spec.generator()?.at(t);
    let op = OperatorMatrix::new(*h.layout(), h.into_matrix(), true)?;
    Ok(op)
}

struct FieldOps {
    a: CsrMatrix,
    ad: CsrMatrix,
    b: CsrMatrix,
    bd: CsrMatrix,
    na: CsrMatrix,
    nb: CsrMatrix,
}

impl FieldOps {
    fn new(layout: &HilbertLayout) -> Result<Self> {
        let a = annihilation(layout, Mode::A)?.into_matrix();
        let b = annihilation(layout, Mode::B)?.into_matrix();
        Ok(Self {
            ad: a.adjoint(),
            bd: b.adjoint(),
            a,
            b,
            na: number(layout, Mode::A)?.into_matrix(),
            nb: number(layout, Mode::B)?.into_matrix(),
        })
    }
}

fn ket_bra(layout: &HilbertLayout, k: usize, bra: usize, ket: usize) -> Result<CsrMatrix> {
    Ok(atomic_op(layout, k, bra, ket)?.into_matrix())
}

fn axpy(acc: &mut CsrMatrix, c: C64, m: &CsrMatrix) {
    *acc = acc.lin_comb(C64::new(1.0, 0.0), m, c);
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn level_i(p: &PhysicalParams, model: &EffectiveModel, layout: &HilbertLayout, ops: &FieldOps) -> Result<Generator> {
    let dim = layout.dim();
    let (mut t1, mut t2, mut ta, mut tb) =
        (CsrMatrix::zeros(dim), CsrMatrix::zeros(dim), CsrMatrix::zeros(dim), CsrMatrix::zeros(dim));
    for (k, c) in model.couplings.iter().enumerate() {
        let p01 = ket_bra(layout, k, 0, 1)?;
        let p02 = ket_bra(layout, k, 0, 2)?;
        axpy(&mut t1, c.rabi_1, &p01);
        axpy(&mut t2, c.rabi_2, &p02);
        axpy(&mut ta, c.g_a, &p02.matmul(&ops.a));
        axpy(&mut tb, c.g_b, &p01.matmul(&ops.b));
    }
    Generator::new(
        *layout,
        CsrMatrix::zeros(dim),
        vec![(p.detuning_1, t1), (p.detuning_2, t2), (p.cavity_detuning_1, ta), (p.cavity_detuning_2, tb)],
    )
}

fn level_ii(p: &PhysicalParams, model: &EffectiveModel, layout: &HilbertLayout, ops: &FieldOps) -> Result<Generator> {
    let dim = layout.dim();
    let mut constant = CsrMatrix::zeros(dim);
    let (mut lower_a, mut lower_b) = (CsrMatrix::zeros(dim), CsrMatrix::zeros(dim));
    for (k, c) in model.couplings.iter().enumerate() {
        let p1 = ket_bra(layout, k, 1, 1)?;
        let p2 = ket_bra(layout, k, 2, 2)?;
        let sm = ket_bra(layout, k, 2, 1)?;
        axpy(&mut constant, re(c.g_b.norm_sqr() / p.cavity_detuning_2), &ops.nb.matmul(&p1));
        axpy(&mut constant, re(model.stark_1[k]), &p1);
        axpy(&mut constant, re(c.g_a.norm_sqr() / p.cavity_detuning_1), &ops.na.matmul(&p2));
        axpy(&mut constant, re(model.stark_2[k]), &p2);
        axpy(&mut lower_a, c.rabi_1 * c.g_a.conj() / p.detuning_1, &ops.ad.matmul(&sm));
        axpy(&mut lower_b, c.g_b * c.rabi_2.conj() / p.detuning_2, &ops.b.matmul(&sm));
    }
    Generator::new(*layout, constant, vec![(p.two_photon_1, lower_a), (-p.two_photon_2, lower_b)])
}

fn stark_field_terms(model: &EffectiveModel, layout: &HilbertLayout, ops: &FieldOps, cavity: (f64, f64)) -> Result<CsrMatrix> {
    let (dt1, dt2) = cavity;
    let dim = layout.dim();
    let mut constant = ops.na.add(&ops.nb).scale(re(-model.delta_tilde));
    for (k, c) in model.couplings.iter().enumerate() {
        let p1 = ket_bra(layout, k, 1, 1)?;
        let p2 = ket_bra(layout, k, 2, 2)?;
        axpy(&mut constant, re(c.g_a.norm_sqr() / dt1), &ops.na.matmul(&p2));
        axpy(&mut constant, re(c.g_b.norm_sqr() / dt2), &ops.nb.matmul(&p1));
    }
    debug_assert_eq!(constant.dim(), dim);
    Ok(constant)
}

fn level_iii(p: &PhysicalParams, model: &EffectiveModel, layout: &HilbertLayout, ops: &FieldOps) -> Result<Generator> {
    let constant = stark_field_terms(model, layout, ops, (p.cavity_detuning_1, p.cavity_detuning_2))?;
    let mut terms = Vec::with_capacity(model.n_atoms());
    for k in 0..model.n_atoms() {
        let sp = ket_bra(layout, k, 1, 2)?;
        let field = ops.a.lin_comb(model.omega_tilde_a[k], &ops.bd, model.omega_tilde_b[k].conj());
        terms.push((model.delta_k[k], field.matmul(&sp)));
    }
    Generator::new(*layout, constant, terms)
}

fn level_iv_full(p: &PhysicalParams, model: &EffectiveModel, layout: &HilbertLayout, ops: &FieldOps) -> Result<Generator> {
    let mut h = stark_field_terms(model, layout, ops, (p.cavity_detuning_1, p.cavity_detuning_2))?;
    let adbd = ops.ad.matmul(&ops.bd);
    let ba = ops.b.matmul(&ops.a);
    for k in 0..model.n_atoms() {
        let dk = model.delta_k[k];
        let (ta, tb) = (model.omega_tilde_a[k], model.omega_tilde_b[k]);
        let p1 = ket_bra(layout, k, 1, 1)?;
        let p2 = ket_bra(layout, k, 2, 2)?;
        let sz = p1.sub(&p2);
        axpy(&mut h, re(tb.norm_sqr() / dk), &p2);
        axpy(&mut h, re(-ta.norm_sqr() / dk), &p1);
        let mut field = ops.na.scale(re(ta.norm_sqr() / dk));
        axpy(&mut field, re(tb.norm_sqr() / dk), &ops.nb);
        axpy(&mut field, ta.conj() * tb.conj() / dk, &adbd);
        axpy(&mut field, ta * tb / dk, &ba);
        axpy(&mut h, re(-1.0), &sz.matmul(&field));
    }
    Generator::constant(*layout, h)
}

fn level_iv_reduced(model: &EffectiveModel, layout: &HilbertLayout, ops: &FieldOps) -> Result<Generator> {
    let h = ops.ad.matmul(&ops.bd).lin_comb(model.omega_eff, &ops.b.matmul(&ops.a), model.omega_eff.conj());
    Generator::constant(*layout, h)
}

#[cfg(test)]
mod tests;
