//! Full ladder dynamics against the ideal squeeze operator.
//!
//! Pictures: `H_I` and `H_II` act on `ψ_I`, the interaction picture of `H_0`.
//! `H_III` and both `H_IV` act on `ψ_III = e^{iAt} ψ_I`. With `e^{iV} ≈ 1` the
//! prediction is `ψ_III(τ) = U^ND(ξ)|init>` with `ξ = iΩτ`, i.e.
//! `ψ_I(τ) = e^{−iAτ} U^ND(ξ)|init>`. Removing `H_0` as well gives the
//! Schrödinger-picture form `e^{−iH̃_0τ} U^ND(ξ)|init>`; the `e^{−iH_0τ}` factor
//! is common to both sides and drops out of the fidelity.
//!
//! Every comparison is made in the `ψ_I` picture.

use alloc::vec::Vec;


use super::stats::{fidelity, quadrature_operators, quadrature_stats_with, QuadratureKind, StateRef};
use super::unitary::FrameEvolution;
use crate::error::{Error, Result};
use crate::fock::{number, HilbertLayout, Mode, StateVector};
use crate::hamiltonians::{frame_a_diagonal, HamiltonianSpec, Level};
use crate::params::{derive_effective, dispersive_design, regime_report, AtomSite, PhysicalParams, RegimeReport, DEFAULT_MARGIN};
use crate::squeeze::{apply_squeeze, SqueezeKind, SqueezeSpec};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonPoint {
    pub tau: f64,
    /// `1 − |<ψ_ref|ψ>|²`.
    pub infidelity: f64,
    /// Fock leakage of the propagated state.
    pub leakage: f64,
    /// Expected number of atoms in `|0>` in the propagated state.
    pub excited_population: f64,
    /// Quadrature variances and photon numbers of the propagated state.
    pub var_x: f64,
    pub var_y: f64,
    /// Smallest rotated-quadrature variance, independent of the phase of `ξ`.
    pub var_min: f64,
    pub n_a: f64,
    pub n_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub level: Level,
    pub omega_eff: C64,
    pub points: Vec<ComparisonPoint>,
    /// Regime checks at the largest `τ`; empty when every `τ` is zero.
    pub regime: RegimeReport,
    /// Set when a regime check failed. The numbers are still reported.
    pub flagged: bool,
}

fn initial_state(layout: &HilbertLayout, field: Option<&[C64]>) -> Result<StateVector> {
    let atoms = alloc::vec![[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]; layout.n_atoms()];
    match field {
        Some(f) => StateVector::product(layout, f, &atoms),
        None => StateVector::vacuum_with_atoms_in(layout, 2),
    }
}

/// `e^{−iAτ} U^ND(iΩτ) |init>` in the `ψ_I` picture.
pub fn effective_reference(
    params: &PhysicalParams,
    sites: &[AtomSite],
    init: &StateVector,
    tau: f64,
) -> Result<StateVector> {
    let layout = *init.layout();
    layout.check_mode(Mode::B)?;
    let model = derive_effective(params, sites)?;
    let xi = C64::new(0.0, tau) * model.omega_eff;
    let spec = SqueezeSpec::with_max(xi, SqueezeKind::NonDegenerate, f64::INFINITY)?;
    let mut out = apply_squeeze(init, &spec)?;
    out.rotate_diagonal(&frame_a_diagonal(&model, &layout), tau);
    Ok(out)
}

/// [`compare_level`] for the full interaction-picture Hamiltonian.
pub fn compare_full_vs_effective(
    params: &PhysicalParams,
    sites: &[AtomSite],
    layout: &HilbertLayout,
    tau_grid: &[f64],
    field: Option<&[C64]>,
) -> Result<Comparison> {
    compare_level(Level::I, params, sites, layout, tau_grid, field)
}

/// Propagates `|field> ⊗ Π_k|2>_k` (vacuum field by default) under the
/// given rung exactly, by diagonalizing it in its static frame, and reports
/// the infidelity against [`effective_reference`] at every `τ`.
pub fn compare_level(
    level: Level,
    params: &PhysicalParams,
    sites: &[AtomSite],
    layout: &HilbertLayout,
    tau_grid: &[f64],
    field: Option<&[C64]>,
) -> Result<Comparison> {
    layout.check_mode(Mode::B)?;
    if let Some(&bad) = tau_grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter { name: "tau", reason: alloc::format!("must be finite and nonnegative ({bad})") });
    }
    let spec = HamiltonianSpec::with_condition_gate(level, *params, sites.to_vec(), *layout, f64::INFINITY)?;
    let model = spec.model()?;
    let init = initial_state(layout, field)?;
    let evo = FrameEvolution::new(&spec.generator()?, &spec.static_frame()?)?;
    let a_diag = frame_a_diagonal(&model, layout);
    let (x_op, y_op) = quadrature_operators(layout, QuadratureKind::for_layout(layout))?;
    let (n_a_op, n_b_op) = (number(layout, Mode::A)?, number(layout, Mode::B)?);
    let mut points = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let mut psi = evo.evolve(&init, tau)?;
        if level.in_a_frame() {
            psi.rotate_diagonal(&a_diag, tau);
        }
        let reference = effective_reference(params, sites, &init, tau)?;
        let f = fidelity(&psi, &reference)?;
        let q = quadrature_stats_with(StateRef::Pure(&psi), &x_op, &y_op)?;
        points.push(ComparisonPoint {
            tau,
            infidelity: (1.0 - f).max(0.0),
            leakage: psi.max_leakage(),
            excited_population: psi.level_population(0),
            var_x: q.var_x,
            var_y: q.var_y,
            var_min: q.var_min,
            n_a: psi.expectation(&n_a_op)?.re,
            n_b: psi.expectation(&n_b_op)?.re,
        });
    }
    let t_max = tau_grid.iter().copied().fold(0.0, f64::max);
    let regime = if t_max > 0.0 { regime_report(params, sites, t_max, DEFAULT_MARGIN)? } else { RegimeReport::default() };
    let flagged = !regime.ok();
    Ok(Comparison { level, omega_eff: model.omega_eff, points, regime, flagged })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginPoint {
    pub margin: f64,
    pub n_atoms: usize,
    pub tau: f64,
    pub omega_eff: C64,
    pub infidelity: f64,
    pub leakage: f64,
    pub excited_population: f64,
    pub regime_ok: bool,
}

/// Full-versus-effective infidelity of the dispersive design family at each
/// margin, at the `τ` that gives `|ξ| = xi_target`.
pub fn margin_ladder(margins: &[f64], n_atoms: usize, xi_target: f64, n_max: usize) -> Result<Vec<MarginPoint>> {
    let layout = HilbertLayout::new(n_max, n_max, n_atoms)?;
    margins
        .iter()
        .map(|&margin| {
            let d = dispersive_design(margin, n_atoms, xi_target)?;
            let tau = d.params.tau;
            let c = compare_full_vs_effective(&d.params, &d.sites, &layout, &[tau], None)?;
            let p = c.points[0];
            let regime_ok = regime_report(&d.params, &d.sites, tau, margin)?.ok();
            Ok(MarginPoint {
                margin,
                n_atoms,
                tau,
                omega_eff: d.omega_eff,
                infidelity: p.infidelity,
                leakage: p.leakage,
                excited_population: p.excited_population,
                regime_ok,
            })
        })
        .collect()
}
