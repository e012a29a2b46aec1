//! Time propagation, fidelities, quadrature statistics and the
//! full-versus-effective comparison harness.
//!
//! Every propagation is single threaded with a fixed operation order, so
//! results are bit-identical for identical inputs. Parallelism belongs to the
//! caller (one propagation per task).

mod compare;
mod lindblad;
mod rk45;
mod stats;
mod unitary;

use alloc::string::String;
use alloc::vec::Vec;

pub use compare::{
    compare_full_vs_effective, compare_level, effective_reference, margin_ladder, Comparison, ComparisonPoint,
    MarginPoint,
};
pub use lindblad::{
    cavity_decay, propagate_lindblad, relax_to_steady_state, spontaneous_emission, Decay, DENSITY_DIM_LIMIT,
};
pub use stats::{
    fidelity, quadrature_operators, quadrature_stats, quadrature_stats_with, QuadratureKind, QuadratureStats, StateRef,
};
pub use unitary::{propagate_unitary, FrameEvolution, EXACT_DIM_LIMIT};

use crate::error::Result;
use crate::fock::{number, HilbertLayout, Mode, OperatorMatrix};

/// Integrator and diagnostics settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Local error per step, relative to the state norm.
    pub tol: f64,
    pub max_steps: usize,
    /// Points on the uniform output grid, endpoints included.
    pub samples: usize,
    /// Leakage above this adds a warning.
    pub leakage_warn: f64,
    /// Leakage above this aborts the run.
    pub leakage_limit: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { tol: 1e-9, max_steps: 20_000_000, samples: 11, leakage_warn: 1e-6, leakage_limit: 1e-3 }
    }
}

impl StepControl {
    pub(crate) fn grid(&self, t_final: f64) -> Vec<f64> {
        if t_final == 0.0 || self.samples < 2 {
            return if t_final == 0.0 { alloc::vec![0.0] } else { alloc::vec![0.0, t_final] };
        }
        let n = self.samples - 1;
        (0..=n).map(|i| if i == n { t_final } else { t_final * i as f64 / n as f64 }).collect()
    }
}

/// Observable series sampled on [`PropagationResult::times`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Observables {
    pub n_a: Vec<f64>,
    pub n_b: Vec<f64>,
    pub var_x: Vec<f64>,
    pub var_y: Vec<f64>,
    /// Population of the top two Fock levels, worst mode.
    pub leakage: Vec<f64>,
    /// Expected number of atoms in `|0>`.
    pub excited_population: Vec<f64>,
}

impl Observables {
    /// `(name, series)` pairs in a fixed order.
    pub fn named(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("n_a", &self.n_a),
            ("n_b", &self.n_b),
            ("var_x", &self.var_x),
            ("var_y", &self.var_y),
            ("leakage", &self.leakage),
            ("excited_population", &self.excited_population),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult<S> {
    pub final_state: S,
    pub times: Vec<f64>,
    pub observables: Observables,
    /// `max |1 − ‖ψ‖|` for pure runs, `max |1 − Tr ρ|` for mixed runs.
    pub norm_drift: f64,
    pub max_leakage: f64,
    /// Smallest sampled eigenvalue of `ρ`; `None` for pure runs.
    pub min_eigenvalue: Option<f64>,
    /// Largest sampled `|ρ − ρ†|` entry; zero for pure runs.
    pub hermitian_defect: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

/// Operators recorded at every sample.
pub(crate) struct Recorder {
    n_a: OperatorMatrix,
    n_b: Option<OperatorMatrix>,
    x: OperatorMatrix,
    y: OperatorMatrix,
    obs: Observables,
    leakage_warn: f64,
    leakage_limit: f64,
    max_leakage: f64,
    warnings: Vec<String>,
}

impl Recorder {
    pub(crate) fn new(layout: &HilbertLayout, control: &StepControl) -> Result<Self> {
        let (x, y) = quadrature_operators(layout, QuadratureKind::for_layout(layout))?;
        Ok(Self {
            n_a: number(layout, Mode::A)?,
            n_b: if layout.has_mode_b() { Some(number(layout, Mode::B)?) } else { None },
            x,
            y,
            obs: Observables::default(),
            leakage_warn: control.leakage_warn,
            leakage_limit: control.leakage_limit,
            max_leakage: 0.0,
            warnings: Vec::new(),
        })
    }

    pub(crate) fn record(&mut self, t: f64, state: StateRef<'_>) -> Result<()> {
        let q = quadrature_stats_with(state, &self.x, &self.y)?;
        self.obs.n_a.push(state.expectation(&self.n_a)?.re);
        self.obs.n_b.push(match &self.n_b {
            Some(op) => state.expectation(op)?.re,
            None => 0.0,
        });
        self.obs.var_x.push(q.var_x);
        self.obs.var_y.push(q.var_y);
        let (leak, excited) = match state {
            StateRef::Pure(s) => (s.max_leakage(), s.level_population(0)),
            StateRef::Mixed(r) => (r.max_leakage(), r.level_population(0)),
        };
        self.obs.leakage.push(leak);
        self.obs.excited_population.push(excited);
        if leak > self.leakage_limit {
            return Err(crate::Error::Leakage { leakage: leak, limit: self.leakage_limit });
        }
        if leak > self.leakage_warn && self.max_leakage <= self.leakage_warn {
            self.warnings.push(alloc::format!("Fock leakage {leak:e} at t = {t} exceeds {:e}", self.leakage_warn));
        }
        self.max_leakage = self.max_leakage.max(leak);
        Ok(())
    }

    pub(crate) fn finish(self) -> (Observables, f64, Vec<String>) {
        (self.obs, self.max_leakage, self.warnings)
    }
}

#[cfg(test)]
mod tests;
