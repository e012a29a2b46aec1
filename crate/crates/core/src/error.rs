use alloc::string::String;

use crate::fock::Mode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Hilbert-space dimension {dim} exceeds the configured limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("Hilbert-space dimension overflows usize")]
    DimensionOverflow,

    #[error("photon cutoff for mode a must be at least 1")]
    InvalidCutoff,

    #[error("mode {0:?} is absent from this layout")]
    ModeAbsent(Mode),

    #[error("atom index {index} out of range for {n_atoms} atoms")]
    AtomIndex { index: usize, n_atoms: usize },

    #[error("atomic level {0} out of range (levels are 0, 1, 2)")]
    AtomicLevel(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different Hilbert-space layouts")]
    LayoutMismatch,

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("detuning `{0}` is zero")]
    ZeroDetuning(&'static str),

    #[error("shifted two-photon detuning delta_k vanishes for atom {atom}")]
    ResonantAtom { atom: usize },

    #[error(
        "no root in expanded bracket [{lo}, {hi}] (residual signs {f_lo:+e} / {f_hi:+e})"
    )]
    NoRoot { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("matching-condition residual {relative:e} (relative to |delta~|) exceeds gate {gate:e}")]
    ConditionGate { relative: f64, gate: f64 },

    #[error("critical point Omega^2 = kappa_a kappa_b: output displacements diverge")]
    CriticalPoint,

    #[error("resolvent pole Omega^2 = alpha beta at omega = {omega}")]
    ResolventPole { omega: f64 },

    #[error("integrator gave up at t = {t} after {steps} steps")]
    StepLimit { t: f64, steps: usize },

    #[error("Fock-cutoff leakage {leakage:e} exceeds {limit:e}")]
    Leakage { leakage: f64, limit: f64 },

    #[error("frame generator must be diagonal")]
    NonDiagonalGenerator,

    #[error("initial state populates the eliminated level |0> (population {population:e})")]
    ExcitedPopulation { population: f64 },

    #[error("predicted photon number {predicted} leaves no headroom below cutoff {n_max}")]
    Truncation { predicted: f64, n_max: usize },

    #[error("|xi| = {magnitude} exceeds the configured maximum {max}")]
    SqueezeTooLarge { magnitude: f64, max: f64 },

    #[error("operation needs the atoms' |0> level to be unpopulated")]
    UnsupportedState,

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
