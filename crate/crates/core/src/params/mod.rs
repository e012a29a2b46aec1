//! Physical parameters, mode geometry and the quantities derived from them.

mod effective;
mod geometry;
mod noise;
mod physical;
mod regime;
mod solver;

pub use effective::{
    atom_couplings, condition_residual, derive_effective, squeeze_parameter, AtomCouplings, ConditionReport,
    EffectiveModel,
};
pub use geometry::{
    coherence_report, mode_amplitude, radial_profile, random_sites, uniform_sites, AtomSite, CoherenceReport,
    LaserProfile, ModeFunction, ModeGeometry, Position, DEFAULT_COHERENCE_THRESHOLD,
};
pub use noise::{dissipation_estimate, max_squeeze, max_squeeze_ratio, MaxSqueeze, NoiseEstimate};
pub use physical::{AtomicLevels, DetuningSpec, PhysicalParams, IDENTITY_TOL};
pub use regime::{regime_report, Hierarchy, RegimeCheck, RegimeReport, DEFAULT_MARGIN};
pub use solver::{dispersive_design, solve_condition, FreeParameter, LadderDesign, SOLVE_TOL};
