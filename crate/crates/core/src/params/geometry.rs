use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::C64;

/// Cylindrical coordinates of an atom; `z` along the cavity axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub z: f64,
    pub rho: f64,
    pub phi: f64,
}

/// Transverse shape of the laser beams.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LaserProfile {
    /// Plane waves, constant intensity.
    #[default]
    Homogeneous,
    /// Gaussian envelope `exp(−(y² + (z − z_c)²)/d²)` of the plane waves
    /// travelling along `x`, with `d` the beam width.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeFunction {
    CavityA,
    CavityB,
    Laser1,
    Laser2,
}

/// Cavity and laser geometry. Lengths and wavenumbers share one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    /// Axial wavenumbers of the two cavity modes.
    pub q_a: f64,
    pub q_b: f64,
    /// Orbital angular momentum index; mode a carries `+m`, mode b `−m`.
    pub m: i32,
    /// Cavity mode waist `w`.
    pub waist: f64,
    /// Laser wavenumbers `k_1`, `k_2` (counter-propagating along `x`).
    pub k_1: f64,
    pub k_2: f64,
    pub laser_profile: LaserProfile,
    /// Laser beam width `d`, also the axial length of the atomic cloud.
    pub beam_width: f64,
    /// Axial centre of the cloud and of Gaussian laser beams.
    pub z_center: f64,
}

impl ModeGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("q_a", self.q_a),
            ("q_b", self.q_b),
            ("waist", self.waist),
            ("k_1", self.k_1),
            ("k_2", self.k_2),
            ("beam_width", self.beam_width),
            ("z_center", self.z_center),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: alloc::format!("not finite ({v})") });
            }
        }
        if self.waist <= 0.0 {
            return Err(Error::InvalidParameter { name: "waist", reason: alloc::format!("must be positive ({})", self.waist) });
        }
        if self.beam_width <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "beam_width",
                reason: alloc::format!("must be positive ({})", self.beam_width),
            });
        }
        Ok(())
    }
}

/// `f(ρ) = exp(−ρ²/w²)`.
pub fn radial_profile(geom: &ModeGeometry, rho: f64) -> f64 {
    (-(rho * rho) / (geom.waist * geom.waist)).exp()
}

/// Complex mode function of `which` at `pos`.
///
/// Cavity modes are `sin(q z) f(ρ) e^{±imφ}`; lasers are `e^{+ik_1x}` and
/// `e^{−ik_2x}` times the chosen envelope.
pub fn mode_amplitude(geom: &ModeGeometry, pos: Position, which: ModeFunction) -> C64 {
    let x = pos.rho * pos.phi.cos();
    let envelope = || match geom.laser_profile {
        LaserProfile::Homogeneous => 1.0,
        LaserProfile::Gaussian => {
            let y = pos.rho * pos.phi.sin();
            let dz = pos.z - geom.z_center;
            (-(y * y + dz * dz) / (geom.beam_width * geom.beam_width)).exp()
        }
    };
    let m = f64::from(geom.m);
    match which {
        ModeFunction::CavityA => C64::from_polar((geom.q_a * pos.z).sin() * radial_profile(geom, pos.rho), m * pos.phi),
        ModeFunction::CavityB => C64::from_polar((geom.q_b * pos.z).sin() * radial_profile(geom, pos.rho), -m * pos.phi),
        ModeFunction::Laser1 => C64::from_polar(envelope(), geom.k_1 * x),
        ModeFunction::Laser2 => C64::from_polar(envelope(), -geom.k_2 * x),
    }
}

/// One atom: its position and the four mode functions evaluated there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSite {
    pub position: Position,
    pub u_a: C64,
    pub u_b: C64,
    pub v_1: C64,
    pub v_2: C64,
}

impl AtomSite {
    /// All mode functions equal to one.
    pub fn uniform() -> Self {
        let one = C64::new(1.0, 0.0);
        Self { position: Position::default(), u_a: one, u_b: one, v_1: one, v_2: one }
    }

    pub fn at(geom: &ModeGeometry, position: Position) -> Self {
        Self {
            position,
            u_a: mode_amplitude(geom, position, ModeFunction::CavityA),
            u_b: mode_amplitude(geom, position, ModeFunction::CavityB),
            v_1: mode_amplitude(geom, position, ModeFunction::Laser1),
            v_2: mode_amplitude(geom, position, ModeFunction::Laser2),
        }
    }
}

pub fn uniform_sites(n: usize) -> Vec<AtomSite> {
    alloc::vec![AtomSite::uniform(); n]
}

/// `n` atoms drawn uniformly from the cylinder of radius `w` and length `d`
/// centred at `z_center`, reproducibly from `seed`.
pub fn random_sites(geom: &ModeGeometry, n: usize, seed: u64) -> Result<Vec<AtomSite>> {
    geom.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let rho = geom.waist * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            let z = geom.z_center + geom.beam_width * (rng.random::<f64>() - 0.5);
            AtomSite::at(geom, Position { z, rho, phi })
        })
        .collect())
}

/// Phase-matching figures of merit for the cloud geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceReport {
    /// `d |q_a − q_b|`.
    pub axial: f64,
    /// `w |ν_1 − ν_2| / c` with `ν` angular frequencies.
    pub laser_angular: f64,
    /// `w |ν_1 − ν_2| / (2π c)`, for `ν` read as ordinary frequencies.
    pub laser_ordinary: f64,
    pub threshold: f64,
    /// Both `axial` and `laser_angular` below `threshold`.
    pub ok: bool,
}

pub const DEFAULT_COHERENCE_THRESHOLD: f64 = 0.1;

/// Checks the dephasing bounds `d|q_a − q_b| ≪ 1` and `w|ν_1 − ν_2|/c ≪ 1`.
/// `nu_1`, `nu_2` and `c` must use matching units.
pub fn coherence_report(geom: &ModeGeometry, nu_1: f64, nu_2: f64, c: f64, threshold: f64) -> Result<CoherenceReport> {
    geom.validate()?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter { name: "c", reason: alloc::format!("must be positive ({c})") });
    }
    let axial = geom.beam_width * (geom.q_a - geom.q_b).abs();
    let laser_angular = geom.waist * (nu_1 - nu_2).abs() / c;
    let laser_ordinary = laser_angular / (2.0 * PI);
    Ok(CoherenceReport {
        axial,
        laser_angular,
        laser_ordinary,
        threshold,
        ok: axial < threshold && laser_angular < threshold,
    })
}
