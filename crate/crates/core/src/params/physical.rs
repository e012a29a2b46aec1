use alloc::format;

use num_traits::Float;

use crate::error::{Error, Result};

/// Relative tolerance for the redundant-field identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Every frequency, coupling and rate of the model, in units of a reference
/// coupling `g` (angular frequency, `ħ = 1`).
///
/// Detunings are stored redundantly alongside the bare frequencies they are
/// built from; [`PhysicalParams::validate`] checks
///
/// * `Δ_i = ω_i − ω_0 + ν_i`
/// * `Δ̃_1 = ω_2 − ω_0 + ω_a`, `Δ̃_2 = ω_1 − ω_0 + ω_b`
/// * `δ_i = Δ_i − Δ̃_i`
///
/// Use the `with_*` setters to change a detuning while keeping the others
/// consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Cavity vacuum Rabi couplings `g_a`, `g_b`.
    pub g_a: f64,
    pub g_b: f64,
    /// Classical laser amplitudes `Ω_1` (drives `|0>↔|1>`) and `Ω_2` (`|0>↔|2>`).
    pub rabi_1: f64,
    pub rabi_2: f64,
    /// Cavity mode frequencies.
    pub omega_a: f64,
    pub omega_b: f64,
    /// Bohr frequencies of levels `|0>`, `|1>`, `|2>`.
    pub omega_0: f64,
    pub omega_1: f64,
    pub omega_2: f64,
    /// Laser frequencies.
    pub nu_1: f64,
    pub nu_2: f64,
    /// Raman detunings `Δ_1`, `Δ_2`.
    pub detuning_1: f64,
    pub detuning_2: f64,
    /// Cavity detunings `Δ̃_1` (mode a), `Δ̃_2` (mode b).
    pub cavity_detuning_1: f64,
    pub cavity_detuning_2: f64,
    /// Two-photon detunings `δ_i = Δ_i − Δ̃_i`.
    pub two_photon_1: f64,
    pub two_photon_2: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    /// Single-atom spontaneous-emission rate.
    pub gamma: f64,
    /// Interaction time.
    pub tau: f64,
    /// Absolute value of `g` in rad/s, when physical units are wanted.
    pub g_scale: Option<f64>,
}

/// Bohr frequencies of the three atomic levels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomicLevels {
    pub omega_0: f64,
    pub omega_1: f64,
    pub omega_2: f64,
}

/// The independent inputs from which a consistent [`PhysicalParams`] is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningSpec {
    pub g_a: f64,
    pub g_b: f64,
    pub rabi_1: f64,
    pub rabi_2: f64,
    pub detuning_1: f64,
    pub detuning_2: f64,
    pub two_photon_1: f64,
    pub two_photon_2: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub gamma: f64,
    pub tau: f64,
    pub levels: AtomicLevels,
    pub g_scale: Option<f64>,
}

impl Default for DetuningSpec {
    fn default() -> Self {
        Self {
            g_a: 1.0,
            g_b: 1.0,
            rabi_1: 0.0,
            rabi_2: 0.0,
            detuning_1: 1.0,
            detuning_2: 2.0,
            two_photon_1: 0.0,
            two_photon_2: 0.0,
            kappa_a: 0.0,
            kappa_b: 0.0,
            gamma: 0.0,
            tau: 0.0,
            levels: AtomicLevels::default(),
            g_scale: None,
        }
    }
}

impl PhysicalParams {
    /// Builds a consistent parameter set; cavity and laser frequencies follow
    /// from the detunings and the atomic level energies.
    pub fn from_detunings(spec: DetuningSpec) -> Result<Self> {
        let AtomicLevels { omega_0, omega_1, omega_2 } = spec.levels;
        let cavity_detuning_1 = spec.detuning_1 - spec.two_photon_1;
        let cavity_detuning_2 = spec.detuning_2 - spec.two_photon_2;
        let p = Self {
            g_a: spec.g_a,
            g_b: spec.g_b,
            rabi_1: spec.rabi_1,
            rabi_2: spec.rabi_2,
            omega_a: cavity_detuning_1 - omega_2 + omega_0,
            omega_b: cavity_detuning_2 - omega_1 + omega_0,
            omega_0,
            omega_1,
            omega_2,
            nu_1: spec.detuning_1 - omega_1 + omega_0,
            nu_2: spec.detuning_2 - omega_2 + omega_0,
            detuning_1: spec.detuning_1,
            detuning_2: spec.detuning_2,
            cavity_detuning_1,
            cavity_detuning_2,
            two_photon_1: spec.two_photon_1,
            two_photon_2: spec.two_photon_2,
            kappa_a: spec.kappa_a,
            kappa_b: spec.kappa_b,
            gamma: spec.gamma,
            tau: spec.tau,
            g_scale: spec.g_scale,
        };
        p.validate()?;
        Ok(p)
    }

    /// The worked example: `Ω_k1 = 100g`, `Ω_k2 = 10g`, `Δ_1 = 10⁴g`,
    /// `Δ_2 = 2Δ_1`, `g_a = g_b = g`, `δ_1 = −3g/400`, `δ_2 = −g/80`.
    pub fn rubidium_example() -> Self {
        Self::from_detunings(DetuningSpec {
            rabi_1: 100.0,
            rabi_2: 10.0,
            detuning_1: 1e4,
            detuning_2: 2e4,
            two_photon_1: -3.0 / 400.0,
            two_photon_2: -1.0 / 80.0,
            ..DetuningSpec::default()
        })
        .expect("example parameters are consistent")
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("rabi_1", self.rabi_1),
            ("rabi_2", self.rabi_2),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("omega_0", self.omega_0),
            ("omega_1", self.omega_1),
            ("omega_2", self.omega_2),
            ("nu_1", self.nu_1),
            ("nu_2", self.nu_2),
            ("detuning_1", self.detuning_1),
            ("detuning_2", self.detuning_2),
            ("cavity_detuning_1", self.cavity_detuning_1),
            ("cavity_detuning_2", self.cavity_detuning_2),
            ("two_photon_1", self.two_photon_1),
            ("two_photon_2", self.two_photon_2),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("gamma", self.gamma),
            ("tau", self.tau),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("not finite ({v})") });
            }
        }
        for (name, v) in [("kappa_a", self.kappa_a), ("kappa_b", self.kappa_b), ("gamma", self.gamma), ("tau", self.tau)] {
            if v < 0.0 {
                return Err(Error::InvalidParameter { name, reason: format!("must be nonnegative ({v})") });
            }
        }
        if let Some(s) = self.g_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter { name: "g_scale", reason: format!("must be positive ({s})") });
            }
        }
        for (name, v) in [
            ("detuning_1", self.detuning_1),
            ("detuning_2", self.detuning_2),
            ("cavity_detuning_1", self.cavity_detuning_1),
            ("cavity_detuning_2", self.cavity_detuning_2),
        ] {
            if v == 0.0 {
                return Err(Error::ZeroDetuning(name));
            }
        }
        let checks = [
            ("two_photon_1", self.two_photon_1, self.detuning_1 - self.cavity_detuning_1, self.detuning_1),
            ("two_photon_2", self.two_photon_2, self.detuning_2 - self.cavity_detuning_2, self.detuning_2),
            ("detuning_1", self.detuning_1, self.omega_1 - self.omega_0 + self.nu_1, self.omega_0.abs() + self.nu_1.abs()),
            ("detuning_2", self.detuning_2, self.omega_2 - self.omega_0 + self.nu_2, self.omega_0.abs() + self.nu_2.abs()),
            (
                "cavity_detuning_1",
                self.cavity_detuning_1,
                self.omega_2 - self.omega_0 + self.omega_a,
                self.omega_0.abs() + self.omega_a.abs(),
            ),
            (
                "cavity_detuning_2",
                self.cavity_detuning_2,
                self.omega_1 - self.omega_0 + self.omega_b,
                self.omega_0.abs() + self.omega_b.abs(),
            ),
        ];
        for (name, stored, derived, scale) in checks {
            let scale = scale.abs().max(stored.abs()).max(derived.abs()).max(f64::MIN_POSITIVE);
            if (stored - derived).abs() > IDENTITY_TOL * scale {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("stored value {stored} disagrees with derived value {derived}"),
                });
            }
        }
        Ok(())
    }

    /// Frame shift `δ̃ = (δ_1 + δ_2)/2`.
    pub fn delta_tilde(&self) -> f64 {
        0.5 * (self.two_photon_1 + self.two_photon_2)
    }

    /// Geometric mean cavity decay rate `√(κ_a κ_b)`.
    pub fn kappa(&self) -> f64 {
        (self.kappa_a * self.kappa_b).sqrt()
    }

    /// Changes `Δ_2` keeping `δ_2`; `Δ̃_2` and `ν_2` follow.
    pub fn with_detuning_2(mut self, detuning_2: f64) -> Result<Self> {
        self.detuning_2 = detuning_2;
        self.cavity_detuning_2 = detuning_2 - self.two_photon_2;
        self.nu_2 = detuning_2 - self.omega_2 + self.omega_0;
        self.omega_b = self.cavity_detuning_2 - self.omega_1 + self.omega_0;
        self.validate()?;
        Ok(self)
    }

    /// Changes `δ_1`, `δ_2` keeping the Raman detunings; the cavity
    /// detunings and frequencies follow.
    pub fn with_two_photon(mut self, two_photon_1: f64, two_photon_2: f64) -> Result<Self> {
        self.two_photon_1 = two_photon_1;
        self.two_photon_2 = two_photon_2;
        self.cavity_detuning_1 = self.detuning_1 - two_photon_1;
        self.cavity_detuning_2 = self.detuning_2 - two_photon_2;
        self.omega_a = self.cavity_detuning_1 - self.omega_2 + self.omega_0;
        self.omega_b = self.cavity_detuning_2 - self.omega_1 + self.omega_0;
        self.validate()?;
        Ok(self)
    }

    /// Multiplies every frequency and rate (not `τ`) by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        let mut p = *self;
        for f in [
            &mut p.g_a,
            &mut p.g_b,
            &mut p.rabi_1,
            &mut p.rabi_2,
            &mut p.omega_a,
            &mut p.omega_b,
            &mut p.omega_0,
            &mut p.omega_1,
            &mut p.omega_2,
            &mut p.nu_1,
            &mut p.nu_2,
            &mut p.detuning_1,
            &mut p.detuning_2,
            &mut p.cavity_detuning_1,
            &mut p.cavity_detuning_2,
            &mut p.two_photon_1,
            &mut p.two_photon_2,
            &mut p.kappa_a,
            &mut p.kappa_b,
            &mut p.gamma,
        ] {
            *f *= lambda;
        }
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_is_consistent() {
        let p = PhysicalParams::rubidium_example();
        assert_eq!(p.delta_tilde(), -0.01);
        assert_eq!(p.cavity_detuning_1, 1e4 + 3.0 / 400.0);
    }

    #[test]
    fn inconsistent_redundant_fields_rejected() {
        let mut p = PhysicalParams::rubidium_example();
        p.two_photon_1 += 1e-6;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "two_photon_1", .. })));
    }

    #[test]
    fn zero_detuning_rejected() {
        let r = PhysicalParams::from_detunings(DetuningSpec { detuning_1: 0.0, ..DetuningSpec::default() });
        assert_eq!(r.unwrap_err(), Error::ZeroDetuning("detuning_1"));
    }

    #[test]
    fn setters_keep_identities() {
        let p = PhysicalParams::rubidium_example().with_detuning_2(3e4).unwrap();
        assert_eq!(p.two_photon_2, -1.0 / 80.0);
        let p = p.with_two_photon(0.1, -0.2).unwrap();
        assert!((p.delta_tilde() + 0.05).abs() < 1e-15);
        p.validate().unwrap();
    }

    #[test]
    fn nonzero_atomic_levels() {
        let p = PhysicalParams::from_detunings(DetuningSpec {
            levels: AtomicLevels { omega_0: 5e5, omega_1: 0.0, omega_2: 37.0 },
            detuning_1: 100.0,
            detuning_2: 200.0,
            two_photon_1: 0.5,
            ..DetuningSpec::default()
        })
        .unwrap();
        assert!((p.nu_1 - (100.0 + 5e5)).abs() < 1e-9);
        assert!((p.omega_a - (99.5 - 37.0 + 5e5)).abs() < 1e-9);
    }
}
