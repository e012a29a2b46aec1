use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default ceiling on the total Hilbert-space dimension.
pub const DEFAULT_DIM_LIMIT: usize = 2_000_000;

/// Local dimension of every atom: levels `|0>`, `|1>`, `|2>`.
pub const ATOM_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subsystem {
    Mode(Mode),
    /// Zero-based atom index.
    Atom(usize),
}

/// Truncated product space `mode a ⊗ mode b ⊗ atom 0 ⊗ … ⊗ atom N-1`.
///
/// The first factor is the most significant digit of the flat basis index.
/// `n_max_b = 0` means mode b is absent (single-mode, degenerate layouts).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    n_max_a: usize,
    n_max_b: usize,
    n_atoms: usize,
    dim: usize,
    atom_dim: usize,
}

impl HilbertLayout {
    pub fn new(n_max_a: usize, n_max_b: usize, n_atoms: usize) -> Result<Self> {
        Self::with_limit(n_max_a, n_max_b, n_atoms, DEFAULT_DIM_LIMIT)
    }

    pub fn with_limit(n_max_a: usize, n_max_b: usize, n_atoms: usize, limit: usize) -> Result<Self> {
        if n_max_a == 0 {
            return Err(Error::InvalidCutoff);
        }
        let atom_dim = u32::try_from(n_atoms)
            .ok()
            .and_then(|n| ATOM_LEVELS.checked_pow(n))
            .ok_or(Error::DimensionOverflow)?;
        let dim = (n_max_a + 1)
            .checked_mul(n_max_b + 1)
            .and_then(|d| d.checked_mul(atom_dim))
            .ok_or(Error::DimensionOverflow)?;
        if dim > limit {
            return Err(Error::DimensionLimit { dim, limit });
        }
        Ok(Self { n_max_a, n_max_b, n_atoms, dim, atom_dim })
    }

    /// Single-mode layout with no atoms.
    pub fn single_mode(n_max: usize) -> Result<Self> {
        Self::new(n_max, 0, 0)
    }

    pub fn n_max_a(&self) -> usize {
        self.n_max_a
    }

    pub fn n_max_b(&self) -> usize {
        self.n_max_b
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_mode_b(&self) -> bool {
        self.n_max_b > 0
    }

    /// Dimension of the two field factors together.
    pub fn field_dim(&self) -> usize {
        (self.n_max_a + 1) * (self.n_max_b + 1)
    }

    /// Dimension of all atomic factors together.
    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    /// The same field cutoffs without atoms.
    pub fn field_only(&self) -> Self {
        Self {
            n_max_a: self.n_max_a,
            n_max_b: self.n_max_b,
            n_atoms: 0,
            dim: self.field_dim(),
            atom_dim: 1,
        }
    }

    pub fn subsystems(&self) -> Vec<Subsystem> {
        let mut out = alloc::vec![Subsystem::Mode(Mode::A), Subsystem::Mode(Mode::B)];
        out.extend((0..self.n_atoms).map(Subsystem::Atom));
        out
    }

    pub fn check_mode(&self, mode: Mode) -> Result<()> {
        match mode {
            Mode::B if !self.has_mode_b() => Err(Error::ModeAbsent(Mode::B)),
            _ => Ok(()),
        }
    }

    pub fn check_atom(&self, k: usize) -> Result<()> {
        if k < self.n_atoms {
            Ok(())
        } else {
            Err(Error::AtomIndex { index: k, n_atoms: self.n_atoms })
        }
    }

    pub fn local_dim(&self, sub: Subsystem) -> usize {
        match sub {
            Subsystem::Mode(Mode::A) => self.n_max_a + 1,
            Subsystem::Mode(Mode::B) => self.n_max_b + 1,
            Subsystem::Atom(_) => ATOM_LEVELS,
        }
    }

    /// Distance in the flat index between neighbouring local states of `sub`.
    pub fn stride(&self, sub: Subsystem) -> usize {
        match sub {
            Subsystem::Mode(Mode::A) => (self.n_max_b + 1) * self.atom_dim,
            Subsystem::Mode(Mode::B) => self.atom_dim,
            Subsystem::Atom(k) => ATOM_LEVELS.pow((self.n_atoms - 1 - k) as u32),
        }
    }

    /// Local quantum number of `sub` in flat basis state `index`.
    pub fn digit(&self, index: usize, sub: Subsystem) -> usize {
        (index / self.stride(sub)) % self.local_dim(sub)
    }

    /// Flat index of `|n_a, n_b> ⊗ |levels[0]> ⊗ …`.
    pub fn index(&self, n_a: usize, n_b: usize, levels: &[usize]) -> Result<usize> {
        if n_a > self.n_max_a {
            return Err(Error::DimensionMismatch { expected: self.n_max_a, found: n_a });
        }
        if n_b > self.n_max_b {
            return Err(Error::DimensionMismatch { expected: self.n_max_b, found: n_b });
        }
        if levels.len() != self.n_atoms {
            return Err(Error::DimensionMismatch { expected: self.n_atoms, found: levels.len() });
        }
        let mut atom_index = 0;
        for &l in levels {
            if l >= ATOM_LEVELS {
                return Err(Error::AtomicLevel(l));
            }
            atom_index = atom_index * ATOM_LEVELS + l;
        }
        Ok((n_a * (self.n_max_b + 1) + n_b) * self.atom_dim + atom_index)
    }

    /// Photon numbers `(n_a, n_b)` of a flat basis state.
    pub fn photons(&self, index: usize) -> (usize, usize) {
        let field = index / self.atom_dim;
        (field / (self.n_max_b + 1), field % (self.n_max_b + 1))
    }

    /// Number of atoms in `level` for a flat basis state.
    pub fn level_count(&self, index: usize, level: usize) -> usize {
        let mut atoms = index % self.atom_dim;
        let mut count = 0;
        for _ in 0..self.n_atoms {
            if atoms % ATOM_LEVELS == level {
                count += 1;
            }
            atoms /= ATOM_LEVELS;
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_strides() {
        let l = HilbertLayout::new(2, 3, 2).unwrap();
        assert_eq!(l.dim(), 3 * 4 * 9);
        assert_eq!(l.stride(Subsystem::Mode(Mode::A)), 36);
        assert_eq!(l.stride(Subsystem::Mode(Mode::B)), 9);
        assert_eq!(l.stride(Subsystem::Atom(0)), 3);
        assert_eq!(l.stride(Subsystem::Atom(1)), 1);
        let i = l.index(1, 2, &[2, 1]).unwrap();
        assert_eq!(l.digit(i, Subsystem::Mode(Mode::A)), 1);
        assert_eq!(l.digit(i, Subsystem::Mode(Mode::B)), 2);
        assert_eq!(l.digit(i, Subsystem::Atom(0)), 2);
        assert_eq!(l.digit(i, Subsystem::Atom(1)), 1);
        assert_eq!(l.photons(i), (1, 2));
        assert_eq!(l.level_count(i, 2), 1);
    }

    #[test]
    fn limits_are_enforced() {
        assert!(matches!(
            HilbertLayout::with_limit(10, 10, 3, 1000),
            Err(Error::DimensionLimit { dim: 3267, limit: 1000 })
        ));
        assert_eq!(HilbertLayout::new(1, 1, 200).unwrap_err(), Error::DimensionOverflow);
        assert_eq!(HilbertLayout::new(0, 1, 0).unwrap_err(), Error::InvalidCutoff);
    }

    #[test]
    fn absent_mode_b() {
        let l = HilbertLayout::single_mode(4).unwrap();
        assert!(!l.has_mode_b());
        assert_eq!(l.check_mode(Mode::B), Err(Error::ModeAbsent(Mode::B)));
        assert_eq!(l.dim(), 5);
    }
}
