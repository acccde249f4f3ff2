//! Second-quantized fermionic states over labeled modes with two-level
//! environment ancillas.
//!
//! Mode indices define the Jordan–Wigner order: creating a fermion in mode
//! `m` picks up a factor `(-1)^k`, where `k` counts the occupied modes with a
//! smaller index. A basis configuration with occupied modes `m1 < m2 < ... < mn`
//! is the state `c†(m1) c†(m2) ... c†(mn) |vac⟩`.

mod density;
mod first_quantized;
mod state;

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

pub use density::DensityOperator;
pub use first_quantized::{FirstQuantized, SlotKey};
pub use state::StateVector;

/// Upper bound on modes per space (occupations are a `u32` bitmask).
pub const MAX_MODES: usize = 32;
/// Upper bound on ancillas per space.
pub const MAX_ANCILLAS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeId {
    pub index: usize,
    pub label: String,
}

/// Two-level environment record attached to a non-absorbing detector.
///
/// Basis index 0 is the pristine state, 1 the component orthogonal to it. The
/// scattered state is `overlap·|0⟩ + sqrt(1 - overlap²)·|1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaId {
    pub index: usize,
    pub label: String,
    pub scattered_overlap: f64,
}

impl AncillaId {
    pub fn new(index: usize, label: impl Into<String>, scattered_overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&scattered_overlap) {
            return Err(Error::InvalidOverlap(scattered_overlap));
        }
        Ok(Self { index, label: label.into(), scattered_overlap })
    }

    /// Amplitudes of the scattered state on the pristine and orthogonal levels.
    pub fn scattered_components(&self) -> (f64, f64) {
        let s = self.scattered_overlap;
        (s, libm::sqrt((1.0 - s * s).max(0.0)))
    }
}

/// The labeled modes and ancillas a state lives on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockSpace {
    modes: Vec<ModeId>,
    ancillas: Vec<AncillaId>,
}

impl FockSpace {
    pub fn new<I, S>(mode_labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut space = Self::default();
        for label in mode_labels {
            space.push_mode(label.into())?;
        }
        Ok(space)
    }

    fn push_mode(&mut self, label: String) -> Result<usize> {
        if self.modes.len() >= MAX_MODES {
            return Err(Error::CapacityExceeded { kind: "modes", max: MAX_MODES });
        }
        if self.mode(&label).is_some() {
            return Err(Error::DuplicateLabel(label));
        }
        let index = self.modes.len();
        self.modes.push(ModeId { index, label });
        Ok(index)
    }

    /// Returns a copy of this space with one more ancilla appended.
    pub fn with_ancilla(&self, ancilla: AncillaId) -> Result<Self> {
        if self.ancillas.len() >= MAX_ANCILLAS {
            return Err(Error::CapacityExceeded { kind: "ancillas", max: MAX_ANCILLAS });
        }
        if self.ancilla(&ancilla.label).is_some() {
            return Err(Error::DuplicateLabel(ancilla.label));
        }
        if ancilla.index != self.ancillas.len() {
            return Err(Error::Domain(alloc::format!(
                "ancilla `{}` must take the next free index {}",
                ancilla.label,
                self.ancillas.len()
            )));
        }
        // re-validate the overlap for values built by struct literal
        let ancilla = AncillaId::new(ancilla.index, ancilla.label, ancilla.scattered_overlap)?;
        let mut next = self.clone();
        next.ancillas.push(ancilla);
        Ok(next)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn ancillas(&self) -> &[AncillaId] {
        &self.ancillas
    }

    pub fn mode(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    pub fn ancilla(&self, label: &str) -> Option<usize> {
        self.ancillas.iter().position(|a| a.label == label)
    }

    pub fn mode_label(&self, index: usize) -> Result<&str> {
        self.modes.get(index).map(|m| m.label.as_str()).ok_or(Error::UnknownMode(index))
    }

    pub fn ancilla_id(&self, index: usize) -> Result<&AncillaId> {
        self.ancillas.get(index).ok_or(Error::UnknownAncilla(index))
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes.len() {
            Ok(())
        } else {
            Err(Error::UnknownMode(mode))
        }
    }

    pub(crate) fn check_ancilla(&self, ancilla: usize) -> Result<()> {
        if ancilla < self.ancillas.len() {
            Ok(())
        } else {
            Err(Error::UnknownAncilla(ancilla))
        }
    }

    fn mode_mask(&self) -> u32 {
        low_mask(self.modes.len())
    }

    fn ancilla_mask(&self) -> u32 {
        low_mask(self.ancillas.len())
    }

    pub(crate) fn contains(&self, config: &BasisConfig) -> bool {
        config.occupations & !self.mode_mask() == 0 && config.ancillas & !self.ancilla_mask() == 0
    }
}

fn low_mask(bits: usize) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

/// One fermionic occupation pattern plus one basis index per ancilla.
///
/// Ordering is lexicographic on `(occupations, ancillas)`, which fixes the
/// iteration order of every state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisConfig {
    pub occupations: u32,
    pub ancillas: u32,
}

impl BasisConfig {
    pub const VACUUM: Self = Self { occupations: 0, ancillas: 0 };

    pub fn from_modes(modes: &[usize]) -> Self {
        let occupations = modes.iter().fold(0u32, |acc, &m| acc | (1 << m));
        Self { occupations, ancillas: 0 }
    }

    pub fn with_ancillas(mut self, ancillas: &[usize]) -> Self {
        self.ancillas = ancillas.iter().fold(0u32, |acc, &a| acc | (1 << a));
        self
    }

    pub fn is_occupied(&self, mode: usize) -> bool {
        self.occupations >> mode & 1 == 1
    }

    pub fn ancilla_index(&self, ancilla: usize) -> u8 {
        (self.ancillas >> ancilla & 1) as u8
    }

    pub fn particle_count(&self) -> usize {
        self.occupations.count_ones() as usize
    }

    /// Occupied modes in ascending (Jordan–Wigner) order.
    pub fn occupied_modes(&self) -> Vec<usize> {
        (0..32).filter(|&m| self.is_occupied(m)).collect()
    }

    /// Number of occupied modes with index below `mode`.
    pub fn occupied_below(&self, mode: usize) -> u32 {
        (self.occupations & low_mask(mode)).count_ones()
    }

    pub(crate) fn jw_sign(&self, mode: usize) -> f64 {
        if self.occupied_below(mode).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}
