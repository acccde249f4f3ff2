use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{BasisConfig, FockSpace, StateVector};
use crate::{Error, Result, PRUNE_THRESHOLD, TOLERANCE};

/// Mode per particle slot plus the ancilla bits of the configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotKey {
    pub slots: Vec<usize>,
    pub ancillas: u32,
}

/// An `n`-particle wavefunction over labeled slots.
///
/// The configuration `c†(m1) ... c†(mn)|vac⟩` with `m1 < ... < mn` maps to the
/// normalized Slater determinant `Σ_σ sgn(σ) |m_σ(1)⟩₁ ... |m_σ(n)⟩ₙ / √n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstQuantized {
    particles: usize,
    entries: BTreeMap<SlotKey, Complex64>,
}

/// All permutations of `0..n` with their signs.
pub(crate) fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            // picking the i-th remaining element passes over i smaller ones
            let s = if i % 2 == 0 { sign } else { -sign };
            rec(prefix, rest, s, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), 1.0, &mut out);
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl FirstQuantized {
    pub(crate) fn from_state(state: &StateVector) -> Result<Self> {
        let particles = state.particle_number()?;
        let perms = signed_permutations(particles);
        let norm = 1.0 / libm::sqrt(factorial(particles));
        let mut entries = BTreeMap::new();
        for (config, amp) in state.iter() {
            let modes = config.occupied_modes();
            for (perm, sign) in &perms {
                let slots = perm.iter().map(|&k| modes[k]).collect();
                entries.insert(SlotKey { slots, ancillas: config.ancillas }, amp * (sign * norm));
            }
        }
        Ok(Self { particles, entries })
    }

    /// Builds a tensor from explicit entries. Entries are not symmetrized.
    pub fn from_entries<I>(particles: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SlotKey, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (key, amp) in entries {
            if key.slots.len() != particles {
                return Err(Error::MixedParticleNumber);
            }
            *map.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        map.retain(|_, a: &mut Complex64| a.norm() >= PRUNE_THRESHOLD);
        Ok(Self { particles, entries: map })
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn amplitude(&self, slots: &[usize], ancillas: u32) -> Complex64 {
        self.entries.get(&SlotKey { slots: slots.to_vec(), ancillas }).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SlotKey, &Complex64)> {
        self.entries.iter()
    }

    /// Exchanges the contents of two particle slots.
    pub fn swap_slots(&self, i: usize, j: usize) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, a)| {
                let mut slots = k.slots.clone();
                slots.swap(i, j);
                (SlotKey { slots, ancillas: k.ancillas }, *a)
            })
            .collect();
        Self { particles: self.particles, entries }
    }

    /// Largest deviation from `ψ(σx) = sgn(σ) ψ(x)` over all stored entries.
    pub fn antisymmetry_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (key, amp) in &self.entries {
            let mut sorted = key.slots.clone();
            sorted.sort_unstable();
            let has_repeat = sorted.windows(2).any(|w| w[0] == w[1]);
            if has_repeat {
                worst = worst.max(amp.norm());
                continue;
            }
            let sign = permutation_sign(&key.slots);
            let canonical = self.amplitude(&sorted, key.ancillas);
            worst = worst.max((amp - canonical * sign).norm());
        }
        worst
    }

    /// Re-encodes the tensor as an occupation-number state.
    pub fn to_state(&self, space: Arc<FockSpace>) -> Result<StateVector> {
        if self.antisymmetry_deviation() > TOLERANCE {
            return Err(Error::NotAntisymmetric);
        }
        let scale = libm::sqrt(factorial(self.particles));
        let mut terms = Vec::new();
        for (key, amp) in &self.entries {
            if key.slots.windows(2).all(|w| w[0] < w[1]) {
                for &m in &key.slots {
                    space.check_mode(m)?;
                }
                let mut config = BasisConfig::from_modes(&key.slots);
                config.ancillas = key.ancillas;
                terms.push((config, amp * scale));
            }
        }
        StateVector::from_amplitudes(space, terms)
    }
}

/// Sign of the permutation that sorts `slots` (entries assumed distinct).
fn permutation_sign(slots: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..slots.len() {
        for j in (i + 1)..slots.len() {
            if slots[i] > slots[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
