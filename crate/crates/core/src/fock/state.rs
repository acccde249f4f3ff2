use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{AncillaId, BasisConfig, DensityOperator, FirstQuantized, FockSpace};
use crate::{Error, Result, PRUNE_THRESHOLD, TOLERANCE};

/// Sparse complex amplitude map over basis configurations.
///
/// Values are immutable; every operation returns a new state. States returned
/// by `create`/`annihilate` may be unnormalized or zero.
#[derive(Debug, Clone)]
pub struct StateVector {
    space: Arc<FockSpace>,
    amplitudes: BTreeMap<BasisConfig, Complex64>,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        *self.space == *other.space && self.amplitudes == other.amplitudes
    }
}

#[allow(clippy::len_without_is_empty)]
impl StateVector {
    pub fn vacuum(space: Arc<FockSpace>) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(BasisConfig::VACUUM, Complex64::new(1.0, 0.0));
        Self { space, amplitudes }
    }

    pub fn zero(space: Arc<FockSpace>) -> Self {
        Self { space, amplitudes: BTreeMap::new() }
    }

    /// Builds a state from `(config, amplitude)` pairs, summing repeats.
    pub fn from_amplitudes<I>(space: Arc<FockSpace>, amplitudes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisConfig, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (config, amp) in amplitudes {
            if !space.contains(&config) {
                return Err(Error::Domain(alloc::format!("configuration {config:?} uses modes or ancillas outside the space")));
            }
            *map.entry(config).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self::pruned(space, map))
    }

    pub(crate) fn pruned(space: Arc<FockSpace>, mut amplitudes: BTreeMap<BasisConfig, Complex64>) -> Self {
        amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        Self { space, amplitudes }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitude(&self, config: &BasisConfig) -> Complex64 {
        self.amplitudes.get(config).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisConfig, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / libm::sqrt(n), 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let map = self.amplitudes.iter().map(|(c, a)| (*c, a * factor)).collect();
        Self::pruned(self.space.clone(), map)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let mut map = self.amplitudes.clone();
        for (c, a) in &other.amplitudes {
            *map.entry(*c).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Ok(Self::pruned(self.space.clone(), map))
    }

    pub(crate) fn check_same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Applies the creation operator `c†(mode)`.
    pub fn create(&self, mode: usize) -> Result<Self> {
        self.space.check_mode(mode)?;
        let map = self
            .amplitudes
            .iter()
            .filter(|(c, _)| !c.is_occupied(mode))
            .map(|(c, a)| {
                let next = BasisConfig { occupations: c.occupations | 1 << mode, ..*c };
                (next, a * c.jw_sign(mode))
            })
            .collect();
        Ok(Self::pruned(self.space.clone(), map))
    }

    /// Applies the annihilation operator `c(mode)`.
    pub fn annihilate(&self, mode: usize) -> Result<Self> {
        self.space.check_mode(mode)?;
        let map = self
            .amplitudes
            .iter()
            .filter(|(c, _)| c.is_occupied(mode))
            .map(|(c, a)| {
                let next = BasisConfig { occupations: c.occupations & !(1 << mode), ..*c };
                (next, a * c.jw_sign(mode))
            })
            .collect();
        Ok(Self::pruned(self.space.clone(), map))
    }

    /// Applies `c†(modes[0]) c†(modes[1]) ...` with the rightmost operator first.
    pub fn create_all(&self, modes: &[usize]) -> Result<Self> {
        modes.iter().rev().try_fold(self.clone(), |s, &m| s.create(m))
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same_space(other)?;
        Ok(self.amplitudes.iter().filter_map(|(c, a)| other.amplitudes.get(c).map(|b| a.conj() * b)).sum())
    }

    /// Common particle number of every configuration in the support.
    pub fn particle_number(&self) -> Result<usize> {
        let mut counts = self.amplitudes.keys().map(BasisConfig::particle_count);
        let first = counts.next().unwrap_or(0);
        if counts.all(|n| n == first) {
            Ok(first)
        } else {
            Err(Error::MixedParticleNumber)
        }
    }

    /// Tensors in a fresh ancilla in its pristine state.
    pub fn tensor_ancilla(&self, ancilla: AncillaId) -> Result<Self> {
        let space = Arc::new(self.space.with_ancilla(ancilla)?);
        Ok(Self { space, amplitudes: self.amplitudes.clone() })
    }

    /// Reduced density operator over the modes and the kept ancillas.
    pub fn partial_trace_ancillas(&self, keep: &[usize]) -> Result<DensityOperator> {
        let mut keep_mask = 0u32;
        for &k in keep {
            self.space.check_ancilla(k)?;
            keep_mask |= 1 << k;
        }
        let norm = self.norm_sqr();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let reduce = |c: &BasisConfig| BasisConfig { occupations: c.occupations, ancillas: c.ancillas & keep_mask };
        let mut basis: Vec<BasisConfig> = self.amplitudes.keys().map(reduce).collect();
        basis.sort();
        basis.dedup();

        // group by traced-out ancilla bits
        let mut groups: BTreeMap<u32, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (c, a) in &self.amplitudes {
            let row = basis.binary_search(&reduce(c)).expect("reduced config present");
            groups.entry(c.ancillas & !keep_mask).or_default().push((row, *a));
        }
        let dim = basis.len();
        let mut matrix = alloc::vec![Complex64::new(0.0, 0.0); dim * dim];
        for entries in groups.values() {
            for &(i, ai) in entries {
                for &(j, aj) in entries {
                    matrix[i * dim + j] += ai * aj.conj() / norm;
                }
            }
        }
        Ok(DensityOperator::from_parts(basis, matrix))
    }

    /// Labeled-particle wavefunction for a fixed particle number.
    pub fn to_first_quantized(&self) -> Result<FirstQuantized> {
        FirstQuantized::from_state(self)
    }

    /// Applies `f` to each config and accumulates the returned weighted
    /// configs. Used by the optics and measurement layers.
    pub(crate) fn map_terms<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&BasisConfig, Complex64, &mut dyn FnMut(BasisConfig, Complex64)) -> Result<()>,
    {
        let mut map: BTreeMap<BasisConfig, Complex64> = BTreeMap::new();
        for (c, a) in &self.amplitudes {
            f(c, *a, &mut |next, amp| {
                *map.entry(next).or_insert(Complex64::new(0.0, 0.0)) += amp;
            })?;
        }
        Ok(Self::pruned(self.space.clone(), map))
    }

    /// Keeps only configurations accepted by `keep`.
    pub(crate) fn filter(&self, mut keep: impl FnMut(&BasisConfig) -> bool) -> Self {
        let map = self.amplitudes.iter().filter(|(c, _)| keep(c)).map(|(c, a)| (*c, *a)).collect();
        Self { space: self.space.clone(), amplitudes: map }
    }
}
