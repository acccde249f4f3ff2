//! Mode unitaries acting at the creation-operator level.
//!
//! A [`ModeTransform`] maps `c†(input_j) → Σ_i U[i][j] c†(output_i)`. When the
//! output labels equal the input labels the transform acts in place; otherwise
//! the inputs are emptied and their contents move to the outputs, which must
//! be unoccupied beforehand unless they are inputs themselves.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::fock::{BasisConfig, StateVector};
use crate::{Error, Result, TOLERANCE};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self { dim, data: rows.iter().flat_map(|r| r.iter().copied()).collect() })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = alloc::vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let data = (0..n * n).map(|k| self.get(k % n, k / n).conj()).collect();
        Self { dim: n, data }
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::ShapeMismatch);
        }
        let n = self.dim;
        let data = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                (0..n).map(|l| self.get(i, l) * rhs.get(l, j)).sum()
            })
            .collect();
        Ok(Self { dim: n, data })
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// True iff every entry of `U†U` is within `tol` of the identity.
pub fn check_unitary(matrix: &CMatrix, tol: f64) -> bool {
    matrix.unitarity_deviation() <= tol
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    matrix: CMatrix,
}

impl ModeTransform {
    /// In-place transform over `modes`.
    pub fn new(modes: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        Self::relabeling(modes.clone(), modes, matrix)
    }

    /// Transform whose column `j` describes where `inputs[j]` goes among `outputs`.
    ///
    /// Unitarity is not checked here; [`apply_mode_transform`] rejects
    /// non-unitary matrices.
    pub fn relabeling(inputs: Vec<usize>, outputs: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if inputs.len() != matrix.dim() || outputs.len() != matrix.dim() {
            return Err(Error::ShapeMismatch);
        }
        check_distinct(&inputs)?;
        check_distinct(&outputs)?;
        Ok(Self { inputs, outputs, matrix })
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Modes the transform reads or writes.
    pub fn touched_modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.inputs.iter().chain(self.outputs.iter().filter(|m| !self.inputs.contains(m))).copied()
    }
}

fn check_distinct(modes: &[usize]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::RepeatedPort(format!("mode {m}")));
        }
    }
    Ok(())
}

/// The 50/50 beam splitter `inA → (outA + outB)/√2`, `inB → (outA − outB)/√2`.
pub fn make_beam_splitter(in_a: usize, in_b: usize, out_a: usize, out_b: usize) -> Result<ModeTransform> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let matrix = CMatrix::from_rows(&[&[h, h], &[h, -h]])?;
    ModeTransform::relabeling(alloc::vec![in_a, in_b], alloc::vec![out_a, out_b], matrix)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShifter {
    pub mode: usize,
    pub theta: f64,
}

impl PhaseShifter {
    pub fn transform(&self) -> ModeTransform {
        make_phase_shifter(self.mode, self.theta)
    }
}

/// One-mode transform multiplying occupied amplitudes by `e^{iθ}`.
pub fn make_phase_shifter(mode: usize, theta: f64) -> ModeTransform {
    let phase = Complex64::new(libm::cos(theta), libm::sin(theta));
    ModeTransform { inputs: alloc::vec![mode], outputs: alloc::vec![mode], matrix: CMatrix { dim: 1, data: alloc::vec![phase] } }
}

/// Rewrites every occupied input mode's creation operator through the
/// transform matrix and re-normal-orders the products.
pub fn apply_mode_transform(state: &StateVector, t: &ModeTransform) -> Result<StateVector> {
    let space = state.space();
    for m in t.inputs.iter().chain(&t.outputs) {
        space.check_mode(*m)?;
    }
    let dev = t.matrix.unitarity_deviation();
    if dev > TOLERANCE {
        return Err(Error::NotUnitary(dev));
    }
    let fresh_outputs: Vec<usize> = t.outputs.iter().copied().filter(|m| !t.inputs.contains(m)).collect();

    state.map_terms(|config, amp, emit| {
        if let Some(&m) = fresh_outputs.iter().find(|&&m| config.is_occupied(m)) {
            return Err(Error::OutputOccupied(space.mode_label(m)?.into()));
        }
        let options: Vec<Vec<(usize, Complex64)>> = config
            .occupied_modes()
            .into_iter()
            .map(|m| match t.inputs.iter().position(|&i| i == m) {
                Some(col) => (0..t.matrix.dim())
                    .map(|row| (t.outputs[row], t.matrix.get(row, col)))
                    .filter(|(_, u)| *u != Complex64::new(0.0, 0.0))
                    .collect(),
                None => alloc::vec![(m, Complex64::new(1.0, 0.0))],
            })
            .collect();
        let mut chosen = Vec::with_capacity(options.len());
        expand(&options, &mut chosen, amp, &mut |modes, coeff| {
            if let Some((occupations, sign)) = normal_order(modes) {
                emit(BasisConfig { occupations, ancillas: config.ancillas }, coeff * sign);
            }
        });
        Ok(())
    })
}

fn expand(
    options: &[Vec<(usize, Complex64)>],
    chosen: &mut Vec<usize>,
    coeff: Complex64,
    sink: &mut dyn FnMut(&[usize], Complex64),
) {
    match options.split_first() {
        None => sink(chosen, coeff),
        Some((first, rest)) => {
            for &(m, u) in first {
                chosen.push(m);
                expand(rest, chosen, coeff * u, sink);
                chosen.pop();
            }
        }
    }
}

/// Sorts a creation-operator string into ascending order. Returns the
/// occupation bitmask and the permutation sign, or `None` on a repeated mode.
fn normal_order(modes: &[usize]) -> Option<(u32, f64)> {
    let mut occupations = 0u32;
    let mut inversions = 0usize;
    for (i, &m) in modes.iter().enumerate() {
        if occupations >> m & 1 == 1 {
            return None;
        }
        occupations |= 1 << m;
        inversions += modes[..i].iter().filter(|&&p| p > m).count();
    }
    Some((occupations, if inversions.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// Haar-distributed 2×2 unitary.
pub fn random_unitary_2x2<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let alpha = rng.gen::<f64>() * TAU;
    let psi = rng.gen::<f64>() * TAU;
    let chi = rng.gen::<f64>() * TAU;
    let phi = libm::asin(libm::sqrt(rng.gen::<f64>()));
    let e = |x: f64| Complex64::new(libm::cos(x), libm::sin(x));
    let (c, s) = (libm::cos(phi), libm::sin(phi));
    let g = e(alpha);
    CMatrix { dim: 2, data: alloc::vec![g * e(psi) * c, g * e(chi) * s, -g * e(-chi) * s, g * e(-psi) * c] }
}

/// Random `n×n` unitary from Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut gauss = || {
        let u1 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2 = rng.gen::<f64>();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        Complex64::new(r * libm::cos(TAU * u2), r * libm::sin(TAU * u2))
    };
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|_| (0..n).map(|_| gauss()).collect()).collect();
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        for prev in done.iter() {
            let proj: Complex64 = prev.iter().zip(col.iter()).map(|(p, c)| p.conj() * c).sum();
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= proj * p;
            }
        }
        let norm = libm::sqrt(cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>());
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    let data = (0..n * n).map(|k| cols[k % n][k / n]).collect();
    CMatrix { dim: n, data }
}
