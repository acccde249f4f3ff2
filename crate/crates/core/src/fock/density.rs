use alloc::vec::Vec;

use num_complex::Complex64;

use super::BasisConfig;

/// Dense density matrix over an explicit list of basis configurations.
///
/// After a partial trace the traced ancilla bits of every basis entry are
/// zero; only the kept ancillas carry information.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    basis: Vec<BasisConfig>,
    matrix: Vec<Complex64>,
}

impl DensityOperator {
    pub(crate) fn from_parts(basis: Vec<BasisConfig>, matrix: Vec<Complex64>) -> Self {
        debug_assert_eq!(basis.len() * basis.len(), matrix.len());
        Self { basis, matrix }
    }

    pub fn basis(&self) -> &[BasisConfig] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// Matrix element between two basis configurations (zero if either is
    /// outside the declared basis).
    pub fn element(&self, row: &BasisConfig, col: &BasisConfig) -> Complex64 {
        match (self.basis.binary_search(row), self.basis.binary_search(col)) {
            (Ok(i), Ok(j)) => self.get(i, j),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.get(i, j) * self.get(j, i);
            }
        }
        acc.re
    }

    /// Largest `|ρ[i][j] - conj(ρ[j][i])|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    ///
    /// The Hermitian matrix `A + iB` is embedded as the real symmetric
    /// `[[A, -B], [B, A]]`, whose spectrum is that of `ρ` with every value
    /// doubled; cyclic Jacobi sweeps diagonalize the embedding.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        let m = 2 * n;
        let mut a = alloc::vec![0.0f64; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[i * m + (j + n)] = -z.im;
                a[(i + n) * m + j] = z.im;
            }
        }
        let mut values = jacobi_eigenvalues(a, m);
        values.sort_by(f64::total_cmp);
        values.into_iter().step_by(2).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn op(values: &[(f64, f64)], n: usize) -> DensityOperator {
        let basis = (0..n as u32).map(|i| BasisConfig { occupations: i, ancillas: 0 }).collect();
        DensityOperator::from_parts(basis, values.iter().map(|&(r, i)| Complex64::new(r, i)).collect())
    }

    #[test]
    fn diagonal_spectrum() {
        let rho = op(&[(0.25, 0.0), (0.0, 0.0), (0.0, 0.0), (0.75, 0.0)], 2);
        let ev = rho.eigenvalues();
        assert!((ev[0] - 0.25).abs() < 1e-14 && (ev[1] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn complex_pure_state_spectrum() {
        // |ψ⟩ = (|0⟩ + i|1⟩)/√2
        let rho = op(&[(0.5, 0.0), (0.0, -0.5), (0.0, 0.5), (0.5, 0.0)], 2);
        let ev = rho.eigenvalues();
        assert!(ev[0].abs() < 1e-14, "{ev:?}");
        assert!((ev[1] - 1.0).abs() < 1e-14);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert!(rho.hermiticity_deviation() < 1e-15);
    }

    #[test]
    fn element_lookup_outside_basis_is_zero() {
        let rho = op(&[(1.0, 0.0)], 1);
        let outside = BasisConfig { occupations: 5, ancillas: 0 };
        assert_eq!(rho.element(&outside, &outside), Complex64::new(0.0, 0.0));
        assert_eq!(rho.eigenvalues(), vec![1.0]);
    }
}
