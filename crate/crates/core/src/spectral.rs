//! Substitution-matrix analysis: primitivity and the Perron-Frobenius pair.
//!
//! Entry `(a, b)` of the substitution matrix counts the steps of type `a`
//! in the generator of type `b` (columns correspond to generators, rows to
//! the types they produce). For a primitive matrix the dominant eigenvalue
//! is real and positive and its eigenvectors are strictly positive; the
//! right eigenvector, normalized to unit L1 norm, gives the limiting
//! relative frequencies of the segment types, and the eigenvalue is the
//! per-iteration multiplication factor of the total segment count.

use crate::model::FractalSystem;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

/// Convergence threshold for the power iteration (L1 distance between
/// successive normalized iterates).
pub const DEFAULT_EIGEN_TOLERANCE: f64 = 1e-14;
/// Iteration cap for the power iteration.
pub const DEFAULT_MAX_ITERATIONS: u32 = 1_000_000;

/// Nonnegative integer matrix tallied from a system's generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionMatrix {
    n: usize,
    entries: Vec<u64>, // row-major
}

impl SubstitutionMatrix {
    /// Tallies step types per generator. The system must carry one
    /// generator per type, ordered by target type.
    pub fn from_system(system: &FractalSystem) -> Self {
        let n = system.types.len();
        let mut entries = vec![0u64; n * n];
        for (col, gen) in system.generators.iter().enumerate() {
            for step in &gen.steps {
                entries[step.type_index() * n + col] += 1;
            }
        }
        SubstitutionMatrix { n, entries }
    }

    pub fn from_rows(rows: &[&[u64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        SubstitutionMatrix {
            n,
            entries: rows.concat(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    /// Exact integer power; `k = 0` yields the identity.
    pub fn pow(&self, k: u32) -> IntMatrix {
        matrix_power(self, k)
    }

    /// Smallest exponent making every entry strictly positive, if one exists.
    pub fn primitivity(&self) -> Primitivity {
        primitivity(self)
    }
}

/// Tallies the substitution matrix of a system.
pub fn substitution_matrix(system: &FractalSystem) -> SubstitutionMatrix {
    SubstitutionMatrix::from_system(system)
}

/// Arbitrary-precision square matrix, the result of exact matrix powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigUint>, // row-major
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigUint::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigUint::one();
        }
        IntMatrix { n, entries }
    }

    pub fn from_substitution(m: &SubstitutionMatrix) -> Self {
        IntMatrix {
            n: m.n,
            entries: m.entries.iter().map(|&e| BigUint::from(e)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigUint {
        &self.entries[row * self.n + col]
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut entries = vec![BigUint::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &rhs.entries[k * n + j];
                    if !b.is_zero() {
                        entries[i * n + j] += a * b;
                    }
                }
            }
        }
        IntMatrix { n, entries }
    }

    /// Matrix-vector product `self * v`.
    pub fn apply(&self, v: &[BigUint]) -> Vec<BigUint> {
        assert_eq!(v.len(), self.n);
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn column(&self, col: usize) -> Vec<BigUint> {
        (0..self.n)
            .map(|i| self.entries[i * self.n + col].clone())
            .collect()
    }
}

/// Exact integer `matrix^k` by repeated squaring.
pub fn matrix_power(matrix: &SubstitutionMatrix, k: u32) -> IntMatrix {
    let mut result = IntMatrix::identity(matrix.n);
    let mut base = IntMatrix::from_substitution(matrix);
    let mut exp = k;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result.mul(&base);
        }
        exp >>= 1;
        if exp > 0 {
            base = base.mul(&base);
        }
    }
    result
}

/// Result of the primitivity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitivity {
    /// Smallest `k` with `M^k > 0` entrywise.
    Primitive { exponent: u32 },
    /// No power up to the Wielandt bound is positive; `zero_entry` is a
    /// position that remained zero at the bound.
    NotPrimitive { zero_entry: (usize, usize) },
}

impl Primitivity {
    pub fn exponent(&self) -> Option<u32> {
        match self {
            Primitivity::Primitive { exponent } => Some(*exponent),
            Primitivity::NotPrimitive { .. } => None,
        }
    }
}

/// Tests primitivity over the boolean semiring.
///
/// Scans `M^k` for `k = 1 ..= n^2 - 2n + 2` (the Wielandt bound, which is
/// tight: a primitive matrix always has a positive power at or below it).
/// Boolean powers keep the scan free of magnitude growth.
pub fn primitivity(matrix: &SubstitutionMatrix) -> Primitivity {
    let n = matrix.n;
    let bound = (n * n).saturating_sub(2 * n) + 2;
    let base: Vec<bool> = matrix.entries.iter().map(|&e| e > 0).collect();
    let mut power = base.clone();
    for k in 1..=bound {
        if power.iter().all(|&b| b) {
            return Primitivity::Primitive { exponent: k as u32 };
        }
        if k < bound {
            power = bool_mul(&power, &base, n);
        }
    }
    let zero = power.iter().position(|&b| !b).unwrap_or(0);
    Primitivity::NotPrimitive {
        zero_entry: (zero / n, zero % n),
    }
}

fn bool_mul(a: &[bool], b: &[bool], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k] {
                for j in 0..n {
                    if b[k * n + j] {
                        out[i * n + j] = true;
                    }
                }
            }
        }
    }
    out
}

/// Converged output of the power iteration.
#[derive(Debug, Clone)]
pub struct PerronEigen {
    /// Dominant eigenvalue.
    pub lambda: f64,
    /// Right eigenvector, normalized to unit L1 norm.
    pub freq: Vec<f64>,
    /// Left eigenvector (right eigenvector of the transpose), unit L1 norm.
    pub left: Vec<f64>,
    /// `|M * freq - lambda * freq|_1`.
    pub residual: f64,
    pub iterations: u32,
}

/// Computes the dominant eigenvalue and both normalized eigenvectors by
/// power iteration from the uniform start vector, renormalizing to unit L1
/// norm each step.
///
/// For a positive unit-L1 vector the eigenvalue is recovered as
/// `|M * v|_1`, avoiding Rayleigh quotients. The caller is expected to have
/// checked primitivity, which guarantees convergence.
pub fn perron_eigen(
    matrix: &SubstitutionMatrix,
    tolerance: f64,
    max_iterations: u32,
) -> Result<PerronEigen, SpectralError> {
    let n = matrix.n;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| matrix.row(i).iter().map(|&e| e as f64).collect())
        .collect();
    let (freq, lambda, residual, iterations) = power_iterate(&rows, tolerance, max_iterations)?;

    let transpose: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rows[j][i]).collect())
        .collect();
    let (left, _, _, _) = power_iterate(&transpose, tolerance, max_iterations)?;

    Ok(PerronEigen {
        lambda,
        freq,
        left,
        residual,
        iterations,
    })
}

fn power_iterate(
    rows: &[Vec<f64>],
    tolerance: f64,
    max_iterations: u32,
) -> Result<(Vec<f64>, f64, f64, u32), SpectralError> {
    let n = rows.len();
    let mut v = vec![1.0 / n as f64; n];
    for iteration in 1..=max_iterations {
        let w = mat_vec(rows, &v);
        let sum: f64 = w.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(SpectralError::ZeroIterate { iteration });
        }
        let next: Vec<f64> = w.iter().map(|x| x / sum).collect();
        let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if delta <= tolerance {
            let w = mat_vec(rows, &v);
            let lambda: f64 = w.iter().sum();
            let residual: f64 = w
                .iter()
                .zip(&v)
                .map(|(mx, x)| (mx - lambda * x).abs())
                .sum();
            return Ok((v, lambda, residual, iteration));
        }
    }
    let w = mat_vec(rows, &v);
    let lambda: f64 = w.iter().sum();
    let residual: f64 = w
        .iter()
        .zip(&v)
        .map(|(mx, x)| (mx - lambda * x).abs())
        .sum();
    Err(SpectralError::NoConvergence {
        iterations: max_iterations,
        residual,
    })
}

fn mat_vec(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Full spectral description of a system's substitution matrix.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub matrix: SubstitutionMatrix,
    pub primitive_exponent: Option<u32>,
    pub lambda: f64,
    pub freq: Vec<f64>,
    pub left: Vec<f64>,
    pub eigen_residual: f64,
}

impl SpectralData {
    /// Builds the matrix, requires primitivity, and runs the power
    /// iteration at default settings.
    pub fn compute(system: &FractalSystem) -> Result<Self, SpectralError> {
        Self::compute_with(system, DEFAULT_EIGEN_TOLERANCE, DEFAULT_MAX_ITERATIONS)
    }

    pub fn compute_with(
        system: &FractalSystem,
        tolerance: f64,
        max_iterations: u32,
    ) -> Result<Self, SpectralError> {
        Self::from_matrix(
            SubstitutionMatrix::from_system(system),
            tolerance,
            max_iterations,
        )
    }

    pub fn from_matrix(
        matrix: SubstitutionMatrix,
        tolerance: f64,
        max_iterations: u32,
    ) -> Result<Self, SpectralError> {
        let exponent = match primitivity(&matrix) {
            Primitivity::Primitive { exponent } => exponent,
            Primitivity::NotPrimitive { zero_entry } => {
                return Err(SpectralError::NotPrimitive {
                    row: zero_entry.0,
                    col: zero_entry.1,
                })
            }
        };
        let eigen = perron_eigen(&matrix, tolerance, max_iterations)?;
        Ok(SpectralData {
            matrix,
            primitive_exponent: Some(exponent),
            lambda: eigen.lambda,
            freq: eigen.freq,
            left: eigen.left,
            eigen_residual: eigen.residual,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("substitution matrix is not primitive (entry ({row}, {col}) stays zero at the Wielandt bound)")]
    NotPrimitive { row: usize, col: usize },
    #[error(
        "power iteration did not converge in {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: u32, residual: f64 },
    #[error("iterate collapsed to zero at iteration {iteration}")]
    ZeroIterate { iteration: u32 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{koch_system, pentagon_system, rightangle_system};
    use num_traits::ToPrimitive;

    fn pentagon_matrix() -> SubstitutionMatrix {
        SubstitutionMatrix::from_system(&pentagon_system())
    }

    #[test]
    fn pentagon_substitution_matrix() {
        let m = pentagon_matrix();
        assert_eq!(m.row(0), &[1, 2, 0]);
        assert_eq!(m.row(1), &[1, 0, 2]);
        assert_eq!(m.row(2), &[1, 0, 0]);
    }

    #[test]
    fn koch_substitution_matrix() {
        let m = SubstitutionMatrix::from_system(&koch_system());
        assert_eq!(m.row(0), &[4]);
    }

    #[test]
    fn rightangle_substitution_matrix() {
        let m = SubstitutionMatrix::from_system(&rightangle_system());
        assert_eq!(m.row(0), &[2, 2]);
        assert_eq!(m.row(1), &[1, 1]);
    }

    fn as_u64(m: &IntMatrix, r: usize, c: usize) -> u64 {
        m.entry(r, c).to_u64().unwrap()
    }

    #[test]
    fn pentagon_matrix_powers() {
        let m = pentagon_matrix();
        let m2 = matrix_power(&m, 2);
        let expect2 = [[3, 2, 4], [3, 2, 0], [1, 2, 0]];
        let m3 = matrix_power(&m, 3);
        let expect3 = [[9, 6, 4], [5, 6, 4], [3, 2, 4]];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(as_u64(&m2, r, c), expect2[r][c]);
                assert_eq!(as_u64(&m3, r, c), expect3[r][c]);
            }
        }
    }

    #[test]
    fn power_zero_is_identity() {
        let m = pentagon_matrix();
        let id = matrix_power(&m, 0);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(as_u64(&id, r, c), u64::from(r == c));
            }
        }
    }

    #[test]
    fn power_has_no_overflow() {
        // 4^100 overflows every machine integer; compare against BigUint pow.
        let m = SubstitutionMatrix::from_rows(&[&[4]]);
        let p = matrix_power(&m, 100);
        assert_eq!(*p.entry(0, 0), BigUint::from(4u32).pow(100));
    }

    #[test]
    fn pentagon_primitivity_exponent_is_three() {
        assert_eq!(
            primitivity(&pentagon_matrix()),
            Primitivity::Primitive { exponent: 3 }
        );
        // Minimality: M^2 still has zero entries.
        let m2 = matrix_power(&pentagon_matrix(), 2);
        assert!((0..3).any(|r| (0..3).any(|c| m2.entry(r, c).is_zero())));
    }

    #[test]
    fn positive_matrix_has_exponent_one() {
        let m = SubstitutionMatrix::from_rows(&[&[4]]);
        assert_eq!(primitivity(&m), Primitivity::Primitive { exponent: 1 });
        let r = SubstitutionMatrix::from_system(&rightangle_system());
        assert_eq!(primitivity(&r), Primitivity::Primitive { exponent: 1 });
    }

    #[test]
    fn permutation_matrix_is_not_primitive() {
        let m = SubstitutionMatrix::from_rows(&[&[0, 1], &[1, 0]]);
        match primitivity(&m) {
            Primitivity::NotPrimitive { zero_entry } => {
                assert!(zero_entry.0 < 2 && zero_entry.1 < 2);
            }
            other => panic!("expected not-primitive, got {other:?}"),
        }
    }

    #[test]
    fn pentagon_perron_pair_matches_reference() {
        let eigen = perron_eigen(&pentagon_matrix(), DEFAULT_EIGEN_TOLERANCE, 1_000_000).unwrap();
        assert!((eigen.lambda - 2.46750).abs() < 1e-4);
        let expected = [0.46750, 0.34303, 0.18946];
        for (f, e) in eigen.freq.iter().zip(expected) {
            assert!((f - e).abs() < 1e-4, "freq {f} vs {e}");
        }
        // Characteristic identity of this matrix.
        let l = eigen.lambda;
        assert!((l * l * l - l * l - 2.0 * l - 4.0).abs() < 1e-8);
        assert!(eigen.residual <= 1e-10);
        let sum: f64 = eigen.freq.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_by_one_matrix() {
        let eigen = perron_eigen(
            &SubstitutionMatrix::from_rows(&[&[4]]),
            DEFAULT_EIGEN_TOLERANCE,
            10,
        )
        .unwrap();
        assert_eq!(eigen.lambda, 4.0);
        assert_eq!(eigen.freq, vec![1.0]);
    }

    #[test]
    fn two_by_two_known_pair() {
        // [[2,2],[1,1]]: lambda^2 = 3 lambda, eigenvector (2/3, 1/3).
        let m = SubstitutionMatrix::from_rows(&[&[2, 2], &[1, 1]]);
        let eigen = perron_eigen(&m, DEFAULT_EIGEN_TOLERANCE, 1_000_000).unwrap();
        assert!((eigen.lambda - 3.0).abs() < 1e-12);
        assert!((eigen.freq[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((eigen.freq[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn left_vector_satisfies_transpose_residual() {
        let m = pentagon_matrix();
        let eigen = perron_eigen(&m, DEFAULT_EIGEN_TOLERANCE, 1_000_000).unwrap();
        let n = m.n();
        let mut residual = 0.0;
        for i in 0..n {
            let mtl: f64 = (0..n).map(|j| m.entry(j, i) as f64 * eigen.left[j]).sum();
            residual += (mtl - eigen.lambda * eigen.left[i]).abs();
        }
        assert!(residual <= 1e-10, "left residual {residual}");
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = perron_eigen(&pentagon_matrix(), 1e-30, 1).unwrap_err();
        assert!(matches!(err, SpectralError::NoConvergence { .. }));
    }

    #[test]
    fn spectral_data_rejects_non_primitive() {
        let m = SubstitutionMatrix::from_rows(&[&[0, 2], &[2, 0]]);
        let err = SpectralData::from_matrix(m, DEFAULT_EIGEN_TOLERANCE, 100).unwrap_err();
        assert!(matches!(err, SpectralError::NotPrimitive { .. }));
    }
}
