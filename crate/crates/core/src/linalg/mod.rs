//! Exact and floating-point analysis of integer matrices.
//!
//! Determinants, inverses, characteristic polynomials and matrix powers are
//! computed exactly over the integers or rationals. Floating point enters only
//! for root finding, operator norms and Jordan transforms.

mod dense;
mod jordan;
mod norm;
mod poly;
mod roots;
mod spectrum;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use dense::{condition_number, null_space, numerical_rank, singular_values};
pub use jordan::{
    real_jordan_structure, real_jordan_structure_with, JordanBlock, JordanStructure,
    CONDITION_LIMIT, RECONSTRUCTION_TOLERANCE,
};
pub use norm::{operator_norm, operator_norm_rational, symmetric_eigenvalues};
pub use poly::{characteristic_polynomial, RationalPolynomial};
pub use roots::polynomial_roots;
pub use spectrum::{
    eigenvalues, is_dilation, DilationReport, DistinctEigenvalue, Spectrum, DILATION_TOLERANCE,
    REALNESS_TOLERANCE,
};

/// Largest supported matrix dimension.
pub const MAX_DIMENSION: usize = 8;

/// Search cap for the smallest `k` with `‖M⁻ᵏ‖ < 1`.
pub const CONTRACTION_SEARCH_CAP: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must be square and non-empty")]
    NotSquare,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("root finder did not converge within {iterations} iterations (degree {degree})")]
    RootFindingFailure { degree: usize, iterations: usize },
    #[error("spectrum is not real (eigenvalue {re} {im:+}i)")]
    ComplexSpectrum { re: f64, im: f64 },
    #[error("Jordan transform condition number {condition:e} exceeds {limit:e}")]
    IllConditionedTransform { condition: f64, limit: f64 },
    #[error(
        "Jordan chains for eigenvalue {eigenvalue} span {found} dimensions, expected {expected}"
    )]
    JordanRankMismatch {
        eigenvalue: f64,
        expected: usize,
        found: usize,
    },
    #[error("Jordan reconstruction residual {residual:e} exceeds {tolerance:e}")]
    ReconstructionFailure { residual: f64, tolerance: f64 },
    #[error("integer overflow in exact matrix arithmetic")]
    Overflow,
}

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(LinalgError::NotSquare);
        }
        Ok(Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_row_major(dim: usize, entries: Vec<i64>) -> Result<Self, LinalgError> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(LinalgError::NotSquare);
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1; dim])
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![0; dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(<[i64]>::to_vec).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == 0))
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![0; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j);
            }
        }
        Self { dim: d, entries }
    }

    pub fn trace(&self) -> i64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|v| v.unsigned_abs() as f64).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn checked_mul_vec(&self, v: &[i64]) -> Option<Vec<i64>> {
        debug_assert_eq!(v.len(), self.dim);
        self.entries
            .chunks(self.dim)
            .map(|row| {
                row.iter()
                    .zip(v)
                    .try_fold(0i64, |acc, (&a, &b)| acc.checked_add(a.checked_mul(b)?))
            })
            .collect()
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let d = self.dim;
        let mut entries = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0i64;
                for k in 0..d {
                    acc = acc.checked_add(self.get(i, k).checked_mul(other.get(k, j))?)?;
                }
                entries[i * d + j] = acc;
            }
        }
        Some(Self { dim: d, entries })
    }

    pub fn checked_pow(&self, n: u32) -> Option<Self> {
        let mut result = Self::identity(self.dim);
        for _ in 0..n {
            result = result.checked_mul(self)?;
        }
        Some(result)
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.dim, self.dim, self.entries.iter().map(|&v| v as f64))
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &IntMatrix) -> BigInt {
    let n = m.dim;
    let mut a: Vec<Vec<BigInt>> = m
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Exact rational inverse.
pub fn inverse(m: &IntMatrix) -> Result<RationalMatrix, LinalgError> {
    m.to_rational().inverse()
}

/// Exact `M⁻ⁿ`.
pub fn power_inverse(m: &IntMatrix, n: u32) -> Result<RationalMatrix, LinalgError> {
    Ok(inverse(m)?.pow(n))
}

/// `‖M⁻ⁿ‖`, from the exact rational power.
pub fn power_inverse_norm(m: &IntMatrix, n: u32) -> Result<f64, LinalgError> {
    Ok(operator_norm_rational(&power_inverse(m, n)?))
}

/// Smallest `k ≤ CONTRACTION_SEARCH_CAP` with `‖M⁻ᵏ‖ < 1`, with the norms
/// `‖M⁻¹‖ … ‖M⁻ᵏ‖`.
pub fn contraction_power(m: &IntMatrix) -> Result<Option<(u32, Vec<f64>)>, LinalgError> {
    let inv = inverse(m)?;
    let mut power = RationalMatrix::identity(m.dim);
    let mut norms = Vec::new();
    for k in 1..=CONTRACTION_SEARCH_CAP {
        power = power.mul(&inv);
        let norm = operator_norm_rational(&power);
        norms.push(norm);
        if norm < 1.0 {
            return Ok(Some((k, norms)));
        }
    }
    Ok(None)
}

/// Square matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigRational::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigRational::one();
        }
        Self { dim, entries }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(LinalgError::NotSquare);
        }
        Ok(Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &BigRational {
        &self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<BigRational>> {
        self.entries
            .chunks(self.dim)
            .map(<[BigRational]>::to_vec)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = BigRational::zero();
                for k in 0..d {
                    acc += self.get(i, k) * other.get(k, j);
                }
                entries.push(acc);
            }
        }
        Self { dim: d, entries }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = self.entries.clone();
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.get(i, j).clone();
            }
        }
        Self { dim: d, entries }
    }

    pub fn mul_int_vec(&self, v: &[i64]) -> Vec<BigRational> {
        self.entries
            .chunks(self.dim)
            .map(|row| {
                row.iter().zip(v).fold(BigRational::zero(), |acc, (a, &b)| {
                    acc + a * BigInt::from(b)
                })
            })
            .collect()
    }

    /// Gauss-Jordan inverse over the rationals.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let d = self.dim;
        let mut a = self.rows();
        let mut inv = Self::identity(d).rows();
        for col in 0..d {
            let pivot = (col..d)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(LinalgError::SingularMatrix)?;
            a.swap(pivot, col);
            inv.swap(pivot, col);
            let p = a[col][col].clone();
            for j in 0..d {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for r in 0..d {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..d {
                    let t = &f * &a[col][j];
                    a[r][j] -= t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= t;
                }
            }
        }
        Self::from_rows(inv)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.dim, self.dim, self.entries.iter().map(rational_to_f64))
    }
}

pub(crate) fn rational_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        if v.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Reduced row echelon form in place; returns pivot columns.
pub(crate) fn rational_rref(rows: &mut [Vec<BigRational>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(p, r);
        let pv = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = &*v / &pv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot = rows[r].clone();
                for (v, p) in rows[i].iter_mut().zip(&pivot) {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a list of equal-length rational vectors.
pub(crate) fn rational_rank(vectors: &[Vec<BigRational>]) -> usize {
    let mut rows = vectors.to_vec();
    rational_rref(&mut rows).len()
}

/// Basis of the right null space, one vector per free column.
pub(crate) fn rational_null_space(m: &RationalMatrix) -> Vec<Vec<BigRational>> {
    let d = m.dim;
    let mut rows = m.rows();
    let pivots = rational_rref(&mut rows);
    let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); d];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[row][f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Leibniz expansion, independent of the Bareiss path.
    fn leibniz(m: &IntMatrix) -> i128 {
        fn perms(n: usize) -> Vec<(Vec<usize>, i128)> {
            if n == 1 {
                return vec![(vec![0], 1)];
            }
            let mut out = Vec::new();
            for (p, s) in perms(n - 1) {
                for pos in 0..n {
                    let mut np = p.clone();
                    np.insert(pos, n - 1);
                    let sign = if (n - 1 - pos).is_multiple_of(2) {
                        s
                    } else {
                        -s
                    };
                    out.push((np, sign));
                }
            }
            out
        }
        perms(m.dim())
            .into_iter()
            .map(|(p, s)| {
                s * p
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| m.get(i, j) as i128)
                    .product::<i128>()
            })
            .sum()
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&IntMatrix::identity(2)), BigInt::from(1));
        assert_eq!(determinant(&IntMatrix::diagonal(&[2, 2])), BigInt::from(4));
        let a = IntMatrix::new(vec![vec![0, 1], vec![3, 1]]).unwrap();
        assert_eq!(determinant(&a), BigInt::from(-3));
    }

    #[test]
    fn determinant_matches_leibniz() {
        let cases = [
            vec![vec![0, 2, 1], vec![3, 0, -1], vec![1, 1, 0]],
            vec![
                vec![2, 1, 0, 0],
                vec![1, 2, 1, 0],
                vec![0, 1, 2, 1],
                vec![0, 0, 1, 2],
            ],
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]],
        ];
        for rows in cases {
            let m = IntMatrix::new(rows).unwrap();
            assert_eq!(determinant(&m), BigInt::from(leibniz(&m)), "{m:?}");
        }
    }

    #[test]
    fn inverse_examples() {
        assert!(inverse(&IntMatrix::identity(3)).unwrap().is_identity());
        let half = inverse(&IntMatrix::diagonal(&[2, 2])).unwrap();
        assert_eq!(half.get(0, 0), &q(1, 2));
        assert_eq!(half.get(0, 1), &q(0, 1));
        let a = IntMatrix::new(vec![vec![0, 1], vec![3, 1]]).unwrap();
        let inv = inverse(&a).unwrap();
        assert_eq!(
            inv.rows(),
            vec![vec![q(-1, 3), q(1, 3)], vec![q(1, 1), q(0, 1)]]
        );
        assert!(inv.mul(&a.to_rational()).is_identity());
    }

    #[test]
    fn singular_inverse_rejected() {
        let s = IntMatrix::new(vec![vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(inverse(&s), Err(LinalgError::SingularMatrix));
        assert_eq!(determinant(&s), BigInt::zero());
    }

    #[test]
    fn non_square_rejected() {
        assert_eq!(
            IntMatrix::new(vec![vec![1, 2]]),
            Err(LinalgError::NotSquare)
        );
        assert_eq!(IntMatrix::new(vec![]), Err(LinalgError::NotSquare));
    }

    #[test]
    fn power_inverse_norm_diagonal() {
        let n = power_inverse_norm(&IntMatrix::diagonal(&[2, 2]), 3).unwrap();
        assert_eq!(n, 0.125);
    }

    #[test]
    fn null_space_of_jordan_nilpotent() {
        let n = IntMatrix::new(vec![vec![0, 0], vec![1, 0]])
            .unwrap()
            .to_rational();
        let ns = rational_null_space(&n);
        assert_eq!(ns, vec![vec![q(0, 1), q(1, 1)]]);
        assert_eq!(rational_rank(&n.rows()), 1);
    }
}
