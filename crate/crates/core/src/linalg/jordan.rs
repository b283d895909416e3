//! Real Jordan structure `M = C·G·C⁻¹`.
//!
//! `G` is block diagonal; each block of size `s` carries its eigenvalue on
//! the diagonal and ones on the subdiagonal, so the first coordinate of a
//! block is mapped independently of the others. The columns of `C` for one
//! block form a chain `c₁, N·c₁, …, N^{s−1}·c₁` with `N = M − λI`, ending in
//! an eigenvector.
//!
//! Integer eigenvalues are handled in exact rational arithmetic; the other
//! real eigenvalues use singular-value rank tests.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;

use super::{
    condition_number, eigenvalues, null_space, numerical_rank, operator_norm, rational_null_space,
    rational_rank, rational_to_f64, IntMatrix, LinalgError, RationalMatrix, Spectrum,
};

/// Largest accepted condition number of the transform `C`.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Relative bound on `‖C·G·C⁻¹ − M‖∞ / ‖M‖∞`.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;

const RANK_TOLERANCE: f64 = 1e-9;
const INDEPENDENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlock {
    pub eigenvalue: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanStructure {
    pub blocks: Vec<JordanBlock>,
    pub transform: DMatrix<f64>,
    pub transform_inverse: DMatrix<f64>,
    pub condition: f64,
}

impl JordanStructure {
    pub fn dim(&self) -> usize {
        self.transform.nrows()
    }

    /// The block-diagonal matrix `G`.
    pub fn jordan_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        let mut offset = 0;
        for block in &self.blocks {
            for i in 0..block.size {
                g[(offset + i, offset + i)] = block.eigenvalue;
                if i > 0 {
                    g[(offset + i, offset + i - 1)] = 1.0;
                }
            }
            offset += block.size;
        }
        g
    }

    /// `‖C·G·C⁻¹ − M‖∞`.
    pub fn reconstruction_residual(&self, m: &IntMatrix) -> f64 {
        let r = &self.transform * self.jordan_matrix() * &self.transform_inverse - m.to_f64();
        r.row_iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn real_jordan_structure(m: &IntMatrix) -> Result<JordanStructure, LinalgError> {
    let spectrum = eigenvalues(m)?;
    real_jordan_structure_with(m, &spectrum)
}

/// As [`real_jordan_structure`], reusing an already computed spectrum.
pub fn real_jordan_structure_with(
    m: &IntMatrix,
    spectrum: &Spectrum,
) -> Result<JordanStructure, LinalgError> {
    if let Some(z) = spectrum.eigenvalues.iter().find(|z| z.im != 0.0) {
        return Err(LinalgError::ComplexSpectrum { re: z.re, im: z.im });
    }
    let d = m.dim();
    let mut chains: Vec<(f64, Vec<DVector<f64>>)> = Vec::new();
    for ev in &spectrum.distinct {
        let lambda = ev.value.re;
        let found = match ev.integer {
            Some(n) => {
                let exact = ExactArithmetic::new(m, n);
                jordan_chains(&exact, d, ev.multiplicity, lambda)?
                    .into_iter()
                    .map(|c| c.iter().map(|v| exact.to_f64(v)).collect())
                    .collect::<Vec<_>>()
            }
            None => {
                let float = FloatArithmetic::new(m, lambda);
                jordan_chains(&float, d, ev.multiplicity, lambda)?
                    .into_iter()
                    .map(normalize_chain)
                    .collect()
            }
        };
        chains.extend(found.into_iter().map(|c| (lambda, c)));
    }
    // Order blocks by the dominant coordinate of their leading vector so that
    // diagonal input yields the identity transform.
    chains.sort_by_key(|(_, c)| dominant_index(&c[0]));

    let columns: Vec<DVector<f64>> = chains.iter().flat_map(|(_, c)| c.iter().cloned()).collect();
    let transform = DMatrix::from_columns(&columns);
    let condition = condition_number(&transform);
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(LinalgError::IllConditionedTransform {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let transform_inverse =
        transform
            .clone()
            .try_inverse()
            .ok_or(LinalgError::IllConditionedTransform {
                condition: f64::INFINITY,
                limit: CONDITION_LIMIT,
            })?;
    let structure = JordanStructure {
        blocks: chains
            .iter()
            .map(|(lambda, c)| JordanBlock {
                eigenvalue: *lambda,
                size: c.len(),
            })
            .collect(),
        transform,
        transform_inverse,
        condition,
    };
    let tolerance = RECONSTRUCTION_TOLERANCE * m.inf_norm().max(1.0);
    let residual = structure.reconstruction_residual(m);
    if residual.is_nan() || residual > tolerance {
        return Err(LinalgError::ReconstructionFailure {
            residual,
            tolerance,
        });
    }
    Ok(structure)
}

fn dominant_index(v: &DVector<f64>) -> usize {
    let max = v.amax();
    v.iter().position(|x| x.abs() == max).unwrap_or(0)
}

/// Unit leading vector with a positive dominant entry.
fn normalize_chain(chain: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let lead = &chain[0];
    let mut scale = lead.norm();
    if lead[dominant_index(lead)] < 0.0 {
        scale = -scale;
    }
    chain.into_iter().map(|v| v / scale).collect()
}

/// Operations the chain construction needs, over an exact or a floating
/// field.
trait ChainArithmetic {
    type Vector: Clone;
    type Matrix;

    fn power(&self, k: usize) -> Self::Matrix;
    fn rank(&self, m: &Self::Matrix) -> usize;
    fn kernel(&self, m: &Self::Matrix) -> Vec<Self::Vector>;
    /// `N·v`.
    fn apply(&self, v: &Self::Vector) -> Self::Vector;
    /// Index of a candidate outside `span(basis)`.
    fn pick_independent(
        &self,
        basis: &[Self::Vector],
        candidates: &[Self::Vector],
    ) -> Option<usize>;
}

/// Chains for one eigenvalue, longest first; each chain is ordered from the
/// top generalized eigenvector down to the eigenvector.
fn jordan_chains<A: ChainArithmetic>(
    a: &A,
    d: usize,
    multiplicity: usize,
    eigenvalue: f64,
) -> Result<Vec<Vec<A::Vector>>, LinalgError> {
    let mismatch = |found| LinalgError::JordanRankMismatch {
        eigenvalue,
        expected: multiplicity,
        found,
    };
    let mut ranks = vec![d];
    for k in 1..=multiplicity + 1 {
        ranks.push(a.rank(&a.power(k)));
    }
    let generalized = d.saturating_sub(ranks[multiplicity]);
    if generalized != multiplicity || ranks.windows(2).any(|w| w[1] > w[0]) {
        return Err(mismatch(generalized));
    }
    // Number of blocks of size ≥ k.
    let at_least = |k: usize| ranks[k - 1] - ranks[k];

    let mut chains: Vec<Vec<A::Vector>> = Vec::new();
    for size in (1..=multiplicity).rev() {
        let count = at_least(size) - at_least(size + 1);
        if count == 0 {
            continue;
        }
        let mut span = if size > 1 {
            a.kernel(&a.power(size - 1))
        } else {
            Vec::new()
        };
        span.extend(chains.iter().map(|c| c[c.len() - size].clone()));
        let candidates = a.kernel(&a.power(size));
        for _ in 0..count {
            let idx = a
                .pick_independent(&span, &candidates)
                .ok_or_else(|| mismatch(chains.iter().map(Vec::len).sum()))?;
            let top = candidates[idx].clone();
            span.push(top.clone());
            let mut chain = vec![top];
            for _ in 1..size {
                let next = a.apply(chain.last().unwrap());
                chain.push(next);
            }
            chains.push(chain);
        }
    }
    let total: usize = chains.iter().map(Vec::len).sum();
    if total != multiplicity {
        return Err(mismatch(total));
    }
    Ok(chains)
}

struct ExactArithmetic {
    nilpotent: RationalMatrix,
}

impl ExactArithmetic {
    fn new(m: &IntMatrix, lambda: i64) -> Self {
        let d = m.dim();
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let v = m.get(i, j) - if i == j { lambda } else { 0 };
                        BigRational::from_integer(v.into())
                    })
                    .collect()
            })
            .collect();
        Self {
            nilpotent: RationalMatrix::from_rows(rows).expect("square"),
        }
    }

    fn to_f64(&self, v: &[BigRational]) -> DVector<f64> {
        DVector::from_iterator(v.len(), v.iter().map(rational_to_f64))
    }
}

impl ChainArithmetic for ExactArithmetic {
    type Vector = Vec<BigRational>;
    type Matrix = RationalMatrix;

    fn power(&self, k: usize) -> RationalMatrix {
        self.nilpotent.pow(k as u32)
    }

    fn rank(&self, m: &RationalMatrix) -> usize {
        rational_rank(&m.rows())
    }

    fn kernel(&self, m: &RationalMatrix) -> Vec<Vec<BigRational>> {
        rational_null_space(m)
    }

    fn apply(&self, v: &Vec<BigRational>) -> Vec<BigRational> {
        let d = self.nilpotent.dim();
        (0..d)
            .map(|i| {
                (0..d).fold(BigRational::zero(), |acc, j| {
                    acc + self.nilpotent.get(i, j) * &v[j]
                })
            })
            .collect()
    }

    fn pick_independent(
        &self,
        basis: &[Vec<BigRational>],
        candidates: &[Vec<BigRational>],
    ) -> Option<usize> {
        let base_rank = rational_rank(basis);
        candidates.iter().position(|c| {
            let mut with = basis.to_vec();
            with.push(c.clone());
            rational_rank(&with) > base_rank
        })
    }
}

struct FloatArithmetic {
    nilpotent: DMatrix<f64>,
}

impl FloatArithmetic {
    fn new(m: &IntMatrix, lambda: f64) -> Self {
        let d = m.dim();
        Self {
            nilpotent: m.to_f64() - DMatrix::identity(d, d) * lambda,
        }
    }

    fn tolerance(m: &DMatrix<f64>) -> f64 {
        RANK_TOLERANCE * operator_norm(m)
    }
}

impl ChainArithmetic for FloatArithmetic {
    type Vector = DVector<f64>;
    type Matrix = DMatrix<f64>;

    fn power(&self, k: usize) -> DMatrix<f64> {
        let d = self.nilpotent.nrows();
        (0..k).fold(DMatrix::identity(d, d), |acc, _| acc * &self.nilpotent)
    }

    fn rank(&self, m: &DMatrix<f64>) -> usize {
        let tol = Self::tolerance(m);
        if tol == 0.0 {
            return 0;
        }
        numerical_rank(m, tol)
    }

    fn kernel(&self, m: &DMatrix<f64>) -> Vec<DVector<f64>> {
        null_space(m, Self::tolerance(m))
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.nilpotent * v
    }

    fn pick_independent(
        &self,
        basis: &[DVector<f64>],
        candidates: &[DVector<f64>],
    ) -> Option<usize> {
        let ortho = orthonormalize(basis);
        candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut r = c.clone();
                for q in &ortho {
                    r -= q * q.dot(&r);
                }
                (i, r.norm() / c.norm().max(f64::MIN_POSITIVE))
            })
            .filter(|&(_, res)| res > INDEPENDENCE_TOLERANCE)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass; drops
/// numerically dependent vectors.
fn orthonormalize(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let norm0 = v.norm();
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &out {
                r -= q * q.dot(&r);
            }
        }
        let n = r.norm();
        if n > INDEPENDENCE_TOLERANCE * norm0 {
            out.push(r / n);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn diagonal_gives_identity_transform() {
        let j = real_jordan_structure(&IntMatrix::diagonal(&[2, 3])).unwrap();
        let sizes: Vec<(f64, usize)> = j.blocks.iter().map(|b| (b.eigenvalue, b.size)).collect();
        assert_eq!(sizes, vec![(2.0, 1), (3.0, 1)]);
        assert_eq!(j.transform, DMatrix::identity(2, 2));
        let j = real_jordan_structure(&IntMatrix::diagonal(&[4, 2, 4])).unwrap();
        assert_eq!(j.transform, DMatrix::identity(3, 3));
        assert_eq!(j.blocks[1].eigenvalue, 2.0);
    }

    #[test]
    fn defective_block() {
        let m = mat(&[&[2, 0], &[1, 2]]);
        let j = real_jordan_structure(&m).unwrap();
        assert_eq!(
            j.blocks,
            vec![JordanBlock {
                eigenvalue: 2.0,
                size: 2
            }]
        );
        assert_eq!(j.jordan_matrix(), m.to_f64());
        assert_eq!(j.reconstruction_residual(&m), 0.0);
    }

    #[test]
    fn complex_spectrum_rejected() {
        let err = real_jordan_structure(&mat(&[&[1, 1], &[-1, 1]])).unwrap_err();
        assert!(matches!(err, LinalgError::ComplexSpectrum { .. }));
    }

    #[test]
    fn irrational_eigenvalues() {
        let m = mat(&[&[0, 1], &[3, 1]]);
        let j = real_jordan_structure(&m).unwrap();
        assert_eq!(j.blocks.len(), 2);
        assert!(j.reconstruction_residual(&m) <= 1e-8 * m.inf_norm());
    }

    #[test]
    fn mixed_blocks_with_rank_sequence() {
        // Similar to J₃(2) ⊕ J₁(2) ⊕ J₁(3) under an integer unimodular change of basis.
        let g = mat(&[
            &[2, 0, 0, 0, 0],
            &[1, 2, 0, 0, 0],
            &[0, 1, 2, 0, 0],
            &[0, 0, 0, 2, 0],
            &[0, 0, 0, 0, 3],
        ]);
        let p = mat(&[
            &[1, 1, 0, 0, 0],
            &[0, 1, 1, 0, 0],
            &[0, 0, 1, 1, 0],
            &[0, 0, 0, 1, 1],
            &[0, 0, 0, 0, 1],
        ]);
        let p_inv = crate::linalg::inverse(&p).unwrap();
        let m_rat = p.to_rational().mul(&g.to_rational()).mul(&p_inv);
        let rows: Vec<Vec<i64>> = m_rat
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .map(|v| v.to_integer().try_into().unwrap())
                    .collect()
            })
            .collect();
        let m = IntMatrix::new(rows).unwrap();
        let j = real_jordan_structure(&m).unwrap();
        let mut sizes: Vec<(i64, usize)> = j
            .blocks
            .iter()
            .map(|b| (b.eigenvalue as i64, b.size))
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![(2, 1), (2, 3), (3, 1)]);
        assert!(j.reconstruction_residual(&m) <= 1e-8 * m.inf_norm());
    }

    #[test]
    fn repeated_irrational_block_uses_float_path() {
        // Companion of (x² − 2)², which is non-derogatory: J₂(√2) ⊕ J₂(−√2).
        let m = mat(&[&[0, 0, 0, -4], &[1, 0, 0, 0], &[0, 1, 0, 4], &[0, 0, 1, 0]]);
        let j = real_jordan_structure(&m).unwrap();
        assert!(j.blocks.iter().all(|b| b.size == 2));
        assert!(j.reconstruction_residual(&m) <= 1e-8 * m.inf_norm());
    }
}
