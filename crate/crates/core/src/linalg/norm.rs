use nalgebra::DMatrix;

use super::RationalMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// in ascending order.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "symmetric_eigenvalues needs a square matrix");
    let mut a = a.clone();
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Operator norm `max √λ(A·Aᵀ)`, the largest singular value.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = a * a.transpose();
    symmetric_eigenvalues(&gram)
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

pub fn operator_norm_rational(a: &RationalMatrix) -> f64 {
    operator_norm(&a.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inverse, IntMatrix};

    #[test]
    fn identity_norm_is_exactly_one() {
        assert_eq!(operator_norm(&DMatrix::identity(4, 4)), 1.0);
    }

    #[test]
    fn diagonal_norm() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        assert!((operator_norm(&d) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn companion_inverse_norm() {
        let a = IntMatrix::new(vec![vec![0, 1], vec![3, 1]]).unwrap();
        let n = operator_norm_rational(&inverse(&a).unwrap());
        // 1.1233 is the largest eigenvalue of M⁻¹M⁻ᵀ, which is n² rather than n
        assert!((n * n - 1.1233).abs() < 1e-3, "{n}");
        assert!((n - 1.0599).abs() < 1e-3, "{n}");
        // independent route: singular values from nalgebra's SVD
        let svd = inverse(&a).unwrap().to_f64().singular_values();
        assert!((n - svd.max()).abs() < 1e-12 * n);
    }

    #[test]
    fn jacobi_matches_closed_form_2x2() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let e = symmetric_eigenvalues(&a);
        let s5 = 5f64.sqrt();
        assert!((e[0] - (5.0 - s5) / 2.0).abs() < 1e-14);
        assert!((e[1] - (5.0 + s5) / 2.0).abs() < 1e-14);
    }
}
