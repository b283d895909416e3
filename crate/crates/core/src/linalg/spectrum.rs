use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::{
    characteristic_polynomial, determinant, polynomial_roots, IntMatrix, LinalgError,
    RationalPolynomial,
};

/// Relative bound on `|Im λ|` below which an eigenvalue counts as real.
pub const REALNESS_TOLERANCE: f64 = 1e-8;

/// Eigenvalue moduli must exceed `1 + DILATION_TOLERANCE`.
pub const DILATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DistinctEigenvalue {
    pub value: Complex64,
    /// Algebraic multiplicity, exact (from the square-free factorization).
    pub multiplicity: usize,
    /// Set when the eigenvalue is an integer, verified by exact evaluation.
    pub integer: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// All `d` eigenvalues with multiplicity, sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    pub all_real: bool,
    pub distinct: Vec<DistinctEigenvalue>,
    /// Exact characteristic polynomial, ascending coefficients.
    pub characteristic: Vec<BigInt>,
}

impl Spectrum {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues as roots of the exact characteristic polynomial. Repeated
/// roots are split off exactly by square-free factorization, so every
/// numerical root solve works on a polynomial with simple roots.
pub fn eigenvalues(m: &IntMatrix) -> Result<Spectrum, LinalgError> {
    let characteristic = characteristic_polynomial(m);
    let poly = RationalPolynomial::from_integers(&characteristic);
    let mut distinct = Vec::new();
    for (factor, multiplicity) in poly.squarefree_decomposition() {
        for root in polynomial_roots(&factor.to_f64())? {
            let mut value = root;
            if value.im.abs() <= REALNESS_TOLERANCE * value.norm().max(1.0) {
                value.im = 0.0;
            }
            let integer = exact_integer_root(&factor, value);
            if let Some(n) = integer {
                value = Complex64::new(n as f64, 0.0);
            }
            distinct.push(DistinctEigenvalue {
                value,
                multiplicity,
                integer,
            });
        }
    }
    distinct.sort_by(|a, b| {
        b.value
            .re
            .total_cmp(&a.value.re)
            .then(b.value.im.total_cmp(&a.value.im))
    });
    let eigenvalues = distinct
        .iter()
        .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
        .collect::<Vec<_>>();
    let all_real = eigenvalues.iter().all(|z| z.im == 0.0);
    Ok(Spectrum {
        eigenvalues,
        all_real,
        distinct,
        characteristic,
    })
}

fn exact_integer_root(factor: &RationalPolynomial, z: Complex64) -> Option<i64> {
    if z.im != 0.0 {
        return None;
    }
    let n = z.re.round();
    if (z.re - n).abs() > 1e-6 || n.abs() > 1e15 {
        return None;
    }
    let n = n as i64;
    factor
        .eval(&BigRational::from_integer(n.into()))
        .is_zero()
        .then_some(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilationReport {
    pub is_dilation: bool,
    pub determinant: BigInt,
    /// Eigenvalues with modulus not exceeding `1 + DILATION_TOLERANCE`.
    pub offending: Vec<Complex64>,
    pub reason: Option<String>,
}

/// Dilation test: nonzero determinant and every eigenvalue modulus above one.
pub fn is_dilation(m: &IntMatrix) -> DilationReport {
    let det = determinant(m);
    if det.is_zero() {
        return DilationReport {
            is_dilation: false,
            determinant: det,
            offending: Vec::new(),
            reason: Some("determinant is zero".into()),
        };
    }
    match eigenvalues(m) {
        Ok(spectrum) => {
            let offending: Vec<Complex64> = spectrum
                .eigenvalues
                .iter()
                .copied()
                .filter(|z| z.norm() <= 1.0 + DILATION_TOLERANCE)
                .collect();
            let reason = (!offending.is_empty()).then(|| {
                let list: Vec<String> = offending.iter().map(|z| format_complex(*z)).collect();
                format!("eigenvalue modulus <= 1: {}", list.join(", "))
            });
            DilationReport {
                is_dilation: offending.is_empty(),
                determinant: det,
                offending,
                reason,
            }
        }
        Err(e) => DilationReport {
            is_dilation: false,
            determinant: det,
            offending: Vec::new(),
            reason: Some(e.to_string()),
        },
    }
}

pub(crate) fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn companion_eigenvalues() {
        let s = eigenvalues(&mat(&[&[0, 1], &[3, 1]])).unwrap();
        assert!(s.all_real);
        assert!((s.eigenvalues[0].re - 2.3028).abs() < 1e-3);
        assert!((s.eigenvalues[1].re + 1.3028).abs() < 1e-3);
        let r13 = 13f64.sqrt();
        assert!((s.eigenvalues[0].re - (1.0 + r13) / 2.0).abs() < 1e-12);
        assert!((s.eigenvalues[1].re - (1.0 - r13) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_triangular_eigenvalue() {
        let s = eigenvalues(&mat(&[&[2, 0], &[1, 2]])).unwrap();
        assert!(s.all_real);
        assert_eq!(s.eigenvalues, vec![Complex64::new(2.0, 0.0); 2]);
        assert_eq!(s.distinct.len(), 1);
        assert_eq!(s.distinct[0].multiplicity, 2);
        assert_eq!(s.distinct[0].integer, Some(2));
    }

    #[test]
    fn complex_pair_not_real() {
        let s = eigenvalues(&mat(&[&[1, 1], &[-1, 1]])).unwrap();
        assert!(!s.all_real);
        assert!((s.eigenvalues[0] - Complex64::new(1.0, 1.0)).norm() < 1e-12);
        assert!((s.eigenvalues[1] - Complex64::new(1.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn dilation_verdicts() {
        assert!(is_dilation(&mat(&[&[0, 1], &[3, 1]])).is_dilation);
        let id = is_dilation(&IntMatrix::identity(2));
        assert!(!id.is_dilation);
        assert_eq!(id.offending.len(), 2);
        let tri = is_dilation(&mat(&[&[1, 1], &[0, 2]]));
        assert!(!tri.is_dilation);
        assert_eq!(tri.offending, vec![Complex64::new(1.0, 0.0)]);
        let singular = is_dilation(&mat(&[&[2, 4], &[1, 2]]));
        assert!(!singular.is_dilation);
        assert!(is_dilation(&mat(&[&[1, 1], &[1, -1]])).is_dilation);
    }
}
