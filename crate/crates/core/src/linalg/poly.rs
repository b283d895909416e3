use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{rational_to_f64, IntMatrix};

/// Characteristic polynomial `det(λI − M)` by Faddeev–LeVerrier, in exact
/// integer arithmetic. Coefficients are in ascending order; the result is
/// monic of degree `d`.
pub fn characteristic_polynomial(m: &IntMatrix) -> Vec<BigInt> {
    let d = m.dim();
    let a: Vec<Vec<BigInt>> = m
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::one();
    // Running matrix M_k; M_0 = 0.
    let mut mk = vec![vec![BigInt::zero(); d]; d];
    for k in 1..=d {
        // M_k = A·M_{k−1} + c_{d−k+1}·I
        let mut next = matmul(&a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[d - k + 1];
        }
        mk = next;
        let am = matmul(&a, &mk);
        let trace: BigInt = (0..d).map(|i| am[i][i].clone()).sum();
        coeffs[d - k] = -trace / BigInt::from(k);
    }
    coeffs
}

fn matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let d = a.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Polynomial with rational coefficients, ascending order, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolynomial(Vec<BigRational>);

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn from_integers(coeffs: &[BigInt]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        match self.0.last() {
            Some(lead) => Self(self.0.iter().map(|c| c / lead).collect()),
            None => self.clone(),
        }
    }

    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dd = divisor.degree();
        let lead = divisor.0.last().unwrap();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (Self(Vec::new()), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let f = &rem[i + dd] / lead;
            if !f.is_zero() {
                for (j, c) in divisor.0.iter().enumerate() {
                    let t = &f * c;
                    rem[i + j] -= t;
                }
            }
            quot[i] = f;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self::new(
            (0..n)
                .map(|i| {
                    let a = self.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    let b = other.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    a - b
                })
                .collect(),
        )
    }

    /// Yun's square-free decomposition: non-constant monic factors with
    /// their multiplicities, whose product (with multiplicity) is the monic
    /// input.
    pub fn squarefree_decomposition(&self) -> Vec<(Self, usize)> {
        let f = self.monic();
        if f.degree() == 0 {
            return Vec::new();
        }
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut multiplicity = 1;
        while b.degree() > 0 {
            let a = b.gcd(&d);
            let nb = b.div_rem(&a).0;
            let nc = d.div_rem(&a).0;
            if a.degree() > 0 {
                out.push((a, multiplicity));
            }
            d = nc.sub(&nb.derivative());
            b = nb;
            multiplicity += 1;
        }
        out
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.to_f64()
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn charpoly_of_companion() {
        let a = IntMatrix::new(vec![vec![0, 1], vec![3, 1]]).unwrap();
        // λ² − λ − 3
        assert_eq!(characteristic_polynomial(&a), ints(&[-3, -1, 1]));
    }

    #[test]
    fn charpoly_trace_and_determinant_coefficients() {
        let a = IntMatrix::new(vec![vec![2, 1, 0], vec![-1, 3, 2], vec![4, 0, 1]]).unwrap();
        let p = characteristic_polynomial(&a);
        assert_eq!(p[3], BigInt::from(1));
        assert_eq!(p[2], BigInt::from(-a.trace()));
        // constant term is (−1)^d det
        assert_eq!(p[0], -super::super::determinant(&a));
    }

    #[test]
    fn squarefree_of_repeated_roots() {
        // (x − 2)³(x + 1) = x⁴ − 5x³ + 6x² + 4x − 8
        let p = RationalPolynomial::from_integers(&ints(&[-8, 4, 6, -5, 1]));
        let sf = p.squarefree_decomposition();
        assert_eq!(sf.len(), 2);
        assert_eq!(
            sf[0],
            (RationalPolynomial::from_integers(&ints(&[1, 1])), 1)
        );
        assert_eq!(
            sf[1],
            (RationalPolynomial::from_integers(&ints(&[-2, 1])), 3)
        );
    }

    #[test]
    fn gcd_is_monic() {
        let a = RationalPolynomial::from_integers(&ints(&[-2, 0, 2])); // 2(x²−1)
        let b = RationalPolynomial::from_integers(&ints(&[3, 3])); // 3(x+1)
        assert_eq!(a.gcd(&b), RationalPolynomial::from_integers(&ints(&[1, 1])));
    }
}
