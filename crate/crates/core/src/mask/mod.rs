//! Finitely supported masks, dilation matrices and the problem document.

mod coset;
mod document;
mod problem;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{rational_to_f64, LinalgError};

pub use coset::{coset_representative, coset_sum_report, digit_set, CosetReport, CosetSum};
pub use document::{parse_problem, CoefficientRecord, ProblemDocument};
pub use problem::{DilationMatrix, Problem};

/// Allowed deviation of `Σ c_q` from one for decimal input.
pub const MASK_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {what} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("matrix is not a dilation matrix: {reason}")]
    NotDilation { reason: String },
    #[error("mask coefficients sum to {sum}, expected 1")]
    MaskSumViolation { sum: f64 },
    #[error("mask has no nonzero coefficients")]
    EmptyMask,
    #[error("translation {q:?} appears more than once")]
    DuplicateIndex { q: Vec<i64> },
    #[error("invalid coefficient {literal:?}: {reason}")]
    InvalidCoefficient { literal: String, reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A mask coefficient: its exact rational value, the nearest `f64`, and the
/// literal it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    exact: BigRational,
    value: f64,
    literal: String,
    fraction: bool,
    quoted: bool,
}

impl Coefficient {
    /// `"p/q"` or an integer, held exactly.
    pub fn fraction(numerator: i64, denominator: i64) -> Self {
        let exact = BigRational::new(numerator.into(), denominator.into());
        let literal = if exact.denom().is_one() {
            exact.numer().to_string()
        } else {
            format!("{}/{}", exact.numer(), exact.denom())
        };
        Self {
            value: rational_to_f64(&exact),
            exact,
            literal,
            fraction: true,
            quoted: true,
        }
    }

    /// A decimal literal such as `0.4829629131445341` or `-1.5e-3`.
    pub fn decimal(literal: &str) -> Result<Self, ProblemError> {
        let exact = parse_decimal(literal).ok_or_else(|| ProblemError::InvalidCoefficient {
            literal: literal.to_string(),
            reason: "not a decimal number".into(),
        })?;
        let value: f64 = literal
            .trim()
            .parse()
            .map_err(|_| ProblemError::InvalidCoefficient {
                literal: literal.to_string(),
                reason: "not representable as f64".into(),
            })?;
        Ok(Self {
            exact,
            value,
            literal: literal.trim().to_string(),
            fraction: false,
            quoted: false,
        })
    }

    /// A string literal: `"p/q"`, an integer, or a decimal.
    pub fn parse_text(literal: &str) -> Result<Self, ProblemError> {
        let text = literal.trim();
        let invalid = |reason: &str| ProblemError::InvalidCoefficient {
            literal: literal.to_string(),
            reason: reason.into(),
        };
        let (num, den) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text, "1"),
        };
        match (num.parse::<BigInt>(), den.parse::<BigInt>()) {
            (Ok(n), Ok(d)) => {
                if d.is_zero() {
                    return Err(invalid("zero denominator"));
                }
                let exact = BigRational::new(n, d);
                Ok(Self {
                    value: rational_to_f64(&exact),
                    exact,
                    literal: text.to_string(),
                    fraction: true,
                    quoted: true,
                })
            }
            _ if !text.contains('/') => {
                let mut c = Self::decimal(text)?;
                c.quoted = true;
                Ok(c)
            }
            _ => Err(invalid("expected p/q with integer p and q")),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn literal(&self) -> &str {
        &self.literal
    }

    /// True when given as `"p/q"` or an integer string.
    pub fn is_fraction(&self) -> bool {
        self.fraction
    }

    pub(crate) fn is_quoted(&self) -> bool {
        self.quoted
    }
}

/// Exact value of a decimal literal with optional exponent.
fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Finite map `q ↦ c_q` over `ℤᵈ`, holding only nonzero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    dim: usize,
    entries: BTreeMap<Vec<i64>, Coefficient>,
}

impl Mask {
    /// Validated mask: nonempty support and `Σ c_q = 1` (exactly when every
    /// coefficient is a fraction, within `MASK_SUM_TOLERANCE` otherwise).
    pub fn new(
        dim: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, Coefficient)>,
    ) -> Result<Self, ProblemError> {
        let mask = Self::unnormalized(dim, entries)?;
        let sum = mask.exact_sum();
        let ok = if mask.all_fractions() {
            sum.is_one()
        } else {
            (&sum - BigRational::one()).abs()
                <= BigRational::from_float(MASK_SUM_TOLERANCE).expect("finite")
        };
        if !ok {
            return Err(ProblemError::MaskSumViolation {
                sum: rational_to_f64(&sum),
            });
        }
        Ok(mask)
    }

    /// Mask without the sum condition; still rejects empty support and
    /// duplicate translations.
    pub fn unnormalized(
        dim: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, Coefficient)>,
    ) -> Result<Self, ProblemError> {
        let mut map = BTreeMap::new();
        for (q, c) in entries {
            if q.len() != dim {
                return Err(ProblemError::DimensionMismatch {
                    what: format!("translation {q:?}"),
                    expected: dim,
                    found: q.len(),
                });
            }
            if map.contains_key(&q) {
                return Err(ProblemError::DuplicateIndex { q });
            }
            map.insert(q, c);
        }
        map.retain(|_, c| !c.exact.is_zero());
        if map.is_empty() {
            return Err(ProblemError::EmptyMask);
        }
        Ok(Self { dim, entries: map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lexicographic order of `q`.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Coefficient)> {
        self.entries.iter()
    }

    /// The support `Ω`.
    pub fn support(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.entries.keys()
    }

    pub fn get(&self, q: &[i64]) -> Option<&Coefficient> {
        self.entries.get(q)
    }

    /// `c_q` as `f64`, zero off the support.
    pub fn value(&self, q: &[i64]) -> f64 {
        self.entries.get(q).map_or(0.0, Coefficient::value)
    }

    pub fn exact_sum(&self) -> BigRational {
        self.entries.values().map(|c| c.exact.clone()).sum()
    }

    pub fn all_fractions(&self) -> bool {
        self.entries.values().all(Coefficient::is_fraction)
    }

    /// `Q = max_{q∈Ω} |q|`.
    pub fn radius(&self) -> f64 {
        self.entries
            .keys()
            .map(|q| euclidean_norm_int(q))
            .fold(0.0, f64::max)
    }

    /// Per-coordinate minimum and maximum of the support.
    pub fn support_hull(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = vec![i64::MAX; self.dim];
        let mut hi = vec![i64::MIN; self.dim];
        for q in self.entries.keys() {
            for i in 0..self.dim {
                lo[i] = lo[i].min(q[i]);
                hi[i] = hi[i].max(q[i]);
            }
        }
        (lo, hi)
    }
}

/// `max_{q∈Ω} |q|`.
pub fn mask_radius(mask: &Mask) -> f64 {
    mask.radius()
}

pub(crate) fn euclidean_norm_int(q: &[i64]) -> f64 {
    euclidean_norm(&q.iter().map(|&v| v as f64).collect::<Vec<_>>())
}

pub(crate) fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(n: i64, d: i64) -> Coefficient {
        Coefficient::fraction(n, d)
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(
            parse_decimal("0.5"),
            Some(BigRational::new(1.into(), 2.into()))
        );
        assert_eq!(
            parse_decimal("-1.25e-1"),
            Some(BigRational::new((-1).into(), 8.into()))
        );
        assert_eq!(
            parse_decimal("3E2"),
            Some(BigRational::from_integer(300.into()))
        );
        assert_eq!(
            parse_decimal(".5"),
            Some(BigRational::new(1.into(), 2.into()))
        );
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(parse_decimal(""), None);
    }

    #[test]
    fn text_coefficients() {
        let c = Coefficient::parse_text("3/4").unwrap();
        assert!(c.is_fraction());
        assert_eq!(c.value(), 0.75);
        assert!(Coefficient::parse_text("1/0").is_err());
        assert!(Coefficient::parse_text("1/x").is_err());
        let d = Coefficient::parse_text("0.125").unwrap();
        assert!(!d.is_fraction());
        assert_eq!(d.value(), 0.125);
    }

    #[test]
    fn radius_examples() {
        let haar = Mask::new(1, [(vec![0], frac(1, 2)), (vec![1], frac(1, 2))]).unwrap();
        assert_eq!(haar.radius(), 1.0);
        let d4 = Mask::new(
            1,
            [
                (vec![0], frac(1, 4)),
                (vec![1], frac(1, 4)),
                (vec![2], frac(1, 4)),
                (vec![3], frac(1, 4)),
            ],
        )
        .unwrap();
        assert_eq!(mask_radius(&d4), 3.0);
        let diag = Mask::new(2, [(vec![0, 0], frac(1, 2)), (vec![1, 1], frac(1, 2))]).unwrap();
        assert!((diag.radius() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sum_violations() {
        let err = Mask::new(1, [(vec![0], frac(1, 2)), (vec![1], frac(1, 4))]).unwrap_err();
        assert_eq!(err, ProblemError::MaskSumViolation { sum: 0.75 });
        // decimals are held to the tolerance
        let near = Mask::new(
            1,
            [
                (vec![0], Coefficient::decimal("0.5000000000000001").unwrap()),
                (vec![1], Coefficient::decimal("0.5").unwrap()),
            ],
        );
        assert!(near.is_ok());
        let far = Mask::new(
            1,
            [
                (vec![0], Coefficient::decimal("0.50000001").unwrap()),
                (vec![1], Coefficient::decimal("0.5").unwrap()),
            ],
        );
        assert!(matches!(far, Err(ProblemError::MaskSumViolation { .. })));
    }

    #[test]
    fn empty_and_duplicate() {
        assert_eq!(
            Mask::new(1, [(vec![0], frac(0, 1))]).unwrap_err(),
            ProblemError::EmptyMask
        );
        assert_eq!(
            Mask::new(1, [(vec![0], frac(1, 2)), (vec![0], frac(1, 2))]).unwrap_err(),
            ProblemError::DuplicateIndex { q: vec![0] }
        );
    }
}
