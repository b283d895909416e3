use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::Problem;
use crate::linalg::{rational_to_f64, IntMatrix, RationalMatrix};

/// Per-class sums are compared with `1/m` at this tolerance.
pub const COSET_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CosetSum {
    /// Canonical representative in `M·[0,1)ᵈ`.
    pub representative: Vec<i64>,
    pub sum: f64,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosetReport {
    /// One entry per residue class of `ℤᵈ / Mℤᵈ`, ordered by representative.
    pub classes: Vec<CosetSum>,
    /// `1/m`.
    pub target: f64,
    /// Every class sums to `1/m` within `COSET_TOLERANCE`.
    pub uniform: bool,
    pub total: f64,
}

/// Canonical representative `q − M·⌊M⁻¹q⌋` of the class of `q` modulo `Mℤᵈ`.
pub fn coset_representative(matrix: &IntMatrix, inverse: &RationalMatrix, q: &[i64]) -> Vec<i64> {
    let t = inverse.mul_int_vec(q);
    let floors: Vec<i64> = t
        .iter()
        .map(|v| {
            let f: BigInt = v.floor().to_integer();
            i64::try_from(f).expect("lattice coordinate fits in i64")
        })
        .collect();
    let shift = matrix
        .checked_mul_vec(&floors)
        .expect("lattice coordinate fits in i64");
    q.iter().zip(shift).map(|(a, b)| a - b).collect()
}

/// The `m` canonical representatives, lexicographically ordered.
pub fn digit_set(matrix: &IntMatrix, inverse: &RationalMatrix) -> Vec<Vec<i64>> {
    let d = matrix.dim();
    // Bounding box of M·[0,1]ᵈ.
    let (lo, hi): (Vec<i64>, Vec<i64>) = (0..d)
        .map(|i| {
            (0..d).fold((0i64, 0i64), |(lo, hi), j| {
                let v = matrix.get(i, j);
                (lo + v.min(0), hi + v.max(0))
            })
        })
        .unzip();
    let bbox = crate::lattice::IntBox::new(lo, hi);
    bbox.points()
        .filter(|k| coset_representative(matrix, inverse, k) == *k)
        .collect()
}

/// Sums of `c_q` over each residue class modulo `Mℤᵈ`. Diagnostic only.
pub fn coset_sum_report(problem: &Problem) -> CosetReport {
    let dm = problem.matrix();
    let mut sums: BTreeMap<Vec<i64>, (BigRational, usize)> = digit_set(dm.matrix(), dm.inverse())
        .into_iter()
        .map(|r| (r, (BigRational::zero(), 0)))
        .collect();
    for (q, c) in problem.mask().iter() {
        let rep = coset_representative(dm.matrix(), dm.inverse(), q);
        let entry = sums.entry(rep).or_insert((BigRational::zero(), 0));
        entry.0 += c.exact();
        entry.1 += 1;
    }
    let target = 1.0 / problem.m() as f64;
    let classes: Vec<CosetSum> = sums
        .into_iter()
        .map(|(representative, (sum, members))| CosetSum {
            representative,
            sum: rational_to_f64(&sum),
            members,
        })
        .collect();
    let uniform = classes
        .iter()
        .all(|c| (c.sum - target).abs() <= COSET_TOLERANCE);
    CosetReport {
        total: rational_to_f64(&problem.mask().exact_sum()),
        classes,
        target,
        uniform,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inverse;
    use crate::mask::parse_problem;

    #[test]
    fn digit_sets_have_m_elements() {
        for rows in [
            vec![vec![2]],
            vec![vec![-3]],
            vec![vec![1, 1], vec![1, -1]],
            vec![vec![0, 1], vec![3, 1]],
            vec![vec![2, 0], vec![1, 2]],
            vec![vec![2, 1, 0], vec![0, 2, 1], vec![1, 0, 2]],
        ] {
            let m = IntMatrix::new(rows).unwrap();
            let inv = inverse(&m).unwrap();
            let det = crate::linalg::determinant(&m);
            let digits = digit_set(&m, &inv);
            assert_eq!(
                BigInt::from(digits.len()),
                num_traits::Signed::abs(&det),
                "{m:?}"
            );
        }
    }

    #[test]
    fn haar_cosets() {
        let p = parse_problem(
            r#"{"dimension":1,"matrix":[[2]],"coefficients":[{"q":[0],"c":"1/2"},{"q":[1],"c":"1/2"}]}"#,
        )
        .unwrap();
        let r = coset_sum_report(&p);
        assert_eq!(r.classes.len(), 2);
        assert_eq!(r.classes[0].sum, 0.5);
        assert_eq!(r.classes[1].sum, 0.5);
        assert!(r.uniform);
    }

    #[test]
    fn single_coefficient_not_uniform() {
        let p = parse_problem(r#"{"dimension":1,"matrix":[[2]],"coefficients":[{"q":[0],"c":1}]}"#)
            .unwrap();
        let r = coset_sum_report(&p);
        let sums: Vec<f64> = r.classes.iter().map(|c| c.sum).collect();
        assert_eq!(sums, vec![1.0, 0.0]);
        assert!(!r.uniform);
        assert_eq!(r.total, 1.0);
    }
}
