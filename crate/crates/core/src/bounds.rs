//! A-priori support estimates for the scaling function.
//!
//! Every estimate is a region centred at the origin: a Euclidean ball, an
//! axis-aligned box, or a box `P` in Jordan coordinates mapped by the
//! transform `C`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lattice::IntBox;
use crate::linalg::{contraction_power, LinalgError, CONTRACTION_SEARCH_CAP};
use crate::mask::{euclidean_norm, Problem};

/// Relative and absolute slack used by membership tests and integer rounding.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-9;

/// `|λ|` within this distance of 2 takes the `Q·k` branch.
pub const LAMBDA_TWO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("‖M⁻¹‖ = {norm} is not below 1")]
    NormNotContractive { norm: f64 },
    #[error("no k ≤ {cap} with ‖M⁻ᵏ‖ < 1")]
    ContractionSearchExhausted { cap: u32 },
    #[error("|m| = {m} must exceed 1")]
    NotDilation1D { m: i64 },
    #[error("matrix is not diagonal")]
    NotDiagonal,
    #[error("|λ| = {lambda} must exceed 1")]
    NotDilationEigenvalue { lambda: f64 },
    #[error("the one-dimensional bound needs d = 1, got d = {dim}")]
    NotOneDimensional { dim: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// `|x| ≤ radius`.
    Ball { radius: f64 },
    /// `|x_i| ≤ half_widths[i]`.
    Box { half_widths: Vec<f64> },
    /// `x = C·y` with `|y_i| ≤ half_widths[i]`.
    TransformedBox {
        transform: DMatrix<f64>,
        transform_inverse: DMatrix<f64>,
        half_widths: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// `Q‖M⁻¹‖/(1 − ‖M⁻¹‖)`.
    NormBall,
    /// The ball obtained by iterating in steps of `M⁻ᵏ`.
    IteratedNormBall { power: u32 },
    /// `Q/(|m| − 1)`.
    OneDimensional,
    /// `Q/(|λ_k| − 1)` per coordinate.
    Diagonal,
    /// Jordan-coordinate box mapped by `C`.
    JordanParallelepiped,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::NormBall => "norm-ball",
            Provenance::IteratedNormBall { .. } => "iterated-norm-ball",
            Provenance::OneDimensional => "one-dimensional",
            Provenance::Diagonal => "diagonal",
            Provenance::JordanParallelepiped => "jordan-parallelepiped",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::IteratedNormBall { power } => write!(f, "{} (k = {power})", self.label()),
            _ => f.write_str(self.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportBound {
    pub dim: usize,
    pub region: Region,
    pub provenance: Provenance,
}

fn within(value: f64, limit: f64) -> bool {
    value.abs() <= limit + CONTAINMENT_TOLERANCE * limit.max(1.0)
}

impl SupportBound {
    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim, "point dimension");
        match &self.region {
            Region::Ball { radius } => within(euclidean_norm(x), *radius),
            Region::Box { half_widths } => x.iter().zip(half_widths).all(|(v, h)| within(*v, *h)),
            Region::TransformedBox {
                transform_inverse,
                half_widths,
                ..
            } => {
                let y = transform_inverse * DVector::from_column_slice(x);
                y.iter().zip(half_widths).all(|(v, h)| within(*v, *h))
            }
        }
    }

    /// Half-widths of the smallest axis-aligned box containing the region.
    pub fn axis_extents(&self) -> Vec<f64> {
        match &self.region {
            Region::Ball { radius } => vec![*radius; self.dim],
            Region::Box { half_widths } => half_widths.clone(),
            Region::TransformedBox {
                transform,
                half_widths,
                ..
            } => (0..self.dim)
                .map(|i| {
                    (0..self.dim)
                        .map(|j| transform[(i, j)].abs() * half_widths[j])
                        .sum()
                })
                .collect(),
        }
    }

    /// Largest Euclidean norm over the region, an upper estimate for boxes.
    pub fn outer_radius(&self) -> f64 {
        match &self.region {
            Region::Ball { radius } => *radius,
            _ => euclidean_norm(&self.axis_extents()),
        }
    }
}

/// `Q‖M⁻¹‖/(1 − ‖M⁻¹‖)`.
pub fn ball_bound(problem: &Problem) -> Result<SupportBound, BoundError> {
    let norm = problem.matrix().inverse_norm();
    if norm >= 1.0 {
        return Err(BoundError::NormNotContractive { norm });
    }
    let q = problem.mask().radius();
    Ok(SupportBound {
        dim: problem.dim(),
        region: Region::Ball {
            radius: q * norm / (1.0 - norm),
        },
        provenance: Provenance::NormBall,
    })
}

/// `νⁿR + Q(ν + ν² + … + νⁿ)` for a step contraction `ν`.
pub fn level_radius(norm: f64, q: f64, r: f64, n: u32) -> f64 {
    let mut power = 1.0;
    let mut series = 0.0;
    for _ in 0..n {
        power *= norm;
        series += power;
    }
    power * r + q * series
}

/// Radius containing the support of the level-`n` cascade iterate when the
/// initial function is supported in the ball of radius `r`.
pub fn finite_level_ball(problem: &Problem, r: f64, n: u32) -> Result<f64, BoundError> {
    let norm = problem.matrix().inverse_norm();
    if norm >= 1.0 {
        return Err(BoundError::NormNotContractive { norm });
    }
    Ok(level_radius(norm, problem.mask().radius(), r, n))
}

/// `Q·Σ_{i≤k}‖M⁻ⁱ‖ / (1 − ‖M⁻ᵏ‖)` for the smallest `k` with `‖M⁻ᵏ‖ < 1`.
pub fn general_ball_bound(problem: &Problem) -> Result<SupportBound, BoundError> {
    let (k, norms) = contraction_power(problem.matrix().matrix())?.ok_or(
        BoundError::ContractionSearchExhausted {
            cap: CONTRACTION_SEARCH_CAP,
        },
    )?;
    let q = problem.mask().radius();
    let last = norms[norms.len() - 1];
    let sum: f64 = norms.iter().sum();
    Ok(SupportBound {
        dim: problem.dim(),
        region: Region::Ball {
            radius: q * sum / (1.0 - last),
        },
        provenance: if k == 1 {
            Provenance::NormBall
        } else {
            Provenance::IteratedNormBall { power: k }
        },
    })
}

/// `Q/(|m| − 1)`.
pub fn bound_1d(m: i64, q: f64) -> Result<f64, BoundError> {
    let a = m.unsigned_abs();
    if a <= 1 {
        return Err(BoundError::NotDilation1D { m });
    }
    Ok(q / (a - 1) as f64)
}

fn one_dimensional_bound(problem: &Problem) -> Result<SupportBound, BoundError> {
    if problem.dim() != 1 {
        return Err(BoundError::NotOneDimensional { dim: problem.dim() });
    }
    let h = bound_1d(problem.matrix().matrix().get(0, 0), problem.mask().radius())?;
    Ok(SupportBound {
        dim: 1,
        region: Region::Box {
            half_widths: vec![h],
        },
        provenance: Provenance::OneDimensional,
    })
}

/// `|x_k| ≤ Q/(|λ_k| − 1)` for diagonal `M`.
pub fn diagonal_bound(problem: &Problem) -> Result<SupportBound, BoundError> {
    let m = problem.matrix().matrix();
    if !m.is_diagonal() {
        return Err(BoundError::NotDiagonal);
    }
    let q = problem.mask().radius();
    let half_widths = (0..m.dim())
        .map(|k| {
            let lambda = m.get(k, k);
            if lambda.unsigned_abs() <= 1 {
                return Err(BoundError::NotDilationEigenvalue {
                    lambda: lambda as f64,
                });
            }
            Ok(q / (lambda.unsigned_abs() - 1) as f64)
        })
        .collect::<Result<_, _>>()?;
    Ok(SupportBound {
        dim: m.dim(),
        region: Region::Box { half_widths },
        provenance: Provenance::Diagonal,
    })
}

/// Limits `A_{∞,k}`, `k = 1..s`, for one Jordan block:
/// `Q/(|λ|−2)·(1 − (|λ|−1)⁻ᵏ)`, or `Q·k` at `|λ| = 2`.
pub fn jordan_block_bound(lambda: f64, s: usize, q: f64) -> Result<Vec<f64>, BoundError> {
    let a = lambda.abs();
    if a.is_nan() || a <= 1.0 {
        return Err(BoundError::NotDilationEigenvalue { lambda });
    }
    let delta = a - 2.0;
    Ok((1..=s)
        .map(|k| {
            if delta.abs() <= LAMBDA_TWO_TOLERANCE {
                q * k as f64
            } else {
                // 1 − (1+δ)⁻ᵏ without cancellation near δ = 0
                let tail = -(-(k as f64) * delta.ln_1p()).exp_m1();
                q * tail / delta
            }
        })
        .collect())
}

/// `A_{n,k}` for `n = 0..=n_max`, `k = 1..=s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    rows: Vec<Vec<f64>>,
}

impl RecurrenceTable {
    /// `A_{n,k}` with `k` counted from 1.
    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.rows[n][k - 1]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }
}

/// `A_{n,k} = (Q + A_{n−1,k} + A_{n,k−1})/|λ|` with `A_{0,k} = R` and
/// `A_{n,0} = 0`.
pub fn jordan_recurrence_table(
    lambda: f64,
    s: usize,
    q: f64,
    r: f64,
    n_max: usize,
) -> Result<RecurrenceTable, BoundError> {
    let a = lambda.abs();
    if a.is_nan() || a <= 1.0 {
        return Err(BoundError::NotDilationEigenvalue { lambda });
    }
    let mut rows = vec![vec![r; s]];
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let mut row = Vec::with_capacity(s);
        let mut left = 0.0;
        for value in prev {
            left = (q + value + left) / a;
            row.push(left);
        }
        rows.push(row);
    }
    Ok(RecurrenceTable { rows })
}

/// Box in Jordan coordinates `y = C⁻¹x`, with `Q′ = max_q |C⁻¹q|` in place
/// of `Q`.
pub fn parallelepiped_bound(problem: &Problem) -> Result<SupportBound, BoundError> {
    let jordan = problem.matrix().jordan().map_err(|e| e.clone())?;
    let cinv = &jordan.transform_inverse;
    let q_prime = problem
        .mask()
        .support()
        .map(|q| {
            let v = DVector::from_iterator(q.len(), q.iter().map(|&x| x as f64));
            euclidean_norm((cinv * v).as_slice())
        })
        .fold(0.0, f64::max);
    let mut half_widths = Vec::with_capacity(problem.dim());
    for block in &jordan.blocks {
        if block.size == 1 {
            let a = block.eigenvalue.abs();
            if a.is_nan() || a <= 1.0 {
                return Err(BoundError::NotDilationEigenvalue {
                    lambda: block.eigenvalue,
                });
            }
            half_widths.push(q_prime / (a - 1.0));
        } else {
            half_widths.extend(jordan_block_bound(block.eigenvalue, block.size, q_prime)?);
        }
    }
    Ok(SupportBound {
        dim: problem.dim(),
        region: Region::TransformedBox {
            transform: jordan.transform.clone(),
            transform_inverse: cinv.clone(),
            half_widths,
        },
        provenance: Provenance::JordanParallelepiped,
    })
}

/// Symmetric integer box `[−h_i, h_i]` containing the region.
pub fn enclosing_integer_box(bound: &SupportBound) -> IntBox {
    let h: Vec<i64> = bound
        .axis_extents()
        .iter()
        .map(|&e| (e - CONTAINMENT_TOLERANCE * e.max(1.0)).ceil().max(0.0) as i64)
        .collect();
    IntBox::symmetric(&h)
}

/// The norm ball when `‖M⁻¹‖ < 1`, else the Jordan parallelepiped, else the
/// iterated ball.
pub fn best_bound(problem: &Problem) -> Result<SupportBound, BoundError> {
    ball_bound(problem)
        .or_else(|_| parallelepiped_bound(problem))
        .or_else(|_| general_ball_bound(problem))
}

/// Every estimate with its outcome, in a fixed order.
pub fn all_bounds(problem: &Problem) -> Vec<(&'static str, Result<SupportBound, BoundError>)> {
    vec![
        ("norm-ball", ball_bound(problem)),
        ("iterated-norm-ball", general_ball_bound(problem)),
        ("one-dimensional", one_dimensional_bound(problem)),
        ("diagonal", diagonal_bound(problem)),
        ("jordan-parallelepiped", parallelepiped_bound(problem)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::parse_problem;

    fn problem(matrix: &str, coeffs: &[(&str, &str)]) -> Problem {
        let cs: Vec<String> = coeffs
            .iter()
            .map(|(q, c)| format!(r#"{{"q":{q},"c":"{c}"}}"#))
            .collect();
        let dim = matrix.matches('[').count() - 1;
        parse_problem(&format!(
            r#"{{"dimension":{dim},"matrix":{matrix},"coefficients":[{}]}}"#,
            cs.join(",")
        ))
        .unwrap()
    }

    fn radius(b: &SupportBound) -> f64 {
        match b.region {
            Region::Ball { radius } => radius,
            _ => panic!("not a ball"),
        }
    }

    #[test]
    fn ball_examples() {
        let p = problem("[[2]]", &[("[0]", "1/2"), ("[3]", "1/2")]);
        assert_eq!(radius(&ball_bound(&p).unwrap()), 3.0);
        let quincunx = problem("[[1,1],[1,-1]]", &[("[0,0]", "1/2"), ("[1,0]", "1/2")]);
        let r = radius(&ball_bound(&quincunx).unwrap());
        assert!((r - (2f64.sqrt() + 1.0)).abs() < 1e-12, "{r}");
        let companion = problem("[[0,1],[3,1]]", &[("[0,0]", "1")]);
        assert!(matches!(
            ball_bound(&companion),
            Err(BoundError::NormNotContractive { .. })
        ));
    }

    #[test]
    fn finite_level_examples() {
        let p = problem("[[2]]", &[("[0]", "1/2"), ("[1]", "1/2")]);
        assert_eq!(finite_level_ball(&p, 1.0, 1).unwrap(), 1.0);
        let spike = problem("[[2]]", &[("[0]", "1")]);
        assert_eq!(finite_level_ball(&spike, 5.0, 3).unwrap(), 5.0 / 8.0);
        let limit = finite_level_ball(&p, 1.0, 200).unwrap();
        assert!((limit - radius(&ball_bound(&p).unwrap())).abs() < 1e-10);
    }

    #[test]
    fn general_ball_examples() {
        let quincunx = problem("[[1,1],[1,-1]]", &[("[0,0]", "1/2"), ("[1,0]", "1/2")]);
        assert_eq!(
            radius(&general_ball_bound(&quincunx).unwrap()),
            radius(&ball_bound(&quincunx).unwrap())
        );
        let diag = problem("[[2,0],[0,2]]", &[("[0,0]", "1/2"), ("[2,0]", "1/2")]);
        assert_eq!(radius(&general_ball_bound(&diag).unwrap()), 2.0);

        let companion = problem("[[0,1],[3,1]]", &[("[0,0]", "1/2"), ("[1,0]", "1/2")]);
        let b = general_ball_bound(&companion).unwrap();
        let Provenance::IteratedNormBall { power } = b.provenance else {
            panic!("expected an iterated ball");
        };
        // oracle: exact powers of the inverse, norms from nalgebra's SVD
        let inv = crate::linalg::inverse(companion.matrix().matrix()).unwrap();
        let norms: Vec<f64> = (1..=power)
            .map(|i| inv.pow(i).to_f64().singular_values().max())
            .collect();
        assert!(norms[..norms.len() - 1].iter().all(|&n| n >= 1.0));
        let expected = norms.iter().sum::<f64>() / (1.0 - norms[norms.len() - 1]);
        assert!((radius(&b) - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn one_dimensional_examples() {
        assert_eq!(bound_1d(2, 1.0).unwrap(), 1.0);
        assert_eq!(bound_1d(2, 3.0).unwrap(), 3.0);
        assert_eq!(bound_1d(3, 2.0).unwrap(), 1.0);
        assert_eq!(bound_1d(-3, 2.0).unwrap(), 1.0);
        assert!(matches!(
            bound_1d(1, 1.0),
            Err(BoundError::NotDilation1D { m: 1 })
        ));
    }

    #[test]
    fn diagonal_examples() {
        let p = problem("[[2,0],[0,4]]", &[("[0,0]", "1/2"), ("[1,0]", "1/2")]);
        let Region::Box { half_widths } = diagonal_bound(&p).unwrap().region else {
            panic!()
        };
        assert_eq!(half_widths, vec![1.0, 1.0 / 3.0]);
        let zero = problem("[[2,0],[0,3]]", &[("[0,0]", "1")]);
        let Region::Box { half_widths } = diagonal_bound(&zero).unwrap().region else {
            panic!()
        };
        assert_eq!(half_widths, vec![0.0, 0.0]);
        let q = problem("[[1,1],[1,-1]]", &[("[0,0]", "1")]);
        assert_eq!(diagonal_bound(&q), Err(BoundError::NotDiagonal));
    }

    #[test]
    fn jordan_block_examples() {
        assert_eq!(
            jordan_block_bound(2.0, 3, 1.0).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(jordan_block_bound(-2.0, 2, 1.5).unwrap(), vec![1.5, 3.0]);
        let three = jordan_block_bound(3.0, 3, 1.0).unwrap();
        for (got, want) in three.iter().zip([0.5, 0.75, 0.875]) {
            assert!((got - want).abs() < 1e-12);
        }
        for lambda in [1.3, 2.5, -4.0, 7.25] {
            let b = jordan_block_bound(lambda, 1, 2.0).unwrap();
            assert!((b[0] - 2.0 / (f64::abs(lambda) - 1.0)).abs() < 1e-14);
        }
        assert!(matches!(
            jordan_block_bound(0.5, 1, 1.0),
            Err(BoundError::NotDilationEigenvalue { .. })
        ));
    }

    #[test]
    fn recurrence_table() {
        let t = jordan_recurrence_table(2.0, 3, 1.0, 1.0, 2).unwrap();
        assert_eq!(t.get(2, 1), 1.0);
        assert_eq!(t.row(0), &[1.0, 1.0, 1.0]);
        // first row: (Q+R)(1/|λ| + … + 1/|λ|ᵏ)
        let t = jordan_recurrence_table(3.0, 4, 0.5, 2.0, 1).unwrap();
        let mut acc = 0.0;
        for k in 1..=4 {
            acc += 3f64.powi(-(k as i32));
            assert!((t.get(1, k) - 2.5 * acc).abs() < 1e-15);
        }
        let t = jordan_recurrence_table(3.0, 3, 1.0, 1.0, 200).unwrap();
        assert!((t.get(200, 2) - 0.75).abs() < 1e-10);
    }

    #[test]
    fn parallelepiped_on_diagonal_matches_diagonal_bound() {
        let p = problem("[[3,0],[0,-2]]", &[("[0,0]", "1/2"), ("[1,1]", "1/2")]);
        let pb = parallelepiped_bound(&p).unwrap();
        let Region::TransformedBox {
            transform,
            half_widths,
            ..
        } = &pb.region
        else {
            panic!()
        };
        let Region::Box { half_widths: diag } = diagonal_bound(&p).unwrap().region else {
            panic!()
        };
        assert_eq!(half_widths, &diag);
        assert_eq!(transform.map(f64::abs), DMatrix::identity(2, 2));
    }

    #[test]
    fn parallelepiped_defective() {
        let p = problem(
            "[[2,0],[1,2]]",
            &[
                ("[0,0]", "1/4"),
                ("[1,0]", "1/4"),
                ("[0,1]", "1/4"),
                ("[1,1]", "1/4"),
            ],
        );
        let pb = parallelepiped_bound(&p).unwrap();
        let Region::TransformedBox {
            transform_inverse,
            half_widths,
            ..
        } = &pb.region
        else {
            panic!()
        };
        let q_prime = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
            .iter()
            .map(|q| (transform_inverse * DVector::from_column_slice(q)).norm())
            .fold(0.0, f64::max);
        assert_eq!(half_widths.len(), 2);
        assert!((half_widths[0] - q_prime).abs() < 1e-12);
        assert!((half_widths[1] - 2.0 * q_prime).abs() < 1e-12);
        assert!(pb.contains(&[0.0, 0.0]));
    }

    #[test]
    fn parallelepiped_1d() {
        let p = problem("[[2]]", &[("[0]", "1/2"), ("[3]", "1/2")]);
        let pb = parallelepiped_bound(&p).unwrap();
        assert_eq!(pb.axis_extents(), vec![3.0]);
    }

    #[test]
    fn enclosing_boxes() {
        let ball = SupportBound {
            dim: 2,
            region: Region::Ball { radius: 2.4142 },
            provenance: Provenance::NormBall,
        };
        assert_eq!(enclosing_integer_box(&ball), IntBox::symmetric(&[3, 3]));
        let bx = SupportBound {
            dim: 2,
            region: Region::Box {
                half_widths: vec![1.0, 1.0 / 3.0],
            },
            provenance: Provenance::Diagonal,
        };
        assert_eq!(enclosing_integer_box(&bx), IntBox::symmetric(&[1, 1]));
        let tb = SupportBound {
            dim: 2,
            region: Region::TransformedBox {
                transform: DMatrix::identity(2, 2),
                transform_inverse: DMatrix::identity(2, 2),
                half_widths: vec![0.5, 2.0],
            },
            provenance: Provenance::JordanParallelepiped,
        };
        assert_eq!(enclosing_integer_box(&tb), IntBox::symmetric(&[1, 2]));
    }

    #[test]
    fn best_bound_fallbacks() {
        let companion = problem("[[0,1],[3,1]]", &[("[0,0]", "1/2"), ("[0,1]", "1/2")]);
        assert_eq!(
            best_bound(&companion).unwrap().provenance,
            Provenance::JordanParallelepiped
        );
        let complex = problem("[[0,-3],[1,1]]", &[("[0,0]", "1/2"), ("[1,0]", "1/2")]);
        assert!(matches!(
            best_bound(&complex).unwrap().provenance,
            Provenance::IteratedNormBall { .. }
        ));
        for (_, b) in all_bounds(&companion)
            .into_iter()
            .filter_map(|(n, b)| b.ok().map(|b| (n, b)))
        {
            assert!(b.contains(&[0.0, 0.0]));
        }
    }
}
