//! Values of the scaling function on `{M⁻ʲk}` by the eigenvector method.
//!
//! The values at integer points form a fixed vector of the transfer matrix
//! `B = (m·c_{Mk_i − k_j})`; the refinement recurrence then carries them to
//! every finer lattice.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::bounds::{best_bound, enclosing_integer_box, BoundError, SupportBound};
use crate::cascade::{integer_iterate, CascadeError, InitialFunctionKind};
use crate::lattice::{neumaier_sum, IntBox, LatticeError, LatticeGrid, RefinementKernel};
use crate::linalg::{null_space, singular_values, RationalMatrix};
use crate::mask::Problem;
use crate::samples::{parse_samples, write_samples, SampleError, SampleRow};

/// Integer-lattice iterations used to build the left-closed reference vector.
pub const LEFT_CLOSED_ITERATIONS: u32 = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointwiseError {
    #[error("no support bound available: {0}")]
    NoBoundAvailable(#[from] BoundError),
    #[error(
        "transfer matrix has no eigenvalue within {tolerance} of 1 (smallest σ(B − I) = {closest})"
    )]
    NoUnitEigenvalue { tolerance: f64, closest: f64 },
    #[error("eigenvector entries sum to {sum}, cannot normalize")]
    NormalizationImpossible { sum: f64 },
    #[error("level {level}: source value at {index:?} lies inside the bound but was not computed")]
    DomainTooSmall { level: u32, index: Vec<i64> },
    #[error("level-0 values must be given on {expected} points, got {found}")]
    SeedMismatch { expected: usize, found: usize },
    #[error("empty candidate set")]
    NoPoints,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Samples(#[from] SampleError),
}

/// Integer points inside the best available bound, lexicographic.
pub fn candidate_points(problem: &Problem) -> Result<Vec<Vec<i64>>, PointwiseError> {
    Ok(candidate_set(problem)?.1)
}

/// The bound used for enumeration together with the points it admits.
pub fn candidate_set(problem: &Problem) -> Result<(SupportBound, Vec<Vec<i64>>), PointwiseError> {
    let bound = best_bound(problem)?;
    let points = points_in_bound(&bound, &enclosing_integer_box(&bound), None);
    Ok((bound, points))
}

/// Points `k` of `bbox` with `M⁻ʲk` inside the bound.
fn points_in_bound(
    bound: &SupportBound,
    bbox: &IntBox,
    inverse_power: Option<&DMatrix<f64>>,
) -> Vec<Vec<i64>> {
    let d = bbox.dim();
    bbox.points()
        .filter(|k| {
            let x: Vec<f64> = match inverse_power {
                None => k.iter().map(|&v| v as f64).collect(),
                Some(p) => (0..d)
                    .map(|i| (0..d).map(|j| p[(i, j)] * k[j] as f64).sum())
                    .collect(),
            };
            bound.contains(&x)
        })
        .collect()
}

/// `B[i][j] = m·c_{M·k_i − k_j}` over an ordered point list.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    points: Vec<Vec<i64>>,
    entries: DMatrix<f64>,
}

impl TransferMatrix {
    pub fn from_parts(points: Vec<Vec<i64>>, entries: DMatrix<f64>) -> Self {
        assert_eq!(entries.nrows(), points.len());
        assert_eq!(entries.ncols(), points.len());
        Self { points, entries }
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn build_transfer_matrix(
    problem: &Problem,
    points: &[Vec<i64>],
) -> Result<TransferMatrix, PointwiseError> {
    if points.is_empty() {
        return Err(PointwiseError::NoPoints);
    }
    let m = problem.m() as f64;
    let matrix = problem.matrix().matrix();
    let n = points.len();
    let mut entries = DMatrix::zeros(n, n);
    for (i, ki) in points.iter().enumerate() {
        let mk = matrix
            .checked_mul_vec(ki)
            .ok_or(LatticeError::Overflow { level: 0 })?;
        for (j, kj) in points.iter().enumerate() {
            let q: Vec<i64> = mk.iter().zip(kj).map(|(a, b)| a - b).collect();
            if let Some(c) = problem.mask().get(&q) {
                entries[(i, j)] = m * c.value();
            }
        }
    }
    Ok(TransferMatrix::from_parts(points.to_vec(), entries))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Singular values of `B − I` up to `unit_tolerance·max(1, ‖B‖)` span the
    /// eigenspace.
    pub unit_tolerance: f64,
    /// Entries at or below this magnitude are structural zeros.
    pub zero_threshold: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            unit_tolerance: 1e-9,
            zero_threshold: 1e-10,
        }
    }
}

/// The eigenspace for eigenvalue 1 has more than one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonUniqueWarning {
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegerValues {
    pub points: Vec<Vec<i64>>,
    /// One vector when unique (normalized to sum 1), otherwise the canonical
    /// unnormalized basis.
    pub basis: Vec<Vec<f64>>,
    pub normalized: bool,
    /// Indices into `points` set to zero.
    pub structural_zeros: Vec<usize>,
    pub warning: Option<NonUniqueWarning>,
    /// `max ‖B·r − r‖∞ / ‖r‖∞` over the basis.
    pub residual: f64,
}

impl IntegerValues {
    pub fn eigenspace_dimension(&self) -> usize {
        self.basis.len()
    }

    /// The normalized values when the eigenspace is one-dimensional.
    pub fn unique(&self) -> Option<&[f64]> {
        self.normalized.then(|| self.basis[0].as_slice())
    }

    pub fn value_at(&self, k: &[i64]) -> Option<f64> {
        let i = self.points.iter().position(|p| p == k)?;
        self.unique().map(|v| v[i])
    }
}

fn eigen_residual(b: &DMatrix<f64>, r: &[f64]) -> f64 {
    let v = DVector::from_column_slice(r);
    let res = b * &v - &v;
    let scale = v.amax();
    if scale == 0.0 {
        0.0
    } else {
        res.amax() / scale
    }
}

/// Reduced row echelon form of the basis, tiny entries cleared.
fn canonical_basis(vectors: &[DVector<f64>], zero: f64) -> Vec<Vec<f64>> {
    let r = vectors.len();
    let n = vectors[0].len();
    let mut rows: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().copied().collect())
        .collect();
    let mut lead = 0;
    for col in 0..n {
        if lead == r {
            break;
        }
        let (best, mag) = (lead..r)
            .map(|i| (i, rows[i][col].abs()))
            .fold((lead, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= 1e-9 {
            continue;
        }
        rows.swap(lead, best);
        let p = rows[lead][col];
        rows[lead].iter_mut().for_each(|v| *v /= p);
        for i in 0..r {
            if i != lead {
                let f = rows[i][col];
                if f != 0.0 {
                    let pivot = rows[lead].clone();
                    for (v, p) in rows[i].iter_mut().zip(&pivot) {
                        *v -= f * p;
                    }
                }
            }
        }
        lead += 1;
    }
    for row in &mut rows {
        for v in row.iter_mut() {
            if v.abs() <= zero {
                *v = 0.0;
            }
        }
    }
    rows
}

/// Scale to unit sum, clear structural zeros, rescale.
fn normalize(v: &[f64], zero: f64) -> Result<(Vec<f64>, Vec<usize>), PointwiseError> {
    let sum = neumaier_sum(v.iter().copied());
    if sum.abs() <= 1e-12 * v.iter().fold(1.0f64, |a, b| a.max(b.abs())) {
        return Err(PointwiseError::NormalizationImpossible { sum });
    }
    let mut out: Vec<f64> = v.iter().map(|x| x / sum).collect();
    let mut zeros = Vec::new();
    for (i, x) in out.iter_mut().enumerate() {
        if x.abs() <= zero {
            *x = 0.0;
            zeros.push(i);
        }
    }
    let again = neumaier_sum(out.iter().copied());
    if again.abs() <= 1e-12 {
        return Err(PointwiseError::NormalizationImpossible { sum: again });
    }
    out.iter_mut().for_each(|x| *x /= again);
    Ok((out, zeros))
}

/// Eigenvectors of `B` for eigenvalue 1.
pub fn integer_values(
    b: &TransferMatrix,
    options: &EigenOptions,
) -> Result<IntegerValues, PointwiseError> {
    let n = b.len();
    let a = b.entries() - DMatrix::identity(n, n);
    let scale = singular_values(b.entries())
        .first()
        .copied()
        .unwrap_or(0.0)
        .max(1.0);
    let tolerance = options.unit_tolerance * scale;
    let kernel = null_space(&a, tolerance);
    if kernel.is_empty() {
        return Err(PointwiseError::NoUnitEigenvalue {
            tolerance,
            closest: singular_values(&a).last().copied().unwrap_or(f64::NAN),
        });
    }
    let (basis, normalized, structural_zeros, warning) = if kernel.len() == 1 {
        let (v, zeros) = normalize(kernel[0].as_slice(), options.zero_threshold)?;
        (vec![v], true, zeros, None)
    } else {
        let basis = canonical_basis(&kernel, options.zero_threshold);
        let zeros = (0..n)
            .filter(|&i| basis.iter().all(|v| v[i] == 0.0))
            .collect();
        let warning = Some(NonUniqueWarning {
            dimension: basis.len(),
        });
        (basis, false, zeros, warning)
    };
    let residual = basis
        .iter()
        .map(|v| eigen_residual(b.entries(), v))
        .fold(0.0, f64::max);
    Ok(IntegerValues {
        points: b.points().to_vec(),
        basis,
        normalized,
        structural_zeros,
        warning,
        residual,
    })
}

/// Candidate points, transfer matrix and its fixed vectors.
pub fn solve_integer_values(
    problem: &Problem,
    options: &EigenOptions,
) -> Result<(TransferMatrix, IntegerValues), PointwiseError> {
    let points = candidate_points(problem)?;
    let b = build_transfer_matrix(problem, &points)?;
    let values = integer_values(&b, options)?;
    Ok((b, values))
}

/// Choose the eigenspace element closest (least squares) to the integer
/// samples of the indicator-seeded cascade, normalized to unit sum. For the
/// Haar mask this is `φ(0) = 1`, `φ(1) = 0`.
pub fn left_closed_values(
    problem: &Problem,
    values: &IntegerValues,
    options: &EigenOptions,
) -> Result<Vec<f64>, PointwiseError> {
    if let Some(v) = values.unique() {
        return Ok(v.to_vec());
    }
    let kernel = RefinementKernel::new(problem);
    let reference = integer_iterate(
        problem,
        &kernel,
        InitialFunctionKind::IndicatorBox,
        LEFT_CLOSED_ITERATIONS,
    )?;
    let n = values.points.len();
    let target = DVector::from_iterator(n, values.points.iter().map(|k| reference.get(k)));
    let basis = DMatrix::from_fn(n, values.basis.len(), |i, j| values.basis[j][i]);
    let coeffs = basis
        .clone()
        .svd(true, true)
        .solve(&target, 1e-12)
        .expect("both factors requested");
    let projected = basis * coeffs;
    Ok(normalize(projected.as_slice(), options.zero_threshold)?.0)
}

/// `φ(M⁻ʲk)` for `j = 0..=J`, keyed by `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    dim: usize,
    levels: BTreeMap<u32, BTreeMap<Vec<i64>, f64>>,
    /// Level-0 values sum to 1 within 1e-12.
    pub normalized: bool,
}

impl ValueTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            levels: BTreeMap::new(),
            normalized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> impl Iterator<Item = (u32, &BTreeMap<Vec<i64>, f64>)> {
        self.levels.iter().map(|(j, v)| (*j, v))
    }

    pub fn level(&self, j: u32) -> Option<&BTreeMap<Vec<i64>, f64>> {
        self.levels.get(&j)
    }

    pub fn max_level(&self) -> Option<u32> {
        self.levels.keys().next_back().copied()
    }

    pub fn get(&self, j: u32, k: &[i64]) -> Option<f64> {
        self.levels.get(&j)?.get(k).copied()
    }

    pub fn insert_level(&mut self, j: u32, values: BTreeMap<Vec<i64>, f64>) {
        self.levels.insert(j, values);
        self.refresh_normalized();
    }

    fn refresh_normalized(&mut self) {
        self.normalized = self
            .levels
            .get(&0)
            .is_some_and(|l| (neumaier_sum(l.values().copied()) - 1.0).abs() <= 1e-12);
    }

    /// All rows sorted by level, then `k`; coordinates from exact `M⁻ʲ`.
    pub fn rows(&self, inverse: &RationalMatrix) -> Vec<SampleRow> {
        let mut out = Vec::new();
        for (&j, level) in &self.levels {
            let p = inverse.pow(j);
            out.extend(
                level
                    .iter()
                    .map(|(k, &v)| SampleRow::at(j, k.clone(), &p, v)),
            );
        }
        out
    }
}

/// Carry level-0 values through `V_j(k) = m·Σ c_q·V_{j−1}(k − M^{j−1}q)`.
pub fn refine_values(
    problem: &Problem,
    points: &[Vec<i64>],
    level0: &[f64],
    levels: u32,
    parallel: bool,
) -> Result<ValueTable, PointwiseError> {
    if points.len() != level0.len() {
        return Err(PointwiseError::SeedMismatch {
            expected: points.len(),
            found: level0.len(),
        });
    }
    let bound = best_bound(problem)?;
    let base = enclosing_integer_box(&bound);
    let kernel = RefinementKernel::new(problem);
    let matrix = problem.matrix();

    let mut table = ValueTable::new(problem.dim());
    let mut grid = LatticeGrid::zeros(base.clone())?;
    let mut stored = BTreeMap::new();
    for (k, &v) in points.iter().zip(level0) {
        if base.contains(k) {
            grid.set(k, v);
        }
        stored.insert(k.clone(), v);
    }
    table.insert_level(0, stored);

    let mut image = base.clone();
    for j in 1..=levels {
        image = image
            .image_hull(matrix.matrix())
            .ok_or(LatticeError::Overflow { level: j })?;
        let prev_inverse = matrix.inverse_power_f64(j - 1);
        let inverse = matrix.inverse_power_f64(j);
        let d = problem.dim();
        let in_bound = |k: &[i64], p: &DMatrix<f64>| {
            let x: Vec<f64> = (0..d)
                .map(|i| (0..d).map(|c| p[(i, c)] * k[c] as f64).sum())
                .collect();
            bound.contains(&x)
        };
        let next = kernel
            .apply(&grid, j, &image, parallel, &|src| {
                in_bound(src, &prev_inverse)
            })?
            .map_err(|index| PointwiseError::DomainTooSmall { level: j, index })?;
        let mut masked = LatticeGrid::zeros(image.clone())?;
        let mut stored = BTreeMap::new();
        for (i, k) in image.points().enumerate() {
            if in_bound(&k, &inverse) {
                let v = next.values()[i];
                masked.values_mut()[i] = v;
                stored.insert(k, v);
            }
        }
        table.insert_level(j, stored);
        grid = masked;
    }
    Ok(table)
}

/// Sum of `φ(x + k)` over integer `k` at one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodizationDeviation {
    pub probe: Vec<i64>,
    pub sum: f64,
    pub deviation: f64,
}

/// For each level-`j` index `p`, `Σ_k V_j(p + Mʲk)` over stored values.
pub fn periodization_check(
    table: &ValueTable,
    matrix: &crate::mask::DilationMatrix,
    level: u32,
    probes: &[Vec<i64>],
) -> Vec<PeriodizationDeviation> {
    let inverse = matrix.inverse().pow(level);
    let empty = BTreeMap::new();
    let values = table.level(level).unwrap_or(&empty);
    probes
        .iter()
        .map(|p| {
            let sum = neumaier_sum(values.iter().filter_map(|(k, &v)| {
                let diff: Vec<i64> = k.iter().zip(p).map(|(a, b)| a - b).collect();
                inverse
                    .mul_int_vec(&diff)
                    .iter()
                    .all(|x| x.is_integer())
                    .then_some(v)
            }));
            PeriodizationDeviation {
                probe: p.clone(),
                sum,
                deviation: (sum - 1.0).abs(),
            }
        })
        .collect()
}

/// Tab-separated dump, sorted by level then `k`.
pub fn export_values(table: &ValueTable, inverse: &RationalMatrix) -> String {
    write_samples(table.dim(), &table.rows(inverse))
}

pub fn import_values(text: &str) -> Result<ValueTable, PointwiseError> {
    let (dim, rows) = parse_samples(text)?;
    let mut levels: BTreeMap<u32, BTreeMap<Vec<i64>, f64>> = BTreeMap::new();
    for row in rows {
        levels
            .entry(row.level)
            .or_default()
            .insert(row.index, row.value);
    }
    let mut table = ValueTable::new(dim);
    table.levels = levels;
    table.refresh_normalized();
    Ok(table)
}
