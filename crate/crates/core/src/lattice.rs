//! Integer boxes, dense lattice grids and the shared refinement kernel.
//!
//! Both the cascade iteration and the pointwise refinement evaluate
//!
//! ```text
//! V_j(k) = m · Σ_{q∈Ω} c_q · V_{j−1}(k − M^{j−1} q)
//! ```
//!
//! on the level-`j` lattice, where `V_j(k)` stands for a function value at
//! `M⁻ʲk`. [`RefinementKernel`] is the single implementation of that sum.

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::IntMatrix;
use crate::mask::Problem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("integer overflow computing lattice offsets at level {level}")]
    Overflow { level: u32 },
    #[error("lattice box with {points} points exceeds the limit {limit}")]
    TooLarge { points: u128, limit: u128 },
}

/// Upper limit on dense grid size.
pub const MAX_GRID_POINTS: u128 = 1 << 27;

/// Axis-aligned box of integer points, bounds inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl IntBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners differ in dimension");
        Self { lo, hi }
    }

    /// `[−h_i, h_i]` per coordinate.
    pub fn symmetric(half_widths: &[i64]) -> Self {
        Self::new(
            half_widths.iter().map(|h| -h).collect(),
            half_widths.to_vec(),
        )
    }

    pub fn point(k: &[i64]) -> Self {
        Self::new(k.to_vec(), k.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    fn extents(&self) -> impl Iterator<Item = u128> + '_ {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| {
            if h < l {
                0
            } else {
                (h as i128 - l as i128 + 1) as u128
            }
        })
    }

    /// Number of points, saturating.
    pub fn count(&self) -> u128 {
        self.extents().fold(1u128, |acc, e| acc.saturating_mul(e))
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| l <= v && v <= h)
    }

    /// Row-major offset; the last coordinate varies fastest, so offsets
    /// follow lexicographic order.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&v, &lo), &hi) in k.iter().zip(&self.lo).zip(&self.hi) {
            if v < lo || v > hi {
                return None;
            }
            idx = idx * (hi - lo + 1) as usize + (v - lo) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut k = vec![0; d];
        for i in (0..d).rev() {
            let extent = (self.hi[i] - self.lo[i] + 1) as usize;
            k[i] = self.lo[i] + (idx % extent) as i64;
            idx /= extent;
        }
        k
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let n = if self.is_empty() {
            0
        } else {
            self.count() as usize
        };
        (0..n).map(move |i| self.point_at(i))
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Self) -> Self {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        Self::new(
            self.lo
                .iter()
                .zip(&other.lo)
                .map(|(a, b)| *a.min(b))
                .collect(),
            self.hi
                .iter()
                .zip(&other.hi)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.is_empty() || (other.contains(&self.lo) && other.contains(&self.hi))
    }

    /// Hull of `self + t` over all offsets `t`.
    pub fn minkowski_hull(&self, offsets: &[Vec<i64>]) -> Self {
        let d = self.dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for t in offsets {
            for i in 0..d {
                lo[i] = lo[i].min(self.lo[i] + t[i]);
                hi[i] = hi[i].max(self.hi[i] + t[i]);
            }
        }
        Self::new(lo, hi)
    }

    /// Hull of the image of the box's corners under an integer matrix.
    pub fn image_hull(&self, matrix: &IntMatrix) -> Option<Self> {
        let d = self.dim();
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for i in 0..d {
            for j in 0..d {
                let a = matrix.get(i, j);
                let (x, y) = (a.checked_mul(self.lo[j])?, a.checked_mul(self.hi[j])?);
                lo[i] = lo[i].checked_add(x.min(y))?;
                hi[i] = hi[i].checked_add(x.max(y))?;
            }
        }
        Some(Self::new(lo, hi))
    }
}

/// Dense values over an [`IntBox`]; points outside the box read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGrid {
    bbox: IntBox,
    values: Vec<f64>,
}

impl LatticeGrid {
    pub fn zeros(bbox: IntBox) -> Result<Self, LatticeError> {
        let points = if bbox.is_empty() { 0 } else { bbox.count() };
        if points > MAX_GRID_POINTS {
            return Err(LatticeError::TooLarge {
                points,
                limit: MAX_GRID_POINTS,
            });
        }
        Ok(Self {
            values: vec![0.0; points as usize],
            bbox,
        })
    }

    pub fn bbox(&self) -> &IntBox {
        &self.bbox
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, k: &[i64]) -> f64 {
        self.bbox.index_of(k).map_or(0.0, |i| self.values[i])
    }

    /// Panics when `k` lies outside the box.
    pub fn set(&mut self, k: &[i64], value: f64) {
        let i = self
            .bbox
            .index_of(k)
            .unwrap_or_else(|| panic!("{k:?} outside grid box"));
        self.values[i] = value;
    }

    /// `(k, value)` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.bbox.point_at(i), v))
    }

    /// Hull of the points with `|value| > eps`.
    pub fn nonzero_hull(&self, eps: f64) -> Option<IntBox> {
        self.iter()
            .filter(|(_, v)| v.abs() > eps)
            .map(|(k, _)| IntBox::point(&k))
            .reduce(|a, b| a.hull(&b))
    }

    pub fn sum(&self) -> f64 {
        neumaier_sum(self.values.iter().copied())
    }
}

/// Compensated summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The refinement sum `m·Σ c_q·V(k − S·q)` for a level-dependent shift
/// matrix `S = M^{j−1}`, and the cascade operator on integer samples.
#[derive(Debug, Clone)]
pub struct RefinementKernel {
    matrix: IntMatrix,
    weights: Vec<f64>,
    translations: Vec<Vec<i64>>,
}

impl RefinementKernel {
    pub fn new(problem: &Problem) -> Self {
        let m = problem.m() as f64;
        let (translations, weights) = problem
            .mask()
            .iter()
            .map(|(q, c)| (q.clone(), m * c.value()))
            .unzip();
        Self {
            matrix: problem.matrix().matrix().clone(),
            weights,
            translations,
        }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// `m·c_q` in mask order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn translations(&self) -> &[Vec<i64>] {
        &self.translations
    }

    /// Offsets `M^{level−1}·q` used when producing level `level ≥ 1`.
    pub fn offsets(&self, level: u32) -> Result<Vec<Vec<i64>>, LatticeError> {
        assert!(level >= 1, "refinement produces levels from 1 upward");
        let shift = self
            .matrix
            .checked_pow(level - 1)
            .ok_or(LatticeError::Overflow { level })?;
        self.translations
            .iter()
            .map(|q| {
                shift
                    .checked_mul_vec(q)
                    .ok_or(LatticeError::Overflow { level })
            })
            .collect()
    }

    /// Box that can hold every nonzero output when the input lives in
    /// `source`.
    pub fn reach(&self, source: &IntBox, level: u32) -> Result<IntBox, LatticeError> {
        Ok(source.minkowski_hull(&self.offsets(level)?))
    }

    /// Evaluate level `level` on `target` from the previous level's grid.
    ///
    /// `missing` is consulted for every source index that falls outside the
    /// source grid; returning `true` flags it as a value that should have
    /// been present, and the first such index is reported as the error.
    pub fn apply(
        &self,
        source: &LatticeGrid,
        level: u32,
        target: &IntBox,
        parallel: bool,
        missing: &(dyn Fn(&[i64]) -> bool + Sync),
    ) -> Result<Result<LatticeGrid, Vec<i64>>, LatticeError> {
        let offsets = self.offsets(level)?;
        let mut grid = LatticeGrid::zeros(target.clone())?;
        let eval = |idx: usize| -> Result<f64, Vec<i64>> {
            let k = target.point_at(idx);
            let mut src = vec![0i64; k.len()];
            let mut acc = 0.0;
            for (w, off) in self.weights.iter().zip(&offsets) {
                for i in 0..k.len() {
                    src[i] = k[i] - off[i];
                }
                match source.bbox.index_of(&src) {
                    Some(si) => acc += w * source.values[si],
                    None if missing(&src) => return Err(src),
                    None => {}
                }
            }
            Ok(acc)
        };
        let n = grid.values.len();
        let computed: Result<Vec<f64>, Vec<i64>> = if parallel {
            (0..n).into_par_iter().map(eval).collect()
        } else {
            (0..n).map(eval).collect()
        };
        Ok(computed.map(|values| {
            grid.values = values;
            grid
        }))
    }

    /// One application of the cascade operator to integer samples:
    /// `(T f)(p) = m·Σ c_q f(M·p − q)`, evaluated on `target`.
    pub fn apply_on_integers(
        &self,
        source: &LatticeGrid,
        target: &IntBox,
    ) -> Result<LatticeGrid, LatticeError> {
        let mut grid = LatticeGrid::zeros(target.clone())?;
        for (idx, slot) in grid.values.iter_mut().enumerate() {
            let p = target.point_at(idx);
            let mp = self
                .matrix
                .checked_mul_vec(&p)
                .ok_or(LatticeError::Overflow { level: 0 })?;
            let mut acc = 0.0;
            let mut src = vec![0i64; p.len()];
            for (w, q) in self.weights.iter().zip(&self.translations) {
                for i in 0..p.len() {
                    src[i] = mp[i] - q[i];
                }
                acc += w * source.get(&src);
            }
            *slot = acc;
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_is_lexicographic() {
        let b = IntBox::new(vec![-1, 0], vec![1, 2]);
        assert_eq!(b.count(), 9);
        let pts: Vec<Vec<i64>> = b.points().collect();
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(b.index_of(p), Some(i));
        }
        assert_eq!(b.index_of(&[2, 0]), None);
    }

    #[test]
    fn empty_box() {
        let b = IntBox::new(vec![1], vec![0]);
        assert!(b.is_empty());
        assert_eq!(b.points().count(), 0);
        assert!(b.is_subset_of(&IntBox::point(&[5])));
    }

    #[test]
    fn image_hull_of_unit_square() {
        let m = IntMatrix::new(vec![vec![1, 1], vec![1, -1]]).unwrap();
        let b = IntBox::new(vec![0, 0], vec![1, 1]).image_hull(&m).unwrap();
        assert_eq!(b, IntBox::new(vec![0, -1], vec![2, 1]));
    }

    #[test]
    fn compensated_sum() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}
