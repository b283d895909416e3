//! The cascade iteration `F_n = T_c F_{n−1}` sampled on refinement lattices,
//! and the frequency-domain symbol `m₀`.
//!
//! `F_n` is stored only on `M⁻ⁿℤᵈ` as `G_n(k) = F_n(M⁻ⁿk)`, where the
//! recurrence is exact and no interpolation is needed.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::bounds::{enclosing_integer_box, general_ball_bound, BoundError};
use crate::lattice::{IntBox, LatticeError, LatticeGrid, RefinementKernel};
use crate::linalg::{rational_to_f64, RationalMatrix};
use crate::mask::{DilationMatrix, Mask, Problem};
use crate::samples::SampleRow;

/// Default threshold below which samples count as zero.
pub const DEFAULT_SUPPORT_EPS: f64 = 1e-12;

/// Default cap on the number of lattice levels.
pub const DEFAULT_LEVEL_CAP: u32 = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error("level {level} needs the box {needed:?} but only {available:?} is available")]
    DomainTooSmall {
        level: u32,
        needed: IntBox,
        available: IntBox,
    },
    #[error("{requested} levels requested, cap is {cap}")]
    LevelCap { requested: u32, cap: u32 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// Initial functions satisfying `Σ_q F₀(x + q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialFunctionKind {
    /// Indicator of `[−1/2, 1/2)ᵈ`.
    #[default]
    IndicatorBox,
    /// `∏(1 − |x_j|)₊`.
    TensorHat,
}

impl InitialFunctionKind {
    /// Exact value at an integer point.
    pub fn at_integer(&self, k: &[i64]) -> f64 {
        match self {
            InitialFunctionKind::IndicatorBox => {
                if k.iter().all(|&v| v == 0) {
                    1.0
                } else {
                    0.0
                }
            }
            InitialFunctionKind::TensorHat => k
                .iter()
                .map(|&v| (1.0 - (v as f64).abs()).max(0.0))
                .product(),
        }
    }
}

impl FromStr for InitialFunctionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "box" => Ok(Self::IndicatorBox),
            "hat" => Ok(Self::TensorHat),
            other => Err(format!(
                "unknown initial function {other:?}, expected box or hat"
            )),
        }
    }
}

impl fmt::Display for InitialFunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IndicatorBox => "box",
            Self::TensorHat => "hat",
        })
    }
}

/// Samples `G_n(k) = F_n(M⁻ⁿk)` over an integer box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub level: u32,
    pub grid: LatticeGrid,
    m: u64,
    inverse_power: RationalMatrix,
}

impl SampledFunction {
    pub fn new(matrix: &DilationMatrix, level: u32, grid: LatticeGrid) -> Self {
        Self {
            level,
            m: matrix.m(),
            inverse_power: matrix.inverse().pow(level),
            grid,
        }
    }

    pub fn domain_box(&self) -> &IntBox {
        self.grid.bbox()
    }

    pub fn value(&self, k: &[i64]) -> f64 {
        self.grid.get(k)
    }

    /// Exact `M⁻ⁿ` for this level.
    pub fn inverse_power(&self) -> &RationalMatrix {
        &self.inverse_power
    }

    /// `M⁻ⁿk` in floating point.
    pub fn coordinates(&self, k: &[i64]) -> Vec<f64> {
        self.inverse_power
            .mul_int_vec(k)
            .iter()
            .map(rational_to_f64)
            .collect()
    }

    /// One row per stored point, lexicographic in `k`.
    pub fn rows(&self) -> Vec<SampleRow> {
        self.grid
            .iter()
            .map(|(k, v)| SampleRow::at(self.level, k, &self.inverse_power, v))
            .collect()
    }
}

/// Level-0 samples of the initial function on `bbox`.
pub fn initial_samples(
    kind: InitialFunctionKind,
    matrix: &DilationMatrix,
    bbox: &IntBox,
) -> Result<SampledFunction, CascadeError> {
    let mut grid = LatticeGrid::zeros(bbox.clone())?;
    for (i, k) in bbox.points().enumerate() {
        grid.values_mut()[i] = kind.at_integer(&k);
    }
    Ok(SampledFunction::new(matrix, 0, grid))
}

/// `G_n(k) = m·Σ_q c_q·G_{n−1}(k − M^{n−1}q)`.
///
/// The output box is the exact reach of the input's nonzero samples unless
/// `target` is given, in which case it must contain that reach.
pub fn cascade_step(
    problem: &Problem,
    kernel: &RefinementKernel,
    f: &SampledFunction,
    target: Option<&IntBox>,
    parallel: bool,
) -> Result<SampledFunction, CascadeError> {
    let level = f.level + 1;
    let needed = match f.grid.nonzero_hull(0.0) {
        Some(hull) => kernel.reach(&hull, level)?,
        None => IntBox::point(&vec![0; problem.dim()]),
    };
    let target = match target {
        Some(t) if !needed.is_subset_of(t) => {
            return Err(CascadeError::DomainTooSmall {
                level,
                needed,
                available: t.clone(),
            })
        }
        Some(t) => t.clone(),
        None => needed,
    };
    let grid = kernel
        .apply(&f.grid, level, &target, parallel, &|_| false)?
        .expect("zero samples outside the stored box are never required");
    Ok(SampledFunction::new(problem.matrix(), level, grid))
}

/// Integer box holding every integer-lattice iterate of a spike at the origin.
pub fn integer_domain(problem: &Problem) -> Result<IntBox, CascadeError> {
    Ok(enclosing_integer_box(&general_ball_bound(problem)?))
}

/// `iterations` applications of `(T f)(p) = m·Σ c_q f(Mp − q)` to the
/// initial function restricted to `ℤᵈ`.
pub fn integer_iterate(
    problem: &Problem,
    kernel: &RefinementKernel,
    kind: InitialFunctionKind,
    iterations: u32,
) -> Result<LatticeGrid, CascadeError> {
    let bbox = integer_domain(problem)?;
    let mut grid = initial_samples(kind, problem.matrix(), &bbox)?.grid;
    for _ in 0..iterations {
        grid = kernel.apply_on_integers(&grid, &bbox)?;
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeConfig {
    pub initial: InitialFunctionKind,
    pub levels: u32,
    /// Integer-lattice iterations applied before the first lattice level.
    pub warmup: u32,
    pub parallel: bool,
    pub level_cap: u32,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            initial: InitialFunctionKind::IndicatorBox,
            levels: 8,
            warmup: 0,
            parallel: false,
            level_cap: DEFAULT_LEVEL_CAP,
        }
    }
}

/// Levels `0..=config.levels`.
pub fn cascade_run(
    problem: &Problem,
    config: &CascadeConfig,
) -> Result<Vec<SampledFunction>, CascadeError> {
    if config.levels > config.level_cap {
        return Err(CascadeError::LevelCap {
            requested: config.levels,
            cap: config.level_cap,
        });
    }
    let kernel = RefinementKernel::new(problem);
    let seed = if config.warmup == 0 {
        let origin = IntBox::point(&vec![0; problem.dim()]);
        let bbox = match config.initial {
            InitialFunctionKind::IndicatorBox => origin,
            InitialFunctionKind::TensorHat => IntBox::symmetric(&vec![1; problem.dim()]),
        };
        initial_samples(config.initial, problem.matrix(), &bbox)?
    } else {
        let grid = integer_iterate(problem, &kernel, config.initial, config.warmup)?;
        SampledFunction::new(problem.matrix(), 0, grid)
    };
    let mut out = vec![seed];
    for _ in 0..config.levels {
        let next = cascade_step(problem, &kernel, out.last().unwrap(), None, config.parallel)?;
        out.push(next);
    }
    Ok(out)
}

/// Axis-aligned real box; `None` bounds mean empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBox {
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl RealBox {
    pub fn empty() -> Self {
        Self { bounds: None }
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn lo(&self) -> Option<&[f64]> {
        self.bounds.as_ref().map(|(lo, _)| lo.as_slice())
    }

    pub fn hi(&self) -> Option<&[f64]> {
        self.bounds.as_ref().map(|(_, hi)| hi.as_slice())
    }

    /// `self ⊆ [−h − δ, h + δ]` per coordinate.
    pub fn within_symmetric(&self, half_widths: &[f64], slack: &[f64]) -> bool {
        match &self.bounds {
            None => true,
            Some((lo, hi)) => (0..lo.len())
                .all(|i| lo[i] >= -half_widths[i] - slack[i] && hi[i] <= half_widths[i] + slack[i]),
        }
    }

    /// Largest per-coordinate endpoint shift between two nonempty boxes.
    pub fn hausdorff(&self, other: &Self) -> Option<f64> {
        let ((a_lo, a_hi), (b_lo, b_hi)) = (self.bounds.as_ref()?, other.bounds.as_ref()?);
        Some(
            a_lo.iter()
                .zip(b_lo)
                .chain(a_hi.iter().zip(b_hi))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Bounding box of `M⁻ⁿk` over samples with `|value| > eps`.
pub fn empirical_support(f: &SampledFunction, eps: f64) -> RealBox {
    let inv = f.inverse_power.to_f64();
    let d = f.grid.bbox().dim();
    let mut bounds: Option<(Vec<f64>, Vec<f64>)> = None;
    for (k, v) in f.grid.iter() {
        if v.abs() <= eps {
            continue;
        }
        let x: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| inv[(i, j)] * k[j] as f64).sum())
            .collect();
        match &mut bounds {
            None => bounds = Some((x.clone(), x)),
            Some((lo, hi)) => {
                for i in 0..d {
                    lo[i] = lo[i].min(x[i]);
                    hi[i] = hi[i].max(x[i]);
                }
            }
        }
    }
    RealBox { bounds }
}

/// Extent of one lattice cell `M⁻ⁿ[−1,1]ᵈ` per coordinate, as half-widths.
pub fn lattice_cell(inverse_power: &DMatrix<f64>) -> Vec<f64> {
    inverse_power
        .row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum())
        .collect()
}

/// `m⁻ⁿ·Σ_k G_n(k)`.
pub fn discrete_mass(f: &SampledFunction) -> f64 {
    f.grid.sum() / (f.m as f64).powi(f.level as i32)
}

/// `m₀(u) = Σ c_q e^{−2πi(q,u)}`, written as `S + Σ c_q(e^{−2πi(q,u)} − 1)`
/// with `S` the exact coefficient sum so that `m₀(0) = S` exactly.
pub fn m0_eval(mask: &Mask, u: &[f64]) -> Complex64 {
    let s = rational_to_f64(&mask.exact_sum());
    let mut acc = Complex64::new(0.0, 0.0);
    for (q, c) in mask.iter() {
        let t: f64 = q.iter().zip(u).map(|(&a, b)| a as f64 * b).sum();
        let t = t - t.round();
        let angle = -2.0 * std::f64::consts::PI * t;
        // e^{iθ} − 1 = (cos θ − 1) + i sin θ, with cos θ − 1 = −2 sin²(θ/2)
        let half = (angle / 2.0).sin();
        acc += c.value() * Complex64::new(-2.0 * half * half, angle.sin());
    }
    Complex64::new(s, 0.0) + acc
}

/// `∏_{j=1..J} m₀((Mᵀ)⁻ʲ u)`.
pub fn fourier_truncated_product(problem: &Problem, u: &[f64], j_max: u32) -> Complex64 {
    let step = problem.matrix().inverse().transpose();
    let mut power = RationalMatrix::identity(problem.dim());
    let mut product = Complex64::new(1.0, 0.0);
    for _ in 0..j_max {
        power = step.mul(&power);
        let p = power.to_f64();
        let v: Vec<f64> = (0..u.len())
            .map(|i| (0..u.len()).map(|j| p[(i, j)] * u[j]).sum())
            .collect();
        product *= m0_eval(problem.mask(), &v);
    }
    product
}
