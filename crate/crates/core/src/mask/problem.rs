use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{Mask, ProblemError};
use crate::linalg::{
    determinant, eigenvalues, inverse, is_dilation, operator_norm, operator_norm_rational,
    real_jordan_structure_with, IntMatrix, JordanStructure, LinalgError, RationalMatrix, Spectrum,
    MAX_DIMENSION,
};

/// A validated dilation matrix with its cached analytics.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationMatrix {
    matrix: IntMatrix,
    determinant: BigInt,
    m: u64,
    inverse: RationalMatrix,
    inverse_f64: DMatrix<f64>,
    spectrum: Spectrum,
    norm: f64,
    inverse_norm: f64,
    jordan: Result<JordanStructure, LinalgError>,
}

impl DilationMatrix {
    pub fn new(matrix: IntMatrix) -> Result<Self, ProblemError> {
        let d = matrix.dim();
        if d > MAX_DIMENSION {
            return Err(ProblemError::DimensionTooLarge {
                dim: d,
                max: MAX_DIMENSION,
            });
        }
        let report = is_dilation(&matrix);
        if !report.is_dilation {
            return Err(ProblemError::NotDilation {
                reason: report.reason.unwrap_or_default(),
            });
        }
        let determinant = determinant(&matrix);
        let m = determinant
            .abs()
            .to_u64()
            .filter(|&m| m <= i64::MAX as u64)
            .ok_or(LinalgError::Overflow)?;
        let inverse = inverse(&matrix)?;
        let spectrum = eigenvalues(&matrix)?;
        let jordan = real_jordan_structure_with(&matrix, &spectrum);
        Ok(Self {
            norm: operator_norm(&matrix.to_f64()),
            inverse_norm: operator_norm_rational(&inverse),
            inverse_f64: inverse.to_f64(),
            matrix,
            determinant,
            m,
            inverse,
            spectrum,
            jordan,
        })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn determinant(&self) -> &BigInt {
        &self.determinant
    }

    /// `m = |det M|`.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Exact `M⁻¹`.
    pub fn inverse(&self) -> &RationalMatrix {
        &self.inverse
    }

    pub fn inverse_f64(&self) -> &DMatrix<f64> {
        &self.inverse_f64
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `‖M‖`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `‖M⁻¹‖`.
    pub fn inverse_norm(&self) -> f64 {
        self.inverse_norm
    }

    /// Real Jordan structure, or why it is unavailable.
    pub fn jordan(&self) -> Result<&JordanStructure, &LinalgError> {
        self.jordan.as_ref()
    }

    /// `M⁻ⁿ` in floating point, rounded from the exact power.
    pub fn inverse_power_f64(&self, n: u32) -> DMatrix<f64> {
        self.inverse.pow(n).to_f64()
    }
}

/// A dilation matrix paired with a mask of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    matrix: DilationMatrix,
    mask: Mask,
}

impl Problem {
    pub fn new(matrix: DilationMatrix, mask: Mask) -> Result<Self, ProblemError> {
        if matrix.dim() != mask.dim() {
            return Err(ProblemError::DimensionMismatch {
                what: "mask".into(),
                expected: matrix.dim(),
                found: mask.dim(),
            });
        }
        Ok(Self { matrix, mask })
    }

    pub fn matrix(&self) -> &DilationMatrix {
        &self.matrix
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.mask.dim()
    }

    /// `m = |det M|`.
    pub fn m(&self) -> u64 {
        self.matrix.m()
    }
}
