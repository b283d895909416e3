use std::io;
use std::path::PathBuf;

use refinable::lattice::LatticeError;
use refinable::samples::SampleError;
use refinable::{BoundError, CascadeError, LinalgError, PointwiseError, ProblemError};
use thiserror::Error;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Pointwise(#[from] PointwiseError),
    #[error("eigenspace for eigenvalue 1 has dimension {dimension}; rerun with --left-closed to pick the left-closed solution")]
    NonUniqueEigenspace { dimension: usize },
    #[error("{} invariant(s) failed: {}", .0.len(), .0.join(", "))]
    InvariantFailure(Vec<String>),
}

fn linalg_code(e: &LinalgError) -> (&'static str, i32) {
    match e {
        LinalgError::NotSquare => ("not-square", EXIT_INPUT),
        LinalgError::SingularMatrix => ("singular-matrix", EXIT_INPUT),
        LinalgError::RootFindingFailure { .. } => ("root-finding-failure", EXIT_NUMERICAL),
        LinalgError::ComplexSpectrum { .. } => ("complex-spectrum", EXIT_NUMERICAL),
        LinalgError::IllConditionedTransform { .. } => {
            ("ill-conditioned-transform", EXIT_NUMERICAL)
        }
        LinalgError::JordanRankMismatch { .. } => ("jordan-rank-mismatch", EXIT_NUMERICAL),
        LinalgError::ReconstructionFailure { .. } => ("reconstruction-failure", EXIT_NUMERICAL),
        LinalgError::Overflow => ("overflow", EXIT_NUMERICAL),
    }
}

fn lattice_code(e: &LatticeError) -> (&'static str, i32) {
    match e {
        LatticeError::Overflow { .. } => ("overflow", EXIT_NUMERICAL),
        LatticeError::TooLarge { .. } => ("grid-too-large", EXIT_NUMERICAL),
    }
}

fn bound_code(e: &BoundError) -> (&'static str, i32) {
    match e {
        BoundError::Linalg(l) => linalg_code(l),
        _ => ("no-bound", EXIT_NUMERICAL),
    }
}

fn cascade_code(e: &CascadeError) -> (&'static str, i32) {
    match e {
        CascadeError::DomainTooSmall { .. } => ("domain-too-small", EXIT_NUMERICAL),
        CascadeError::LevelCap { .. } => ("usage", EXIT_USAGE),
        CascadeError::Lattice(l) => lattice_code(l),
        CascadeError::Bound(b) => bound_code(b),
    }
}

impl CliError {
    /// Stable identifier printed on the diagnostic stream, and the exit status.
    pub fn code(&self) -> (&'static str, i32) {
        match self {
            CliError::Usage(_) => ("usage", EXIT_USAGE),
            CliError::Read { .. } => ("unreadable-input", EXIT_INPUT),
            CliError::Write { .. } => ("unwritable-output", EXIT_INPUT),
            CliError::Problem(p) => match p {
                ProblemError::Parse(_) => ("parse-error", EXIT_INPUT),
                ProblemError::DimensionMismatch { .. } => ("dimension-mismatch", EXIT_INPUT),
                ProblemError::DimensionTooLarge { .. } => ("dimension-too-large", EXIT_INPUT),
                ProblemError::NotDilation { .. } => ("not-dilation", EXIT_INPUT),
                ProblemError::MaskSumViolation { .. } => ("mask-sum-violation", EXIT_INPUT),
                ProblemError::EmptyMask => ("empty-mask", EXIT_INPUT),
                ProblemError::DuplicateIndex { .. } => ("duplicate-index", EXIT_INPUT),
                ProblemError::InvalidCoefficient { .. } => ("invalid-coefficient", EXIT_INPUT),
                ProblemError::Linalg(l) => linalg_code(l),
            },
            CliError::Bound(b) => bound_code(b),
            CliError::Cascade(c) => cascade_code(c),
            CliError::Pointwise(p) => match p {
                PointwiseError::NoBoundAvailable(b) => bound_code(b),
                PointwiseError::NoUnitEigenvalue { .. } => ("no-unit-eigenvalue", EXIT_NUMERICAL),
                PointwiseError::NormalizationImpossible { .. } => {
                    ("normalization-impossible", EXIT_NUMERICAL)
                }
                PointwiseError::DomainTooSmall { .. } => ("domain-too-small", EXIT_NUMERICAL),
                PointwiseError::SeedMismatch { .. } => ("seed-mismatch", EXIT_NUMERICAL),
                PointwiseError::NoPoints => ("no-candidate-points", EXIT_NUMERICAL),
                PointwiseError::Lattice(l) => lattice_code(l),
                PointwiseError::Cascade(c) => cascade_code(c),
                PointwiseError::Samples(
                    SampleError::Malformed { .. } | SampleError::MissingHeader,
                ) => ("parse-error", EXIT_INPUT),
            },
            CliError::NonUniqueEigenspace { .. } => ("non-unique-eigenspace", EXIT_NUMERICAL),
            CliError::InvariantFailure(_) => ("invariant-failure", EXIT_NUMERICAL),
        }
    }

    /// `error: code=<code> exit=<status>: <message>` on one line.
    pub fn diagnostic(&self) -> String {
        let (code, exit) = self.code();
        let message = self.to_string().replace(['\n', '\r'], " ");
        format!("error: code={code} exit={exit}: {message}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_errors_exit_two() {
        let e = CliError::from(ProblemError::NotDilation { reason: "x".into() });
        assert_eq!(e.code(), ("not-dilation", EXIT_INPUT));
        let e = CliError::from(ProblemError::MaskSumViolation { sum: 0.5 });
        assert_eq!(e.code(), ("mask-sum-violation", EXIT_INPUT));
    }

    #[test]
    fn numerical_errors_exit_three() {
        let e = CliError::from(PointwiseError::NoUnitEigenvalue {
            tolerance: 1e-9,
            closest: 0.1,
        });
        assert_eq!(e.code(), ("no-unit-eigenvalue", EXIT_NUMERICAL));
        let e = CliError::from(BoundError::Linalg(LinalgError::ComplexSpectrum {
            re: 1.0,
            im: 1.0,
        }));
        assert_eq!(e.code(), ("complex-spectrum", EXIT_NUMERICAL));
    }

    #[test]
    fn diagnostic_is_one_line() {
        let e = CliError::Usage("bad\nflag".into());
        assert_eq!(e.diagnostic(), "error: code=usage exit=1: bad flag");
    }
}
