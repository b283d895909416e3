use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Coefficient, DilationMatrix, Mask, Problem, ProblemError};
use crate::linalg::{IntMatrix, MAX_DIMENSION};

/// The interchange document: one problem per JSON object.
///
/// ```json
/// {
///   "dimension": 1,
///   "matrix": [[2]],
///   "coefficients": [
///     { "q": [0], "c": "1/2" },
///     { "q": [1], "c": 0.5 }
///   ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub dimension: usize,
    pub matrix: Vec<Vec<i64>>,
    pub coefficients: Vec<CoefficientRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub q: Vec<i64>,
    /// A JSON number, or a string holding `"p/q"`, an integer or a decimal.
    pub c: Value,
}

/// Parse and fully validate a problem document.
pub fn parse_problem(source: &str) -> Result<Problem, ProblemError> {
    let doc: ProblemDocument =
        serde_json::from_str(source).map_err(|e| ProblemError::Parse(e.to_string()))?;
    doc.into_problem()
}

impl ProblemDocument {
    pub fn into_problem(self) -> Result<Problem, ProblemError> {
        let d = self.dimension;
        if d == 0 {
            return Err(ProblemError::Parse("dimension must be positive".into()));
        }
        if d > MAX_DIMENSION {
            return Err(ProblemError::DimensionTooLarge {
                dim: d,
                max: MAX_DIMENSION,
            });
        }
        if self.matrix.len() != d {
            return Err(ProblemError::DimensionMismatch {
                what: "matrix".into(),
                expected: d,
                found: self.matrix.len(),
            });
        }
        if let Some(row) = self.matrix.iter().find(|r| r.len() != d) {
            return Err(ProblemError::DimensionMismatch {
                what: "matrix row".into(),
                expected: d,
                found: row.len(),
            });
        }
        let entries = self
            .coefficients
            .into_iter()
            .map(|rec| Ok((rec.q, coefficient_from_json(&rec.c)?)))
            .collect::<Result<Vec<_>, ProblemError>>()?;
        let mask = Mask::new(d, entries)?;
        let matrix = DilationMatrix::new(IntMatrix::new(self.matrix)?)?;
        Problem::new(matrix, mask)
    }
}

fn coefficient_from_json(value: &Value) -> Result<Coefficient, ProblemError> {
    match value {
        Value::Number(n) => Coefficient::decimal(&n.to_string()),
        Value::String(s) => Coefficient::parse_text(s),
        other => Err(ProblemError::InvalidCoefficient {
            literal: other.to_string(),
            reason: "expected a number or a \"p/q\" string".into(),
        }),
    }
}

fn coefficient_to_json(c: &Coefficient) -> Value {
    if c.is_quoted() {
        Value::String(c.literal().to_string())
    } else {
        serde_json::from_str::<serde_json::Number>(c.literal())
            .map(Value::Number)
            .unwrap_or_else(|_| Value::String(c.literal().to_string()))
    }
}

impl Problem {
    pub fn to_document(&self) -> ProblemDocument {
        ProblemDocument {
            dimension: self.dim(),
            matrix: self.matrix().matrix().rows(),
            coefficients: self
                .mask()
                .iter()
                .map(|(q, c)| CoefficientRecord {
                    q: q.clone(),
                    c: coefficient_to_json(c),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HAAR: &str = r#"{"dimension": 1, "matrix": [[2]],
        "coefficients": [{"q": [0], "c": "1/2"}, {"q": [1], "c": "1/2"}]}"#;

    #[test]
    fn haar_document() {
        let p = parse_problem(HAAR).unwrap();
        assert_eq!(p.m(), 2);
        assert_eq!(p.mask().radius(), 1.0);
    }

    #[test]
    fn d4_decimal_document() {
        let doc = r#"{"dimension": 1, "matrix": [[2]], "coefficients": [
            {"q": [0], "c": 0.34150635094610966169093079268824},
            {"q": [1], "c": 0.59150635094610966169093079268824},
            {"q": [2], "c": 0.15849364905389033830906920731176},
            {"q": [3], "c": -0.09150635094610966169093079268824}]}"#;
        let p = parse_problem(doc).unwrap();
        assert_eq!(p.mask().radius(), 3.0);
        assert_eq!(p.mask().len(), 4);
    }

    #[test]
    fn errors() {
        let sum = r#"{"dimension": 1, "matrix": [[2]],
            "coefficients": [{"q": [0], "c": "1/2"}, {"q": [1], "c": "1/4"}]}"#;
        assert!(matches!(
            parse_problem(sum),
            Err(ProblemError::MaskSumViolation { .. })
        ));
        let unknown = r#"{"dimension": 1, "matrix": [[2]], "extra": 1,
            "coefficients": [{"q": [0], "c": 1}]}"#;
        assert!(matches!(
            parse_problem(unknown),
            Err(ProblemError::Parse(_))
        ));
        let dims = r#"{"dimension": 2, "matrix": [[2]], "coefficients": [{"q": [0], "c": 1}]}"#;
        assert!(matches!(
            parse_problem(dims),
            Err(ProblemError::DimensionMismatch { .. })
        ));
        let qdim = r#"{"dimension": 1, "matrix": [[2]], "coefficients": [{"q": [0, 1], "c": 1}]}"#;
        assert!(matches!(
            parse_problem(qdim),
            Err(ProblemError::DimensionMismatch { .. })
        ));
        let not_dil = r#"{"dimension": 1, "matrix": [[1]], "coefficients": [{"q": [0], "c": 1}]}"#;
        assert!(matches!(
            parse_problem(not_dil),
            Err(ProblemError::NotDilation { .. })
        ));
        let garbage = "{not json";
        assert!(matches!(
            parse_problem(garbage),
            Err(ProblemError::Parse(_))
        ));
        let bad_c = r#"{"dimension": 1, "matrix": [[2]], "coefficients": [{"q": [0], "c": true}]}"#;
        assert!(matches!(
            parse_problem(bad_c),
            Err(ProblemError::InvalidCoefficient { .. })
        ));
    }

    #[test]
    fn serialization_keeps_literals() {
        let p = parse_problem(HAAR).unwrap();
        let again = parse_problem(&p.to_json()).unwrap();
        assert_eq!(p, again);
        assert!(p.to_json().contains("\"1/2\""));
    }
}
