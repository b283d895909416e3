//! Tab-separated sample dumps shared by the cascade and pointwise modules.
//!
//! Columns are tab-separated: `level`, `k1..kd`, `x1..xd`, `value`, with a
//! mandatory header row. Floats are written so that parsing returns the same bits.

use std::fmt::Write as _;

use thiserror::Error;

use crate::linalg::{rational_to_f64, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("missing header row")]
    MissingHeader,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub level: u32,
    pub index: Vec<i64>,
    /// `M⁻ˡᵉᵛᵉˡ·k`.
    pub coords: Vec<f64>,
    pub value: f64,
}

impl SampleRow {
    /// Row for the level-`level` lattice point `k`, given the exact `M⁻ˡᵉᵛᵉˡ`.
    pub fn at(level: u32, index: Vec<i64>, inverse_power: &RationalMatrix, value: f64) -> Self {
        let coords = inverse_power
            .mul_int_vec(&index)
            .iter()
            .map(rational_to_f64)
            .collect();
        Self {
            level,
            index,
            coords,
            value,
        }
    }
}

pub fn header(dim: usize) -> String {
    let mut h = String::from("level");
    for i in 1..=dim {
        write!(h, "\tk{i}").unwrap();
    }
    for i in 1..=dim {
        write!(h, "\tx{i}").unwrap();
    }
    h.push_str("\tvalue");
    h
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_row(row: &SampleRow) -> String {
    let mut s = row.level.to_string();
    for k in &row.index {
        write!(s, "\t{k}").unwrap();
    }
    for x in &row.coords {
        write!(s, "\t{}", format_float(*x)).unwrap();
    }
    write!(s, "\t{}", format_float(row.value)).unwrap();
    s
}

/// Header plus one line per row, newline-terminated.
pub fn write_samples(dim: usize, rows: &[SampleRow]) -> String {
    let mut out = header(dim);
    out.push('\n');
    for row in rows {
        out.push_str(&format_row(row));
        out.push('\n');
    }
    out
}

/// Parse a dump; the dimension is read from the header.
pub fn parse_samples(text: &str) -> Result<(usize, Vec<SampleRow>), SampleError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(SampleError::MissingHeader)?;
    let cols: Vec<&str> = head.split('\t').collect();
    if cols.len() < 4
        || cols[0] != "level"
        || cols[cols.len() - 1] != "value"
        || !cols.len().is_multiple_of(2)
    {
        return Err(SampleError::MissingHeader);
    }
    let dim = (cols.len() - 2) / 2;
    if head != header(dim) {
        return Err(SampleError::MissingHeader);
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        let line_no = n + 1;
        let bad = |reason: String| SampleError::Malformed {
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 * dim + 2 {
            return Err(bad(format!(
                "expected {} fields, found {}",
                2 * dim + 2,
                fields.len()
            )));
        }
        let level = fields[0].parse().map_err(|e| bad(format!("level: {e}")))?;
        let index = fields[1..=dim]
            .iter()
            .map(|f| f.parse::<i64>().map_err(|e| bad(format!("index: {e}"))))
            .collect::<Result<_, _>>()?;
        let coords = fields[dim + 1..=2 * dim]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| bad(format!("coordinate: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let value = fields[2 * dim + 1]
            .parse()
            .map_err(|e| bad(format!("value: {e}")))?;
        rows.push(SampleRow {
            level,
            index,
            coords,
            value,
        });
    }
    Ok((dim, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(header(2), "level\tk1\tk2\tx1\tx2\tvalue");
    }

    #[test]
    fn floats_roundtrip() {
        for v in [
            0.0,
            -0.0,
            1.0,
            1e-300,
            -3.5e20,
            0.1 + 0.2,
            1.0 / 3.0,
            5e-5,
            f64::MAX,
        ] {
            assert_eq!(
                format_float(v).parse::<f64>().unwrap().to_bits(),
                v.to_bits()
            );
        }
    }

    #[test]
    fn roundtrip() {
        let rows = vec![
            SampleRow {
                level: 0,
                index: vec![0, -1],
                coords: vec![0.0, -1.0],
                value: 1.0 / 3.0,
            },
            SampleRow {
                level: 3,
                index: vec![5, 2],
                coords: vec![0.625, 0.25],
                value: -1.25e-17,
            },
        ];
        let text = write_samples(2, &rows);
        assert_eq!(parse_samples(&text).unwrap(), (2, rows));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(parse_samples(""), Err(SampleError::MissingHeader));
        assert!(matches!(
            parse_samples("level\tk1\tx1\tvalue\n0\t1\t1\n"),
            Err(SampleError::Malformed { line: 2, .. })
        ));
    }
}
