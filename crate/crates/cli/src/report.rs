//! Command output model and its three renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use refinable::samples::format_float;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    /// Aligned columns for reading.
    #[default]
    Table,
    /// Tab-separated sections.
    Delimited,
    /// One JSON document.
    Structured,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Floats(Vec<f64>),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Floats(v) => {
                let parts: Vec<String> = v.iter().map(|x| format_float(*x)).collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => float_json(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Floats(v) => Value::Array(v.iter().map(|x| float_json(*x)).collect()),
        }
    }
}

fn float_json(v: f64) -> Value {
    Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format_float(v)))
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        i64::try_from(v)
            .map(Cell::Int)
            .unwrap_or_else(|_| Cell::Text(v.to_string()))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::from(v as u64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Vec<f64>> for Cell {
    fn from(v: Vec<f64>) -> Self {
        Cell::Floats(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Fields(Vec<(String, Cell)>),
    Rows {
        columns: Vec<String>,
        rows: Vec<Vec<Cell>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    name: String,
    body: Body,
}

impl Section {
    pub fn fields(name: &str) -> Self {
        Self {
            name: name.to_string(),
            body: Body::Fields(Vec::new()),
        }
    }

    pub fn rows<S: AsRef<str>>(name: &str, columns: &[S]) -> Self {
        Self {
            name: name.to_string(),
            body: Body::Rows {
                columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
                rows: Vec::new(),
            },
        }
    }

    pub fn field(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.push_field(key, value);
        self
    }

    pub fn push_field(&mut self, key: &str, value: impl Into<Cell>) {
        match &mut self.body {
            Body::Fields(f) => f.push((key.to_string(), value.into())),
            Body::Rows { .. } => panic!("push_field on a row section"),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        match &mut self.body {
            Body::Rows { columns, rows } => {
                assert_eq!(
                    row.len(),
                    columns.len(),
                    "row width in section {}",
                    self.name
                );
                rows.push(row);
            }
            Body::Fields(_) => panic!("push_row on a field section"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    command: String,
    sections: Vec<Section>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            sections: Vec::new(),
        }
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Table => self.table(),
            OutputFormat::Delimited => self.delimited(),
            OutputFormat::Structured => self.structured(),
        }
    }

    fn table(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "== {} ==", s.name).unwrap();
            match &s.body {
                Body::Fields(fields) => {
                    for (k, v) in fields {
                        writeln!(out, "{k}: {}", v.text()).unwrap();
                    }
                }
                Body::Rows { columns, rows } => {
                    let cells: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| r.iter().map(Cell::text).collect())
                        .collect();
                    let mut widths: Vec<usize> =
                        columns.iter().map(|c| c.chars().count()).collect();
                    for r in &cells {
                        for (w, c) in widths.iter_mut().zip(r) {
                            *w = (*w).max(c.chars().count());
                        }
                    }
                    let line = |items: &[String]| {
                        let padded: Vec<String> = items
                            .iter()
                            .zip(&widths)
                            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                            .collect();
                        padded.join("  ").trim_end().to_string()
                    };
                    writeln!(out, "{}", line(columns)).unwrap();
                    for r in &cells {
                        writeln!(out, "{}", line(r)).unwrap();
                    }
                }
            }
        }
        out
    }

    fn delimited(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "# {}", s.name).unwrap();
            match &s.body {
                Body::Fields(fields) => {
                    for (k, v) in fields {
                        writeln!(out, "{k}\t{}", v.text()).unwrap();
                    }
                }
                Body::Rows { columns, rows } => {
                    writeln!(out, "{}", columns.join("\t")).unwrap();
                    for r in rows {
                        let cells: Vec<String> = r.iter().map(Cell::text).collect();
                        writeln!(out, "{}", cells.join("\t")).unwrap();
                    }
                }
            }
        }
        out
    }

    fn structured(&self) -> String {
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        for s in &self.sections {
            let value = match &s.body {
                Body::Fields(fields) => {
                    Value::Object(fields.iter().map(|(k, v)| (k.clone(), v.json())).collect())
                }
                Body::Rows { columns, rows } => Value::Array(
                    rows.iter()
                        .map(|r| {
                            Value::Object(
                                columns
                                    .iter()
                                    .cloned()
                                    .zip(r.iter().map(Cell::json))
                                    .collect(),
                            )
                        })
                        .collect(),
                ),
            };
            root.insert(s.name.clone(), value);
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(root)).unwrap();
        text.push('\n');
        text
    }
}
