//! Typed result tables and their CSV form.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Int,
    Float,
    Bool,
    Text,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: Kind) -> Self {
        Self { name: name.into(), kind }
    }

    pub fn float(name: impl Into<String>) -> Self {
        Self::new(name, Kind::Float)
    }

    pub fn int(name: impl Into<String>) -> Self {
        Self::new(name, Kind::Int)
    }

    pub fn flag(name: impl Into<String>) -> Self {
        Self::new(name, Kind::Bool)
    }

    pub fn text(name: impl Into<String>) -> Self {
        Self::new(name, Kind::Text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Value {
    fn kind(&self) -> Option<Kind> {
        match self {
            Value::Int(_) => Some(Kind::Int),
            Value::Float(_) => Some(Kind::Float),
            Value::Bool(_) => Some(Kind::Bool),
            Value::Text(_) => Some(Kind::Text),
            Value::Missing => None,
        }
    }

    /// CSV cell: floats carry 12 significant digits.
    pub fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) if v.is_finite() => format!("{v:.11e}"),
            Value::Float(v) => format!("{v}"),
            Value::Bool(v) => v.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    pub fn parse(text: &str, kind: Kind) -> Result<Self, String> {
        if text.is_empty() {
            return Ok(Value::Missing);
        }
        match kind {
            Kind::Int => text.parse().map(Value::Int).map_err(|_| format!("`{text}` is not an integer")),
            Kind::Float => text.parse().map(Value::Float).map_err(|_| format!("`{text}` is not a number")),
            Kind::Bool => text.parse().map(Value::Bool).map_err(|_| format!("`{text}` is not a boolean")),
            Kind::Text => Ok(Value::Text(text.to_string())),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            Value::Float(v) if v.is_finite() => s.serialize_f64(*v),
            Value::Float(v) => s.serialize_str(&v.to_string()),
            Value::Bool(v) => s.serialize_bool(*v),
            Value::Text(v) => s.serialize_str(v),
            Value::Missing => s.serialize_none(),
        }
    }
}

pub type Row = Vec<Value>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

/// A row keyed by column name, for JSON output.
pub struct NamedRow<'a> {
    columns: &'a [Column],
    row: &'a Row,
}

impl Serialize for NamedRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.row) {
            map.serialize_entry(&c.name, v)?;
        }
        map.end()
    }
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    /// Append a row after checking its shape against the schema.
    pub fn push(&mut self, row: Row) -> Result<(), CliError> {
        if row.len() != self.columns.len() {
            return Err(CliError::Output(format!(
                "row has {} cells, schema has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (c, v) in self.columns.iter().zip(&row) {
            if let Some(k) = v.kind() {
                if k != c.kind {
                    return Err(CliError::Output(format!("column {} expects {:?}, got {v:?}", c.name, c.kind)));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn named_rows(&self) -> Vec<NamedRow<'_>> {
        self.rows.iter().map(|row| NamedRow { columns: &self.columns, row }).collect()
    }

    /// Write `# `-prefixed metadata lines, the header and the rows.
    pub fn write_csv<W: Write>(&self, mut out: W, metadata: &[String]) -> Result<(), CliError> {
        for line in metadata {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .map_err(|e| CliError::Output(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render))
                .map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse CSV text written by [`Table::write_csv`] against `columns`.
    pub fn read_csv(text: &str, columns: &[Column]) -> Result<Table, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| CliError::Output(e.to_string()))?;
        let names: Vec<&str> = header.iter().collect();
        let expected: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        if names != expected {
            return Err(CliError::Output(format!("header {names:?} does not match schema {expected:?}")));
        }
        let mut table = Table::new(columns.to_vec());
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Output(e.to_string()))?;
            let row = record
                .iter()
                .zip(columns)
                .map(|(cell, c)| Value::parse(cell, c.kind))
                .collect::<Result<Row, String>>()
                .map_err(|e| CliError::Output(format!("row {}: {e}", i + 1)))?;
            table.push(row)?;
        }
        Ok(table)
    }
}
