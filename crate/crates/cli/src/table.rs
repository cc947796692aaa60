//! Result tables and their CSV / JSON encodings.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_g9(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => format_g9(*v)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or_else(|| Value::String(format_g9(*v)), Value::Number),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: Option<String>,
}

impl Column {
    pub fn header(&self) -> String {
        match &self.unit {
            Some(u) => format!("{}[{}]", self.name, u),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: BTreeMap<String, String>,
}

impl ResultTable {
    /// Columns given as `(name, unit)`; an empty unit marks a unitless column.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: (*n).into(),
                    unit: (!u.is_empty()).then(|| (*u).into()),
                })
                .collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.into(), value.to_string());
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        for (k, v) in &self.metadata {
            out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(self.columns.iter().map(Column::header)).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let metadata: Map<String, Value> = self.metadata.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|c| json!({ "name": c.name, "unit": c.unit }))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        let doc = json!({ "metadata": metadata, "columns": columns, "rows": rows });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("table serializes");
        bytes.push(b'\n');
        bytes
    }
}

/// A stored table read back as text cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub metadata: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedTable {
    pub fn parse(bytes: &[u8], format: Format) -> Result<Self, CliError> {
        match format {
            Format::Csv => Self::parse_csv(bytes),
            Format::Json => Self::parse_json(bytes),
        }
    }

    fn parse_csv(bytes: &[u8]) -> Result<Self, CliError> {
        let text = std::str::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?;
        let mut metadata = BTreeMap::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(entry) = line.strip_prefix("# ") else { break };
            if let Some((k, v)) = entry.trim_end_matches('\n').split_once('=') {
                metadata.insert(k.to_string(), v.to_string());
            }
            body_start += line.len();
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(&bytes[body_start..]);
        let bad = |e: csv::Error| CliError::Io(format!("malformed table: {e}"));
        let header = reader.headers().map_err(bad)?.iter().map(String::from).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(bad)?;
        Ok(Self { metadata, header, rows })
    }

    fn parse_json(bytes: &[u8]) -> Result<Self, CliError> {
        let bad = |what: &str| CliError::Io(format!("malformed table: {what}"));
        let doc: Value = serde_json::from_slice(bytes).map_err(|e| CliError::Io(format!("malformed table: {e}")))?;
        let metadata = doc["metadata"]
            .as_object()
            .ok_or_else(|| bad("metadata"))?
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().unwrap_or_default().to_string()))
            .collect();
        let header = doc["columns"]
            .as_array()
            .ok_or_else(|| bad("columns"))?
            .iter()
            .map(|c| match c["unit"].as_str() {
                Some(u) => format!("{}[{}]", c["name"].as_str().unwrap_or_default(), u),
                None => c["name"].as_str().unwrap_or_default().to_string(),
            })
            .collect();
        let rows = doc["rows"]
            .as_array()
            .ok_or_else(|| bad("rows"))?
            .iter()
            .map(|r| {
                r.as_array()
                    .map(|cells| {
                        cells
                            .iter()
                            .map(|c| match c {
                                Value::String(s) => s.clone(),
                                other => other.to_string(),
                            })
                            .collect()
                    })
                    .ok_or_else(|| bad("row"))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { metadata, header, rows })
    }

    /// First difference from `fresh`, numeric cells compared to `rel_tol`.
    pub fn compare(&self, fresh: &ParsedTable, rel_tol: f64) -> Option<String> {
        if self.header != fresh.header {
            return Some(format!("columns differ: {:?} vs {:?}", self.header, fresh.header));
        }
        if self.rows.len() != fresh.rows.len() {
            return Some(format!("row count {} vs {}", self.rows.len(), fresh.rows.len()));
        }
        for (i, (a, b)) in self.rows.iter().zip(&fresh.rows).enumerate() {
            for (j, (x, y)) in a.iter().zip(b).enumerate() {
                let same = match (x.parse::<f64>(), y.parse::<f64>()) {
                    (Ok(p), Ok(q)) if p.is_nan() || q.is_nan() => p.is_nan() && q.is_nan(),
                    (Ok(p), Ok(q)) if p.is_infinite() || q.is_infinite() => p == q,
                    (Ok(p), Ok(q)) => (p - q).abs() <= rel_tol * p.abs().max(q.abs()) || (p - q).abs() <= 1e-300,
                    _ => x == y,
                };
                if !same {
                    return Some(format!("row {i}, column {}: stored {x}, fresh {y}", self.header[j]));
                }
            }
        }
        None
    }
}

/// `%.9g`-style formatting.
pub fn format_g9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
