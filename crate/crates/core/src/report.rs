//! Tabular reports rendered as CSV or JSON.
//!
//! Tables hold values in nats. Conversion to bits happens once, when a table
//! is rendered, and only touches columns declared as information quantities.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Version of the JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// How a column responds to the output unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Unit-free.
    Plain,
    /// Information (nats → bits divides by `ln 2`).
    Info,
    /// Information, converted like [`Kind::Info`] but without a unit suffix
    /// in the header.
    InfoBare,
    /// Squared information, such as a variance (divides by `ln² 2`).
    Info2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

impl Column {
    /// Header name; information columns carry a unit suffix.
    fn header(&self, unit: Unit) -> String {
        match self.kind {
            Kind::Plain | Kind::InfoBare => self.name.clone(),
            Kind::Info => format!("{}_{}", self.name, unit.name()),
            Kind::Info2 => format!("{}_{}2", self.name, unit.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// A titled table with key/value metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub command: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str) -> Self {
        Table { command: command.to_string(), meta: vec![], columns: vec![], rows: vec![] }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn column(mut self, name: &str, kind: Kind) -> Self {
        self.columns.push(Column { name: name.to_string(), kind });
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    fn converted(&self, unit: Unit, col: usize, x: f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        match (unit, self.columns[col].kind) {
            (Unit::Nats, _) | (_, Kind::Plain) => x,
            (Unit::Bits, Kind::Info | Kind::InfoBare) => x / ln2,
            (Unit::Bits, Kind::Info2) => x / (ln2 * ln2),
        }
    }

    /// CSV with `# key=value` preamble lines, then the header row.
    pub fn to_csv(&self, unit: Unit) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command={}", self.command);
        let _ = writeln!(s, "# schema_version={SCHEMA_VERSION}");
        let _ = writeln!(s, "# unit={}", unit.name());
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        let header: Vec<String> = self.columns.iter().map(|c| c.header(unit)).collect();
        let _ = writeln!(s, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, c)| match c {
                    Cell::Num(x) => format_float(self.converted(unit, j, *x)),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(t) => t.clone(),
                    Cell::Missing => String::new(),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// One JSON object; rows are objects keyed by header name. Non-finite
    /// numbers are written as the strings `inf`, `-inf` and `nan`.
    pub fn to_json(&self, unit: Unit) -> Value {
        let header: Vec<String> = self.columns.iter().map(|c| c.header(unit)).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (j, c) in row.iter().enumerate() {
                    let v = match c {
                        Cell::Num(x) => float_value(self.converted(unit, j, *x)),
                        Cell::Int(i) => json!(i),
                        Cell::Text(t) => json!(t),
                        Cell::Missing => Value::Null,
                    };
                    obj.insert(header[j].clone(), v);
                }
                Value::Object(obj)
            })
            .collect();
        let meta: serde_json::Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "unit": unit.name(),
            "meta": meta,
            "columns": header,
            "rows": rows,
        })
    }

    pub fn render(&self, unit: Unit, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(unit),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json(unit)).expect("JSON values serialize");
                s.push('\n');
                s
            }
        }
    }
}

fn float_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format_float(x))
    }
}

/// Twelve significant digits. Fixed notation for magnitudes in
/// `[1e-4, 1e12)`, scientific otherwise; trailing zeros are dropped.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
