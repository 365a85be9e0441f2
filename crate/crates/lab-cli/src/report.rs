//! Run reports and their CSV / JSON emitters.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Which computation produced a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ode,
    BesselSeries,
    PhaseRecursion,
    Dyson2,
    Oracle,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Ode => "ode",
            Method::BesselSeries => "bessel-series",
            Method::PhaseRecursion => "phase-recursion",
            Method::Dyson2 => "dyson2",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Real,
    Complex,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
    /// Producing method; `None` for inputs such as `t`, `eps` or an index.
    pub method: Option<Method>,
    /// For residual columns, the method compared against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub versus: Option<Method>,
}

impl Column {
    pub fn input(name: &str) -> Self {
        Column { name: name.into(), kind: Kind::Real, method: None, versus: None }
    }
    pub fn text(name: &str) -> Self {
        Column { name: name.into(), kind: Kind::Text, method: None, versus: None }
    }
    pub fn real(name: &str, method: Method) -> Self {
        Column { name: name.into(), kind: Kind::Real, method: Some(method), versus: None }
    }
    pub fn complex(name: &str, method: Method) -> Self {
        Column { name: name.into(), kind: Kind::Complex, method: Some(method), versus: None }
    }
    /// `|method − versus|`.
    pub fn residual(name: &str, method: Method, versus: Method) -> Self {
        Column { name: name.into(), kind: Kind::Real, method: Some(method), versus: Some(versus) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    /// Listed first so integral JSON numbers come back as `Int`; a `Real`
    /// always serializes with a decimal point.
    Int(i64),
    Real(f64),
    Complex { re: f64, im: f64 },
    Text(String),
    /// A non-finite value, e.g. an overflowed divergent series.
    Missing,
}

impl Cell {
    pub fn real(v: f64) -> Self {
        if v.is_finite() {
            Cell::Real(v)
        } else {
            Cell::Missing
        }
    }
    pub fn complex(z: C64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Cell::Complex { re: z.re, im: z.im }
        } else {
            Cell::Missing
        }
    }
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }
    pub fn index(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }
}

/// A non-convergence or other warning attached to a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tables: Vec<Table>,
    pub flags: Vec<Flag>,
    pub notes: Vec<String>,
    /// Only filled with `--timing`, so default reports stay bitwise reproducible.
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport { command, parameters: BTreeMap::new(), tables: Vec::new(), flags: Vec::new(), notes: Vec::new(), timing: None }
    }

    pub fn param(&mut self, name: &str, value: impl Into<serde_json::Value>) {
        self.parameters.insert(name.into(), value.into());
    }

    pub fn flag(&mut self, name: &str, message: impl Into<String>) {
        self.flags.push(Flag { name: name.into(), message: message.into() });
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Full double precision: 17 significant digits, `.` separator.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(col: &Column) -> Vec<String> {
    match col.kind {
        Kind::Complex => vec![format!("re_{}", col.name), format!("im_{}", col.name)],
        _ => vec![col.name.clone()],
    }
}

fn cells(col: &Column, cell: &Cell) -> Vec<String> {
    let width = if col.kind == Kind::Complex { 2 } else { 1 };
    match cell {
        Cell::Int(i) => {
            let mut out = vec![i.to_string()];
            out.resize(width, String::new());
            out
        }
        Cell::Real(v) if width == 1 => vec![fmt_f64(*v)],
        Cell::Real(v) => vec![fmt_f64(*v), fmt_f64(0.0)],
        Cell::Complex { re, im } => vec![fmt_f64(*re), fmt_f64(*im)],
        Cell::Text(s) => {
            let mut out = vec![quote(s)];
            out.resize(width, String::new());
            out
        }
        Cell::Missing => vec![String::new(); width],
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn table_csv(t: &Table, out: &mut String) {
    let head: Vec<String> = t.columns.iter().flat_map(header).collect();
    let _ = writeln!(out, "{}", head.join(","));
    for row in &t.rows {
        let line: Vec<String> = t.columns.iter().zip(row).flat_map(|(c, v)| cells(c, v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
}

/// A single table is written as plain CSV; several are separated by a blank
/// line and a `# <name>` line each.
pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::new();
    match report.tables.as_slice() {
        [only] => table_csv(only, &mut out),
        tables => {
            for (k, t) in tables.iter().enumerate() {
                if k > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "# {}", t.name);
                table_csv(t, &mut out);
            }
        }
    }
    out
}

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
    serde_json::from_str(text)
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
    }
}
