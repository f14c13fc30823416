//! Tables and their CSV / JSON encodings.
//!
//! Both encodings carry a header with the effective config, so a file can be
//! fed back to `--config` to reproduce itself.

use serde::Serialize;

use crate::config::{Format, ECHO_BEGIN, ECHO_END};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Ordered `key = value` notes printed before the rows.
    pub summary: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; text cells read as `NaN`.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Num(x) => *x,
                Cell::Text(_) => f64::NAN,
            })
            .collect()
    }
}

/// `x` with `precision` significant digits in scientific notation.
pub fn format_float(x: f64, precision: usize) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:.*e}", precision.saturating_sub(1), x)
    }
}

/// Everything needed to render a run.
pub struct Document<'a> {
    pub task: &'a str,
    pub flags: &'a str,
    pub config: &'a str,
    pub table: &'a Table,
    pub precision: usize,
}

pub fn render(doc: &Document, format: Format) -> String {
    match format {
        Format::Csv => render_csv(doc),
        Format::Json => render_json(doc),
    }
}

fn render_csv(doc: &Document) -> String {
    let mut out = format!("# icft {}{}\n{ECHO_BEGIN}\n", doc.task, doc.flags);
    for line in doc.config.lines() {
        out.push_str(&format!("# {line}\n").replace("# \n", "#\n"));
    }
    out.push_str(ECHO_END);
    out.push('\n');
    for (k, v) in &doc.table.summary {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&doc.table.columns.join(","));
    out.push('\n');
    for row in &doc.table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => format_float(*x, doc.precision),
                Cell::Text(s) => csv_text(s),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    task: &'a str,
    flags: &'a str,
    config: &'a str,
    summary: Vec<[&'a str; 2]>,
    columns: &'a [String],
    rows: Vec<Vec<serde_json::Value>>,
}

fn render_json(doc: &Document) -> String {
    let rows = doc
        .table
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|c| match c {
                    Cell::Num(x) => json_number(*x, doc.precision),
                    Cell::Text(s) => serde_json::Value::String(s.clone()),
                })
                .collect()
        })
        .collect();
    let body = JsonDoc {
        task: doc.task,
        flags: doc.flags.trim_start(),
        config: doc.config,
        summary: doc
            .table
            .summary
            .iter()
            .map(|(k, v)| [k.as_str(), v.as_str()])
            .collect(),
        columns: &doc.table.columns,
        rows,
    };
    let mut s = serde_json::to_string_pretty(&body).expect("document is serializable");
    s.push('\n');
    s
}

/// Rounded to `precision` digits; non-finite values become `null`.
fn json_number(x: f64, precision: usize) -> serde_json::Value {
    let rounded: f64 = format_float(x, precision).parse().unwrap_or(f64::NAN);
    serde_json::Number::from_f64(rounded)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// The config text inside a JSON document produced by [`render`].
pub fn json_config(text: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(text).ok()?;
    v.get("config")?.as_str().map(str::to_string)
}
