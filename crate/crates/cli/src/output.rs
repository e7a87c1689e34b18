//! Result rendering and atomic file output.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::Real)
    }
}

#[derive(Debug, Clone)]
pub enum Payload {
    Table { columns: Vec<String>, rows: Vec<Vec<Cell>> },
    Record(Vec<(String, Cell)>),
}

impl Payload {
    pub fn default_format(&self) -> Format {
        match self {
            Payload::Table { .. } => Format::Csv,
            Payload::Record(_) => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Provenance echoed at the top of every output.
pub struct Header<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub config: Vec<(&'a str, &'a str)>,
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Real(v) => fmt_real(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Null => String::new(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Real(v) if v.is_finite() => json!(v),
        Cell::Real(_) | Cell::Null => Value::Null,
        Cell::Int(v) => json!(v),
        Cell::Bool(v) => json!(v),
        Cell::Text(s) => json!(s),
    }
}

pub fn render(header: &Header, payload: &Payload, format: Format) -> String {
    match format {
        Format::Csv => render_csv(header, payload),
        Format::Json => render_json(header, payload),
    }
}

fn render_csv(h: &Header, payload: &Payload) -> String {
    let mut s = String::new();
    s.push_str(&format!("# tool = deco {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("# command = {}\n", h.command));
    s.push_str(&format!("# seed = {}\n", h.seed));
    for (k, v) in &h.config {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    match payload {
        Payload::Table { columns, rows } => {
            s.push_str(&columns.join(","));
            s.push('\n');
            for r in rows {
                let cells: Vec<String> = r.iter().map(csv_cell).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
        }
        Payload::Record(fields) => {
            s.push_str("key,value\n");
            for (k, v) in fields {
                s.push_str(&format!("{k},{}\n", csv_cell(v)));
            }
        }
    }
    s
}

fn render_json(h: &Header, payload: &Payload) -> String {
    let config: Map<String, Value> = h.config.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let result = match payload {
        Payload::Table { columns, rows } => json!({
            "columns": columns,
            "rows": rows.iter().map(|r| r.iter().map(json_cell).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
        Payload::Record(fields) => Value::Object(fields.iter().map(|(k, v)| (k.clone(), json_cell(v))).collect()),
    };
    let doc = json!({
        "tool": "deco",
        "version": env!("CARGO_PKG_VERSION"),
        "command": h.command,
        "seed": h.seed,
        "config": config,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
