//! Output files. CSV is the diffable golden format; JSON carries nested fit
//! diagnostics; the manifest echoes the configuration.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::{Command, RunOptions};

pub struct Column {
    pub name: String,
    pub unit: &'static str,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: &'static str) -> Self {
        Self { name: name.into(), unit }
    }
}

#[derive(Clone, Debug)]
pub enum Value {
    Float(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Float(x) => x.to_string(),
            Value::Int(n) => n.to_string(),
            Value::Text(s) => s.clone(),
            Value::Empty => String::new(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

/// A CSV table with `# ` comment lines above the header.
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { comments: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        for line in &self.comments {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.columns.iter().map(|c| format!("{}[{}]", c.name, c.unit)))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    software: &'static str,
    version: &'static str,
    command: &'a Command,
    options: &'a RunOptions,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    timestamp: u64,
}

pub fn write_all(dir: &Path, table: &Table, json: &impl Serialize, command: &Command, options: &RunOptions) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    table.write_csv(&dir.join("results.csv"))?;
    write_json(&dir.join("results.json"), json)?;
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        options,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
