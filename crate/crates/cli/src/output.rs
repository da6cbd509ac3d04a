use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::{Map, Value};

/// Bumped whenever the layout of any record changes.
pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// One command result. `results["value"]`, when present, is the headline
/// number printed alone on the first line of text output.
#[derive(Debug, Clone)]
pub struct Record {
    pub command: &'static str,
    pub parameters: Map<String, Value>,
    pub provenance: String,
    pub results: Map<String, Value>,
    pub table: Option<Table>,
}

impl Record {
    pub fn new(command: &'static str, provenance: impl Into<String>) -> Self {
        Self { command, parameters: Map::new(), provenance: provenance.into(), results: Map::new(), table: None }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.into(), value.into());
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("format_version".into(), FORMAT_VERSION.into());
        obj.insert("command".into(), self.command.into());
        obj.insert("parameters".into(), Value::Object(self.parameters.clone()));
        obj.insert("provenance".into(), self.provenance.clone().into());
        obj.insert("results".into(), Value::Object(self.results.clone()));
        if let Some(t) = &self.table {
            let mut table = Map::new();
            table.insert("columns".into(), t.columns.iter().map(|c| Value::from(*c)).collect());
            table.insert("rows".into(), t.rows.iter().map(|r| Value::Array(r.clone())).collect());
            obj.insert("table".into(), Value::Object(table));
        }
        Value::Object(obj)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)
            }
            Format::Text => self.write_text(out),
            Format::Csv => self.write_csv(out),
        }
    }

    fn write_text(&self, out: &mut dyn Write) -> io::Result<()> {
        if let Some(v) = self.results.get("value") {
            writeln!(out, "{}", cell(v))?;
        }
        for (k, v) in self.results.iter().filter(|(k, _)| *k != "value") {
            writeln!(out, "{k}: {}", cell(v))?;
        }
        let Some(t) = &self.table else { return Ok(()) };
        let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
        let widths: Vec<usize> = (0..t.columns.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([t.columns[j].len()]).max().unwrap())
            .collect();
        let line = |out: &mut dyn Write, items: &[&str]| -> io::Result<()> {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            writeln!(out, "{}", padded.join("  "))
        };
        line(out, &t.columns)?;
        for r in &cells {
            line(out, &r.iter().map(String::as_str).collect::<Vec<_>>())?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns)?;
                for r in &t.rows {
                    w.write_record(r.iter().map(cell))?;
                }
            }
            None => {
                w.write_record(["key", "value"])?;
                for (k, v) in &self.results {
                    w.write_record([k.clone(), cell(v)])?;
                }
            }
        }
        w.flush()
    }
}

/// Plain rendering of a JSON value: strings unquoted, arrays space-separated.
pub fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}
