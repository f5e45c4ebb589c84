//! Result model shared by all subcommands and its table, CSV and JSON
//! renderings.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// A scalar cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Null, Into::into)
    }
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            // NaN and infinities have no JSON form
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Null => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }

    /// 17 significant digits for floats.
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Num(x) if *x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e7) => format!("{x:.6e}"),
            Cell::Num(x) => format!("{x:.12}"),
            Cell::Null => "-".to_string(),
            other => other.csv(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// One command result: the fixed keys, named extras, and an optional
/// table of rows.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub params: Vec<(&'static str, Cell)>,
    pub value: Cell,
    pub err_estimate: Cell,
    pub method: &'static str,
    pub extra: Vec<(&'static str, Cell)>,
    pub table: Option<Table>,
}

impl Report {
    pub fn new(command: &'static str, value: impl Into<Cell>, err_estimate: impl Into<Cell>, method: &'static str) -> Self {
        Self {
            command,
            params: Vec::new(),
            value: value.into(),
            err_estimate: err_estimate.into(),
            method,
            extra: Vec::new(),
            table: None,
        }
    }

    pub fn param(mut self, key: &'static str, v: impl Into<Cell>) -> Self {
        self.params.push((key, v.into()));
        self
    }

    pub fn extra(mut self, key: &'static str, v: impl Into<Cell>) -> Self {
        self.extra.push((key, v.into()));
        self
    }

    pub fn table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), json!(self.command));
        let params: Map<String, Value> = self.params.iter().map(|(k, v)| (k.to_string(), v.json())).collect();
        obj.insert("params".into(), Value::Object(params));
        obj.insert("value".into(), self.value.json());
        obj.insert("err_estimate".into(), self.err_estimate.json());
        obj.insert("method".into(), json!(self.method));
        for (k, v) in &self.extra {
            obj.insert(k.to_string(), v.json());
        }
        if let Some(t) = &self.table {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| Value::Object(t.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
                .collect();
            obj.insert("rows".into(), Value::Array(rows));
        }
        Value::Object(obj)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)?;
            }
            Format::Csv => self.write_csv(out)?,
            Format::Table => self.write_table(out)?,
        }
        Ok(())
    }

    /// Tabular commands emit their rows; scalar commands emit a single
    /// record with the fixed keys, extras and parameters as columns.
    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
            }
            None => {
                let mut header = vec!["command", "value", "err_estimate", "method"];
                let mut record = vec![self.command.to_string(), self.value.csv(), self.err_estimate.csv(), self.method.to_string()];
                for (k, v) in self.extra.iter().chain(&self.params) {
                    header.push(k);
                    record.push(v.csv());
                }
                w.write_record(&header)?;
                w.write_record(&record)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    fn write_table(&self, out: &mut dyn Write) -> Result<()> {
        let mut lines: Vec<(String, String)> = vec![("command".into(), self.command.into())];
        for (k, v) in &self.params {
            lines.push((k.to_string(), v.human()));
        }
        lines.push(("value".into(), self.value.human()));
        lines.push(("err_estimate".into(), self.err_estimate.human()));
        lines.push(("method".into(), self.method.into()));
        for (k, v) in &self.extra {
            lines.push((k.to_string(), v.human()));
        }
        let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &lines {
            writeln!(out, "{k:<width$}  {v}")?;
        }
        if let Some(t) = &self.table {
            let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Cell::human).collect()).collect();
            let widths: Vec<usize> = t
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                .collect();
            writeln!(out)?;
            let header: Vec<String> = t.columns.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            writeln!(out, "{}", header.join("  "))?;
            for row in cells {
                let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                writeln!(out, "{}", line.join("  "))?;
            }
        }
        Ok(())
    }
}
