//! CSV and JSON emission. Numbers are written with 17 significant digits in
//! scientific notation and rows end in LF, so identical runs give identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One cell of a point record.
#[derive(Clone, Debug)]
pub enum Field {
    Num(f64),
    Missing,
    Bool(bool),
    Int(u64),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(x) => num(*x),
            Field::Missing => String::new(),
            Field::Bool(b) => b.to_string(),
            Field::Int(n) => n.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Field::Missing => Value::Null,
            Field::Bool(b) => Value::Bool(*b),
            Field::Int(n) => Value::from(*n),
            Field::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<Option<f64>> for Field {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Field::Missing, Field::Num)
    }
}

/// An ordered list of named fields printed as a single CSV row or JSON object.
#[derive(Clone, Debug, Default)]
pub struct Record(pub Vec<(&'static str, Field)>);

impl Record {
    pub fn push(&mut self, name: &'static str, field: Field) -> &mut Self {
        self.0.push((name, field));
        self
    }

    pub fn emit(&self, format: Format, dest: Option<&Path>) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut table = Table::new(&self.0.iter().map(|(k, _)| *k).collect::<Vec<_>>());
                table.row(self.0.iter().map(|(_, v)| v.csv()).collect());
                table.write(dest)
            }
            Format::Json => {
                let map: Map<String, Value> = self.0.iter().map(|(k, v)| (k.to_string(), v.json())).collect();
                write_json(&Value::Object(map), dest)
            }
        }
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    fn write_to(&self, sink: impl Write) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, dest: Option<&Path>) -> Result<(), CliError> {
        match dest {
            Some(path) => self.write_to(BufWriter::new(create(path)?)),
            None => self.write_to(io::stdout().lock()),
        }
    }
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, dest: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    text.push('\n');
    write_text(&text, dest)
}

pub fn write_text(text: &str, dest: Option<&Path>) -> Result<(), CliError> {
    match dest {
        Some(path) => create(path)?.write_all(text.as_bytes()),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
    .map_err(|e| CliError::io(e.to_string()))
}

/// `dir/fig.csv` with suffix `nodal` becomes `dir/fig.nodal.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.0), "0.0000000000000000e0");
        assert_eq!(num(-std::f64::consts::PI), "-3.1415926535897931e0");
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_is_lf_terminated() {
        let mut t = Table::new(&["a", "b"]);
        t.row(vec![num(1.0), String::new()]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.0000000000000000e0,\n");
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("out/fig3.csv"), "curves"), Path::new("out/fig3.curves.csv"));
        assert_eq!(sibling(Path::new("fig"), "nodal"), Path::new("fig.nodal.csv"));
    }
}
