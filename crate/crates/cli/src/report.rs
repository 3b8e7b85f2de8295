//! Report envelope shared by every subcommand, and its JSON/CSV emitters.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use gapcert_core::{Result, Tolerances};
use serde::Serialize;
use serde_json::Value;

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("GAPCERT_GIT_DESCRIBE"),
    ")"
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub config: Value,
    pub warnings: Vec<String>,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(
        command: &'static str,
        seed: Option<u64>,
        tolerances: Tolerances,
        config: Value,
        result: T,
    ) -> Self {
        Self {
            tool: "gapcert",
            version: VERSION,
            command,
            seed,
            tolerances,
            config,
            warnings: Vec::new(),
            result,
        }
    }
}

/// A CSV table: header plus rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Flattens nested JSON into `(dotted.key, value)` rows.
pub fn key_value_table<T: Serialize>(report: &Report<T>) -> Result<Table> {
    let mut rows = Vec::new();
    flatten("", &serde_json::to_value(report)?, &mut rows);
    Ok(Table {
        header: vec!["key".into(), "value".into()],
        rows: rows.into_iter().map(|(k, v)| vec![k, v]).collect(),
    })
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes the report as pretty JSON, or `table` as CSV.
pub fn emit<T: Serialize>(
    report: &Report<T>,
    table: Option<Table>,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let table = match table {
                Some(t) => t,
                None => key_value_table(report)?,
            };
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(&table.header)?;
            for row in &table.rows {
                wtr.write_record(row)?;
            }
            wtr.flush()?;
        }
    }
    Ok(())
}
