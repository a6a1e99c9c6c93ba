use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// An error carrying a documented process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn with_code(code: u8, message: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(Failure {
            code,
            message: message.into(),
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NO_RUNNABLE: u8 = 2;
pub const EXIT_OOR: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes to the output file when given, otherwise stdout. A file output also
/// gets a `<file>.meta.json` sidecar with run information.
pub fn emit(path: Option<&Path>, command: &str, body: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, body).with_context(|| format!("cannot write {}", p.display()))?;
            write_sidecar(p, command)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

fn write_sidecar(path: &Path, command: &str) -> Result<()> {
    let generated = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "command": command,
        "args": std::env::args().skip(1).collect::<Vec<_>>(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "generated_at_unix_s": generated,
    });
    let target = sidecar_path(path);
    fs::write(&target, pretty(&meta)).with_context(|| format!("cannot write {}", target.display()))
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(
        w.into_inner().map_err(|e| e.into_error())?,
    )?)
}

/// Rows as a JSON array of objects keyed by the header.
pub fn rows_json(header: &[&str], rows: &[Vec<String>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                Value::Object(
                    header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn table(format: Format, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    match format {
        Format::Csv => csv_string(header, rows),
        Format::Json => Ok(pretty(&rows_json(header, rows))),
    }
}

pub fn secs(v: f64) -> String {
    format!("{v:.9}")
}

pub fn num(v: f64) -> String {
    format!("{v:.6}")
}
