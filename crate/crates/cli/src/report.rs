use std::io::Write;
use std::path::Path;

use iel_core::{IelError, Result};
use serde_json::Value;

use crate::args::Cli;

pub enum Body {
    Json(Value),
    /// Plot-ready series.
    Csv { header: Vec<String>, rows: Vec<Vec<String>> },
}

/// A finished experiment: its body and the checked inequalities that failed.
pub struct Report {
    pub body: Body,
    pub failures: Vec<String>,
}

const CSV_SPEC_PREFIX: &str = "# spec: ";

impl Report {
    pub fn json(v: Value, failures: Vec<String>) -> Self {
        Report { body: Body::Json(v), failures }
    }

    /// JSON reports carry the spec under `"spec"`; CSV series carry it on a
    /// leading comment line.
    pub fn render(&self, spec: &Cli) -> Result<Vec<u8>> {
        let spec_value = serde_json::to_value(spec).map_err(|e| IelError::Contract(e.to_string()))?;
        match &self.body {
            Body::Json(v) => {
                let mut v = v.clone();
                v["spec"] = spec_value;
                v["failures"] = Value::from(self.failures.clone());
                let mut out = serde_json::to_vec_pretty(&v).map_err(|e| IelError::Contract(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Body::Csv { header, rows } => {
                let mut out = format!("{CSV_SPEC_PREFIX}{spec_value}\n").into_bytes();
                let mut w = csv::Writer::from_writer(&mut out);
                let err = |e: csv::Error| IelError::Io(e.to_string());
                w.write_record(header).map_err(err)?;
                for r in rows {
                    w.write_record(r).map_err(err)?;
                }
                w.flush()?;
                drop(w);
                Ok(out)
            }
        }
    }
}

/// The spec embedded in a JSON report or a CSV series.
pub fn read_spec(bytes: &[u8]) -> Result<Cli> {
    let text = std::str::from_utf8(bytes).map_err(|e| IelError::Parse(e.to_string()))?;
    let spec = match text.strip_prefix(CSV_SPEC_PREFIX) {
        Some(rest) => serde_json::from_str::<Value>(rest.lines().next().unwrap_or_default()),
        None => serde_json::from_str::<Value>(text).map(|v| v["spec"].clone()),
    }
    .map_err(|e| IelError::Parse(format!("report is not readable: {e}")))?;
    serde_json::from_value(spec).map_err(|e| IelError::Parse(format!("report has no usable spec: {e}")))
}

/// Write to a temporary file next to `path`, then rename over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| IelError::Io(e.to_string()))?;
    Ok(())
}
