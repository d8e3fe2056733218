use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub depth: Option<u32>,
    pub tool_version: &'static str,
}

impl Manifest {
    pub fn new(command: &'static str, parameters: impl Serialize, seed: Option<u64>, depth: Option<u32>) -> anyhow::Result<Self> {
        Ok(Manifest { command, parameters: serde_json::to_value(parameters)?, seed, depth, tool_version: env!("CARGO_PKG_VERSION") })
    }
}

/// Hex SHA-256 of the compact JSON form. `serde_json` maps keep sorted keys, so the text is canonical.
pub fn sha256_hex(v: &Value) -> String {
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

pub fn file_sha256(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// `{"hashable": {"manifest", "result"}, "hash", "timestamp_unix"}`; only the hashable part is hashed.
pub fn build(manifest: &Manifest, result: impl Serialize) -> anyhow::Result<Value> {
    let hashable = json!({ "manifest": manifest, "result": serde_json::to_value(result)? });
    let hash = sha256_hex(&hashable);
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(json!({ "hashable": hashable, "hash": hash, "timestamp_unix": timestamp }))
}

pub fn emit(report: &Value, path: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                // a reader that stops early (e.g. `| head`) is not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.context("writing report to stdout"),
            }
        }
    }
}

/// Writes a CSV with the given header; non-finite numbers become `NaN`/`inf`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_cell(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}
