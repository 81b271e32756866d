//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(&'static str),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 12 significant digits
            Cell::Num(v) => format!("{v:.11e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => (*s).to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

/// Computed table plus the per-point records that go into the manifest.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: Table,
    pub points: Vec<Value>,
    pub tolerances: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn render_csv(table: &Table, command: &str, config_sha: &str, manifest_name: &str) -> String {
    let mut s = format!("# herald {VERSION} {command}\n# config_sha256: {config_sha}\n# manifest: {manifest_name}\n");
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Normalized flags; re-running them reproduces `files`.
    pub config: Value,
    pub config_sha256: String,
    /// Parameters and calibration of every sweep point.
    pub points: Vec<Value>,
    pub tolerances: Value,
    pub wall_time_s: f64,
    pub files: Vec<FileRecord>,
}

/// File stem `<command>-<first 12 hex digits of the config hash>`.
pub fn stem(command: &str, config_sha: &str) -> String {
    format!("{command}-{}", &config_sha[..12])
}

/// Writes `<stem>.csv` and `<stem>.json` into `out`; returns the CSV path.
pub fn write_run(
    out: &Path,
    command: &str,
    config: Value,
    run: RunOutput,
    wall_time_s: f64,
) -> CliResult<PathBuf> {
    let config_sha = sha256_hex(serde_json::to_string(&config)?.as_bytes());
    let stem = stem(command, &config_sha);
    let csv_name = format!("{stem}.csv");
    let manifest_name = format!("{stem}.json");
    let csv = render_csv(&run.table, command, &config_sha, &manifest_name);
    fs::create_dir_all(out)?;
    let csv_path = out.join(&csv_name);
    fs::write(&csv_path, &csv)?;
    let manifest = RunManifest {
        tool: "herald".into(),
        version: VERSION.into(),
        command: command.into(),
        config,
        config_sha256: config_sha,
        points: run.points,
        tolerances: run.tolerances,
        wall_time_s,
        files: vec![FileRecord {
            path: csv_name,
            sha256: sha256_hex(csv.as_bytes()),
        }],
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(out.join(manifest_name), json)?;
    Ok(csv_path)
}
