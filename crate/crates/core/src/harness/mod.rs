//! Experiment driver: configuration, presets, execution and output files.
//!
//! A run writes into `<root>/<name>/`:
//! `config.toml` (exact echo), `record.json`, one `<table>.csv` per table
//! and one `<curve>.dat` per plot curve.

mod config;
mod presets;
mod tasks;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub use config::{
    AlphaRule, AviConfig, ExperimentConfig, Expectation, GridSpec, LevelSetConfig, OperatorConfig, ProblemConfig,
    TableSource, TaskConfig, UTrueRecipe,
};
pub use presets::{preset, preset_names, presets, DEFAULT_SEED};
pub use tasks::{execute, Curve, Table, TaskOutput};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "REGRATE_OUT";
pub const DEFAULT_OUTPUT_ROOT: &str = "regrate-out";
/// Version of the CSV column sets, written in each file's first line.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub name: String,
    pub task: String,
    pub seed: u64,
    /// SHA-256 of the serialized configuration.
    pub config_hash: String,
    pub tables: Vec<TableRecord>,
    pub plots: Vec<String>,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub passed: Option<bool>,
    pub flags: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

/// Output root from the environment, falling back to `regrate-out`.
pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let text = config.to_toml()?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Floats with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn table_csv(table: &Table) -> String {
    let mut s = format!("# schema: {}/{}\n", table.name, SCHEMA_VERSION);
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|x| format_float(*x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn curve_dat(curve: &Curve) -> String {
    let mut s = format!("# {} {}\n", curve.x_label, curve.y_label);
    for (x, y) in &curve.points {
        let _ = writeln!(s, "{} {}", format_float(*x), format_float(*y));
    }
    s
}

/// Runs the task and writes all files under `<root>/<name>/`, where the
/// root is the config's `output_dir` if set and `out_root` otherwise.
pub fn run(config: &ExperimentConfig, out_root: &Path) -> Result<(ResultRecord, PathBuf)> {
    config.validate()?;
    let started = now();
    let output = execute(config)?;
    let root = config.output_dir.as_ref().map(PathBuf::from).unwrap_or_else(|| out_root.to_path_buf());
    let dir = root.join(&config.name);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), config.to_toml()?)?;
    let mut tables = Vec::new();
    for t in &output.tables {
        let file = format!("{}.csv", t.name);
        fs::write(dir.join(&file), table_csv(t))?;
        tables.push(TableRecord {
            file,
            columns: t.columns.iter().map(|c| c.to_string()).collect(),
            rows: t.rows.clone(),
        });
    }
    let mut plots = Vec::new();
    for c in &output.curves {
        let file = format!("{}.dat", c.name);
        fs::write(dir.join(&file), curve_dat(c))?;
        plots.push(file);
    }
    let record = ResultRecord {
        name: config.name.clone(),
        task: config.task.name().into(),
        seed: config.seed,
        config_hash: config_hash(config)?,
        tables,
        plots,
        summary: output.summary,
        passed: output.passed,
        flags: output.flags,
        started_unix: started,
        finished_unix: now(),
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| crate::error::Error::Io(e.to_string()))?;
    fs::write(dir.join("record.json"), json)?;
    Ok((record, dir))
}
