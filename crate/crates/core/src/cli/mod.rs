//! Batch experiment runner: configuration, result rows and their emission.

mod experiments;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::systems::SystemTag;
use crate::Error;

pub use experiments::run;

/// Registry of experiment ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PaprWitness,
    WalshIdentities,
    MainLemma,
    CexTable,
    ApWitness,
    KernelBound,
    Projection,
    SolverCrosscheck,
    Equivalence,
    Doubling,
    Khintchine,
    DensityTrend,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::PaprWitness,
        Experiment::WalshIdentities,
        Experiment::MainLemma,
        Experiment::CexTable,
        Experiment::ApWitness,
        Experiment::KernelBound,
        Experiment::Projection,
        Experiment::SolverCrosscheck,
        Experiment::Equivalence,
        Experiment::Doubling,
        Experiment::Khintchine,
        Experiment::DensityTrend,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::PaprWitness => "papr-witness",
            Experiment::WalshIdentities => "walsh-identities",
            Experiment::MainLemma => "main-lemma",
            Experiment::CexTable => "cex-table",
            Experiment::ApWitness => "ap-witness",
            Experiment::KernelBound => "kernel-bound",
            Experiment::Projection => "projection",
            Experiment::SolverCrosscheck => "solver-crosscheck",
            Experiment::Equivalence => "equivalence",
            Experiment::Doubling => "doubling",
            Experiment::Khintchine => "khintchine",
            Experiment::DensityTrend => "density-trend",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| CliError::Invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Optional experiment parameters; each experiment falls back to its own
/// desk-scale defaults for anything left unset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: Params,
    pub out: PathBuf,
    #[serde(default)]
    pub format: Format,
    /// Mandatory; every random draw derives from it.
    pub seed: u64,
    /// Record per-row wall-clock time; off by default so outputs are
    /// byte-identical across runs.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))
    }

    pub fn experiment(&self) -> Result<Experiment, CliError> {
        self.experiment.parse()
    }
}

/// A parameter or measurement value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            Value::Float(v) => s.serialize_f64(*v),
            Value::Bool(v) => s.serialize_bool(*v),
            Value::Text(v) => s.serialize_str(v),
        }
    }
}

impl Value {
    fn csv_cell(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format!("{v:.16e}"),
            Value::Bool(v) => v.to_string(),
            Value::Text(v) => v.clone(),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// Named values in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fields(pub Vec<(String, Value)>);

impl Fields {
    pub fn new() -> Self {
        Fields(Vec::new())
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.0.push((name.to_owned(), value.into()));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }
}

impl Serialize for Fields {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub params: Fields,
    pub measured: Fields,
    pub bound: Fields,
    pub pass: bool,
    /// False when an iterative solver stopped on its budget.
    pub converged: bool,
    pub runtime_ms: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("internal defect: {0}")]
    Internal(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => exit::INVALID,
            CliError::Internal(_) | CliError::Io(_) => exit::INTERNAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(msg) => CliError::Internal(msg),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

pub mod exit {
    pub const PASS: u8 = 0;
    pub const FAIL: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const INTERNAL: u8 = 3;
    pub const NON_CONVERGENCE: u8 = 4;
}

/// Exit status implied by a completed run.
pub fn exit_status(rows: &[ResultRow]) -> u8 {
    if rows.iter().any(|r| !r.converged) {
        exit::NON_CONVERGENCE
    } else if rows.iter().all(|r| r.pass) {
        exit::PASS
    } else {
        exit::FAIL
    }
}

fn header(rows: &[ResultRow]) -> Result<Vec<String>, CliError> {
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let columns = |r: &ResultRow| -> Vec<String> {
        let mut cols = vec!["experiment".to_owned()];
        for (prefix, fields) in [("param", &r.params), ("measured", &r.measured), ("bound", &r.bound)] {
            cols.extend(fields.names().map(|n| format!("{prefix}.{n}")));
        }
        cols.extend(["pass", "converged", "runtime_ms"].map(String::from));
        cols
    };
    let cols = columns(first);
    if rows.iter().any(|r| columns(r) != cols) {
        return Err(CliError::Internal("rows of one run disagree on their columns".into()));
    }
    Ok(cols)
}

/// Serializes rows as CSV (header plus one line per row) or as a JSON array.
pub fn render(rows: &[ResultRow], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows)
                .map_err(|e| CliError::Internal(format!("json: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let cols = header(rows)?;
            if !cols.is_empty() {
                w.write_record(&cols).map_err(|e| CliError::Internal(e.to_string()))?;
            }
            for r in rows {
                let mut record = vec![r.experiment.clone()];
                for fields in [&r.params, &r.measured, &r.bound] {
                    record.extend(fields.0.iter().map(|(_, v)| v.csv_cell()));
                }
                record.extend([r.pass.to_string(), r.converged.to_string(), r.runtime_ms.to_string()]);
                w.write_record(&record).map_err(|e| CliError::Internal(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

/// Writes rendered rows to `path` in one shot.
pub fn emit(rows: &[ResultRow], format: Format, path: &Path) -> Result<(), CliError> {
    let bytes = render(rows, format)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

/// Runs a configuration end to end and returns the process exit status.
/// Invalid input and internal defects leave no output file.
pub fn execute(config: &ExperimentConfig) -> Result<u8, CliError> {
    let rows = run(config)?;
    emit(&rows, config.format, &config.out)?;
    Ok(exit_status(&rows))
}
