//! Model files (JSON) and data files (CSV, long and wide layouts).
//!
//! Every JSON document carries `"format_version": 1`. CSV files are UTF-8
//! with a mandatory header row; numbers are written as the shortest decimal
//! that round-trips to the same double.

mod export;
mod ledger;
mod load;
mod model_file;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calc::RuleError;
use crate::model::ModelError;

pub use export::{export_long_csv, ExportFilter, Include};
pub use ledger::export_cell_ledger;
pub use load::{load_csv_auto, load_long_csv, load_wide_csv, DataLayout};
pub use model_file::{load_model, save_model, ModelFile, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column for dimension {0}")]
    MissingColumn(String),
    #[error("column '{0}' appears twice")]
    DuplicateColumn(String),
    #[error("header '{header}' matches members in several dimensions: {dimensions:?}")]
    AmbiguousHeader { header: String, dimensions: Vec<String> },
    #[error("header '{0}' is neither a dimension nor a member")]
    UnknownHeader(String),
    #[error("spread columns span several dimensions: {0:?}")]
    MixedSpread(Vec<String>),
    #[error("spread column '{header}' is an aggregate member of {dimension}; aggregates are not loadable")]
    AggregateColumn { header: String, dimension: String },
    #[error("no spread columns in header")]
    NoSpreadColumns,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line in the file; the header is line 1.
    pub line: u64,
    pub reason: String,
}

/// Outcome of loading one data file. `rows_loaded + rejected.len() == rows_total`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_total: usize,
    pub rows_loaded: usize,
    pub cells_loaded: usize,
    pub rejected: Vec<Rejection>,
    pub warnings: Vec<String>,
}

impl LoadReport {
    pub fn merge(&mut self, other: LoadReport) {
        self.rows_total += other.rows_total;
        self.rows_loaded += other.rows_loaded;
        self.cells_loaded += other.cells_loaded;
        self.rejected.extend(other.rejected);
        self.warnings.extend(other.warnings);
    }
}
