//! External formats: JSON heap snapshots and CSV graph bundles.

mod convert;
mod json;
mod tabular;

use thiserror::Error;

use crate::graph::GraphError;
use crate::subgraph::SnapshotError;

pub use convert::graph_to_snapshot;
pub use json::{load_snapshot, save_snapshot};
pub use tabular::{export_csv, import_csv, CsvBundle, NODES_HEADER, RELATIONSHIPS_HEADER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("graph is not snapshot-shaped: {0}")]
    NotSnapshotShaped(String),
    #[error("{file} file, line {line}: {message}")]
    Csv { file: &'static str, line: u64, message: String },
    #[error("{file} file has unknown header `{found}`")]
    UnknownHeader { file: &'static str, found: String },
    #[error("relationships file, line {line}: endpoint `{id}` is not a node id")]
    DanglingEndpoint { line: u64, id: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
