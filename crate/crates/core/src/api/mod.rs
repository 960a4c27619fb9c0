//! Query facade over a heap snapshot.
//!
//! Every call runs the whole pipeline: expand positional markers, extract
//! the (optionally root-bounded) subgraph, parse, validate and execute.
//! Writes made by a query land in that call's private copy of the graph.
//!
//! ```
//! use objgraph::api::QueryContext;
//! use objgraph::cypher::Arg;
//! use objgraph::fixtures;
//!
//! let mut ctx = QueryContext::new(fixtures::fixture_a_snapshot()).unwrap();
//! let n = ctx.query_long(None, "MATCH (n:@1) RETURN count(n)", &[Arg::ClassName(fixtures::NODE_CLASS.into())]);
//! assert_eq!(n.unwrap(), 5);
//! ```

mod result;

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cypher::{self, Arg, CypherError, Diagnostic, ExpandError};
use crate::engine::{self, EngineError, Lint};
use crate::graph::{PropertyGraph, PropertyValue};
use crate::io::{export_csv, import_csv, IoError};
use crate::subgraph::{assign_unique_ids, extract, ExtractError, ExtractionConfig, HeapSnapshot, ObjectId, ObjectInfo, UidAssignment};

pub use result::{Cell, Column, ResultSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Expand,
    Extract,
    Transfer,
    Parse,
    Validate,
    Execute,
    Shape,
    Cast,
    Cursor,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Expand => "expand",
            Stage::Extract => "extract",
            Stage::Transfer => "transfer",
            Stage::Parse => "parse",
            Stage::Validate => "validate",
            Stage::Execute => "execute",
            Stage::Shape => "shape",
            Stage::Cast => "cast",
            Stage::Cursor => "cursor",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApiError {
    #[error("expand: {0}")]
    Expand(#[from] ExpandError),
    #[error("extract: {0}")]
    Extract(#[from] ExtractError),
    #[error("transfer: {0}")]
    Transfer(#[from] IoError),
    #[error("parse: {0}")]
    Parse(#[from] CypherError),
    #[error("validate: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validate(Vec<Diagnostic>),
    #[error("execute: {0}")]
    Execute(EngineError),
    #[error("shape: expected a single cell, got {rows} row(s) and {columns} column(s)")]
    Shape { rows: usize, columns: usize },
    #[error("cast: expected {expected}, got {found}")]
    Cast { expected: &'static str, found: String },
    #[error("cursor: {0}")]
    Cursor(String),
}

impl ApiError {
    pub fn stage(&self) -> Stage {
        match self {
            ApiError::Expand(_) => Stage::Expand,
            ApiError::Extract(_) => Stage::Extract,
            ApiError::Transfer(_) => Stage::Transfer,
            ApiError::Parse(_) => Stage::Parse,
            ApiError::Validate(_) => Stage::Validate,
            ApiError::Execute(_) => Stage::Execute,
            ApiError::Shape { .. } => Stage::Shape,
            ApiError::Cast { .. } => Stage::Cast,
            ApiError::Cursor(_) => Stage::Cursor,
        }
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Parse(e) => ApiError::Parse(e),
            EngineError::Invalid(ds) => ApiError::Validate(ds),
            other => ApiError::Execute(other),
        }
    }
}

/// Wall time per pipeline stage of one call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub expand: Duration,
    pub extract: Duration,
    /// CSV export and re-import, when enabled.
    pub transfer: Duration,
    pub parse: Duration,
    pub validate: Duration,
    pub execute: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.expand + self.extract + self.transfer + self.parse + self.validate + self.execute
    }

    pub fn stages(&self) -> [(&'static str, Duration); 6] {
        [
            ("expand", self.expand),
            ("extract", self.extract),
            ("transfer", self.transfer),
            ("parse", self.parse),
            ("validate", self.validate),
            ("execute", self.execute),
        ]
    }
}

/// A snapshot object returned by [`QueryContext::query_object`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectHandle {
    pub uid: i64,
    pub object: ObjectInfo,
}

/// Snapshot plus extraction defaults. Not thread-safe; one caller at a time.
#[derive(Debug, Clone)]
pub struct QueryContext {
    snapshot: HeapSnapshot,
    uids: UidAssignment,
    /// Whitelist, blacklist and collection settings applied to every call.
    pub defaults: ExtractionConfig,
    /// Route the extracted graph through CSV export and import before
    /// executing, as a batch-loading database would.
    pub via_csv: bool,
    memo: Option<HashMap<ExtractionConfig, PropertyGraph>>,
}

fn elapsed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot = start.elapsed();
    out
}

impl QueryContext {
    pub fn new(snapshot: HeapSnapshot) -> Result<Self, ApiError> {
        snapshot.validate().map_err(ExtractError::from)?;
        let uids = assign_unique_ids(&snapshot).map_err(ExtractError::from)?;
        Ok(QueryContext {
            snapshot,
            uids,
            defaults: ExtractionConfig::default(),
            via_csv: false,
            memo: None,
        })
    }

    pub fn with_defaults(mut self, defaults: ExtractionConfig) -> Self {
        self.defaults = defaults;
        self
    }

    pub fn snapshot(&self) -> &HeapSnapshot {
        &self.snapshot
    }

    pub fn uids(&self) -> &UidAssignment {
        &self.uids
    }

    /// Caches extracted graphs per configuration. Off by default.
    pub fn set_memo(&mut self, on: bool) {
        self.memo = on.then(HashMap::new);
    }

    fn graph_for(&mut self, config: &ExtractionConfig) -> Result<PropertyGraph, ApiError> {
        if let Some(g) = self.memo.as_ref().and_then(|m| m.get(config)) {
            return Ok(g.clone());
        }
        let g = extract(&self.snapshot, config)?;
        if let Some(m) = &mut self.memo {
            m.insert(config.clone(), g.clone());
        }
        Ok(g)
    }

    /// Runs `fmt` over the subgraph selected by `config`.
    pub fn query_with(&mut self, config: &ExtractionConfig, fmt: &str, args: &[Arg]) -> Result<ResultSet, ApiError> {
        let mut t = StageTimings::default();
        let expansion = elapsed(&mut t.expand, || cypher::expand_positional(fmt, args))?;
        let mut graph = elapsed(&mut t.extract, || self.graph_for(config))?;
        if self.via_csv {
            graph = elapsed(&mut t.transfer, || import_csv(&export_csv(&graph)))?;
        }
        let (table, lints) = match &expansion.batch {
            Some(plan) => {
                let table = elapsed(&mut t.execute, || engine::execute_batch(plan, &mut graph))?;
                (table, Vec::new())
            }
            None => {
                let query = elapsed(&mut t.parse, || cypher::parse(&expansion.text))?;
                elapsed(&mut t.validate, || cypher::validate(&query)).map_err(ApiError::Validate)?;
                let lints: Vec<Lint> = engine::lint(&query);
                let table = elapsed(&mut t.execute, || engine::execute(&query, &mut graph))?;
                (table, lints)
            }
        };
        Ok(ResultSet::new(table, graph, lints, t))
    }

    /// Query restricted to objects reachable from `roots`.
    pub fn query_bounded(&mut self, roots: &[ObjectId], fmt: &str, args: &[Arg]) -> Result<ResultSet, ApiError> {
        let config = ExtractionConfig {
            roots: roots.to_vec(),
            ..self.defaults.clone()
        };
        self.query_with(&config, fmt, args)
    }

    /// Query over every object in the snapshot, unreachable ones included
    /// unless `defaults.force_collect` is set.
    pub fn query_unbounded(&mut self, fmt: &str, args: &[Arg]) -> Result<ResultSet, ApiError> {
        let config = ExtractionConfig {
            roots: Vec::new(),
            ..self.defaults.clone()
        };
        self.query_with(&config, fmt, args)
    }

    fn single(&mut self, roots: Option<&[ObjectId]>, fmt: &str, args: &[Arg]) -> Result<(Cell, ResultSet), ApiError> {
        let mut rs = match roots {
            Some(r) => self.query_bounded(r, fmt, args)?,
            None => self.query_unbounded(fmt, args)?,
        };
        if rs.len() != 1 || rs.columns().len() != 1 {
            return Err(ApiError::Shape {
                rows: rs.len(),
                columns: rs.columns().len(),
            });
        }
        rs.next();
        let cell = rs.get(0)?;
        Ok((cell, rs))
    }

    pub fn query_boolean(&mut self, roots: Option<&[ObjectId]>, fmt: &str, args: &[Arg]) -> Result<bool, ApiError> {
        match self.single(roots, fmt, args)?.0 {
            Cell::Prop(PropertyValue::Bool(b)) => Ok(b),
            other => Err(cast("a boolean", &other)),
        }
    }

    pub fn query_long(&mut self, roots: Option<&[ObjectId]>, fmt: &str, args: &[Arg]) -> Result<i64, ApiError> {
        match self.single(roots, fmt, args)?.0 {
            Cell::Prop(PropertyValue::Int(v)) => Ok(v),
            other => Err(cast("an integer", &other)),
        }
    }

    pub fn query_string(&mut self, roots: Option<&[ObjectId]>, fmt: &str, args: &[Arg]) -> Result<String, ApiError> {
        match self.single(roots, fmt, args)?.0 {
            Cell::Prop(PropertyValue::Str(s)) => Ok(s),
            other => Err(cast("a string", &other)),
        }
    }

    /// The single returned node, resolved back to its snapshot object.
    pub fn query_object(&mut self, roots: Option<&[ObjectId]>, fmt: &str, args: &[Arg]) -> Result<ObjectHandle, ApiError> {
        let cell = self.single(roots, fmt, args)?.0;
        let Cell::Node { uid: Some(uid), .. } = cell else {
            return Err(cast("a snapshot object", &cell));
        };
        let object = self
            .snapshot
            .objects
            .iter()
            .find(|o| self.uids.get(o.id) == Some(uid))
            .cloned()
            .ok_or_else(|| cast("a snapshot object", &cell))?;
        Ok(ObjectHandle { uid, object })
    }
}

fn cast(expected: &'static str, found: &Cell) -> ApiError {
    ApiError::Cast {
        expected,
        found: found.describe(),
    }
}
