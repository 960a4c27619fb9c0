use std::fmt;

use super::{ApiError, StageTimings};
use crate::engine::{Lint, ResultTable, Value};
use crate::graph::{PropertyGraph, PropertyValue};

/// A result value detached from the graph: nodes carry their `$uid`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cell {
    Null,
    Prop(PropertyValue),
    /// `uid` is absent for nodes created by the query itself.
    Node { uid: Option<i64>, label: String },
    Rel { label: String },
}

impl Cell {
    fn from_value(v: &Value, graph: &PropertyGraph) -> Cell {
        match v {
            Value::Null => Cell::Null,
            Value::Prop(p) => Cell::Prop(p.clone()),
            Value::Node(id) => {
                let n = graph.node(*id).expect("result nodes live in the result graph");
                Cell::Node {
                    uid: n.uid(),
                    label: n.label.as_str().to_string(),
                }
            }
            Value::Rel(id) => Cell::Rel {
                label: graph.rel(*id).map(|r| r.label.as_str().to_string()).unwrap_or_default(),
            },
        }
    }

    pub fn uid(&self) -> Option<i64> {
        match self {
            Cell::Node { uid, .. } => *uid,
            _ => None,
        }
    }

    pub(crate) fn describe(&self) -> String {
        match self {
            Cell::Null => "null".into(),
            Cell::Prop(p) => format!("{} {p}", p.kind()),
            Cell::Node { label, .. } => format!("a `{label}` node"),
            Cell::Rel { label } => format!("a `{label}` relationship"),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Null => f.write_str("null"),
            Cell::Prop(p) => write!(f, "{p}"),
            Cell::Node { uid: Some(u), label } => write!(f, "#{u}:{label}"),
            Cell::Node { uid: None, label } => write!(f, "#new:{label}"),
            Cell::Rel { label } => write!(f, "[:{label}]"),
        }
    }
}

/// Column selector for [`ResultSet::get`].
#[derive(Debug, Clone, Copy)]
pub enum Column<'a> {
    Index(usize),
    Name(&'a str),
}

impl From<usize> for Column<'_> {
    fn from(i: usize) -> Self {
        Column::Index(i)
    }
}

impl<'a> From<&'a str> for Column<'a> {
    fn from(s: &'a str) -> Self {
        Column::Name(s)
    }
}

/// Row cursor over a query result. The cursor starts before the first row;
/// [`ResultSet::next`] advances it.
#[derive(Debug, Clone)]
pub struct ResultSet {
    table: ResultTable,
    graph: PropertyGraph,
    cursor: usize,
    lints: Vec<Lint>,
    timings: StageTimings,
}

impl ResultSet {
    pub(crate) fn new(table: ResultTable, graph: PropertyGraph, lints: Vec<Lint>, timings: StageTimings) -> Self {
        ResultSet {
            table,
            graph,
            cursor: 0,
            lints,
            timings,
        }
    }

    /// Advances to the next row; false once past the last.
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> bool {
        if self.cursor < self.table.len() {
            self.cursor += 1;
            true
        } else {
            self.cursor = self.table.len() + 1;
            false
        }
    }

    /// 1-based number of the current row; 0 before the first `next`.
    pub fn row(&self) -> usize {
        self.cursor.min(self.table.len())
    }

    pub fn columns(&self) -> &[String] {
        &self.table.columns
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get<'a>(&self, column: impl Into<Column<'a>>) -> Result<Cell, ApiError> {
        if self.cursor == 0 || self.cursor > self.table.len() {
            return Err(ApiError::Cursor("no current row; call next() first".into()));
        }
        let i = match column.into() {
            Column::Index(i) if i < self.table.columns.len() => i,
            Column::Index(i) => return Err(ApiError::Cursor(format!("column index {i} out of range"))),
            Column::Name(n) => self
                .table
                .column_index(n)
                .ok_or_else(|| ApiError::Cursor(format!("unknown column `{n}`")))?,
        };
        Ok(Cell::from_value(&self.table.rows[self.cursor - 1][i], &self.graph))
    }

    /// All rows as cells, independent of the cursor.
    pub fn cells(&self) -> Vec<Vec<Cell>> {
        self.table
            .rows
            .iter()
            .map(|r| r.iter().map(|v| Cell::from_value(v, &self.graph)).collect())
            .collect()
    }

    /// `$uid`s of every node cell in one column, top to bottom.
    pub fn uids(&self, column: &str) -> Vec<i64> {
        let Some(i) = self.table.column_index(column) else {
            return Vec::new();
        };
        self.cells().iter().filter_map(|r| r[i].uid()).collect()
    }

    pub fn table(&self) -> &ResultTable {
        &self.table
    }

    /// The graph the query ran against, including its writes.
    pub fn graph(&self) -> &PropertyGraph {
        &self.graph
    }

    pub fn lints(&self) -> &[Lint] {
        &self.lints
    }

    pub fn timings(&self) -> StageTimings {
        self.timings
    }

    /// Tab-separated header and rows, nodes as `#uid:label`.
    pub fn to_tsv(&self) -> String {
        let mut out = self.table.columns.join("\t");
        out.push('\n');
        for row in self.cells() {
            out.push_str(&row.iter().map(ToString::to_string).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}
