use std::collections::BTreeMap;
use std::fmt;

use crate::graph::{NodeId, PropertyGraph, PropertyValue, RelId};

/// A cell or variable value. `Null` is the absent marker of OPTIONAL MATCH
/// and of missing properties.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Null,
    Prop(PropertyValue),
    Node(NodeId),
    Rel(RelId),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Prop(PropertyValue::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Prop(PropertyValue::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn as_node(&self) -> Option<NodeId> {
        match self {
            Value::Node(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Prop(p) => match p {
                PropertyValue::Int(_) => "integer",
                PropertyValue::Float(_) => "float",
                PropertyValue::Bool(_) => "boolean",
                PropertyValue::Str(_) => "string",
                PropertyValue::List(_) => "list",
            },
            Value::Node(_) => "node",
            Value::Rel(_) => "relationship",
        }
    }

    /// Text form with nodes as `#uid:label` (or `#new:label` without a uid)
    /// and relationships as `[:type]`.
    pub fn render(&self, graph: &PropertyGraph) -> String {
        match self {
            Value::Null => "null".into(),
            Value::Prop(p) => p.to_string(),
            Value::Node(id) => match graph.node(*id) {
                Some(n) => match n.uid() {
                    Some(uid) => format!("#{uid}:{}", n.label),
                    None => format!("#new:{}", n.label),
                },
                None => format!("#n{}:?", id.0),
            },
            Value::Rel(id) => match graph.rel(*id) {
                Some(r) => format!("[:{}]", r.label),
                None => format!("[r{}]", id.0),
            },
        }
    }
}

impl From<PropertyValue> for Value {
    fn from(v: PropertyValue) -> Self {
        Value::Prop(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Prop(PropertyValue::Bool(v))
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Prop(PropertyValue::Int(v))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Prop(p) => write!(f, "{p}"),
            Value::Node(n) => write!(f, "node {}", n.0),
            Value::Rel(r) => write!(f, "relationship {}", r.0),
        }
    }
}

/// Variable assignment of one result row.
pub type Binding = BTreeMap<String, Value>;

/// Column names and rows in engine order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column, top to bottom.
    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Keeps the first occurrence of each row.
    pub fn distinct(&self) -> ResultTable {
        let mut seen = std::collections::HashSet::new();
        ResultTable {
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| seen.insert(*r)).cloned().collect(),
        }
    }

    /// Tab-separated header and rows.
    pub fn to_tsv(&self, graph: &PropertyGraph) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.render(graph)).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}
