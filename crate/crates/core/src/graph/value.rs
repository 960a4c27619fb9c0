//! Typed property values stored on nodes and relationships.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use super::GraphError;

/// Property map keyed by property name. Sorted so iteration is deterministic.
pub type Properties = BTreeMap<String, PropertyValue>;

/// Reserved property holding an object's unique heap identifier.
pub const UID_KEY: &str = "$uid";

/// A typed property value.
///
/// Equality is type-sensitive: `Int(1)` and `Float(1.0)` are different values.
/// Floats compare by total order so that `NaN == NaN` and maps of values stay
/// usable as hash keys.
#[derive(Debug, Clone)]
pub enum PropertyValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    /// Homogeneous list of primitives (a primitive array field).
    List(Vec<PropertyValue>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    Int,
    Float,
    Bool,
    Str,
    List,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Int => "integer",
            ValueKind::Float => "float",
            ValueKind::Bool => "boolean",
            ValueKind::Str => "string",
            ValueKind::List => "list",
        };
        f.write_str(s)
    }
}

impl PropertyValue {
    /// Builds a primitive list, rejecting nested lists and mixed element kinds.
    pub fn list(items: Vec<PropertyValue>) -> Result<Self, GraphError> {
        if let Some(first) = items.first() {
            let kind = first.kind();
            if kind == ValueKind::List {
                return Err(GraphError::InvalidValue("nested lists are not primitive".into()));
            }
            if let Some(bad) = items.iter().find(|v| v.kind() != kind) {
                return Err(GraphError::InvalidValue(format!(
                    "primitive list mixes {} and {}",
                    kind,
                    bad.kind()
                )));
            }
        }
        Ok(PropertyValue::List(items))
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            PropertyValue::Int(_) => ValueKind::Int,
            PropertyValue::Float(_) => ValueKind::Float,
            PropertyValue::Bool(_) => ValueKind::Bool,
            PropertyValue::Str(_) => ValueKind::Str,
            PropertyValue::List(_) => ValueKind::List,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            PropertyValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropertyValue::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Converts to a JSON value. Floats always carry a fractional part so the
    /// integer/float distinction survives a round trip.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        match self {
            PropertyValue::Int(v) => J::from(*v),
            PropertyValue::Float(v) => serde_json::Number::from_f64(*v)
                .map(J::Number)
                .unwrap_or(J::Null),
            PropertyValue::Bool(v) => J::Bool(*v),
            PropertyValue::Str(s) => J::String(s.clone()),
            PropertyValue::List(items) => J::Array(items.iter().map(|v| v.to_json()).collect()),
        }
    }

    /// Parses a JSON scalar or array of scalars.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, GraphError> {
        use serde_json::Value as J;
        match value {
            J::Bool(b) => Ok(PropertyValue::Bool(*b)),
            J::String(s) => Ok(PropertyValue::Str(s.clone())),
            J::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(PropertyValue::Int(i))
                } else if let Some(f) = n.as_f64() {
                    Ok(PropertyValue::Float(f))
                } else {
                    Err(GraphError::InvalidValue(format!("number {n} out of range")))
                }
            }
            J::Array(items) => {
                let items = items
                    .iter()
                    .map(|v| match v {
                        J::Array(_) => Err(GraphError::InvalidValue(
                            "nested lists are not primitive".into(),
                        )),
                        other => PropertyValue::from_json(other),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                PropertyValue::list(items)
            }
            J::Null => Err(GraphError::InvalidValue("null is not a property value".into())),
            J::Object(_) => Err(GraphError::InvalidValue("objects are not property values".into())),
        }
    }
}

impl PartialEq for PropertyValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PropertyValue {}

impl PartialOrd for PropertyValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PropertyValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use PropertyValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Float(a), Float(b)) => a.total_cmp(b),
            (Bool(a), Bool(b)) => a.cmp(b),
            (Str(a), Str(b)) => a.cmp(b),
            (List(a), List(b)) => a.cmp(b),
            _ => self.kind().cmp(&other.kind()),
        }
    }
}

impl Hash for PropertyValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind().hash(state);
        match self {
            PropertyValue::Int(v) => v.hash(state),
            PropertyValue::Float(v) => v.to_bits().hash(state),
            PropertyValue::Bool(v) => v.hash(state),
            PropertyValue::Str(v) => v.hash(state),
            PropertyValue::List(v) => v.hash(state),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Int(v) => write!(f, "{v}"),
            PropertyValue::Float(v) => {
                if v.is_finite() && v.fract() == 0.0 {
                    write!(f, "{v:.1}")
                } else {
                    write!(f, "{v}")
                }
            }
            PropertyValue::Bool(v) => write!(f, "{v}"),
            PropertyValue::Str(s) => f.write_str(s),
            PropertyValue::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl From<i64> for PropertyValue {
    fn from(v: i64) -> Self {
        PropertyValue::Int(v)
    }
}

impl From<f64> for PropertyValue {
    fn from(v: f64) -> Self {
        PropertyValue::Float(v)
    }
}

impl From<bool> for PropertyValue {
    fn from(v: bool) -> Self {
        PropertyValue::Bool(v)
    }
}

impl From<&str> for PropertyValue {
    fn from(v: &str) -> Self {
        PropertyValue::Str(v.to_string())
    }
}

impl From<String> for PropertyValue {
    fn from(v: String) -> Self {
        PropertyValue::Str(v)
    }
}

/// Builds a property map from `(key, value)` pairs.
pub fn props<K, V, I>(pairs: I) -> Properties
where
    K: Into<String>,
    V: Into<PropertyValue>,
    I: IntoIterator<Item = (K, V)>,
{
    pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect()
}
