//! Directed property multigraph.
//!
//! Nodes and relationships carry a single label and a property map. Ids are
//! dense integers handed out in creation order and every iteration order in
//! this module is ascending by id.

mod iso;
mod value;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use iso::{structurally_equal, structurally_equal_bounded, DEFAULT_ISO_LIMIT};
pub use value::{props, Properties, PropertyValue, ValueKind, UID_KEY};

/// Label of binder nodes standing for local variables and roots.
pub const LOCAL_LABEL: &str = "Local";
/// Label of class-metadata nodes.
pub const CLASS_LABEL: &str = "Class";
/// Relationship from an instance to its class-metadata node.
pub const INSTANCEOF: &str = "instanceof";
/// Relationship from a reference-array node to one of its slots.
pub const ELEMENT: &str = "element";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("label must be non-empty")]
    EmptyLabel,
    #[error("reserved label `{label}` misused: {reason}")]
    ReservedLabel { label: String, reason: String },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("relationship endpoint {0} not found")]
    EndpointNotFound(NodeId),
    #[error("graph of {size} nodes exceeds the comparison bound of {limit}")]
    SizeLimitExceeded { size: usize, limit: usize },
    #[error("invalid property value: {0}")]
    InvalidValue(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for RelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Non-empty label text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(text: impl Into<String>) -> Result<Self, GraphError> {
        let text = text.into();
        if text.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        Ok(Label(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0 == LOCAL_LABEL || self.0 == CLASS_LABEL
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for Label {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Label {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: Label,
    pub properties: Properties,
}

impl Node {
    pub fn uid(&self) -> Option<i64> {
        self.properties.get(UID_KEY).and_then(PropertyValue::as_int)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relationship {
    pub id: RelId,
    pub label: Label,
    pub start: NodeId,
    pub end: NodeId,
    pub properties: Properties,
}

impl Relationship {
    /// The endpoint opposite to `node`; for self-loops this is `node` itself.
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.start == node {
            self.end
        } else {
            self.start
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Outgoing,
    Incoming,
    Both,
}

/// In-memory property multigraph with adjacency, label and `$uid` indexes.
#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    nodes: Vec<Node>,
    rels: Vec<Option<Relationship>>,
    outgoing: Vec<Vec<RelId>>,
    incoming: Vec<Vec<RelId>>,
    by_label: HashMap<String, Vec<NodeId>>,
    by_uid: HashMap<i64, Vec<NodeId>>,
    live_rels: usize,
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a node. `Local` nodes must have no properties and `Class` nodes
    /// must carry a string `name`.
    pub fn add_node(
        &mut self,
        label: impl Into<String>,
        properties: Properties,
    ) -> Result<NodeId, GraphError> {
        let label = Label::new(label)?;
        check_reserved(&label, &properties)?;
        if let Some(uid) = properties.get(UID_KEY) {
            if uid.as_int().is_none() {
                return Err(GraphError::InvalidValue(format!(
                    "`{UID_KEY}` must be an integer, got {}",
                    uid.kind()
                )));
            }
        }
        let id = NodeId(self.nodes.len());
        if let Some(uid) = properties.get(UID_KEY).and_then(PropertyValue::as_int) {
            self.by_uid.entry(uid).or_default().push(id);
        }
        self.by_label.entry(label.as_str().to_string()).or_default().push(id);
        self.nodes.push(Node {
            id,
            label,
            properties,
        });
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        Ok(id)
    }

    pub fn add_relationship(
        &mut self,
        label: impl Into<String>,
        start: NodeId,
        end: NodeId,
        properties: Properties,
    ) -> Result<RelId, GraphError> {
        let label = Label::new(label)?;
        for endpoint in [start, end] {
            if endpoint.0 >= self.nodes.len() {
                return Err(GraphError::EndpointNotFound(endpoint));
            }
        }
        let id = RelId(self.rels.len());
        self.rels.push(Some(Relationship {
            id,
            label,
            start,
            end,
            properties,
        }));
        self.outgoing[start.0].push(id);
        self.incoming[end.0].push(id);
        self.live_rels += 1;
        Ok(id)
    }

    /// Sets (or overwrites) one property of an existing node.
    pub fn set_property(
        &mut self,
        node: NodeId,
        key: impl Into<String>,
        value: PropertyValue,
    ) -> Result<(), GraphError> {
        self.check_node(node)?;
        let key = key.into();
        if self.nodes[node.0].label.is_reserved() {
            return Err(GraphError::ReservedLabel {
                label: self.nodes[node.0].label.to_string(),
                reason: "properties of binder and class nodes are fixed at creation".into(),
            });
        }
        if key == UID_KEY {
            let Some(uid) = value.as_int() else {
                return Err(GraphError::InvalidValue(format!("`{UID_KEY}` must be an integer")));
            };
            if let Some(old) = self.nodes[node.0].uid() {
                if let Some(list) = self.by_uid.get_mut(&old) {
                    list.retain(|n| *n != node);
                }
            }
            let list = self.by_uid.entry(uid).or_default();
            list.push(node);
            list.sort();
        }
        self.nodes[node.0].properties.insert(key, value);
        Ok(())
    }

    /// Points the `field` relationship of `start` at `end`, replacing any
    /// existing outgoing `field` relationships of `start`.
    pub fn set_field_edge(
        &mut self,
        field: &str,
        start: NodeId,
        end: NodeId,
    ) -> Result<RelId, GraphError> {
        for endpoint in [start, end] {
            if endpoint.0 >= self.nodes.len() {
                return Err(GraphError::EndpointNotFound(endpoint));
            }
        }
        self.clear_field(field, start)?;
        self.add_relationship(field, start, end, Properties::new())
    }

    /// Removes every outgoing relationship of `start` labeled `field`.
    pub fn clear_field(&mut self, field: &str, start: NodeId) -> Result<usize, GraphError> {
        self.check_node(start)?;
        let doomed: Vec<RelId> = self.outgoing[start.0]
            .iter()
            .copied()
            .filter(|r| self.rel(*r).map(|r| r.label == field).unwrap_or(false))
            .collect();
        for r in &doomed {
            self.remove_relationship(*r);
        }
        Ok(doomed.len())
    }

    fn remove_relationship(&mut self, id: RelId) {
        if let Some(rel) = self.rels.get_mut(id.0).and_then(Option::take) {
            self.outgoing[rel.start.0].retain(|r| *r != id);
            self.incoming[rel.end.0].retain(|r| *r != id);
            self.live_rels -= 1;
        }
    }

    fn check_node(&self, id: NodeId) -> Result<(), GraphError> {
        if id.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(id))
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }

    pub fn rel(&self, id: RelId) -> Option<&Relationship> {
        self.rels.get(id.0).and_then(Option::as_ref)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn relationship_count(&self) -> usize {
        self.live_rels
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter()
    }

    pub fn relationships(&self) -> impl Iterator<Item = &Relationship> + '_ {
        self.rels.iter().filter_map(Option::as_ref)
    }

    /// Outgoing relationship ids of `node` in ascending order.
    pub fn outgoing(&self, node: NodeId) -> &[RelId] {
        self.outgoing.get(node.0).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Incoming relationship ids of `node` in ascending order.
    pub fn incoming(&self, node: NodeId) -> &[RelId] {
        self.incoming.get(node.0).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nodes carrying `label`, ascending.
    pub fn nodes_with_label(&self, label: &str) -> &[NodeId] {
        self.by_label.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nodes whose `$uid` property equals `uid`, ascending.
    pub fn nodes_with_uid(&self, uid: i64) -> &[NodeId] {
        self.by_uid.get(&uid).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Incident relationships of `node`, ascending by relationship id, paired
    /// with the node at the other end. Self-loops are reported once.
    pub fn neighbors(
        &self,
        node: NodeId,
        direction: Direction,
        types: Option<&[&str]>,
    ) -> Result<Vec<(RelId, NodeId)>, GraphError> {
        self.check_node(node)?;
        let keep = |r: &Relationship| types.map_or(true, |t| t.iter().any(|t| r.label == *t));
        let mut out = Vec::new();
        if matches!(direction, Direction::Outgoing | Direction::Both) {
            for &r in self.outgoing(node) {
                let rel = &self.rels[r.0].as_ref().expect("adjacency points at live rel");
                if keep(rel) {
                    out.push((r, rel.end));
                }
            }
        }
        if matches!(direction, Direction::Incoming | Direction::Both) {
            for &r in self.incoming(node) {
                let rel = &self.rels[r.0].as_ref().expect("adjacency points at live rel");
                if direction == Direction::Both && rel.start == rel.end {
                    continue;
                }
                if keep(rel) {
                    out.push((r, rel.start));
                }
            }
        }
        out.sort_by_key(|(r, _)| *r);
        Ok(out)
    }

    /// Checks that the adjacency indexes agree with the relationship table.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen_out = 0;
        let mut seen_in = 0;
        for (n, list) in self.outgoing.iter().enumerate() {
            for r in list {
                let rel = self.rel(*r).ok_or_else(|| format!("dead {r} in out[{n}]"))?;
                if rel.start.0 != n {
                    return Err(format!("{r} listed as outgoing of n{n} but starts at {}", rel.start));
                }
                seen_out += 1;
            }
        }
        for (n, list) in self.incoming.iter().enumerate() {
            for r in list {
                let rel = self.rel(*r).ok_or_else(|| format!("dead {r} in in[{n}]"))?;
                if rel.end.0 != n {
                    return Err(format!("{r} listed as incoming of n{n} but ends at {}", rel.end));
                }
                seen_in += 1;
            }
        }
        if seen_out != self.live_rels || seen_in != self.live_rels {
            return Err(format!(
                "{} live relationships but {seen_out} outgoing / {seen_in} incoming entries",
                self.live_rels
            ));
        }
        for rel in self.relationships() {
            let outs = self.outgoing[rel.start.0].iter().filter(|r| **r == rel.id).count();
            let ins = self.incoming[rel.end.0].iter().filter(|r| **r == rel.id).count();
            if outs != 1 || ins != 1 {
                return Err(format!("{} indexed {outs}/{ins} times", rel.id));
            }
        }
        Ok(())
    }

    /// Copy of the graph with every `$uid` property removed.
    pub fn without_uids(&self) -> PropertyGraph {
        let mut g = PropertyGraph::new();
        for node in &self.nodes {
            let mut p = node.properties.clone();
            p.remove(UID_KEY);
            g.add_node(node.label.as_str(), p).expect("labels already validated");
        }
        for rel in self.relationships() {
            g.add_relationship(rel.label.as_str(), rel.start, rel.end, rel.properties.clone())
                .expect("endpoints already validated");
        }
        g
    }
}

fn check_reserved(label: &Label, properties: &Properties) -> Result<(), GraphError> {
    match label.as_str() {
        LOCAL_LABEL if !properties.is_empty() => Err(GraphError::ReservedLabel {
            label: LOCAL_LABEL.into(),
            reason: "binder nodes carry no properties".into(),
        }),
        CLASS_LABEL if properties.get("name").and_then(PropertyValue::as_str).is_none() => {
            Err(GraphError::ReservedLabel {
                label: CLASS_LABEL.into(),
                reason: "class-metadata nodes need a string `name` property".into(),
            })
        }
        _ => Ok(()),
    }
}
