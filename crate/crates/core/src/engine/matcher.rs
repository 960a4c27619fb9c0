use std::collections::HashMap;

use super::{EngineError, Value};
use crate::cypher::{NodePattern, PathPattern, RelDirection};
use crate::graph::{Direction, NodeId, PropertyGraph, PropertyValue, RelId, UID_KEY};

/// Slot-indexed row; `None` marks a variable not bound yet.
pub(crate) type Row = Vec<Option<Value>>;

/// Variable name to slot index, in order of first appearance.
#[derive(Debug, Default, Clone)]
pub(crate) struct Scope {
    pub names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Scope {
    pub fn slot(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn declare_path(&mut self, p: &PathPattern) {
        for n in p.nodes() {
            if let Some(v) = &n.var {
                self.slot(v);
            }
        }
        for r in p.rels() {
            if let Some(v) = &r.var {
                self.slot(v);
            }
        }
    }
}

pub(crate) struct NodePat<'q> {
    pub slot: Option<usize>,
    pub label: Option<&'q str>,
    pub props: &'q [(String, PropertyValue)],
}

pub(crate) struct RelPat<'q> {
    pub slot: Option<usize>,
    types: Option<Vec<&'q str>>,
    dir: Direction,
    min: u32,
    max: Option<u32>,
}

pub(crate) struct PathPat<'q> {
    pub start: NodePat<'q>,
    pub steps: Vec<(RelPat<'q>, NodePat<'q>)>,
}

fn node_pat<'q>(n: &'q NodePattern, scope: &Scope) -> NodePat<'q> {
    NodePat {
        slot: n.var.as_deref().and_then(|v| scope.get(v)),
        label: n.label.as_deref(),
        props: &n.properties,
    }
}

pub(crate) fn compile<'q>(p: &'q PathPattern, scope: &Scope) -> PathPat<'q> {
    PathPat {
        start: node_pat(&p.start, scope),
        steps: p
            .steps
            .iter()
            .map(|(r, n)| {
                let (min, max) = r.length.bounds();
                let rel = RelPat {
                    slot: r.var.as_deref().and_then(|v| scope.get(v)),
                    types: (!r.types.is_empty()).then(|| r.types.iter().map(String::as_str).collect()),
                    dir: match r.direction {
                        RelDirection::Right => Direction::Outgoing,
                        RelDirection::Left => Direction::Incoming,
                        RelDirection::Either => Direction::Both,
                    },
                    min,
                    max,
                };
                (rel, node_pat(n, scope))
            })
            .collect(),
    }
}

pub(crate) type Sink<'s> = dyn FnMut(&Row) -> Result<(), EngineError> + 's;

/// Depth-first matcher over a list of path patterns. Relationships are
/// unique across the whole list; candidates are tried in ascending id order.
pub(crate) struct Matcher<'a, 'q> {
    pub graph: &'a PropertyGraph,
    pub paths: &'a [PathPat<'q>],
}

fn bind(row: &mut Row, slot: Option<usize>, v: Value) -> Option<usize> {
    let s = slot?;
    if row[s].is_some() {
        return None;
    }
    row[s] = Some(v);
    Some(s)
}

fn unbind(row: &mut Row, bound: Option<usize>) {
    if let Some(s) = bound {
        row[s] = None;
    }
}

impl Matcher<'_, '_> {
    pub fn run(&self, row: &mut Row, sink: &mut Sink<'_>) -> Result<(), EngineError> {
        let mut used = Vec::new();
        self.path(0, row, &mut used, sink)
    }

    fn node_ok(&self, p: &NodePat<'_>, n: NodeId, row: &Row) -> bool {
        if let Some(Some(v)) = p.slot.map(|s| &row[s]) {
            if *v != Value::Node(n) {
                return false;
            }
        }
        let Some(node) = self.graph.node(n) else {
            return false;
        };
        if p.label.is_some_and(|l| node.label != *l) {
            return false;
        }
        p.props.iter().all(|(k, v)| node.properties.get(k) == Some(v))
    }

    fn candidates(&self, p: &NodePat<'_>, row: &Row) -> Vec<NodeId> {
        if let Some(Some(v)) = p.slot.map(|s| &row[s]) {
            return match v {
                Value::Node(n) => vec![*n],
                _ => Vec::new(),
            };
        }
        if let Some((_, uid)) = p.props.iter().find(|(k, _)| k == UID_KEY) {
            return match uid.as_int() {
                Some(uid) => self.graph.nodes_with_uid(uid).to_vec(),
                None => Vec::new(),
            };
        }
        match p.label {
            Some(l) => self.graph.nodes_with_label(l).to_vec(),
            None => (0..self.graph.node_count()).map(NodeId).collect(),
        }
    }

    /// False when an indexed endpoint pattern has no matching node at all.
    fn endpoint_possible(&self, p: &NodePat<'_>, row: &Row) -> bool {
        let bound = p.slot.is_some_and(|s| row[s].is_some());
        let indexed = p.label.is_some() || p.props.iter().any(|(k, _)| k == UID_KEY);
        if !bound && !indexed {
            return true;
        }
        self.candidates(p, row).into_iter().any(|n| self.node_ok(p, n, row))
    }

    fn path(&self, pi: usize, row: &mut Row, used: &mut Vec<RelId>, sink: &mut Sink<'_>) -> Result<(), EngineError> {
        let Some(path) = self.paths.get(pi) else {
            return sink(row);
        };
        for n in self.candidates(&path.start, row) {
            if !self.node_ok(&path.start, n, row) {
                continue;
            }
            let b = bind(row, path.start.slot, Value::Node(n));
            let r = self.step(pi, 0, n, row, used, sink);
            unbind(row, b);
            r?;
        }
        Ok(())
    }

    fn step(
        &self,
        pi: usize,
        si: usize,
        at: NodeId,
        row: &mut Row,
        used: &mut Vec<RelId>,
        sink: &mut Sink<'_>,
    ) -> Result<(), EngineError> {
        let path = &self.paths[pi];
        let Some((rp, np)) = path.steps.get(si) else {
            return self.path(pi + 1, row, used, sink);
        };
        if let Some(Some(v)) = rp.slot.map(|s| &row[s]) {
            let Value::Rel(r) = *v else { return Ok(()) };
            let Some(rel) = self.graph.rel(r) else { return Ok(()) };
            if used.contains(&r) || rp.types.as_ref().is_some_and(|t| !t.iter().any(|t| rel.label == **t)) {
                return Ok(());
            }
            let next = match rp.dir {
                Direction::Outgoing if rel.start == at => rel.end,
                Direction::Incoming if rel.end == at => rel.start,
                Direction::Both if rel.start == at => rel.end,
                Direction::Both if rel.end == at => rel.start,
                _ => return Ok(()),
            };
            if !self.node_ok(np, next, row) {
                return Ok(());
            }
            used.push(r);
            let b = bind(row, np.slot, Value::Node(next));
            let res = self.step(pi, si + 1, next, row, used, sink);
            unbind(row, b);
            used.pop();
            return res;
        }
        if !self.endpoint_possible(np, row) {
            return Ok(());
        }
        self.walk(pi, si, at, 0, None, row, used, sink)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        pi: usize,
        si: usize,
        cur: NodeId,
        depth: u32,
        last: Option<RelId>,
        row: &mut Row,
        used: &mut Vec<RelId>,
        sink: &mut Sink<'_>,
    ) -> Result<(), EngineError> {
        let (rp, np) = &self.paths[pi].steps[si];
        if depth >= rp.min && self.node_ok(np, cur, row) {
            let bn = bind(row, np.slot, Value::Node(cur));
            let br = match (rp.max, last) {
                (Some(1), Some(r)) => bind(row, rp.slot, Value::Rel(r)),
                _ => None,
            };
            let res = self.step(pi, si + 1, cur, row, used, sink);
            unbind(row, br);
            unbind(row, bn);
            res?;
        }
        if rp.max.is_some_and(|m| depth >= m) {
            return Ok(());
        }
        for (r, next) in self.graph.neighbors(cur, rp.dir, rp.types.as_deref())? {
            if used.contains(&r) {
                continue;
            }
            used.push(r);
            let res = self.walk(pi, si, next, depth + 1, Some(r), row, used, sink);
            used.pop();
            res?;
        }
        Ok(())
    }
}
