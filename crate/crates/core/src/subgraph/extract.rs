use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::model::{FieldValue, HeapSnapshot, ObjectId, ObjectInfo, SnapshotError};
use crate::graph::{
    GraphError, NodeId, Properties, PropertyGraph, PropertyValue, CLASS_LABEL, ELEMENT, INSTANCEOF,
    LOCAL_LABEL, UID_KEY,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("classes both whitelisted and blacklisted: {}", .0.join(", "))]
    ListOverlap(Vec<String>),
    #[error("root object {0} is not in the snapshot")]
    UnknownRoot(ObjectId),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Controls which part of a snapshot becomes graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ExtractionConfig {
    /// Classes whose instances, and everything they reach, are always kept.
    pub whitelist: BTreeSet<String>,
    /// Classes whose instances are dropped along with their edges.
    pub blacklist: BTreeSet<String>,
    /// Restrict to objects reachable from these. Empty means the whole heap.
    pub roots: Vec<ObjectId>,
    /// Drop objects unreachable from the snapshot roots first.
    pub force_collect: bool,
}

impl ExtractionConfig {
    pub fn rooted(roots: impl IntoIterator<Item = ObjectId>) -> Self {
        ExtractionConfig {
            roots: roots.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ExtractError> {
        let overlap: Vec<String> = self.whitelist.intersection(&self.blacklist).cloned().collect();
        if overlap.is_empty() {
            Ok(())
        } else {
            Err(ExtractError::ListOverlap(overlap))
        }
    }
}

/// Object id to `$uid`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UidAssignment(BTreeMap<ObjectId, i64>);

impl UidAssignment {
    pub fn get(&self, id: ObjectId) -> Option<i64> {
        self.0.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, i64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

/// The object id doubles as the `$uid`.
pub fn assign_unique_ids(snapshot: &HeapSnapshot) -> Result<UidAssignment, SnapshotError> {
    let mut map = BTreeMap::new();
    for o in &snapshot.objects {
        if map.insert(o.id, o.id).is_some() {
            return Err(SnapshotError::DuplicateId(o.id));
        }
    }
    Ok(UidAssignment(map))
}

/// Objects reachable from `starts` through reference fields, reference-array
/// slots and the static references of each visited object's class. Objects
/// rejected by `skip` are neither kept nor traversed.
fn reach(
    snapshot: &HeapSnapshot,
    index: &HashMap<ObjectId, &ObjectInfo>,
    starts: impl IntoIterator<Item = ObjectId>,
    skip: &dyn Fn(&ObjectInfo) -> bool,
) -> BTreeSet<ObjectId> {
    let statics: HashMap<&str, Vec<ObjectId>> = snapshot
        .classes
        .iter()
        .map(|c| (c.name.as_str(), c.statics.values().flat_map(FieldValue::targets).collect()))
        .collect();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for s in starts {
        if let Some(o) = index.get(&s) {
            if !skip(o) && seen.insert(s) {
                queue.push_back(*o);
            }
        }
    }
    while let Some(o) = queue.pop_front() {
        let own_statics = statics.get(o.class.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        let next = o.fields.values().flat_map(FieldValue::targets).chain(own_statics.iter().copied());
        for t in next {
            if let Some(target) = index.get(&t) {
                if !skip(target) && seen.insert(t) {
                    queue.push_back(*target);
                }
            }
        }
    }
    seen
}

/// Transitive closure from `starts`, starts included.
pub fn follow_references(
    snapshot: &HeapSnapshot,
    starts: &[ObjectId],
) -> Result<BTreeSet<ObjectId>, ExtractError> {
    let index = snapshot.index();
    if let Some(bad) = starts.iter().find(|s| !index.contains_key(s)) {
        return Err(ExtractError::UnknownRoot(*bad));
    }
    Ok(reach(snapshot, &index, starts.iter().copied(), &|_| false))
}

/// Removes objects unreachable from the snapshot roots.
pub fn collect(snapshot: &HeapSnapshot) -> HeapSnapshot {
    collect_from(snapshot, &[])
}

fn collect_from(snapshot: &HeapSnapshot, extra_roots: &[ObjectId]) -> HeapSnapshot {
    let index = snapshot.index();
    let live = reach(
        snapshot,
        &index,
        snapshot.roots.values().chain(extra_roots).copied(),
        &|_| false,
    );
    HeapSnapshot {
        classes: snapshot.classes.clone(),
        objects: snapshot.objects.iter().filter(|o| live.contains(&o.id)).cloned().collect(),
        roots: snapshot.roots.clone(),
    }
}

/// Builds the property graph for the part of `snapshot` selected by `config`.
///
/// Node order: instances by object id, class nodes in declaration order,
/// reference-array nodes, then one `Local` binder per snapshot root whose
/// object was kept.
pub fn extract(snapshot: &HeapSnapshot, config: &ExtractionConfig) -> Result<PropertyGraph, ExtractError> {
    config.validate()?;
    snapshot.validate()?;
    {
        let index = snapshot.index();
        if let Some(bad) = config.roots.iter().find(|r| !index.contains_key(r)) {
            return Err(ExtractError::UnknownRoot(*bad));
        }
    }
    let collected;
    let snapshot = if config.force_collect {
        collected = collect_from(snapshot, &config.roots);
        &collected
    } else {
        snapshot
    };
    let index = snapshot.index();
    let blocked = |o: &ObjectInfo| config.blacklist.contains(&o.class);

    let included: BTreeSet<ObjectId> = if config.roots.is_empty() {
        snapshot.objects.iter().filter(|o| !blocked(o)).map(|o| o.id).collect()
    } else {
        let white = snapshot
            .objects
            .iter()
            .filter(|o| config.whitelist.contains(&o.class))
            .map(|o| o.id);
        reach(snapshot, &index, config.roots.iter().copied().chain(white), &blocked)
    };

    let mut g = PropertyGraph::new();
    let mut node_of: HashMap<ObjectId, NodeId> = HashMap::new();
    for id in &included {
        let o = index[id];
        let mut p = Properties::new();
        for (name, v) in &o.fields {
            if let FieldValue::Prim(v) = v {
                p.insert(name.clone(), v.clone());
            }
        }
        p.insert(UID_KEY.into(), PropertyValue::Int(*id));
        node_of.insert(*id, g.add_node(o.class.as_str(), p)?);
    }

    let used_classes: HashSet<&str> = included.iter().map(|id| index[id].class.as_str()).collect();
    let mut class_node: HashMap<&str, NodeId> = HashMap::new();
    for c in &snapshot.classes {
        if !used_classes.contains(c.name.as_str()) {
            continue;
        }
        let mut p = Properties::new();
        p.insert("name".into(), PropertyValue::Str(c.name.clone()));
        for (name, v) in &c.statics {
            if let FieldValue::Prim(v) = v {
                p.insert(name.clone(), v.clone());
            }
        }
        class_node.insert(c.name.as_str(), g.add_node(CLASS_LABEL, p)?);
    }

    // reference edges, with array nodes created on first use
    let mut pending: Vec<(NodeId, &str, &FieldValue, String)> = Vec::new();
    for id in &included {
        let o = index[id];
        let from = node_of[id];
        for (name, v) in &o.fields {
            let ty = snapshot
                .fields_of(&o.class)
                .into_iter()
                .find(|f| &f.name == name)
                .map(|f| f.ty.clone())
                .unwrap_or_default();
            pending.push((from, name.as_str(), v, ty));
        }
    }
    for c in &snapshot.classes {
        if let Some(&from) = class_node.get(c.name.as_str()) {
            for (name, v) in &c.statics {
                pending.push((from, name.as_str(), v, "Object".to_string()));
            }
        }
    }
    let mut arrays: Vec<(NodeId, &[Option<ObjectId>])> = Vec::new();
    for (from, name, value, ty) in &pending {
        match value {
            FieldValue::Ref(t) => {
                if let Some(&to) = node_of.get(t) {
                    g.add_relationship(*name, *from, to, Properties::new())?;
                }
            }
            FieldValue::Refs(slots) => {
                let arr = g.add_node(format!("{ty}[]"), Properties::new())?;
                g.add_relationship(*name, *from, arr, Properties::new())?;
                arrays.push((arr, slots.as_slice()));
            }
            FieldValue::Null | FieldValue::Prim(_) => {}
        }
    }

    for id in &included {
        let o = index[id];
        g.add_relationship(INSTANCEOF, node_of[id], class_node[o.class.as_str()], Properties::new())?;
    }
    for (arr, slots) in arrays {
        for (i, slot) in slots.iter().enumerate() {
            if let Some(&to) = slot.and_then(|t| node_of.get(&t)) {
                let mut p = Properties::new();
                p.insert("index".into(), PropertyValue::Int(i as i64));
                g.add_relationship(ELEMENT, arr, to, p)?;
            }
        }
    }
    for (name, id) in &snapshot.roots {
        if let Some(&to) = node_of.get(id) {
            let binder = g.add_node(LOCAL_LABEL, Properties::new())?;
            g.add_relationship(name.as_str(), binder, to, Properties::new())?;
        }
    }
    Ok(g)
}
