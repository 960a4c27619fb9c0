use std::collections::{BTreeMap, HashMap};

use super::IoError;
use crate::graph::{Node, NodeId, PropertyGraph, PropertyValue, CLASS_LABEL, ELEMENT, INSTANCEOF, LOCAL_LABEL, UID_KEY};
use crate::subgraph::{ClassInfo, FieldInfo, FieldKind, FieldValue, HeapSnapshot, ObjectId, ObjectInfo};

fn shape(message: impl Into<String>) -> IoError {
    IoError::NotSnapshotShaped(message.into())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Object,
    Class,
    Local,
    Array,
}

fn role(n: &Node) -> Role {
    if n.label == *CLASS_LABEL {
        Role::Class
    } else if n.label == *LOCAL_LABEL {
        Role::Local
    } else if n.label.as_str().ends_with("[]") && n.uid().is_none() {
        Role::Array
    } else {
        Role::Object
    }
}

fn prim_type(v: &PropertyValue) -> String {
    match v {
        PropertyValue::Int(_) => "int".into(),
        PropertyValue::Float(_) => "double".into(),
        PropertyValue::Bool(_) => "boolean".into(),
        PropertyValue::Str(_) => "String".into(),
        PropertyValue::List(items) => format!("{}[]", items.first().map_or("int".into(), prim_type)),
    }
}

struct Reader<'g> {
    graph: &'g PropertyGraph,
    ids: HashMap<NodeId, ObjectId>,
}

impl Reader<'_> {
    /// Reference-valued fields of `node`, keyed by relationship label.
    fn reference_fields(&self, node: NodeId) -> Result<BTreeMap<String, (FieldValue, String)>, IoError> {
        let mut out = BTreeMap::new();
        for &r in self.graph.outgoing(node) {
            let rel = self.graph.rel(r).expect("adjacency points at live rel");
            if rel.label == *INSTANCEOF {
                continue;
            }
            let target = self.graph.node(rel.end).expect("endpoint exists");
            let value = match role(target) {
                Role::Object => (FieldValue::Ref(self.ids[&rel.end]), target.label.as_str().to_string()),
                Role::Array => {
                    let mut slots: Vec<Option<ObjectId>> = Vec::new();
                    for &e in self.graph.outgoing(rel.end) {
                        let el = self.graph.rel(e).expect("adjacency points at live rel");
                        if el.label != *ELEMENT {
                            return Err(shape(format!("array node {} has a `{}` edge", rel.end, el.label)));
                        }
                        let Some(i) = el.properties.get("index").and_then(PropertyValue::as_int).filter(|i| *i >= 0) else {
                            return Err(shape(format!("element edge {e} lacks a non-negative `index`")));
                        };
                        let i = i as usize;
                        if slots.len() <= i {
                            slots.resize(i + 1, None);
                        }
                        if slots[i].is_some() {
                            return Err(shape(format!("array node {} has two elements at index {i}", rel.end)));
                        }
                        let to = self.graph.node(el.end).expect("endpoint exists");
                        if role(to) != Role::Object {
                            return Err(shape(format!("array element {e} points at a {} node", to.label)));
                        }
                        slots[i] = Some(self.ids[&el.end]);
                    }
                    let elem = target.label.as_str().trim_end_matches("[]").to_string();
                    (FieldValue::Refs(slots), elem)
                }
                _ => {
                    return Err(shape(format!(
                        "field `{}` of {node} points at a {} node",
                        rel.label, target.label
                    )))
                }
            };
            if out.insert(rel.label.as_str().to_string(), value).is_some() {
                return Err(shape(format!("node {node} has several `{}` edges", rel.label)));
            }
        }
        Ok(out)
    }
}

/// Reads a heap-shaped graph back into a snapshot: the inverse of extraction
/// up to structural equality. Object ids are the `$uid`s when every object
/// node has one, node indexes otherwise.
pub fn graph_to_snapshot(graph: &PropertyGraph) -> Result<HeapSnapshot, IoError> {
    let objects: Vec<&Node> = graph.nodes().filter(|n| role(n) == Role::Object).collect();
    let use_uids = objects.iter().all(|n| n.uid().is_some());
    let ids: HashMap<NodeId, ObjectId> = objects
        .iter()
        .map(|n| (n.id, if use_uids { n.uid().unwrap_or_default() } else { n.id.0 as ObjectId }))
        .collect();
    let reader = Reader { graph, ids };

    let mut classes: Vec<ClassInfo> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    for n in graph.nodes().filter(|n| role(n) == Role::Class) {
        let name = n.properties.get("name").and_then(PropertyValue::as_str).unwrap_or_default().to_string();
        if class_index.contains_key(&name) {
            return Err(shape(format!("two class nodes are named `{name}`")));
        }
        let mut info = ClassInfo::new(name.clone());
        for (k, v) in &n.properties {
            if k != "name" {
                info.statics.insert(k.clone(), FieldValue::Prim(v.clone()));
            }
        }
        for (k, (v, _)) in reader.reference_fields(n.id)? {
            if info.statics.insert(k.clone(), v).is_some() {
                return Err(shape(format!("static `{k}` of `{name}` is both a property and an edge")));
            }
        }
        class_index.insert(name, classes.len());
        classes.push(info);
    }

    let mut declared: Vec<BTreeMap<String, (FieldKind, String)>> = vec![BTreeMap::new(); classes.len()];
    let mut out_objects: Vec<ObjectInfo> = Vec::new();
    for n in &objects {
        let class = n.label.as_str().to_string();
        let ci = *class_index.entry(class.clone()).or_insert_with(|| {
            classes.push(ClassInfo::new(class.clone()));
            declared.push(BTreeMap::new());
            classes.len() - 1
        });
        let mut info = ObjectInfo::new(reader.ids[&n.id], class.clone());
        let mut kinds: Vec<(String, FieldKind, String)> = Vec::new();
        for (k, v) in &n.properties {
            if k == UID_KEY {
                continue;
            }
            let kind = if matches!(v, PropertyValue::List(_)) { FieldKind::PrimitiveArray } else { FieldKind::Primitive };
            kinds.push((k.clone(), kind, prim_type(v)));
            info.fields.insert(k.clone(), FieldValue::Prim(v.clone()));
        }
        for (k, (v, ty)) in reader.reference_fields(n.id)? {
            let kind = if matches!(v, FieldValue::Refs(_)) { FieldKind::ReferenceArray } else { FieldKind::Reference };
            if info.fields.insert(k.clone(), v).is_some() {
                return Err(shape(format!("field `{k}` of {} is both a property and an edge", n.id)));
            }
            kinds.push((k, kind, ty));
        }
        for (name, kind, ty) in kinds {
            match declared[ci].get_mut(&name) {
                None => {
                    declared[ci].insert(name, (kind, ty));
                }
                Some((k, _)) if *k != kind => {
                    return Err(shape(format!("field `{name}` of `{class}` is used with two kinds")));
                }
                Some((_, t)) if *t != ty => *t = "Object".into(),
                Some(_) => {}
            }
        }
        out_objects.push(info);
    }
    for (info, fields) in classes.iter_mut().zip(declared) {
        info.fields = fields
            .into_iter()
            .map(|(name, (kind, ty))| FieldInfo { name, kind, ty })
            .collect();
    }
    out_objects.sort_by_key(|o| o.id);

    let mut roots = BTreeMap::new();
    for n in graph.nodes().filter(|n| role(n) == Role::Local) {
        for &r in graph.outgoing(n.id) {
            let rel = graph.rel(r).expect("adjacency points at live rel");
            let Some(&id) = reader.ids.get(&rel.end) else {
                return Err(shape(format!("binding `{}` points at a non-object node", rel.label)));
            };
            if roots.insert(rel.label.as_str().to_string(), id).is_some() {
                return Err(shape(format!("root `{}` is bound twice", rel.label)));
            }
        }
    }
    let snapshot = HeapSnapshot {
        classes,
        objects: out_objects,
        roots,
    };
    snapshot.validate()?;
    Ok(snapshot)
}
