//! Sample heaps and queries: a five-node binary tree, the tree program's heap,
//! and hash maps for key lookup.

use std::collections::{BTreeMap, HashSet};

use crate::graph::{props, NodeId, Properties, PropertyGraph, CLASS_LABEL, INSTANCEOF, LOCAL_LABEL};
use crate::subgraph::{ClassInfo, FieldKind, FieldValue, HeapSnapshot, ObjectId, ObjectInfo};

pub const NODE_CLASS: &str = "BinaryTree$Node";
pub const TREE_CLASS: &str = "BinaryTree";

/// The tree program, with a `/* POINT */` marker before its return.
pub const TREE_PROGRAM: &str = include_str!("../fixtures/binary_tree.fj");

/// Builds the tree with two CREATE clauses, three MERGE clauses and returns
/// the tree object. `@1` is the node class, `@2` the tree class.
pub const CREATE_TREE_QUERY: &str = "CREATE (a:@1 {value:1}), (b:@1 {value:2}), (c:@1 {value:4}), (d:@1 {value:5}), (e:@1 {value:3}) \
CREATE (f:@2) \
MERGE (b)<-[:left]-(c)-[:right]->(d) \
MERGE (a)<-[:left]-(b)-[:right]->(e) \
MERGE (f)-[:root]->(c) \
RETURN f";

/// Everything reachable from `$1` in either direction.
pub const REACHABLE_QUERY: &str = "MATCH (n {$1})-[*]-(m) RETURN m";

/// Nodes with value 1 exactly two child hops below `$1`.
pub const TWO_HOPS_QUERY: &str = "MATCH (n {$1})-[:left|right*2]->(m {value:1}) RETURN m";

/// Tree invariant for the tree `$1`: the nodes reachable from the root match
/// `size`, and no node lies on a directed or undirected cycle of child links.
pub const REP_OK_QUERY: &str = "MATCH (t {$1}) \
OPTIONAL MATCH (t)-[:root]->(r)-[:left|right*0..]->(n) \
OPTIONAL MATCH (m:`BinaryTree$Node`)-[:left|right*]-(m) \
RETURN count(n) = t.size AND count(m) = 0";

/// Whether map `$1` holds a key equal to `$2`.
pub const CONTAINS_KEY_QUERY: &str = "MATCH (map {$1})-[:table]->(t)-[:element]->(b)-[:next*0..]->(e)-[:key]->(n) \
MATCH (k {$2}) WHERE equals(n, k) \
RETURN count(n) > 0";

/// Object ids of the tree nodes a..e and the tree f.
pub mod ids {
    use crate::subgraph::ObjectId;
    pub const A: ObjectId = 101;
    pub const B: ObjectId = 102;
    pub const C: ObjectId = 103;
    pub const D: ObjectId = 104;
    pub const E: ObjectId = 105;
    pub const F: ObjectId = 106;
}

/// `(id, value)` for a..e.
const TREE_VALUES: [(ObjectId, i64); 5] = [(ids::A, 1), (ids::B, 2), (ids::C, 4), (ids::D, 5), (ids::E, 3)];
const TREE_LINKS: [(ObjectId, &str, ObjectId); 5] = [
    (ids::C, "left", ids::B),
    (ids::C, "right", ids::D),
    (ids::B, "left", ids::A),
    (ids::B, "right", ids::E),
    (ids::F, "root", ids::C),
];

/// Tree instances only: five nodes, one tree, five field edges.
pub fn fixture_a_instances() -> PropertyGraph {
    tree_graph(false, false, false)
}

/// The tree as built by [`CREATE_TREE_QUERY`] plus class nodes and
/// `instanceof` edges: 8 nodes, 11 relationships.
pub fn fixture_a() -> PropertyGraph {
    tree_graph(true, false, false)
}

/// [`fixture_a`] with each object's id as its `$uid`, so that positional
/// `$k` markers can address it.
pub fn fixture_a_with_uids() -> PropertyGraph {
    tree_graph(true, true, false)
}

/// [`fixture_a`] as produced by extracting [`fixture_a_snapshot`] from its
/// root: adds `$uid` properties and a `tree` binder.
pub fn fixture_a_extracted() -> PropertyGraph {
    tree_graph(true, true, true)
}

fn tree_graph(classes: bool, uids: bool, binder: bool) -> PropertyGraph {
    let mut g = PropertyGraph::new();
    let mut node: BTreeMap<ObjectId, NodeId> = BTreeMap::new();
    for (id, value) in TREE_VALUES {
        let mut p = props([("value", value)]);
        if uids {
            p.insert("$uid".into(), id.into());
        }
        node.insert(id, g.add_node(NODE_CLASS, p).unwrap());
    }
    let mut p = Properties::new();
    if uids {
        p.insert("$uid".into(), ids::F.into());
    }
    node.insert(ids::F, g.add_node(TREE_CLASS, p).unwrap());
    for (from, field, to) in TREE_LINKS {
        g.add_relationship(field, node[&from], node[&to], Properties::new()).unwrap();
    }
    if classes {
        let node_class = g.add_node(CLASS_LABEL, props([("name", NODE_CLASS)])).unwrap();
        let tree_class = g.add_node(CLASS_LABEL, props([("name", TREE_CLASS)])).unwrap();
        for (id, n) in &node {
            let class = if *id == ids::F { tree_class } else { node_class };
            g.add_relationship(INSTANCEOF, *n, class, Properties::new()).unwrap();
        }
    }
    if binder {
        let binder = g.add_node(LOCAL_LABEL, Properties::new()).unwrap();
        g.add_relationship("tree", binder, node[&ids::F], Properties::new()).unwrap();
    }
    g
}

/// The tree classes, with fields in declaration order.
pub fn tree_classes() -> Vec<ClassInfo> {
    vec![
        ClassInfo::new(NODE_CLASS)
            .field("left", FieldKind::Reference, NODE_CLASS)
            .field("right", FieldKind::Reference, NODE_CLASS)
            .field("value", FieldKind::Primitive, "int"),
        ClassInfo::new(TREE_CLASS)
            .field("root", FieldKind::Reference, NODE_CLASS)
            .field("size", FieldKind::Primitive, "int"),
    ]
}

/// Snapshot of the tree heap: six objects, root `tree` bound to f. The same
/// data ships as `fixtures/fixture_a.json`.
pub fn fixture_a_snapshot() -> HeapSnapshot {
    let mut objects: BTreeMap<ObjectId, ObjectInfo> = BTreeMap::new();
    for (id, value) in TREE_VALUES {
        objects.insert(id, ObjectInfo::new(id, NODE_CLASS).with("value", FieldValue::Prim(value.into())));
    }
    objects.insert(ids::F, ObjectInfo::new(ids::F, TREE_CLASS));
    for (from, field, to) in TREE_LINKS {
        let o = objects.get_mut(&from).unwrap();
        o.fields.insert(field.into(), FieldValue::Ref(to));
    }
    HeapSnapshot {
        classes: tree_classes(),
        objects: objects.into_values().collect(),
        roots: BTreeMap::from([("tree".to_string(), ids::F)]),
    }
}

pub const FIXTURE_A_JSON: &str = include_str!("../fixtures/fixture_a.json");

/// Heap of the tree program at its marker: 7 nodes, 7 relationships.
pub fn fixture_b() -> PropertyGraph {
    let mut g = PropertyGraph::new();
    let node_class = g.add_node(CLASS_LABEL, props([("name", NODE_CLASS)])).unwrap();
    let tree_class = g.add_node(CLASS_LABEL, props([("name", TREE_CLASS)])).unwrap();
    let four = g.add_node(NODE_CLASS, props([("value", 4)])).unwrap();
    let five = g.add_node(NODE_CLASS, props([("value", 5)])).unwrap();
    let tree = g.add_node(TREE_CLASS, props([("size", 2)])).unwrap();
    let l = g.add_node(LOCAL_LABEL, Properties::new()).unwrap();
    let b = g.add_node(LOCAL_LABEL, Properties::new()).unwrap();
    for (label, from, to) in [
        (INSTANCEOF, four, node_class),
        (INSTANCEOF, five, node_class),
        (INSTANCEOF, tree, tree_class),
        ("left", five, four),
        ("root", tree, five),
        ("l", l, four),
        ("b", b, tree),
    ] {
        g.add_relationship(label, from, to, Properties::new()).unwrap();
    }
    g
}

pub const MAP_CLASS: &str = "HashMap";
pub const ENTRY_CLASS: &str = "HashMap$Node";
pub const KEY_CLASS: &str = "Key";

/// A chained hash map over integer keys. Key objects are `Key {k}`; the map is
/// object 1, its entries and keys follow. Repeated keys are stored once.
/// Returns the snapshot and the object id of each stored key.
pub fn hash_map_snapshot(keys: &[i64], capacity: usize) -> (HeapSnapshot, Vec<ObjectId>) {
    let capacity = capacity.max(1);
    let classes = vec![
        ClassInfo::new(MAP_CLASS)
            .field("table", FieldKind::ReferenceArray, ENTRY_CLASS)
            .field("size", FieldKind::Primitive, "int"),
        ClassInfo::new(ENTRY_CLASS)
            .field("hash", FieldKind::Primitive, "int")
            .field("key", FieldKind::Reference, KEY_CLASS)
            .field("value", FieldKind::Reference, KEY_CLASS)
            .field("next", FieldKind::Reference, ENTRY_CLASS),
        ClassInfo::new(KEY_CLASS).field("k", FieldKind::Primitive, "int"),
    ];
    let mut next_id: ObjectId = 2;
    let mut fresh = || {
        let id = next_id;
        next_id += 1;
        id
    };
    let mut objects = Vec::new();
    let mut key_ids = Vec::new();
    let mut buckets: Vec<Option<ObjectId>> = vec![None; capacity];
    let mut stored = 0i64;
    let mut seen = HashSet::new();
    for &k in keys {
        if !seen.insert(k) {
            continue;
        }
        let key = fresh();
        objects.push(ObjectInfo::new(key, KEY_CLASS).with("k", FieldValue::Prim(k.into())));
        key_ids.push(key);
        let slot = bucket_of(k, capacity);
        let entry = fresh();
        let mut info = ObjectInfo::new(entry, ENTRY_CLASS)
            .with("hash", FieldValue::Prim(k.into()))
            .with("key", FieldValue::Ref(key))
            .with("value", FieldValue::Ref(key));
        if let Some(head) = buckets[slot] {
            info = info.with("next", FieldValue::Ref(head));
        }
        buckets[slot] = Some(entry);
        objects.push(info);
        stored += 1;
    }
    objects.insert(
        0,
        ObjectInfo::new(1, MAP_CLASS)
            .with("table", FieldValue::Refs(buckets))
            .with("size", FieldValue::Prim(stored.into())),
    );
    let snapshot = HeapSnapshot {
        classes,
        objects,
        roots: BTreeMap::from([("map".to_string(), 1)]),
    };
    (snapshot, key_ids)
}

/// Bucket index used by [`hash_map_snapshot`].
pub fn bucket_of(k: i64, capacity: usize) -> usize {
    k.rem_euclid(capacity as i64) as usize
}
