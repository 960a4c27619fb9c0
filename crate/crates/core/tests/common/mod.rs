//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use objgraph::engine::Value;
use objgraph::fixtures::{NODE_CLASS, TREE_CLASS};
use objgraph::graph::{props, NodeId, Properties, PropertyGraph, PropertyValue, RelId};
use objgraph::subgraph::{ClassInfo, FieldKind, FieldValue, HeapSnapshot, ObjectId, ObjectInfo};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- graphs

/// Small graph over labels A/B with an optional integer `k` and edge types
/// f/g, at most two edges per node. Self-loops and parallel edges happen.
pub fn random_graph(r: &mut StdRng, max_nodes: usize, max_edges: usize) -> PropertyGraph {
    let mut g = PropertyGraph::new();
    let n = r.gen_range(1..=max_nodes);
    for _ in 0..n {
        let label = if r.gen_bool(0.5) { "A" } else { "B" };
        let p = if r.gen_bool(0.75) {
            props([("k", r.gen_range(0..3i64))])
        } else {
            Properties::new()
        };
        g.add_node(label, p).unwrap();
    }
    for _ in 0..r.gen_range(0..=max_edges.min(2 * n)) {
        let s = NodeId(r.gen_range(0..n));
        let e = NodeId(r.gen_range(0..n));
        let ty = if r.gen_bool(0.5) { "f" } else { "g" };
        g.add_relationship(ty, s, e, Properties::new()).unwrap();
    }
    g
}

fn random_text(r: &mut StdRng) -> String {
    const PIECES: [&str; 10] = ["a", "b c", ",", "\"", "\n", "é", "'", "x\r\ny", "{}", "$"];
    (0..r.gen_range(0..4)).map(|_| *PIECES.choose(r).unwrap()).collect()
}

pub fn random_property(r: &mut StdRng) -> PropertyValue {
    match r.gen_range(0..6) {
        0 => PropertyValue::Int(r.gen_range(-1000..1000)),
        1 => PropertyValue::Float(r.gen_range(-100.0..100.0)),
        2 => PropertyValue::Bool(r.gen_bool(0.5)),
        3 => PropertyValue::Str(random_text(r)),
        4 => PropertyValue::list((0..r.gen_range(0..4)).map(|_| PropertyValue::Int(r.gen_range(0..9))).collect()).unwrap(),
        _ => PropertyValue::list((0..r.gen_range(1..3)).map(|_| PropertyValue::Str(random_text(r))).collect()).unwrap(),
    }
}

/// Graph with awkward labels and every property kind, for format tests.
pub fn random_rich_graph(r: &mut StdRng, max_nodes: usize, max_edges: usize) -> PropertyGraph {
    const LABELS: [&str; 6] = ["A", "Node$Inner", "x,y", "q\"z", "with space", "Ünï"];
    let mut g = PropertyGraph::new();
    let n = r.gen_range(0..=max_nodes);
    let random_props = |r: &mut StdRng| -> Properties {
        (0..r.gen_range(0..4)).map(|i| (format!("p{i}"), random_property(r))).collect()
    };
    for _ in 0..n {
        let p = random_props(r);
        g.add_node(*LABELS.choose(r).unwrap(), p).unwrap();
    }
    if n > 0 {
        for _ in 0..r.gen_range(0..=max_edges) {
            let s = NodeId(r.gen_range(0..n));
            let e = NodeId(r.gen_range(0..n));
            let p = random_props(r);
            g.add_relationship(*LABELS.choose(r).unwrap(), s, e, p).unwrap();
        }
    }
    g
}

// ------------------------------------------------- brute-force query oracle

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Right,
    Left,
    Either,
}

#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub var: &'static str,
    pub label: Option<&'static str>,
    pub k: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct StepSpec {
    pub rel_var: Option<&'static str>,
    pub types: Vec<&'static str>,
    pub dir: Dir,
    pub min: u32,
    pub max: Option<u32>,
    pub length: &'static str,
}

#[derive(Debug, Clone)]
pub enum Pred {
    Always,
    SameK(&'static str, &'static str),
    KBelow(&'static str, i64),
    Distinct(&'static str, &'static str),
    EitherK(&'static str, i64, &'static str, i64),
}

#[derive(Debug, Clone)]
pub enum Proj {
    Vars(Vec<&'static str>),
    CountStar,
    DistinctVar(&'static str),
}

#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub nodes: Vec<NodeSpec>,
    pub steps: Vec<StepSpec>,
    pub pred: Pred,
    pub proj: Proj,
}

const NODE_VARS: [&str; 3] = ["a", "b", "c"];
const REL_VARS: [&str; 2] = ["r1", "r2"];

pub fn random_query(r: &mut StdRng) -> QuerySpec {
    let hops = r.gen_range(1..=2);
    let mut nodes = Vec::new();
    for i in 0..=hops {
        let repeat = i == hops && r.gen_bool(0.15);
        if repeat {
            nodes.push(NodeSpec { var: "a", label: None, k: None });
            continue;
        }
        nodes.push(NodeSpec {
            var: NODE_VARS[i],
            label: match r.gen_range(0..4) {
                0 => Some("A"),
                1 => Some("B"),
                _ => None,
            },
            k: r.gen_bool(0.2).then(|| r.gen_range(0..3)),
        });
    }
    let mut steps = Vec::new();
    for i in 0..hops {
        let (min, max, length) = match r.gen_range(0..4) {
            0 => (1, Some(1), ""),
            1 => (2, Some(2), "*2"),
            2 => (1, Some(3), "*1..3"),
            _ => (1, None, "*"),
        };
        let types = match r.gen_range(0..4) {
            0 => vec!["f"],
            1 => vec!["g"],
            2 => vec!["f", "g"],
            _ => vec![],
        };
        steps.push(StepSpec {
            rel_var: (length.is_empty() && r.gen_bool(0.5)).then_some(REL_VARS[i]),
            types,
            dir: *[Dir::Right, Dir::Left, Dir::Either].choose(r).unwrap(),
            min,
            max,
            length,
        });
    }
    let vars: Vec<&'static str> = distinct_vars(&nodes);
    let pick = |r: &mut StdRng| *vars.choose(r).unwrap();
    let pred = match r.gen_range(0..6) {
        0 => Pred::SameK(pick(r), pick(r)),
        1 => Pred::KBelow(pick(r), r.gen_range(0..3)),
        2 => Pred::Distinct(pick(r), pick(r)),
        3 => Pred::EitherK(pick(r), r.gen_range(0..3), pick(r), r.gen_range(0..3)),
        _ => Pred::Always,
    };
    let proj = match r.gen_range(0..5) {
        0 => Proj::CountStar,
        1 => Proj::DistinctVar(pick(r)),
        _ => {
            let mut cols = vars.clone();
            cols.extend(steps.iter().filter_map(|s| s.rel_var));
            Proj::Vars(cols)
        }
    };
    QuerySpec { nodes, steps, pred, proj }
}

fn distinct_vars(nodes: &[NodeSpec]) -> Vec<&'static str> {
    let mut out = Vec::new();
    for n in nodes {
        if !out.contains(&n.var) {
            out.push(n.var);
        }
    }
    out
}

impl QuerySpec {
    pub fn text(&self) -> String {
        let node = |n: &NodeSpec| {
            let mut s = format!("({}", n.var);
            if let Some(l) = n.label {
                s += &format!(":{l}");
            }
            if let Some(k) = n.k {
                s += &format!(" {{k: {k}}}");
            }
            s + ")"
        };
        let mut out = format!("MATCH {}", node(&self.nodes[0]));
        for (i, st) in self.steps.iter().enumerate() {
            let mut inner = st.rel_var.unwrap_or("").to_string();
            if !st.types.is_empty() {
                inner += &format!(":{}", st.types.join("|"));
            }
            inner += st.length;
            let (l, r) = match st.dir {
                Dir::Right => ("-", "->"),
                Dir::Left => ("<-", "-"),
                Dir::Either => ("-", "-"),
            };
            out += &format!("{l}[{inner}]{r}{}", node(&self.nodes[i + 1]));
        }
        match &self.pred {
            Pred::Always => {}
            Pred::SameK(x, y) => out += &format!(" WHERE {x}.k = {y}.k"),
            Pred::KBelow(x, c) => out += &format!(" WHERE {x}.k < {c}"),
            Pred::Distinct(x, y) => out += &format!(" WHERE NOT {x} = {y}"),
            Pred::EitherK(x, c, y, d) => out += &format!(" WHERE {x}.k = {c} OR {y}.k = {d}"),
        }
        match &self.proj {
            Proj::Vars(v) => out += &format!(" RETURN {}", v.join(", ")),
            Proj::CountStar => out += " RETURN count(*)",
            Proj::DistinctVar(v) => out += &format!(" RETURN DISTINCT {v}"),
        }
        out
    }
}

struct Edge {
    id: RelId,
    start: NodeId,
    end: NodeId,
    label: String,
}

struct BruteForce<'a> {
    graph: &'a PropertyGraph,
    spec: &'a QuerySpec,
    edges: Vec<Edge>,
    assign: HashMap<&'static str, NodeId>,
    rels: Vec<Option<usize>>,
    rows: Vec<Vec<Value>>,
}

impl BruteForce<'_> {
    fn k(&self, var: &str) -> Option<i64> {
        self.graph.node(self.assign[var]).unwrap().properties.get("k").and_then(PropertyValue::as_int)
    }

    fn holds(&self) -> bool {
        match &self.spec.pred {
            Pred::Always => true,
            Pred::SameK(x, y) => matches!((self.k(x), self.k(y)), (Some(a), Some(b)) if a == b),
            Pred::KBelow(x, c) => self.k(x).is_some_and(|v| v < *c),
            Pred::Distinct(x, y) => self.assign[x] != self.assign[y],
            Pred::EitherK(x, c, y, d) => self.k(x) == Some(*c) || self.k(y) == Some(*d),
        }
    }

    fn emit(&mut self) {
        if !self.holds() {
            return;
        }
        let mut row = Vec::new();
        if let Proj::Vars(vars) = &self.spec.proj {
            for v in vars {
                if let Some(i) = self.spec.steps.iter().position(|s| s.rel_var == Some(v)) {
                    row.push(Value::Rel(self.edges[self.rels[i].unwrap()].id));
                } else {
                    row.push(Value::Node(self.assign[v]));
                }
            }
        } else if let Proj::DistinctVar(v) = &self.spec.proj {
            row.push(Value::Node(self.assign[v]));
        }
        self.rows.push(row);
    }

    fn step(&mut self, i: usize, used: &mut Vec<usize>) {
        if i == self.spec.steps.len() {
            self.emit();
            return;
        }
        let from = self.assign[self.spec.nodes[i].var];
        self.trail(i, from, 0, None, used);
    }

    fn trail(&mut self, i: usize, cur: NodeId, depth: u32, last: Option<usize>, used: &mut Vec<usize>) {
        let st = &self.spec.steps[i];
        let (min, max, dir) = (st.min, st.max, st.dir);
        let target = self.assign[self.spec.nodes[i + 1].var];
        if depth >= min && cur == target {
            self.rels[i] = last;
            self.step(i + 1, used);
        }
        if max.is_some_and(|m| depth >= m) {
            return;
        }
        for e in 0..self.edges.len() {
            if used.contains(&e) {
                continue;
            }
            let edge = &self.edges[e];
            let st = &self.spec.steps[i];
            if !st.types.is_empty() && !st.types.contains(&edge.label.as_str()) {
                continue;
            }
            let next = match dir {
                Dir::Right if edge.start == cur => edge.end,
                Dir::Left if edge.end == cur => edge.start,
                Dir::Either if edge.start == cur => edge.end,
                Dir::Either if edge.end == cur => edge.start,
                _ => continue,
            };
            used.push(e);
            self.trail(i, next, depth + 1, Some(e), used);
            used.pop();
        }
    }
}

fn node_fits(g: &PropertyGraph, n: NodeId, spec: &NodeSpec) -> bool {
    let node = g.node(n).unwrap();
    spec.label.map_or(true, |l| node.label == *l)
        && spec.k.map_or(true, |k| node.properties.get("k").and_then(PropertyValue::as_int) == Some(k))
}

/// Rows of `spec` on `graph` by trying every node assignment and every
/// relationship-distinct trail, scanning the full edge list at each hop.
pub fn brute_force(graph: &PropertyGraph, spec: &QuerySpec) -> Vec<Vec<Value>> {
    let vars = distinct_vars(&spec.nodes);
    let n = graph.node_count();
    let mut bf = BruteForce {
        graph,
        spec,
        edges: graph
            .relationships()
            .map(|r| Edge {
                id: r.id,
                start: r.start,
                end: r.end,
                label: r.label.as_str().to_string(),
            })
            .collect(),
        assign: HashMap::new(),
        rels: vec![None; spec.steps.len()],
        rows: Vec::new(),
    };
    let total = n.pow(vars.len() as u32);
    for mut code in 0..total {
        for v in &vars {
            bf.assign.insert(v, NodeId(code % n));
            code /= n;
        }
        if spec.nodes.iter().all(|s| node_fits(graph, bf.assign[s.var], s)) {
            bf.step(0, &mut Vec::new());
        }
    }
    let mut rows = bf.rows;
    match &spec.proj {
        Proj::CountStar => vec![vec![Value::from(rows.len() as i64)]],
        Proj::DistinctVar(_) => {
            let mut seen = HashSet::new();
            rows.retain(|r| seen.insert(format!("{r:?}")));
            rows
        }
        Proj::Vars(_) => rows,
    }
}

/// Rows as sorted debug strings, for bag comparison.
pub fn bag(rows: &[Vec<Value>]) -> Vec<String> {
    let mut out: Vec<String> = rows.iter().map(|r| format!("{r:?}")).collect();
    out.sort();
    out
}

// ------------------------------------------------------------ tree heaps

pub const TREE_ID: ObjectId = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeShape {
    Valid,
    Cyclic,
    SizeMismatch,
    Forest,
}

fn grow_tree(r: &mut StdRng, objects: &mut BTreeMap<ObjectId, ObjectInfo>, first: ObjectId, n: usize) -> Option<ObjectId> {
    if n == 0 {
        return None;
    }
    let ids: Vec<ObjectId> = (first..first + n as ObjectId).collect();
    for (i, id) in ids.iter().enumerate() {
        objects.insert(*id, ObjectInfo::new(*id, NODE_CLASS).with("value", FieldValue::Prim((i as i64).into())));
    }
    for (i, id) in ids.iter().enumerate().skip(1) {
        loop {
            let parent = ids[r.gen_range(0..i)];
            let field = if r.gen_bool(0.5) { "left" } else { "right" };
            let o = objects.get_mut(&parent).unwrap();
            if !o.fields.contains_key(field) {
                o.fields.insert(field.into(), FieldValue::Ref(*id));
                break;
            }
        }
    }
    Some(ids[0])
}

/// A `BinaryTree` object (id [`TREE_ID`]) over up to `max_nodes` nodes.
pub fn tree_snapshot(r: &mut StdRng, shape: TreeShape, max_nodes: usize) -> HeapSnapshot {
    let mut objects = BTreeMap::new();
    let min = if shape == TreeShape::Cyclic { 1 } else { 0 };
    let n = r.gen_range(min..=max_nodes);
    let root = grow_tree(r, &mut objects, 10, n);
    let mut size = n as i64;
    match shape {
        TreeShape::Valid => {}
        TreeShape::Cyclic => {
            let node_ids: Vec<ObjectId> = objects.keys().copied().collect();
            let extra = r.gen_range(1..=2);
            let mut added = 0;
            for _ in 0..50 {
                if added == extra {
                    break;
                }
                let from = *node_ids.choose(r).unwrap();
                let to = *node_ids.choose(r).unwrap();
                let field = if r.gen_bool(0.5) { "left" } else { "right" };
                let o = objects.get_mut(&from).unwrap();
                if !o.fields.contains_key(field) {
                    o.fields.insert(field.into(), FieldValue::Ref(to));
                    added += 1;
                }
            }
        }
        TreeShape::SizeMismatch => {
            let delta = r.gen_range(1..=3);
            size = if size >= delta && r.gen_bool(0.5) { size - delta } else { size + delta };
        }
        TreeShape::Forest => {
            let m = r.gen_range(1..=4);
            grow_tree(r, &mut objects, 100, m);
            if r.gen_bool(0.5) {
                size += m as i64;
            }
        }
    }
    let mut tree = ObjectInfo::new(TREE_ID, TREE_CLASS).with("size", FieldValue::Prim(size.into()));
    if let Some(root) = root {
        tree = tree.with("root", FieldValue::Ref(root));
    }
    objects.insert(TREE_ID, tree);
    HeapSnapshot {
        classes: objgraph::fixtures::tree_classes(),
        objects: objects.into_values().collect(),
        roots: BTreeMap::from([("tree".to_string(), TREE_ID)]),
    }
}

/// The imperative tree invariant: walk children from the root with a
/// worklist; reaching any node twice fails, otherwise the visit count must
/// equal `size`.
pub fn worklist_rep_ok(s: &HeapSnapshot, tree: ObjectId) -> bool {
    let index: HashMap<ObjectId, &ObjectInfo> = s.objects.iter().map(|o| (o.id, o)).collect();
    let t = index[&tree];
    let size = match t.fields.get("size") {
        Some(FieldValue::Prim(PropertyValue::Int(v))) => *v,
        _ => return false,
    };
    let mut visited = HashSet::new();
    let mut work = Vec::new();
    if let Some(FieldValue::Ref(root)) = t.fields.get("root") {
        work.push(*root);
    }
    while let Some(n) = work.pop() {
        if !visited.insert(n) {
            return false;
        }
        for f in ["left", "right"] {
            if let Some(FieldValue::Ref(c)) = index[&n].fields.get(f) {
                work.push(*c);
            }
        }
    }
    visited.len() as i64 == size
}

// ------------------------------------------------------ general snapshots

/// Objects reachable from `starts` by following every reference field,
/// array slot, and static of the object's class.
pub fn bfs_reachable(s: &HeapSnapshot, starts: &[ObjectId]) -> BTreeSet<ObjectId> {
    bfs_avoiding(s, starts, &BTreeSet::new())
}

/// [`bfs_reachable`] where instances of `avoid` are neither visited nor
/// passed through.
pub fn bfs_avoiding(s: &HeapSnapshot, starts: &[ObjectId], avoid: &BTreeSet<String>) -> BTreeSet<ObjectId> {
    let index: HashMap<ObjectId, &ObjectInfo> = s.objects.iter().map(|o| (o.id, o)).collect();
    let statics: HashMap<&str, Vec<ObjectId>> = s
        .classes
        .iter()
        .map(|c| (c.name.as_str(), c.statics.values().flat_map(|v| v.targets().collect::<Vec<_>>()).collect()))
        .collect();
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<ObjectId> = starts.iter().copied().collect();
    while let Some(id) = queue.pop_front() {
        let o = index[&id];
        if avoid.contains(&o.class) || !seen.insert(id) {
            continue;
        }
        for v in o.fields.values() {
            queue.extend(v.targets());
        }
        if let Some(st) = statics.get(o.class.as_str()) {
            queue.extend(st.iter().copied());
        }
    }
    seen
}

/// Heap-shaped snapshot exercising every field kind, statics and roots.
pub fn random_snapshot(r: &mut StdRng, max_objects: usize) -> HeapSnapshot {
    let mut p = ClassInfo::new("P")
        .field("next", FieldKind::Reference, "P")
        .field("peer", FieldKind::Reference, "Q")
        .field("n", FieldKind::Primitive, "int")
        .field("s", FieldKind::Primitive, "String")
        .field("vals", FieldKind::PrimitiveArray, "int")
        .field("arr", FieldKind::ReferenceArray, "Q");
    let q = ClassInfo::new("Q")
        .field("back", FieldKind::Reference, "P")
        .field("x", FieldKind::Primitive, "double")
        .field("flag", FieldKind::Primitive, "boolean");
    let n = r.gen_range(1..=max_objects) as ObjectId;
    let class_of: Vec<&str> = (0..n).map(|_| if r.gen_bool(0.6) { "P" } else { "Q" }).collect();
    let of = |c: &str, r: &mut StdRng| -> Option<ObjectId> {
        let ids: Vec<ObjectId> = (0..n).filter(|i| class_of[*i as usize] == c).map(|i| i + 1).collect();
        ids.choose(r).copied()
    };
    if r.gen_bool(0.5) {
        p.statics.insert("count".into(), FieldValue::Prim(r.gen_range(0..9i64).into()));
    }
    if r.gen_bool(0.5) {
        if let Some(h) = of("P", r) {
            p.statics.insert("head".into(), FieldValue::Ref(h));
        }
    }
    let mut objects = Vec::new();
    for i in 0..n {
        let id = i + 1;
        let class = class_of[i as usize];
        let mut o = ObjectInfo::new(id, class);
        if class == "P" {
            if let Some(t) = of("P", r).filter(|_| r.gen_bool(0.6)) {
                o = o.with("next", FieldValue::Ref(t));
            }
            if let Some(t) = of("Q", r).filter(|_| r.gen_bool(0.4)) {
                o = o.with("peer", FieldValue::Ref(t));
            }
            if r.gen_bool(0.7) {
                o = o.with("n", FieldValue::Prim(r.gen_range(-5..5i64).into()));
            }
            if r.gen_bool(0.3) {
                o = o.with("s", FieldValue::Prim(PropertyValue::Str(random_text(r))));
            }
            if r.gen_bool(0.2) {
                o = o.with("s", FieldValue::Null);
            }
            if r.gen_bool(0.3) {
                let vals = (0..r.gen_range(0..4)).map(|_| PropertyValue::Int(r.gen_range(0..9))).collect();
                o = o.with("vals", FieldValue::Prim(PropertyValue::list(vals).unwrap()));
            }
            if r.gen_bool(0.3) {
                let slots = (0..r.gen_range(0..4)).map(|_| of("Q", r).filter(|_| r.gen_bool(0.7))).collect();
                o = o.with("arr", FieldValue::Refs(slots));
            }
        } else {
            if let Some(t) = of("P", r).filter(|_| r.gen_bool(0.5)) {
                o = o.with("back", FieldValue::Ref(t));
            }
            if r.gen_bool(0.6) {
                o = o.with("x", FieldValue::Prim(PropertyValue::Float(r.gen_range(-2.0..2.0))));
            }
            if r.gen_bool(0.6) {
                o = o.with("flag", FieldValue::Prim(PropertyValue::Bool(r.gen_bool(0.5))));
            }
        }
        objects.push(o);
    }
    let mut roots = BTreeMap::new();
    for k in 0..r.gen_range(0..3) {
        roots.insert(format!("r{k}"), r.gen_range(1..=n));
    }
    HeapSnapshot {
        classes: vec![p, q],
        objects,
        roots,
    }
}

/// `$uid`s of the object nodes of an extracted graph.
pub fn uids(g: &PropertyGraph) -> BTreeSet<i64> {
    g.nodes().filter_map(|n| n.uid()).collect()
}

/// `(from uid, label, to uid)` for every relationship between object nodes.
pub fn object_edges(g: &PropertyGraph) -> BTreeSet<(i64, String, i64)> {
    g.relationships()
        .filter_map(|r| {
            let s = g.node(r.start)?.uid()?;
            let e = g.node(r.end)?.uid()?;
            Some((s, r.label.as_str().to_string(), e))
        })
        .collect()
}

/// `total` objects: every tenth is a `Blob`, the rest are `Item`s. Objects
/// 1..=`reachable` form a chain (plus random cross links) reachable from
/// object 1; the others point at each other and inward, never outward from
/// the live part. Root `main` is object 1.
pub fn big_snapshot(seed: u64, total: i64, reachable: i64) -> HeapSnapshot {
    let mut r = rng(seed);
    let item = ClassInfo::new("Item")
        .field("next", FieldKind::Reference, "Item")
        .field("other", FieldKind::Reference, "Item")
        .field("blob", FieldKind::Reference, "Blob")
        .field("v", FieldKind::Primitive, "int");
    let blob = ClassInfo::new("Blob")
        .field("owner", FieldKind::Reference, "Item")
        .field("w", FieldKind::Primitive, "int");
    let is_blob = |id: i64| id % 10 == 0;
    let item_in = |r: &mut StdRng, lo: i64, hi: i64| {
        let id = r.gen_range(lo..=hi);
        if is_blob(id) {
            id - 1
        } else {
            id
        }
    };
    let mut objects = Vec::new();
    for id in 1..=total {
        let live = id <= reachable;
        let (lo, hi) = if live { (1, reachable) } else { (1, total) };
        let o = if is_blob(id) {
            let mut o = ObjectInfo::new(id, "Blob").with("w", FieldValue::Prim(id.into()));
            if r.gen_bool(0.5) {
                o = o.with("owner", FieldValue::Ref(item_in(&mut r, lo, hi)));
            }
            o
        } else {
            let mut o = ObjectInfo::new(id, "Item").with("v", FieldValue::Prim((id % 7).into()));
            let next = if live {
                Some(if is_blob(id + 1) { id + 2 } else { id + 1 }).filter(|n| *n <= reachable)
            } else if reachable + 1 < total {
                Some(item_in(&mut r, reachable + 2, total))
            } else {
                None
            };
            if let Some(nx) = next {
                o = o.with("next", FieldValue::Ref(nx));
            }
            if r.gen_bool(0.3) {
                o = o.with("other", FieldValue::Ref(item_in(&mut r, lo, hi)));
            }
            if is_blob(id + 1) && id + 1 <= if live { reachable } else { total } {
                o = o.with("blob", FieldValue::Ref(id + 1));
            }
            o
        };
        objects.push(o);
    }
    HeapSnapshot {
        classes: vec![item, blob],
        objects,
        roots: BTreeMap::from([("main".to_string(), 1)]),
    }
}

/// The same graph rebuilt with nodes and relationships inserted in a shuffled
/// order, so every id changes.
pub fn permuted(g: &PropertyGraph, r: &mut StdRng) -> PropertyGraph {
    let mut order: Vec<&objgraph::graph::Node> = g.nodes().collect();
    order.shuffle(r);
    let mut out = PropertyGraph::new();
    let mut map = HashMap::new();
    for n in order {
        map.insert(n.id, out.add_node(n.label.as_str(), n.properties.clone()).unwrap());
    }
    let mut rels: Vec<_> = g.relationships().collect();
    rels.shuffle(r);
    for rel in rels {
        out.add_relationship(rel.label.as_str(), map[&rel.start], map[&rel.end], rel.properties.clone())
            .unwrap();
    }
    out
}
