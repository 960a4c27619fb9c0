mod common;

use std::collections::BTreeMap;

use common::*;
use objgraph::cypher::{expand_positional, parse, Arg, Clause};
use objgraph::engine::{self, execute_batch, match_pattern, Binding, Value};
use objgraph::fixtures::{self, ids};
use objgraph::graph::{props, structurally_equal, Properties, PropertyGraph, PropertyValue};
use objgraph::io::{graph_to_snapshot, load_snapshot};
use objgraph::subgraph::{extract, ExtractionConfig};
use proptest::prelude::*;

fn run(text: &str, g: &mut PropertyGraph) -> engine::ResultTable {
    engine::run(text, g).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn single(text: &str, g: &mut PropertyGraph) -> Value {
    let t = run(text, g);
    assert_eq!((t.rows.len(), t.columns.len()), (1, 1), "{text}");
    t.rows[0][0].clone()
}

fn uid_of(g: &PropertyGraph, v: &Value) -> Option<i64> {
    g.node(v.as_node()?)?.uid()
}

fn tree() -> PropertyGraph {
    fixtures::fixture_a_with_uids()
}

#[test]
fn optional_match_without_partner_binds_null() {
    let mut g = PropertyGraph::new();
    g.add_node("A", Properties::new()).unwrap();
    let t = run("MATCH (n) OPTIONAL MATCH (n)-[:f]->(m) RETURN n, m", &mut g);
    assert_eq!(t.rows.len(), 1);
    assert!(t.rows[0][1].is_null());
}

#[test]
fn bounded_variable_length_bindings() {
    let mut g = tree();
    let t = run("MATCH (n {value:4})-[:left|right*1..2]->(m) RETURN m", &mut g);
    let mut got: Vec<i64> = t.rows.iter().map(|r| uid_of(&g, &r[0]).unwrap()).collect();
    got.sort();
    assert_eq!(got, [ids::A, ids::B, ids::D, ids::E]);
}

#[test]
fn equals_and_comparisons() {
    let mut g = tree();
    let v = single("MATCH (n {value:4}) RETURN equals(n, n)", &mut g);
    assert_eq!(v.as_bool(), Some(true));
    let t = run(
        "MATCH (c {value:4})-[:left]->(b)-[:left]->(a) WHERE a.value < c.value RETURN a.value",
        &mut g,
    );
    assert_eq!(t.rows, [[Value::Prop(PropertyValue::Int(1))]]);
    let t = run("MATCH (n {value:1}) WHERE n.missing = 1 RETURN n", &mut g);
    assert!(t.is_empty());
}

#[test]
fn equals_compares_values_not_identity() {
    let mut g = PropertyGraph::new();
    g.add_node("K", props([("k", 3)])).unwrap();
    g.add_node("K", props([("k", 3)])).unwrap();
    g.add_node("K", props([("k", 4)])).unwrap();
    let v = single("MATCH (a:K), (b:K) WHERE equals(a, b) RETURN count(*)", &mut g);
    assert_eq!(v.as_int(), Some(5));
}

#[test]
fn merge_of_existing_pattern_changes_nothing() {
    let mut g = tree();
    let before = g.clone();
    run("MATCH (c {value:4}), (d {value:5}) MERGE (c)-[:right]->(d) RETURN c", &mut g);
    assert!(structurally_equal(&g, &before).unwrap());
    run("MATCH (c {value:4}), (a {value:1}) MERGE (c)-[:right]->(a) RETURN c", &mut g);
    assert_eq!(g.relationship_count(), before.relationship_count() + 1);
    let t = run("MATCH (c {value:4})-[:right]->(x) RETURN x.value", &mut g);
    assert_eq!(t.rows.len(), 2);
}

fn small_tree(back_edge: bool) -> PropertyGraph {
    let mut g = PropertyGraph::new();
    let t = g.add_node(fixtures::TREE_CLASS, props([("$uid", 1), ("size", 3)])).unwrap();
    let n: Vec<_> = (0..3)
        .map(|i| g.add_node(fixtures::NODE_CLASS, props([("$uid", 10 + i), ("value", i)])).unwrap())
        .collect();
    g.set_field_edge("root", t, n[0]).unwrap();
    g.set_field_edge("left", n[0], n[1]).unwrap();
    g.set_field_edge("right", n[0], n[2]).unwrap();
    if back_edge {
        g.set_field_edge("left", n[2], n[0]).unwrap();
    }
    g
}

#[test]
fn rep_ok_detects_a_back_edge() {
    let q = expand_positional(fixtures::REP_OK_QUERY, &[Arg::Uid(1)]).unwrap().text;
    assert_eq!(single(&q, &mut small_tree(false)).as_bool(), Some(true));
    assert_eq!(single(&q, &mut small_tree(true)).as_bool(), Some(false));
}

#[test]
fn contains_key_on_a_small_map() {
    let (mut snapshot, keys) = fixtures::hash_map_snapshot(&[3, 8, 13], 5);
    snapshot.objects.push(objgraph::subgraph::ObjectInfo::new(900, fixtures::KEY_CLASS).with(
        "k",
        objgraph::subgraph::FieldValue::Prim(8.into()),
    ));
    snapshot.objects.push(objgraph::subgraph::ObjectInfo::new(901, fixtures::KEY_CLASS).with(
        "k",
        objgraph::subgraph::FieldValue::Prim(9.into()),
    ));
    let mut g = extract(&snapshot, &ExtractionConfig::default()).unwrap();
    let mut probe = |k: i64| {
        let q = expand_positional(fixtures::CONTAINS_KEY_QUERY, &[Arg::Uid(1), Arg::Uid(k)]).unwrap().text;
        single(&q, &mut g).as_bool().unwrap()
    };
    for k in keys {
        assert!(probe(k));
    }
    assert!(probe(900));
    assert!(!probe(901));
}

#[test]
fn batch_over_uids() {
    let mut g = tree();
    let q = "MATCH (n {[]1})-[:left]->(m) RETURN m";
    let both = expand_positional(q, &[Arg::Uids(vec![ids::C, ids::B])]).unwrap().batch.unwrap();
    let t = execute_batch(&both, &mut g).unwrap();
    let got: Vec<_> = t.rows.iter().map(|r| uid_of(&g, &r[0]).unwrap()).collect();
    assert_eq!(got, [ids::B, ids::A]);

    let none = expand_positional(q, &[Arg::Uids(vec![])]).unwrap().batch.unwrap();
    let t = execute_batch(&none, &mut g).unwrap();
    assert_eq!(t.columns, ["m"]);
    assert!(t.is_empty());

    let one = expand_positional(q, &[Arg::Uids(vec![ids::C])]).unwrap().batch.unwrap();
    let plain = expand_positional("MATCH (n {$1})-[:left]->(m) RETURN m", &[Arg::Uid(ids::C)]).unwrap();
    assert_eq!(execute_batch(&one, &mut g).unwrap(), run(&plain.text, &mut g));
}

#[test]
fn create_returns_fresh_nodes() {
    let mut g = PropertyGraph::new();
    let t = run("CREATE (a:X {v: 1})-[:f]->(b:Y) RETURN a, b", &mut g);
    assert_eq!((g.node_count(), g.relationship_count()), (2, 1));
    assert_eq!(t.rows.len(), 1);
}

#[test]
fn created_graph_converts_to_a_snapshot() {
    let create = expand_positional(
        fixtures::CREATE_TREE_QUERY,
        &[Arg::ClassName(fixtures::NODE_CLASS.into()), Arg::ClassName(fixtures::TREE_CLASS.into())],
    )
    .unwrap();
    let mut g = PropertyGraph::new();
    run(&create.text, &mut g);
    let s = load_snapshot(objgraph::io::save_snapshot(&graph_to_snapshot(&g).unwrap()).as_bytes()).unwrap();
    assert_eq!(s.objects.len(), 6);
}

#[test]
fn type_errors_are_reported() {
    let mut g = tree();
    let e = engine::run("MATCH (n {value:4}) WHERE n.value AND true RETURN n", &mut g).unwrap_err();
    assert!(matches!(e, engine::EngineError::TypeMismatch(_)), "{e}");
}

#[test]
fn match_pattern_extends_a_seed() {
    let g = tree();
    let q = parse("MATCH (n)-[:left]->(m) RETURN m").unwrap();
    let Clause::Match { patterns, .. } = &q.clauses[0] else { unreachable!() };
    let c = g.nodes_with_uid(ids::C)[0];
    let seed: Binding = BTreeMap::from([("n".to_string(), Value::Node(c))]);
    let found = match_pattern(&g, patterns, &seed, false).unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!(uid_of(&g, &found[0]["m"]), Some(ids::B));
    let a = g.nodes_with_uid(ids::A)[0];
    let seed: Binding = BTreeMap::from([("n".to_string(), Value::Node(a))]);
    assert!(match_pattern(&g, patterns, &seed, false).unwrap().is_empty());
    let opt = match_pattern(&g, patterns, &seed, true).unwrap();
    assert_eq!(opt.len(), 1);
    assert!(opt[0]["m"].is_null());
}

#[test]
fn trails_never_reuse_a_relationship() {
    let mut g = PropertyGraph::new();
    let a = g.add_node("N", Properties::new()).unwrap();
    let b = g.add_node("N", Properties::new()).unwrap();
    g.add_relationship("f", a, b, Properties::new()).unwrap();
    g.add_relationship("f", b, a, Properties::new()).unwrap();
    g.add_relationship("f", a, a, Properties::new()).unwrap();
    let v = single("MATCH (x)-[*]->(y) RETURN count(*)", &mut g);
    // From a: a>a, a>b, a>a>b, a>b>a, a>a>b>a, a>b>a>a. From b: b>a, b>a>a, b>a>b, b>a>a>b.
    assert_eq!(v.as_int(), Some(10));
    let v = single("MATCH (x)-[r1]->(y)-[r2]->(z) RETURN count(*)", &mut g);
    assert_eq!(v.as_int(), Some(4));
}

const READ_QUERIES: [&str; 5] = [
    "MATCH (a)-[:f]->(b) RETURN a, b",
    "MATCH (a:A)-[*0..2]-(b) RETURN DISTINCT b",
    "MATCH (a) OPTIONAL MATCH (a)-[:g]->(b) RETURN a, b",
    "MATCH (a {k: 1}), (b:B) WHERE a.k < b.k OR equals(a, b) RETURN a.k, b",
    "MATCH (a)-[r]-(b) RETURN r",
];

fn count_query(text: &str) -> String {
    format!("{} RETURN count(*)", text.rsplit_once(" RETURN").unwrap().0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn engine_properties(seed in any::<u64>(), which in 0..READ_QUERIES.len()) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 7, 10);
        let text = READ_QUERIES[which];

        let mut copy = g.clone();
        let first = run(text, &mut copy);
        prop_assert!(structurally_equal(&copy, &g).unwrap(), "read-only query changed the graph");
        prop_assert_eq!(&run(text, &mut copy), &first, "not deterministic");

        prop_assert_eq!(first.distinct().distinct(), first.distinct());

        let q = parse(text).unwrap();
        let Clause::Match { patterns, optional: false } = &q.clauses[0] else { unreachable!() };
        if q.clauses.len() == 2 {
            let n = match_pattern(&g, patterns, &Binding::new(), false).unwrap().len();
            prop_assert_eq!(single(&count_query(text), &mut copy).as_int(), Some(n as i64));
        }

        let mut shuffled = permuted(&g, &mut r);
        let counted = count_query(text);
        prop_assert_eq!(single(&counted, &mut copy), single(&counted, &mut shuffled));
    }

    #[test]
    fn batch_is_the_bag_union(seed in any::<u64>(), picks in prop::collection::vec(0..6i64, 0..4)) {
        let mut r = rng(seed);
        let mut g = random_graph(&mut r, 6, 8);
        let ids: Vec<NodeIdx> = g.nodes().map(|n| n.id).collect();
        for (i, n) in ids.iter().enumerate() {
            g.set_property(*n, "$uid", PropertyValue::Int(i as i64)).unwrap();
        }
        let q = "MATCH (n {[]1})-[]-(m) RETURN m";
        let plan = expand_positional(q, &[Arg::Uids(picks.clone())]).unwrap().batch.unwrap();
        let batch = execute_batch(&plan, &mut g).unwrap();
        let mut union = Vec::new();
        for p in &picks {
            let one = expand_positional("MATCH (n {$1})-[]-(m) RETURN m", &[Arg::Uid(*p)]).unwrap();
            union.extend(run(&one.text, &mut g).rows);
        }
        prop_assert_eq!(bag(&batch.rows), bag(&union));
    }
}

type NodeIdx = objgraph::graph::NodeId;
