//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use objgraph::api::{QueryContext, StageTimings};
use objgraph::cypher::{expand_positional, Arg};
use objgraph::engine::{self, Value};
use objgraph::fixtures::{self, ids};
use objgraph::graph::{props, structurally_equal, NodeId, Properties, PropertyGraph, PropertyValue, CLASS_LABEL, INSTANCEOF, LOCAL_LABEL};
use objgraph::heap::run_to_point;
use objgraph::io::{export_csv, graph_to_snapshot, import_csv, load_snapshot, save_snapshot};
use objgraph::subgraph::{extract, ExtractionConfig, FieldValue, HeapSnapshot, ObjectInfo};
use rand::seq::SliceRandom;
use rand::Rng;

const FIXTURE_BUDGET: Duration = Duration::from_secs(1);
const FIELD_ASSIGN_RUNS: usize = 1000;
const ORACLE_GRAPHS: usize = 500;
const QUERIES_PER_GRAPH: usize = 6;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const MAP_RUNS: usize = 200;
const MAP_SIZES: (usize, usize) = (10, 500);
const TREE_RUNS: usize = 200;
const EXTRACT_OBJECTS: i64 = 10_000;
const EXTRACT_REACHABLE: i64 = 1_000;
const EXTRACT_BUDGET: Duration = Duration::from_secs(5);
const ROUND_TRIP_RUNS: usize = 200;
const PERF_OBJECTS: i64 = 10_000;
const PERF_RUNS: usize = 20;
const PERF_MIN_SPEEDUP: f64 = 2.0;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixture_suite() -> Outcome {
    let start = Instant::now();
    let create = expand_positional(
        fixtures::CREATE_TREE_QUERY,
        &[Arg::ClassName(fixtures::NODE_CLASS.into()), Arg::ClassName(fixtures::TREE_CLASS.into())],
    )
    .map_err(|e| e.to_string())?;
    let mut g = PropertyGraph::new();
    engine::run(&create.text, &mut g).map_err(|e| e.to_string())?;
    ensure!(
        structurally_equal(&g, &fixtures::fixture_a_instances()).unwrap(),
        "creation query built {} nodes / {} relationships, not the tree",
        g.node_count(),
        g.relationship_count()
    );

    let mut tree = fixtures::fixture_a_with_uids();
    let reach = expand_positional(fixtures::REACHABLE_QUERY, &[Arg::Uid(ids::C)]).unwrap();
    let table = engine::run(&reach.text, &mut tree).map_err(|e| e.to_string())?;
    let found: BTreeSet<NodeId> = table.rows.iter().filter_map(|r| r[0].as_node()).collect();
    let c = tree.nodes_with_uid(ids::C)[0];
    let expected: BTreeSet<NodeId> = tree.nodes().map(|n| n.id).filter(|id| *id != c).collect();
    ensure!(
        found == expected,
        "reachability from c returned {} distinct nodes {:?}, expected the {} others",
        found.len(),
        found.iter().map(|n| Value::Node(*n).render(&tree)).collect::<Vec<_>>(),
        expected.len()
    );

    let hops = expand_positional(fixtures::TWO_HOPS_QUERY, &[Arg::Uid(ids::C)]).unwrap();
    let table = engine::run(&hops.text, &mut tree).map_err(|e| e.to_string())?;
    let got: Vec<Option<i64>> = table.rows.iter().map(|r| r[0].as_node().and_then(|n| tree.node(n)?.uid())).collect();
    ensure!(got == vec![Some(ids::A)], "two-hop query returned {got:?}");

    let took = start.elapsed();
    ensure!(took < FIXTURE_BUDGET, "took {took:?}");
    Ok(format!("creation, 7 reachable, node a; {took:?}"))
}

fn semantics_golden() -> Outcome {
    let g = run_to_point(fixtures::TREE_PROGRAM).map_err(|e| e.to_string())?;
    ensure!(
        g.node_count() == 7 && g.relationship_count() == 7,
        "{} nodes / {} relationships",
        g.node_count(),
        g.relationship_count()
    );
    ensure!(structurally_equal(&g, &fixtures::fixture_b()).unwrap(), "graph differs from the expected heap");
    Ok("7 nodes, 7 relationships".into())
}

const CLASS_C: &str = "class C {
    C f;
    C g;
    int v;

    C(C f, C g, int v) {
        this.f = f;
        this.g = g;
        this.v = v;
    }
}
";

/// Final heap of `k` objects after replaying the field writes on a plain map.
fn field_assign_oracle(k: usize, writes: &[(usize, &str, Option<usize>)]) -> PropertyGraph {
    let mut field: BTreeMap<(usize, &str), usize> = BTreeMap::new();
    for (x, f, v) in writes {
        match v {
            Some(y) => field.insert((*x, f), *y),
            None => field.remove(&(*x, *f)),
        };
    }
    let mut g = PropertyGraph::new();
    let class = g.add_node(CLASS_LABEL, props([("name", "C")])).unwrap();
    let objs: Vec<NodeId> = (0..k)
        .map(|i| g.add_node("C", props([("v", PropertyValue::Int(i as i64))])).unwrap())
        .collect();
    for o in &objs {
        g.add_relationship(INSTANCEOF, *o, class, Properties::new()).unwrap();
    }
    for ((x, f), y) in field {
        g.add_relationship(f, objs[x], objs[y], Properties::new()).unwrap();
    }
    for (i, o) in objs.iter().enumerate() {
        let b = g.add_node(LOCAL_LABEL, Properties::new()).unwrap();
        g.add_relationship(&format!("x{i}"), b, *o, Properties::new()).unwrap();
    }
    g
}

fn field_assignment_law() -> Outcome {
    let mut r = rng(3);
    for run in 0..FIELD_ASSIGN_RUNS {
        let k = r.gen_range(1..=6);
        let mut program = CLASS_C.to_string();
        for i in 0..k {
            program += &format!("C x{i} = new C(null, null, {i});\n");
        }
        let mut writes = Vec::new();
        for _ in 0..r.gen_range(0..12) {
            let x = r.gen_range(0..k);
            let f = if r.gen_bool(0.5) { "f" } else { "g" };
            let v = r.gen_bool(0.8).then(|| r.gen_range(0..k));
            match v {
                Some(y) => program += &format!("x{x}.{f} = x{y};\n"),
                None => program += &format!("x{x}.{f} = null;\n"),
            }
            writes.push((x, f, v));
        }
        program += "/* POINT */\nreturn x0;\n";
        let g = run_to_point(&program).map_err(|e| format!("run {run}: {e}\n{program}"))?;
        for n in g.nodes() {
            for f in ["f", "g"] {
                let deg = g.outgoing(n.id).iter().filter(|r| g.rel(**r).unwrap().label == f).count();
                ensure!(deg <= 1, "run {run}: node {:?} has {deg} `{f}` edges\n{program}", n.id);
            }
        }
        let expected = field_assign_oracle(k, &writes);
        ensure!(structurally_equal(&g, &expected).unwrap(), "run {run}: heap differs from the oracle\n{program}");
    }
    Ok(format!("{FIELD_ASSIGN_RUNS} programs agree"))
}

fn query_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut rows = 0usize;
    for i in 0..ORACLE_GRAPHS {
        let g = random_graph(&mut r, 8, 12);
        for _ in 0..QUERIES_PER_GRAPH {
            let spec = random_query(&mut r);
            let text = spec.text();
            let mut copy = g.clone();
            let table = engine::run(&text, &mut copy).map_err(|e| format!("graph {i}: `{text}`: {e}"))?;
            let expected = brute_force(&g, &spec);
            let (got, want) = (bag(&table.rows), bag(&expected));
            ensure!(
                got == want,
                "graph {i}: `{text}`: engine {} rows, oracle {} rows",
                got.len(),
                want.len()
            );
            rows += want.len();
        }
    }
    let took = start.elapsed();
    ensure!(took < ORACLE_BUDGET, "took {took:?}");
    Ok(format!(
        "{} queries on {ORACLE_GRAPHS} graphs, {rows} rows; {took:?}",
        ORACLE_GRAPHS * QUERIES_PER_GRAPH
    ))
}

fn contains_key_parity() -> Outcome {
    let mut r = rng(5);
    let (mut present, mut absent) = (0, 0);
    for run in 0..MAP_RUNS {
        let n = r.gen_range(MAP_SIZES.0..=MAP_SIZES.1);
        let keys: Vec<i64> = (0..n).map(|_| r.gen_range(-2000..2000)).collect();
        let capacity = r.gen_range(4..=64);
        let (mut snapshot, key_ids) = fixtures::hash_map_snapshot(&keys, capacity);
        let stored: HashSet<i64> = keys.iter().copied().collect();
        let (probe, k) = if r.gen_bool(0.3) {
            let i = r.gen_range(0..key_ids.len());
            let id = key_ids[i];
            let o = snapshot.objects.iter().find(|o| o.id == id).unwrap();
            let Some(FieldValue::Prim(PropertyValue::Int(k))) = o.fields.get("k") else {
                return Err(format!("run {run}: key object without `k`"));
            };
            (id, *k)
        } else {
            let k = if r.gen_bool(0.5) { *keys.choose(&mut r).unwrap() } else { r.gen_range(-3000..3000) };
            let id = snapshot.objects.iter().map(|o| o.id).max().unwrap() + 1;
            snapshot
                .objects
                .push(ObjectInfo::new(id, fixtures::KEY_CLASS).with("k", FieldValue::Prim(k.into())));
            (id, k)
        };
        let oracle = stored.contains(&k);
        let mut ctx = QueryContext::new(snapshot).map_err(|e| e.to_string())?;
        let args = [Arg::Uid(ctx.uids().get(1).unwrap()), Arg::Uid(ctx.uids().get(probe).unwrap())];
        let got = ctx
            .query_boolean(None, fixtures::CONTAINS_KEY_QUERY, &args)
            .map_err(|e| format!("run {run}: {e}"))?;
        ensure!(got == oracle, "run {run}: key {k} with {n} keys: query {got}, oracle {oracle}");
        if oracle {
            present += 1;
        } else {
            absent += 1;
        }
    }
    Ok(format!("{MAP_RUNS} maps, {present} present / {absent} absent"))
}

fn rep_ok_parity() -> Outcome {
    let mut r = rng(6);
    let shapes = [TreeShape::Valid, TreeShape::Cyclic, TreeShape::SizeMismatch, TreeShape::Forest];
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for run in 0..TREE_RUNS {
        let shape = shapes[run % shapes.len()];
        let s = tree_snapshot(&mut r, shape, 12);
        let oracle = worklist_rep_ok(&s, TREE_ID);
        let mut ctx = QueryContext::new(s).map_err(|e| e.to_string())?;
        let got = ctx
            .query_boolean(Some(&[TREE_ID]), fixtures::REP_OK_QUERY, &[Arg::Uid(TREE_ID)])
            .map_err(|e| format!("run {run}: {e}"))?;
        ensure!(got == oracle, "run {run} ({shape:?}): query {got}, oracle {oracle}");
        let t = tally.entry(format!("{shape:?}")).or_default();
        if oracle {
            t.0 += 1;
        } else {
            t.1 += 1;
        }
    }
    let detail: Vec<String> = tally.iter().map(|(k, (ok, bad))| format!("{k} {ok}/{bad}")).collect();
    Ok(format!("{TREE_RUNS} heaps (ok/broken: {})", detail.join(", ")))
}

fn extraction_properties() -> Outcome {
    let s = big_snapshot(7, EXTRACT_OBJECTS, EXTRACT_REACHABLE);
    let start = Instant::now();
    let all: BTreeSet<i64> = s.objects.iter().map(|o| o.id).collect();
    let live = bfs_reachable(&s, &[1]);
    ensure!(live.len() as i64 == EXTRACT_REACHABLE, "generator produced {} reachable objects", live.len());

    let full = extract(&s, &ExtractionConfig::default()).map_err(|e| e.to_string())?;
    let rooted = extract(&s, &ExtractionConfig::rooted([1])).map_err(|e| e.to_string())?;
    ensure!(rooted.node_count() <= full.node_count(), "rooted graph is larger");
    ensure!(uids(&rooted) == live, "rooted extraction kept {} objects, oracle {}", uids(&rooted).len(), live.len());

    let collected = extract(
        &s,
        &ExtractionConfig {
            force_collect: true,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let removed: BTreeSet<i64> = all.difference(&uids(&collected)).copied().collect();
    let unreachable: BTreeSet<i64> = all.difference(&live).copied().collect();
    ensure!(removed == unreachable, "collection removed {} objects, oracle {}", removed.len(), unreachable.len());
    let kept_edges: BTreeSet<_> = object_edges(&full)
        .into_iter()
        .filter(|(a, _, b)| live.contains(a) && live.contains(b))
        .collect();
    ensure!(object_edges(&collected) == kept_edges, "collection changed edges among live objects");

    let blocked = BTreeSet::from(["Blob".to_string()]);
    let config = ExtractionConfig {
        blacklist: blocked.clone(),
        ..Default::default()
    };
    let without = extract(&s, &config).map_err(|e| e.to_string())?;
    let blobs: BTreeSet<i64> = s.objects.iter().filter(|o| o.class == "Blob").map(|o| o.id).collect();
    let want: BTreeSet<i64> = all.difference(&blobs).copied().collect();
    ensure!(uids(&without) == want, "blacklist kept {} objects, oracle {}", uids(&without).len(), want.len());
    let want_edges: BTreeSet<_> = object_edges(&full)
        .into_iter()
        .filter(|(a, _, b)| !blobs.contains(a) && !blobs.contains(b))
        .collect();
    ensure!(object_edges(&without) == want_edges, "blacklist left the wrong edges");

    let rooted_without = extract(
        &s,
        &ExtractionConfig {
            roots: vec![1],
            ..config
        },
    )
    .map_err(|e| e.to_string())?;
    let want = bfs_avoiding(&s, &[1], &blocked);
    ensure!(uids(&rooted_without) == want, "rooted blacklist kept the wrong objects");

    let took = start.elapsed();
    ensure!(took < EXTRACT_BUDGET, "took {took:?}");
    Ok(format!(
        "{} of {} kept when rooted, {} collected, {} blacklisted; {took:?}",
        live.len(),
        all.len(),
        unreachable.len(),
        blobs.len()
    ))
}

fn round_trips() -> Outcome {
    let mut r = rng(8);
    for run in 0..ROUND_TRIP_RUNS {
        let s = random_snapshot(&mut r, 20);
        let back = load_snapshot(save_snapshot(&s).as_bytes()).map_err(|e| format!("run {run}: {e}"))?;
        ensure!(back == s, "run {run}: JSON round trip changed the snapshot");

        let g = random_rich_graph(&mut r, 12, 20);
        let back = import_csv(&export_csv(&g)).map_err(|e| format!("run {run}: {e}"))?;
        ensure!(structurally_equal(&g, &back).unwrap(), "run {run}: CSV round trip changed the graph");

        let g = extract(&s, &ExtractionConfig::default()).map_err(|e| e.to_string())?;
        let s2 = graph_to_snapshot(&g).map_err(|e| format!("run {run}: {e}"))?;
        let g2 = extract(&s2, &ExtractionConfig::default()).map_err(|e| e.to_string())?;
        ensure!(structurally_equal(&g, &g2).unwrap(), "run {run}: graph_to_snapshot then extract changed the graph");
    }
    Ok(format!("{ROUND_TRIP_RUNS} snapshots and {ROUND_TRIP_RUNS} graphs"))
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

/// Time from the extracted graph to the answer: transfer (CSV path only),
/// parse, validate and execute. Extraction is common to both paths.
fn after_extract(t: &StageTimings) -> Duration {
    t.total() - t.expand - t.extract
}

fn performance_smoke() -> Outcome {
    let s: HeapSnapshot = big_snapshot(9, PERF_OBJECTS, PERF_OBJECTS);
    let query = "MATCH (a:Item)-[:next]->(b)-[:next]->(c) RETURN count(c)";
    let mut ctx = QueryContext::new(s).map_err(|e| e.to_string())?;
    let mut measure = |via_csv: bool| -> Result<(Duration, Duration, i64), String> {
        ctx.via_csv = via_csv;
        let mut paths = Vec::new();
        let mut totals = Vec::new();
        let mut answer = 0;
        for _ in 0..PERF_RUNS {
            let mut rs = ctx.query_unbounded(query, &[]).map_err(|e| e.to_string())?;
            rs.next();
            answer = rs.get(0).map_err(|e| e.to_string())?.to_string().parse().unwrap_or(-1);
            paths.push(after_extract(&rs.timings()));
            totals.push(rs.timings().total());
        }
        Ok((median(paths), median(totals), answer))
    };
    let (mem, mem_total, a) = measure(false)?;
    let (csv, csv_total, b) = measure(true)?;
    ensure!(a == b, "answers differ: {a} vs {b}");
    let speedup = csv.as_secs_f64() / mem.as_secs_f64();
    ensure!(
        speedup >= PERF_MIN_SPEEDUP,
        "median {mem:?} in memory vs {csv:?} via CSV: {speedup:.2}x"
    );
    Ok(format!(
        "median {mem:?} vs {csv:?} ({speedup:.1}x); with extraction {mem_total:?} vs {csv_total:?}; {a} matches"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("tree fixture queries", fixture_suite),
        ("tree program heap", semantics_golden),
        ("field assignment law", field_assignment_law),
        ("query engine vs brute force", query_oracle),
        ("containsKey parity", contains_key_parity),
        ("repOK parity", rep_ok_parity),
        ("extraction controls", extraction_properties),
        ("round trips", round_trips),
        ("in-memory vs CSV path", performance_smoke),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
