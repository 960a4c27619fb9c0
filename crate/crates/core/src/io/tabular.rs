use std::collections::HashMap;

use serde_json::{Map, Value as J};

use super::IoError;
use crate::graph::{NodeId, Properties, PropertyGraph, PropertyValue};

pub const NODES_HEADER: [&str; 3] = ["nodeId:ID", "label:LABEL", "props:JSON"];
pub const RELATIONSHIPS_HEADER: [&str; 4] = [":START_ID", ":END_ID", ":TYPE", "props:JSON"];

/// The two batch-import files.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CsvBundle {
    pub nodes: String,
    pub relationships: String,
}

fn props_json(p: &Properties) -> String {
    let m: Map<String, J> = p.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
    J::Object(m).to_string()
}

fn write_records<const N: usize>(header: [&str; N], records: impl Iterator<Item = [String; N]>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory cannot fail");
    for r in records {
        w.write_record(&r).expect("writing to memory cannot fail");
    }
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("records are UTF-8")
}

/// Serializes a graph as a node file and a relationship file. Node ids are
/// graph node indexes; properties ride in one canonical JSON column.
pub fn export_csv(graph: &PropertyGraph) -> CsvBundle {
    let nodes = write_records(
        NODES_HEADER,
        graph
            .nodes()
            .map(|n| [n.id.0.to_string(), n.label.as_str().to_string(), props_json(&n.properties)]),
    );
    let relationships = write_records(
        RELATIONSHIPS_HEADER,
        graph.relationships().map(|r| {
            [
                r.start.0.to_string(),
                r.end.0.to_string(),
                r.label.as_str().to_string(),
                props_json(&r.properties),
            ]
        }),
    );
    CsvBundle { nodes, relationships }
}

fn records(file: &'static str, text: &str, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>, IoError> {
    let malformed = |e: csv::Error| IoError::Csv {
        file,
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let found = r.headers().map_err(malformed)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(IoError::UnknownHeader {
            file,
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(malformed)?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_props(file: &'static str, line: u64, text: &str) -> Result<Properties, IoError> {
    let bad = |message: String| IoError::Csv { file, line, message };
    let v: J = serde_json::from_str(text).map_err(|e| bad(format!("props column: {e}")))?;
    let J::Object(m) = v else {
        return Err(bad("props column must be a JSON object".into()));
    };
    m.iter()
        .map(|(k, v)| Ok((k.clone(), PropertyValue::from_json(v).map_err(|e| bad(format!("property `{k}`: {e}")))?)))
        .collect()
}

/// Rebuilds a graph from a bundle. Node ids are arbitrary strings, unique
/// within the node file; nodes and relationships keep file order.
pub fn import_csv(bundle: &CsvBundle) -> Result<PropertyGraph, IoError> {
    let mut g = PropertyGraph::new();
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    for (line, rec) in records("nodes", &bundle.nodes, &NODES_HEADER)? {
        let p = parse_props("nodes", line, &rec[2])?;
        let id = g.add_node(&rec[1], p)?;
        if ids.insert(rec[0].to_string(), id).is_some() {
            return Err(IoError::Csv {
                file: "nodes",
                line,
                message: format!("duplicate node id `{}`", &rec[0]),
            });
        }
    }
    for (line, rec) in records("relationships", &bundle.relationships, &RELATIONSHIPS_HEADER)? {
        let end = |col: usize| {
            ids.get(&rec[col]).copied().ok_or_else(|| IoError::DanglingEndpoint {
                line,
                id: rec[col].to_string(),
            })
        };
        let (s, e) = (end(0)?, end(1)?);
        let p = parse_props("relationships", line, &rec[3])?;
        g.add_relationship(&rec[2], s, e, p)?;
    }
    Ok(g)
}
