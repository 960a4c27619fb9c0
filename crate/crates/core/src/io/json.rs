use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{Map, Value as J};

use super::IoError;
use crate::graph::PropertyValue;
use crate::subgraph::{ClassInfo, FieldInfo, FieldKind, FieldValue, HeapSnapshot, ObjectInfo, SnapshotError};

fn schema(path: &str, message: impl Into<String>) -> IoError {
    IoError::Snapshot(SnapshotError::Schema {
        path: if path.is_empty() { "$".into() } else { path.into() },
        message: message.into(),
    })
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn object<'a>(v: &'a J, path: &str) -> Result<&'a Map<String, J>, IoError> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn array<'a>(v: &'a J, path: &str) -> Result<&'a Vec<J>, IoError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn string(v: &J, path: &str) -> Result<String, IoError> {
    v.as_str().map(str::to_string).ok_or_else(|| schema(path, "expected a string"))
}

fn int(v: &J, path: &str) -> Result<i64, IoError> {
    v.as_i64().ok_or_else(|| schema(path, "expected an integer"))
}

fn allow_keys(m: &Map<String, J>, path: &str, allowed: &[&str], required: &[&str]) -> Result<(), IoError> {
    if let Some(k) = m.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(&join(path, k), "unknown key"));
    }
    if let Some(k) = required.iter().find(|k| !m.contains_key(**k)) {
        return Err(schema(path, format!("missing key `{k}`")));
    }
    Ok(())
}

fn field_value(v: &J, path: &str) -> Result<FieldValue, IoError> {
    Ok(match v {
        J::Null => FieldValue::Null,
        J::Object(m) => {
            if m.len() != 1 {
                return Err(schema(path, "expected {\"ref\": id} or {\"refs\": [ids]}"));
            }
            if let Some(id) = m.get("ref") {
                FieldValue::Ref(int(id, &join(path, "ref"))?)
            } else if let Some(ids) = m.get("refs") {
                let p = join(path, "refs");
                let slots = array(ids, &p)?
                    .iter()
                    .enumerate()
                    .map(|(i, s)| match s {
                        J::Null => Ok(None),
                        s => int(s, &format!("{p}[{i}]")).map(Some),
                    })
                    .collect::<Result<_, _>>()?;
                FieldValue::Refs(slots)
            } else {
                return Err(schema(path, "expected {\"ref\": id} or {\"refs\": [ids]}"));
            }
        }
        other => FieldValue::Prim(PropertyValue::from_json(other).map_err(|e| schema(path, e.to_string()))?),
    })
}

fn field_map(v: &J, path: &str) -> Result<BTreeMap<String, FieldValue>, IoError> {
    object(v, path)?
        .iter()
        .map(|(k, v)| Ok((k.clone(), field_value(v, &join(path, k))?)))
        .collect()
}

/// Parses and fully validates a JSON heap snapshot.
pub fn load_snapshot(bytes: &[u8]) -> Result<HeapSnapshot, IoError> {
    let doc: J = serde_json::from_slice(bytes).map_err(|e| IoError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let top = object(&doc, "")?;
    allow_keys(top, "", &["classes", "objects", "roots"], &["classes", "objects"])?;

    let mut classes = Vec::new();
    for (i, c) in array(&top["classes"], "classes")?.iter().enumerate() {
        let path = format!("classes[{i}]");
        let m = object(c, &path)?;
        allow_keys(m, &path, &["name", "superclass", "fields", "statics"], &["name"])?;
        let mut info = ClassInfo::new(string(&m["name"], &join(&path, "name"))?);
        info.superclass = match m.get("superclass") {
            None | Some(J::Null) => None,
            Some(s) => Some(string(s, &join(&path, "superclass"))?),
        };
        if let Some(fields) = m.get("fields") {
            let fp = join(&path, "fields");
            for (j, f) in array(fields, &fp)?.iter().enumerate() {
                let p = format!("{fp}[{j}]");
                let fm = object(f, &p)?;
                allow_keys(fm, &p, &["name", "kind", "type"], &["name", "kind"])?;
                let kind_text = string(&fm["kind"], &join(&p, "kind"))?;
                let kind = FieldKind::parse(&kind_text)
                    .ok_or_else(|| schema(&join(&p, "kind"), format!("unknown field kind `{kind_text}`")))?;
                let ty = match fm.get("type") {
                    Some(t) => string(t, &join(&p, "type"))?,
                    None => String::new(),
                };
                info.fields.push(FieldInfo {
                    name: string(&fm["name"], &join(&p, "name"))?,
                    kind,
                    ty,
                });
            }
        }
        if let Some(statics) = m.get("statics") {
            info.statics = field_map(statics, &join(&path, "statics"))?;
        }
        classes.push(info);
    }

    let mut objects = Vec::new();
    for (i, o) in array(&top["objects"], "objects")?.iter().enumerate() {
        let path = format!("objects[{i}]");
        let m = object(o, &path)?;
        allow_keys(m, &path, &["id", "class", "fields"], &["id", "class"])?;
        let mut info = ObjectInfo::new(int(&m["id"], &join(&path, "id"))?, string(&m["class"], &join(&path, "class"))?);
        if let Some(fields) = m.get("fields") {
            info.fields = field_map(fields, &join(&path, "fields"))?;
        }
        objects.push(info);
    }

    let mut roots = BTreeMap::new();
    if let Some(r) = top.get("roots") {
        for (k, v) in object(r, "roots")? {
            roots.insert(k.clone(), int(v, &join("roots", k))?);
        }
    }
    let snapshot = HeapSnapshot { classes, objects, roots };
    snapshot.validate()?;
    Ok(snapshot)
}

/// Single-line JSON with `", "` and `": "` separators and sorted keys.
fn inline(v: &J) -> String {
    let mut out = String::new();
    write_inline(v, &mut out);
    out
}

fn write_inline(v: &J, out: &mut String) {
    match v {
        J::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_inline(item, out);
            }
            out.push(']');
        }
        J::Object(m) => {
            out.push('{');
            for (i, (k, item)) in m.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&J::String(k.clone()).to_string());
                out.push_str(": ");
                write_inline(item, out);
            }
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

fn value_json(v: &FieldValue) -> J {
    match v {
        FieldValue::Null => J::Null,
        FieldValue::Prim(p) => p.to_json(),
        FieldValue::Ref(id) => J::Object(Map::from_iter([("ref".to_string(), J::from(*id))])),
        FieldValue::Refs(ids) => J::Object(Map::from_iter([(
            "refs".to_string(),
            J::Array(ids.iter().map(|s| s.map_or(J::Null, J::from)).collect()),
        )])),
    }
}

fn map_json(m: &BTreeMap<String, FieldValue>) -> J {
    J::Object(m.iter().map(|(k, v)| (k.clone(), value_json(v))).collect())
}

/// Canonical text form: sorted keys, one object or field per line.
pub fn save_snapshot(snapshot: &HeapSnapshot) -> String {
    let mut out = String::from("{\n");
    let lines = |items: Vec<String>, indent: &str| -> String {
        if items.is_empty() {
            return "[]".into();
        }
        let body: Vec<String> = items.iter().map(|s| format!("{indent}  {s}")).collect();
        format!("[\n{}\n{indent}]", body.join(",\n"))
    };
    let classes: Vec<String> = snapshot
        .classes
        .iter()
        .map(|c| {
            let fields: Vec<String> = c
                .fields
                .iter()
                .map(|f| {
                    inline(&J::Object(Map::from_iter([
                        ("kind".to_string(), J::from(f.kind.as_str())),
                        ("name".to_string(), J::from(f.name.as_str())),
                        ("type".to_string(), J::from(f.ty.as_str())),
                    ])))
                })
                .collect();
            let mut s = String::from("{\n");
            let _ = write!(s, "      \"fields\": {},\n", lines(fields, "      "));
            let _ = write!(s, "      \"name\": {}", J::from(c.name.as_str()));
            if !c.statics.is_empty() {
                let _ = write!(s, ",\n      \"statics\": {}", inline(&map_json(&c.statics)));
            }
            if let Some(sup) = &c.superclass {
                let _ = write!(s, ",\n      \"superclass\": {}", J::from(sup.as_str()));
            }
            s.push_str("\n    }");
            s
        })
        .collect();
    let objects: Vec<String> = snapshot
        .objects
        .iter()
        .map(|o| {
            inline(&J::Object(Map::from_iter([
                ("class".to_string(), J::from(o.class.as_str())),
                ("fields".to_string(), map_json(&o.fields)),
                ("id".to_string(), J::from(o.id)),
            ])))
        })
        .collect();
    let roots = J::Object(snapshot.roots.iter().map(|(k, v)| (k.clone(), J::from(*v))).collect());
    let _ = writeln!(out, "  \"classes\": {},", lines(classes, "  "));
    let _ = writeln!(out, "  \"objects\": {},", lines(objects, "  "));
    let _ = writeln!(out, "  \"roots\": {}", inline(&roots));
    out.push_str("}\n");
    out
}
