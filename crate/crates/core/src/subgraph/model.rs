//! Heap snapshot data model.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::graph::{PropertyValue, ValueKind};

pub type ObjectId = i64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SnapshotError {
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dangling reference to object {id} at {path}")]
    DanglingReference { path: String, id: ObjectId },
    #[error("duplicate object id {0}")]
    DuplicateId(ObjectId),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Reference,
    Primitive,
    PrimitiveArray,
    ReferenceArray,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Reference => "reference",
            FieldKind::Primitive => "primitive",
            FieldKind::PrimitiveArray => "primitive-array",
            FieldKind::ReferenceArray => "reference-array",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(FieldKind::Reference),
            "primitive" => Some(FieldKind::Primitive),
            "primitive-array" => Some(FieldKind::PrimitiveArray),
            "reference-array" => Some(FieldKind::ReferenceArray),
            _ => None,
        }
    }
}

/// Value held by an object field or static field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Null,
    /// A primitive, string, or primitive array (as a list).
    Prim(PropertyValue),
    Ref(ObjectId),
    /// Reference array slots; `None` is a null slot.
    Refs(Vec<Option<ObjectId>>),
}

impl FieldValue {
    /// Object ids this value points at, in slot order.
    pub fn targets(&self) -> impl Iterator<Item = ObjectId> + '_ {
        let (one, many): (Option<ObjectId>, &[Option<ObjectId>]) = match self {
            FieldValue::Ref(id) => (Some(*id), &[]),
            FieldValue::Refs(ids) => (None, ids.as_slice()),
            _ => (None, &[]),
        };
        one.into_iter().chain(many.iter().flatten().copied())
    }

    fn fits(&self, kind: FieldKind) -> bool {
        match (self, kind) {
            (FieldValue::Null, _) => true,
            (FieldValue::Prim(PropertyValue::List(_)), k) => k == FieldKind::PrimitiveArray,
            (FieldValue::Prim(_), k) => k == FieldKind::Primitive,
            (FieldValue::Ref(_), k) => k == FieldKind::Reference,
            (FieldValue::Refs(_), k) => k == FieldKind::ReferenceArray,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldInfo {
    pub name: String,
    pub kind: FieldKind,
    /// Declared type: a class name for references, the element class for
    /// reference arrays, a primitive type name otherwise.
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    pub name: String,
    pub superclass: Option<String>,
    pub fields: Vec<FieldInfo>,
    pub statics: BTreeMap<String, FieldValue>,
}

impl ClassInfo {
    pub fn new(name: impl Into<String>) -> Self {
        ClassInfo {
            name: name.into(),
            superclass: None,
            fields: Vec::new(),
            statics: BTreeMap::new(),
        }
    }

    pub fn field(mut self, name: &str, kind: FieldKind, ty: &str) -> Self {
        self.fields.push(FieldInfo {
            name: name.into(),
            kind,
            ty: ty.into(),
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInfo {
    pub id: ObjectId,
    pub class: String,
    pub fields: BTreeMap<String, FieldValue>,
}

impl ObjectInfo {
    pub fn new(id: ObjectId, class: impl Into<String>) -> Self {
        ObjectInfo {
            id,
            class: class.into(),
            fields: BTreeMap::new(),
        }
    }

    pub fn with(mut self, field: &str, value: FieldValue) -> Self {
        self.fields.insert(field.into(), value);
        self
    }
}

/// Classes, objects and named roots of a heap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeapSnapshot {
    pub classes: Vec<ClassInfo>,
    pub objects: Vec<ObjectInfo>,
    pub roots: BTreeMap<String, ObjectId>,
}

impl HeapSnapshot {
    pub fn class(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Object lookup table.
    pub fn index(&self) -> HashMap<ObjectId, &ObjectInfo> {
        self.objects.iter().map(|o| (o.id, o)).collect()
    }

    /// Declared fields of `class`, superclass fields first.
    pub fn fields_of(&self, class: &str) -> Vec<&FieldInfo> {
        let mut chain = Vec::new();
        let mut cur = self.class(class);
        let mut seen = HashSet::new();
        while let Some(c) = cur {
            if !seen.insert(c.name.as_str()) {
                break;
            }
            chain.push(c);
            cur = c.superclass.as_deref().and_then(|s| self.class(s));
        }
        chain.iter().rev().flat_map(|c| c.fields.iter()).collect()
    }

    /// Checks id uniqueness, class declarations, field kinds and referential
    /// integrity. Errors carry a path such as `objects[3].fields.left`.
    pub fn validate(&self) -> Result<(), SnapshotError> {
        let mut class_names = HashSet::new();
        for (i, c) in self.classes.iter().enumerate() {
            if c.name.is_empty() || c.name == crate::graph::CLASS_LABEL || c.name == crate::graph::LOCAL_LABEL {
                return Err(schema(format!("classes[{i}].name"), format!("`{}` is not a usable class name", c.name)));
            }
            if !class_names.insert(c.name.as_str()) {
                return Err(schema(format!("classes[{i}].name"), format!("class `{}` declared twice", c.name)));
            }
        }
        for (i, c) in self.classes.iter().enumerate() {
            if let Some(s) = &c.superclass {
                if !class_names.contains(s.as_str()) {
                    return Err(schema(format!("classes[{i}].superclass"), format!("unknown class `{s}`")));
                }
            }
            let mut seen = HashSet::new();
            let mut cur = Some(c);
            while let Some(k) = cur {
                if !seen.insert(k.name.as_str()) {
                    return Err(schema(format!("classes[{i}].superclass"), "cyclic superclass chain"));
                }
                cur = k.superclass.as_deref().and_then(|s| self.class(s));
            }
            let mut names = HashSet::new();
            for (j, f) in c.fields.iter().enumerate() {
                if !names.insert(f.name.as_str()) {
                    return Err(schema(format!("classes[{i}].fields[{j}]"), format!("field `{}` declared twice", f.name)));
                }
                if f.name == crate::graph::UID_KEY {
                    return Err(schema(format!("classes[{i}].fields[{j}]"), "`$uid` is reserved"));
                }
            }
            for (name, v) in &c.statics {
                if name == "name" {
                    return Err(schema(format!("classes[{i}].statics.{name}"), "`name` is reserved on class nodes"));
                }
                check_prim_list(v, &format!("classes[{i}].statics.{name}"))?;
            }
        }

        let mut ids = HashSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                return Err(SnapshotError::DuplicateId(o.id));
            }
        }
        for (i, o) in self.objects.iter().enumerate() {
            if !class_names.contains(o.class.as_str()) {
                return Err(schema(format!("objects[{i}].class"), format!("unknown class `{}`", o.class)));
            }
            let decls: HashMap<&str, &FieldInfo> =
                self.fields_of(&o.class).into_iter().map(|f| (f.name.as_str(), f)).collect();
            for (name, value) in &o.fields {
                let path = format!("objects[{i}].fields.{name}");
                let decl = decls
                    .get(name.as_str())
                    .ok_or_else(|| schema(&path, format!("`{}` declares no field `{name}`", o.class)))?;
                if !value.fits(decl.kind) {
                    return Err(schema(&path, format!("value does not fit a {} field", decl.kind.as_str())));
                }
                check_prim_list(value, &path)?;
                for t in value.targets() {
                    if !ids.contains(&t) {
                        return Err(SnapshotError::DanglingReference { path, id: t });
                    }
                }
            }
        }
        for (i, c) in self.classes.iter().enumerate() {
            for (name, v) in &c.statics {
                for t in v.targets() {
                    if !ids.contains(&t) {
                        return Err(SnapshotError::DanglingReference {
                            path: format!("classes[{i}].statics.{name}"),
                            id: t,
                        });
                    }
                }
            }
        }
        for (name, id) in &self.roots {
            if !ids.contains(id) {
                return Err(SnapshotError::DanglingReference {
                    path: format!("roots.{name}"),
                    id: *id,
                });
            }
        }
        Ok(())
    }
}

fn check_prim_list(v: &FieldValue, path: &str) -> Result<(), SnapshotError> {
    if let FieldValue::Prim(PropertyValue::List(items)) = v {
        if let Some(first) = items.first() {
            let k = first.kind();
            if k == ValueKind::List || items.iter().any(|x| x.kind() != k) {
                return Err(schema(path, "primitive arrays must hold one primitive kind"));
            }
        }
    }
    Ok(())
}
