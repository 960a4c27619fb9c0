//! Heap snapshots and their translation into property graphs.

mod extract;
mod model;

pub use extract::{
    assign_unique_ids, collect, extract, follow_references, ExtractError, ExtractionConfig, UidAssignment,
};
pub use model::{ClassInfo, FieldInfo, FieldKind, FieldValue, HeapSnapshot, ObjectId, ObjectInfo, SnapshotError};
