//! Embeddable in-memory property-graph engine for object heaps.
//!
//! A heap is a [`graph::PropertyGraph`]: objects are nodes labeled by class,
//! reference fields are relationships, and classes and local variables get
//! nodes of their own. Heaps come from running programs in a small object
//! language ([`heap`]) or from JSON snapshots ([`io`], [`subgraph`]), and are
//! read and written with an openCypher subset ([`cypher`], [`engine`]) through
//! the [`api`] facade.

pub mod api;
pub mod cypher;
pub mod engine;
pub mod fixtures;
pub mod graph;
pub mod heap;
pub mod io;
pub mod subgraph;
