//! Composite objects described by typed joins between object instances,
//! with the rewrite rules that relate their descriptions and backends that
//! compute generalized states independently of composition order.

pub mod backend;
pub mod error;
pub mod graph;
pub mod notation;
pub mod registry;
pub mod rewrite;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{CompositeGraph, Edge, Endpoint, FreePort, Node, NodeId};
pub use registry::{Direction, JoinType, ObjectType, Port, Registry};
pub use tree::{BipartiteTree, BundleJoin, JoinBundle, Leaf};
