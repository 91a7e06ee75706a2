use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    // registry
    #[error("join type `{0}` is already registered")]
    DuplicateJoin(String),
    #[error("a null join (`{existing}`) is already registered; cannot add `{name}`")]
    SecondNullJoin { existing: String, name: String },
    #[error("join `{name}` declares reverse `{reverse}`, which conflicts with the existing pairing")]
    ReverseConflict { name: String, reverse: String },
    #[error("null join `{0}` must be its own reverse")]
    NullNotSelfReverse(String),
    #[error("unknown join type `{0}`")]
    UnknownJoin(String),
    #[error("object type `{0}` is already registered")]
    DuplicateObject(String),
    #[error("unknown object type `{0}`")]
    UnknownObject(String),
    #[error("duplicate port `{port}` on object type `{object}`")]
    DuplicatePort { object: String, port: String },
    #[error("port `{port}` on `{object}` cannot accept the null join")]
    NullPort { object: String, port: String },
    #[error("invalid registry document: {0}")]
    RegistryFormat(String),

    // graph validity
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate edge label {0}")]
    DuplicateEdgeLabel(u32),
    #[error("object type `{object}` has no port `{port}`")]
    UnknownPort { object: String, port: String },
    #[error("port {node}.{port} is bound more than once")]
    PortBoundTwice { node: NodeId, port: String },
    #[error("edge {label} of type `{join}` does not fit port {node}.{port}")]
    PortMismatch { label: u32, join: String, node: NodeId, port: String },
    #[error("edge {0} joins a node to itself; joins connect two distinct objects")]
    SelfLoop(u32),
    #[error("object `{object}` {detail}")]
    ParamMismatch { object: String, detail: String },

    // notation
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("label {label} occurs {count} times; a label marks one open join or pairs two ends")]
    LabelCount { label: u32, count: usize },
    #[error("label {label} {detail}")]
    LabelPairing { label: u32, detail: String },
    #[error("index `{index}` on `{object}` has no free matching port")]
    NoFreePort { object: String, index: String },
    #[error("index `{index}` is ambiguous: {candidates:?} are all registered joins")]
    AmbiguousIndex { index: String, candidates: Vec<String> },
    #[error("`{0}` does not name exactly one object in this subtree")]
    UnresolvedName(String),
    #[error("port {node}.{port} is not free in its subtree")]
    PortNotFree { node: NodeId, port: String },

    // rewrite
    #[error("no edge with label {0}")]
    UnknownEdge(u32),
    #[error("graph has {nodes} nodes; order enumeration is bounded at {bound}")]
    BoundExceeded { nodes: usize, bound: usize },
    #[error("port `{port}` is not on object type `{object}`")]
    NotOnType { object: String, port: String },
    #[error("pruning would lose edges {0:?}, which the implication rules cannot re-derive")]
    PruneLoss(Vec<u32>),
    #[error("implication contradicts the graph between {from} and {to}: {detail}")]
    Contradiction { from: NodeId, to: NodeId, detail: String },
    #[error("composition order does not describe this graph: {0}")]
    OrderMismatch(String),

    // evaluation
    #[error("backend error at {at}: {message}")]
    Backend { at: String, message: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::RegistryFormat(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
