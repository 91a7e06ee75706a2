//! Nested pairwise composition `(A, B)_α`, the order-carrying description of
//! a composite object.

use std::collections::BTreeSet;

use crate::graph::{Endpoint, NodeId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub node: NodeId,
    pub object: String,
    pub param: Option<u64>,
}

/// One elementary join of a bundle, described from left to right: `left` is
/// the out (superscript) end of `join`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BundleJoin {
    pub join: String,
    pub left: Endpoint,
    pub right: Endpoint,
}

/// The join data of one bipartite step. Elementary joins form a set; they
/// are stored sorted so that equal bundles compare equal. An empty bundle is
/// the null join.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct JoinBundle {
    joins: Vec<BundleJoin>,
}

impl JoinBundle {
    pub fn new(mut joins: Vec<BundleJoin>) -> Self {
        joins.sort();
        joins.dedup();
        JoinBundle { joins }
    }

    pub fn null() -> Self {
        JoinBundle::default()
    }

    pub fn is_null(&self) -> bool {
        self.joins.is_empty()
    }

    pub fn joins(&self) -> &[BundleJoin] {
        &self.joins
    }

    pub fn len(&self) -> usize {
        self.joins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joins.is_empty()
    }

    /// Compound type name such as `ab`, in bundle order.
    pub fn compound_type(&self) -> String {
        self.joins.iter().map(|j| j.join.as_str()).collect::<Vec<_>>().join("")
    }
}

impl std::fmt::Display for JoinBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.joins.is_empty() {
            return f.write_str("0");
        }
        f.write_str("{")?;
        for (i, j) in self.joins.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {} -> {}", j.join, j.left, j.right)?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BipartiteTree {
    Leaf(Leaf),
    Node { left: Box<BipartiteTree>, right: Box<BipartiteTree>, bundle: JoinBundle },
}

impl BipartiteTree {
    pub fn leaf(node: NodeId, object: impl Into<String>, param: Option<u64>) -> Self {
        BipartiteTree::Leaf(Leaf { node, object: object.into(), param })
    }

    pub fn join(left: BipartiteTree, right: BipartiteTree, bundle: JoinBundle) -> Self {
        BipartiteTree::Node { left: Box::new(left), right: Box::new(right), bundle }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            BipartiteTree::Leaf(l) => out.push(l),
            BipartiteTree::Node { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.leaves().into_iter().map(|l| l.node).collect()
    }

    /// Shape of the tree with leaves named by node id, e.g. `((0,1),2)`;
    /// handy for telling orders apart.
    pub fn shape(&self) -> String {
        match self {
            BipartiteTree::Leaf(l) => l.node.0.to_string(),
            BipartiteTree::Node { left, right, .. } => format!("({},{})", left.shape(), right.shape()),
        }
    }
}
