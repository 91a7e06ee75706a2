//! Moving between the tree and graph forms: flattening a bipartite tree,
//! factorizing a graph at a cut, and enumerating every composition order.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{CompositeGraph, Edge, Node, NodeId};
use crate::registry::Registry;
use crate::tree::{BipartiteTree, BundleJoin, JoinBundle};

pub const DEFAULT_MAX_NODES: usize = 8;

/// A cut of the node set into two nonempty, disjoint, covering sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    left: BTreeSet<NodeId>,
    right: BTreeSet<NodeId>,
}

impl Bipartition {
    pub fn new(graph: &CompositeGraph, left: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let all: BTreeSet<NodeId> = graph.node_ids().into_iter().collect();
        let left: BTreeSet<NodeId> = left.into_iter().collect();
        if let Some(stray) = left.difference(&all).next() {
            return Err(Error::UnknownNode(*stray));
        }
        let right: BTreeSet<NodeId> = all.difference(&left).copied().collect();
        if left.is_empty() || right.is_empty() {
            return Err(Error::OrderMismatch("both sides of a bipartition must be nonempty".into()));
        }
        Ok(Bipartition { left, right })
    }

    pub fn left(&self) -> &BTreeSet<NodeId> {
        &self.left
    }

    pub fn right(&self) -> &BTreeSet<NodeId> {
        &self.right
    }
}

/// Edges crossing from `left` to `right`, each described left to right.
fn crossing_bundle(graph: &CompositeGraph, left: &BTreeSet<NodeId>, right: &BTreeSet<NodeId>) -> JoinBundle {
    let reg = graph.registry();
    let joins = graph
        .edges()
        .iter()
        .filter_map(|e| {
            if left.contains(&e.from.node) && right.contains(&e.to.node) {
                Some(BundleJoin { join: e.join.clone(), left: e.from.clone(), right: e.to.clone() })
            } else if right.contains(&e.from.node) && left.contains(&e.to.node) {
                Some(BundleJoin {
                    join: reg.reverse_of(&e.join).to_string(),
                    left: e.to.clone(),
                    right: e.from.clone(),
                })
            } else {
                None
            }
        })
        .collect();
    JoinBundle::new(joins)
}

/// Splits a graph at a cut. The bundle holds exactly the crossing edges,
/// read from left to right.
pub fn factorize(graph: &CompositeGraph, cut: &Bipartition) -> (CompositeGraph, CompositeGraph, JoinBundle) {
    let bundle = crossing_bundle(graph, &cut.left, &cut.right);
    (graph.induced(&cut.left), graph.induced(&cut.right), bundle)
}

/// Puts a factorization back together as a one-step tree whose sides are
/// composed in default order.
pub fn reassemble(left: &CompositeGraph, right: &CompositeGraph, bundle: JoinBundle) -> Option<BipartiteTree> {
    Some(BipartiteTree::join(default_order(left)?, default_order(right)?, bundle))
}

fn leaf_of(node: &Node) -> BipartiteTree {
    BipartiteTree::leaf(node.id, node.object.clone(), node.param)
}

/// Left-deep composition in node-id order: `((n0, n1), n2)...`.
/// `None` for the empty graph.
pub fn default_order(graph: &CompositeGraph) -> Option<BipartiteTree> {
    let mut nodes = graph.nodes().iter();
    let first = nodes.next()?;
    let mut tree = leaf_of(first);
    let mut done: BTreeSet<NodeId> = [first.id].into();
    for n in nodes {
        let right: BTreeSet<NodeId> = [n.id].into();
        let bundle = crossing_bundle(graph, &done, &right);
        tree = BipartiteTree::join(tree, leaf_of(n), bundle);
        done.insert(n.id);
    }
    Some(tree)
}

/// The graph a tree describes. Leaves keep their node ids; bundle joins
/// become edges labeled `1..` in post-order.
pub fn flatten(tree: &BipartiteTree, registry: &Arc<Registry>) -> Result<CompositeGraph> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut bound = BTreeSet::new();
    collect(tree, &mut nodes, &mut edges, &mut bound)?;
    CompositeGraph::new(registry.clone(), nodes, edges)
}

fn collect(
    tree: &BipartiteTree,
    nodes: &mut Vec<Node>,
    edges: &mut Vec<Edge>,
    bound: &mut BTreeSet<crate::graph::Endpoint>,
) -> Result<BTreeSet<NodeId>> {
    match tree {
        BipartiteTree::Leaf(l) => {
            nodes.push(Node { id: l.node, object: l.object.clone(), param: l.param });
            Ok([l.node].into())
        }
        BipartiteTree::Node { left, right, bundle } => {
            let ls = collect(left, nodes, edges, bound)?;
            let rs = collect(right, nodes, edges, bound)?;
            for j in bundle.joins() {
                if !ls.contains(&j.left.node) {
                    return Err(Error::OrderMismatch(format!("{} is not in the left subtree", j.left)));
                }
                if !rs.contains(&j.right.node) {
                    return Err(Error::OrderMismatch(format!("{} is not in the right subtree", j.right)));
                }
                for end in [&j.left, &j.right] {
                    if !bound.insert(end.clone()) {
                        return Err(Error::PortNotFree { node: end.node, port: end.port.clone() });
                    }
                }
                edges.push(Edge {
                    label: edges.len() as u32 + 1,
                    join: j.join.clone(),
                    from: j.left.clone(),
                    to: j.right.clone(),
                });
            }
            let mut all = ls;
            all.extend(rs);
            Ok(all)
        }
    }
}

/// Number of unordered full binary trees over `n` labeled leaves, `(2n-3)!!`.
pub fn order_count(n: usize) -> u128 {
    if n == 0 {
        return 0;
    }
    (1..n).map(|k| (2 * k - 1) as u128).product()
}

/// Every full binary composition tree over the graph's nodes. Each
/// unordered split appears once, with the smallest node id on the left.
pub fn enumerate_orders(
    graph: &CompositeGraph,
    max_nodes: usize,
) -> Result<Box<dyn Iterator<Item = BipartiteTree> + '_>> {
    let n = graph.nodes().len();
    if n > max_nodes {
        return Err(Error::BoundExceeded { nodes: n, bound: max_nodes });
    }
    let all: Vec<NodeId> = graph.node_ids();
    Ok(trees_over(graph, all))
}

fn trees_over(graph: &CompositeGraph, set: Vec<NodeId>) -> Box<dyn Iterator<Item = BipartiteTree> + '_> {
    match set.len() {
        0 => Box::new(std::iter::empty()),
        1 => Box::new(std::iter::once(leaf_of(graph.node(set[0]).expect("node in graph")))),
        n => {
            let rest = set[1..].to_vec();
            // right side is any nonempty subset of everything but the first node
            Box::new((1u64..(1u64 << (n - 1))).flat_map(move |mask| {
                let mut left = vec![set[0]];
                let mut right = Vec::new();
                for (i, &id) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        right.push(id);
                    } else {
                        left.push(id);
                    }
                }
                let lset: BTreeSet<NodeId> = left.iter().copied().collect();
                let rset: BTreeSet<NodeId> = right.iter().copied().collect();
                let bundle = crossing_bundle(graph, &lset, &rset);
                trees_over(graph, left).flat_map(move |lt| {
                    let bundle = bundle.clone();
                    trees_over(graph, right.clone()).map(move |rt| BipartiteTree::join(lt.clone(), rt, bundle.clone()))
                })
            }))
        }
    }
}
