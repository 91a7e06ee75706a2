//! The evaluation fold: a generalized state computed with the same structure
//! as a composition tree.

use std::collections::BTreeSet;

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::graph::CompositeGraph;
use crate::rewrite::{alpha_equivalent, default_order, flatten};
use crate::tree::BipartiteTree;

/// Folds a tree: leaves become atomic states, each step joins its two
/// sides along the bundle, or takes their disjoint union when the bundle is
/// null.
pub fn evaluate_tree<B: Backend>(tree: &BipartiteTree, backend: &B) -> Result<B::State> {
    match tree {
        BipartiteTree::Leaf(leaf) => backend
            .atomic_state(leaf)
            .map_err(|e| Error::Backend { at: format!("{} {}", leaf.object, leaf.node), message: e.0 }),
        BipartiteTree::Node { left, right, bundle } => {
            let l = evaluate_tree(left, backend)?;
            let r = evaluate_tree(right, backend)?;
            let out =
                if bundle.is_null() { backend.disjoint_union(&l, &r) } else { backend.join_states(&l, &r, bundle) };
            out.map_err(|e| Error::Backend { at: format!("bundle {bundle}"), message: e.0 })
        }
    }
}

/// Evaluates a graph along `order`, or along the default order when none is
/// given. A supplied order must describe this very graph.
pub fn evaluate<B: Backend>(graph: &CompositeGraph, backend: &B, order: Option<&BipartiteTree>) -> Result<B::State> {
    backend.validate(graph).map_err(|e| Error::Backend { at: "graph".into(), message: e.0 })?;
    let default;
    let tree = match order {
        Some(t) => {
            let ids: BTreeSet<_> = graph.node_ids().into_iter().collect();
            if t.node_set() != ids {
                return Err(Error::OrderMismatch("tree leaves differ from graph nodes".into()));
            }
            if !alpha_equivalent(&flatten(t, graph.registry())?, graph) {
                return Err(Error::OrderMismatch("tree flattens to a different object".into()));
            }
            t
        }
        None => {
            default = default_order(graph).ok_or_else(|| Error::Backend {
                at: "graph".into(),
                message: "cannot evaluate an empty graph".into(),
            })?;
            &default
        }
    };
    evaluate_tree(tree, backend)
}
