//! The axiom engine: equivalence, reversal, tree/graph conversion, order
//! enumeration, boundaries, pruning and the evaluation fold.

pub mod canon;
pub mod eval;
pub mod orders;
pub mod prune;

pub use canon::{alpha_equivalent, canonical_order, canonicalize, certificate, Certificate};
pub use eval::{evaluate, evaluate_tree};
pub use orders::{
    default_order, enumerate_orders, factorize, flatten, order_count, reassemble, Bipartition, DEFAULT_MAX_NODES,
};
pub use prune::{imply_joins, is_minimal, is_sufficient, prune, ImplicationRule, RuleSet};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{CompositeGraph, Edge};
use crate::registry::ObjectType;

/// Describes one join the other way round: the edge takes the reverse join
/// type and swaps its ends. Applying it twice gives back the same graph.
pub fn reverse_join(graph: &CompositeGraph, label: u32) -> Result<CompositeGraph> {
    let reg = graph.registry();
    if graph.edge(label).is_none() {
        return Err(Error::UnknownEdge(label));
    }
    let edges = graph
        .edges()
        .iter()
        .map(|e| {
            if e.label == label {
                Edge { label, join: reg.reverse_of(&e.join).to_string(), from: e.to.clone(), to: e.from.clone() }
            } else {
                e.clone()
            }
        })
        .collect();
    CompositeGraph::new(reg.clone(), graph.nodes().to_vec(), edges)
}

/// The ports of `object` not used by `bundle`, in declared order. The
/// complement of the null (empty) bundle is the complete join.
pub fn complement_join<'a>(object: &'a ObjectType, bundle: &[&str]) -> Result<Vec<&'a str>> {
    let used: BTreeSet<&str> = bundle.iter().copied().collect();
    for p in &used {
        if object.port(p).is_none() {
            return Err(Error::NotOnType { object: object.name.clone(), port: p.to_string() });
        }
    }
    Ok(object.ports.iter().map(|p| p.id.as_str()).filter(|p| !used.contains(p)).collect())
}
