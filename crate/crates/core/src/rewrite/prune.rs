//! Implied joins and pruning to a sufficient join set.
//!
//! A rule `{"when": ["a", "a"], "then": "b"}` says that an `a` join from `u`
//! to `v` followed by an `a` join from `v` to `w` implies a `b` join from `u`
//! to `w`. Joins are matched in whichever direction they are read, so an
//! edge stored as `a^R` from `v` to `u` counts as `a` from `u` to `v`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CompositeGraph, Edge, Endpoint, NodeId};
use crate::registry::Direction;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicationRule {
    pub when: [String; 2],
    pub then: String,
}

impl ImplicationRule {
    pub fn new(first: &str, second: &str, then: &str) -> Self {
        ImplicationRule { when: [first.into(), second.into()], then: then.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleSet {
    pub rules: Vec<ImplicationRule>,
}

impl RuleSet {
    pub fn new(rules: Vec<ImplicationRule>) -> Self {
        RuleSet { rules }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::RegistryFormat(format!("rules: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// Joins between `u` and `w` as read leaving `u`.
fn joins_between(graph: &CompositeGraph, u: NodeId, w: NodeId) -> Vec<&str> {
    let reg = graph.registry();
    graph
        .edges()
        .iter()
        .filter_map(|e| {
            if e.from.node == u && e.to.node == w {
                Some(e.join.as_str())
            } else if e.to.node == u && e.from.node == w {
                Some(reg.reverse_of(&e.join))
            } else {
                None
            }
        })
        .collect()
}

/// One implied edge not yet present, if any.
fn next_implied(graph: &CompositeGraph, rules: &RuleSet) -> Result<Option<Edge>> {
    let reg = graph.registry();
    let bindings = graph.bindings();
    for v in graph.nodes() {
        // (join read toward v, far node) and (join read away from v, far node)
        let mut incoming = Vec::new();
        let mut outgoing = Vec::new();
        for e in graph.edges() {
            let (near, far) = if e.from.node == v.id {
                (&e.from, &e.to)
            } else if e.to.node == v.id {
                (&e.to, &e.from)
            } else {
                continue;
            };
            if far.node == v.id {
                continue;
            }
            let (away, _) = e.seen_from(near, reg).expect("endpoint of its own edge");
            incoming.push((reg.reverse_of(away), far.node, e.label));
            outgoing.push((away, far.node, e.label));
        }
        for &(t1, u, l1) in &incoming {
            for &(t2, w, l2) in &outgoing {
                if l1 == l2 || u == w {
                    continue;
                }
                for rule in &rules.rules {
                    if rule.when[0] != t1 || rule.when[1] != t2 {
                        continue;
                    }
                    let existing = joins_between(graph, u, w);
                    if existing.contains(&rule.then.as_str()) {
                        continue;
                    }
                    if let Some(other) = existing.first() {
                        return Err(Error::Contradiction {
                            from: u,
                            to: w,
                            detail: format!("`{}` is implied but `{other}` is already present", rule.then),
                        });
                    }
                    let pick = |node: NodeId, role: Direction| -> Result<Option<Endpoint>> {
                        let obj = &graph.node(node).expect("node").object;
                        let ty = reg.object(obj)?;
                        let mut fitting = ty.ports.iter().filter(|p| reg.port_accepts(p, &rule.then, role)).peekable();
                        if fitting.peek().is_none() {
                            return Ok(None);
                        }
                        for p in fitting {
                            let end = Endpoint::new(node, p.id.clone());
                            if !bindings.contains_key(&end) {
                                return Ok(Some(end));
                            }
                        }
                        Err(Error::Contradiction {
                            from: u,
                            to: w,
                            detail: format!("every `{}` port on {node} is already bound", rule.then),
                        })
                    };
                    let (Some(from), Some(to)) = (pick(u, Direction::Out)?, pick(w, Direction::In)?) else {
                        continue;
                    };
                    let label = graph.edges().last().map_or(1, |e| e.label + 1);
                    return Ok(Some(Edge { label, join: rule.then.clone(), from, to }));
                }
            }
        }
    }
    Ok(None)
}

/// Adds every edge implied by the rules, to a fixpoint.
pub fn imply_joins(graph: &CompositeGraph, rules: &RuleSet) -> Result<CompositeGraph> {
    let mut g = graph.clone();
    while let Some(edge) = next_implied(&g, rules)? {
        let mut edges = g.edges().to_vec();
        edges.push(edge);
        g = g.with_parts(g.nodes().to_vec(), edges)?;
    }
    Ok(g)
}

fn same_join(graph: &CompositeGraph, a: &Edge, b: &Edge) -> bool {
    let reg = graph.registry();
    (a.from == b.from && a.to == b.to && a.join == b.join)
        || (a.from == b.to && a.to == b.from && reg.reverse_of(&a.join) == b.join)
}

/// Drops every edge whose join type (in either direction) is outside `keep`,
/// provided the rules re-derive all of them.
pub fn prune(graph: &CompositeGraph, keep: &BTreeSet<String>, rules: &RuleSet) -> Result<CompositeGraph> {
    let reg = graph.registry();
    let (kept, removed): (Vec<Edge>, Vec<Edge>) =
        graph.edges().iter().cloned().partition(|e| keep.contains(&e.join) || keep.contains(reg.reverse_of(&e.join)));
    if removed.is_empty() {
        return Ok(graph.clone());
    }
    let pruned = graph.with_parts(graph.nodes().to_vec(), kept)?;
    let restored = imply_joins(&pruned, rules)?;
    let lost: Vec<u32> =
        removed.iter().filter(|r| !restored.edges().iter().any(|e| same_join(graph, r, e))).map(|r| r.label).collect();
    if !lost.is_empty() {
        return Err(Error::PruneLoss(lost));
    }
    Ok(pruned)
}

/// Checks sufficiency by enumeration over a bounded family of objects.
pub fn is_sufficient(family: &[CompositeGraph], keep: &BTreeSet<String>, rules: &RuleSet) -> bool {
    family.iter().all(|g| prune(g, keep, rules).is_ok())
}

/// Sufficient, and no longer sufficient once any one element is removed.
pub fn is_minimal(family: &[CompositeGraph], keep: &BTreeSet<String>, rules: &RuleSet) -> bool {
    is_sufficient(family, keep, rules)
        && keep.iter().all(|k| {
            let mut smaller = keep.clone();
            smaller.remove(k);
            !is_sufficient(family, &smaller, rules)
        })
}
