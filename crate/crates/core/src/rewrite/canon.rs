//! Canonical forms up to isomorphism.
//!
//! Nodes are colored by object type and parameter; an edge is determined up
//! to orientation by the two ports it binds, since a port fixes the join type
//! it accepts. Each connected component is labeled by color refinement with
//! exhaustive individualization, keeping the lexicographically least
//! certificate. Components are then sorted by certificate.

use std::collections::BTreeMap;

use crate::graph::{CompositeGraph, Edge, Endpoint, Node, NodeId};

type NodeKey = (String, Option<u64>);
type EdgeKey = (usize, String, usize, String);

/// Certificate of one component: node colors in canonical order and the
/// sorted list of port-to-port edges over canonical positions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentCert {
    pub nodes: Vec<NodeKey>,
    pub edges: Vec<EdgeKey>,
}

/// Isomorphism-invariant certificate of a whole graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Certificate(pub Vec<ComponentCert>);

struct Adjacency<'g> {
    keys: Vec<NodeKey>,
    // (own port, neighbor index, neighbor port)
    adj: Vec<Vec<(&'g str, usize, &'g str)>>,
}

impl<'g> Adjacency<'g> {
    fn new(graph: &'g CompositeGraph) -> Self {
        let index: BTreeMap<NodeId, usize> = graph.nodes().iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let keys = graph.nodes().iter().map(|n| (n.object.clone(), n.param)).collect();
        let mut adj = vec![Vec::new(); graph.nodes().len()];
        for e in graph.edges() {
            let a = index[&e.from.node];
            let b = index[&e.to.node];
            adj[a].push((e.from.port.as_str(), b, e.to.port.as_str()));
            adj[b].push((e.to.port.as_str(), a, e.from.port.as_str()));
        }
        Adjacency { keys, adj }
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.keys.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                for &(_, w, _) in &self.adj[comp[i]] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn refine(&self, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        loop {
            let mut cell_of = vec![usize::MAX; self.keys.len()];
            for (c, cell) in cells.iter().enumerate() {
                for &v in cell {
                    cell_of[v] = c;
                }
            }
            let mut changed = false;
            let mut next = Vec::with_capacity(cells.len());
            for cell in cells {
                if cell.len() == 1 {
                    next.push(cell);
                    continue;
                }
                let mut keyed: BTreeMap<Vec<(&str, &str, usize)>, Vec<usize>> = BTreeMap::new();
                for v in cell {
                    let mut key: Vec<(&str, &str, usize)> =
                        self.adj[v].iter().map(|&(p, w, q)| (p, q, cell_of[w])).collect();
                    key.sort_unstable();
                    keyed.entry(key).or_default().push(v);
                }
                if keyed.len() > 1 {
                    changed = true;
                }
                next.extend(keyed.into_values());
            }
            cells = next;
            if !changed {
                return cells;
            }
        }
    }

    fn certificate(&self, order: &[usize]) -> ComponentCert {
        let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let nodes = order.iter().map(|&v| self.keys[v].clone()).collect();
        let mut edges = Vec::new();
        for &v in order {
            for &(p, w, q) in &self.adj[v] {
                let a = (pos[&v], p);
                let b = (pos[&w], q);
                // each edge appears from both ends; keep one copy
                if a <= b {
                    edges.push((a.0, a.1.to_string(), b.0, b.1.to_string()));
                }
            }
        }
        edges.sort();
        ComponentCert { nodes, edges }
    }

    fn search(&self, cells: Vec<Vec<usize>>, best: &mut Option<(ComponentCert, Vec<usize>)>) {
        let cells = self.refine(cells);
        let Some(t) = cells.iter().position(|c| c.len() > 1) else {
            let order: Vec<usize> = cells.into_iter().flatten().collect();
            let cert = self.certificate(&order);
            if best.as_ref().is_none_or(|(b, _)| cert < *b) {
                *best = Some((cert, order));
            }
            return;
        };
        for &v in &cells[t] {
            let mut next = Vec::with_capacity(cells.len() + 1);
            next.extend(cells[..t].iter().cloned());
            next.push(vec![v]);
            next.push(cells[t].iter().copied().filter(|&w| w != v).collect());
            next.extend(cells[t + 1..].iter().cloned());
            self.search(next, best);
        }
    }

    fn canon_component(&self, comp: &[usize]) -> (ComponentCert, Vec<usize>) {
        let mut by_key: BTreeMap<&NodeKey, Vec<usize>> = BTreeMap::new();
        for &v in comp {
            by_key.entry(&self.keys[v]).or_default().push(v);
        }
        let mut best = None;
        self.search(by_key.into_values().collect(), &mut best);
        best.expect("component is nonempty")
    }

    /// Canonical node sequence (graph indices) and certificate.
    fn canonical(&self) -> (Certificate, Vec<usize>) {
        let mut comps: Vec<(ComponentCert, Vec<usize>)> =
            self.components().iter().map(|c| self.canon_component(c)).collect();
        comps.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let order = comps.iter().flat_map(|(_, o)| o.iter().copied()).collect();
        (Certificate(comps.into_iter().map(|(c, _)| c).collect()), order)
    }
}

pub fn certificate(graph: &CompositeGraph) -> Certificate {
    Adjacency::new(graph).canonical().0
}

/// Node ids in canonical order.
pub fn canonical_order(graph: &CompositeGraph) -> Vec<NodeId> {
    let (_, order) = Adjacency::new(graph).canonical();
    order.into_iter().map(|i| graph.nodes()[i].id).collect()
}

/// Whether the graphs are the same composite object: equal up to node
/// renaming, edge relabeling and the direction in which each join is read.
pub fn alpha_equivalent(a: &CompositeGraph, b: &CompositeGraph) -> bool {
    a.nodes().len() == b.nodes().len() && a.edges().len() == b.edges().len() && certificate(a) == certificate(b)
}

/// Deterministic representative of the isomorphism class: nodes renumbered
/// `0..n` in canonical order, every edge read in a fixed direction, labels
/// `1..E` in sorted edge order.
pub fn canonicalize(graph: &CompositeGraph) -> CompositeGraph {
    let registry = graph.registry();
    let order = canonical_order(graph);
    let pos: BTreeMap<NodeId, u32> = order.iter().enumerate().map(|(i, &id)| (id, i as u32)).collect();
    let nodes: Vec<Node> = order
        .iter()
        .map(|&id| {
            let n = graph.node(id).expect("ordered node exists");
            Node { id: NodeId(pos[&id]), ..n.clone() }
        })
        .collect();
    let renum = |end: &Endpoint| Endpoint::new(NodeId(pos[&end.node]), end.port.clone());
    let natural = |join: &str, end: &Endpoint| {
        let obj = &graph.node(end.node).expect("endpoint node").object;
        registry
            .object(obj)
            .ok()
            .and_then(|t| t.port(&end.port))
            .is_some_and(|p| p.accepts == join && p.direction == crate::registry::Direction::Out)
    };
    let mut edges: Vec<Edge> = graph
        .edges()
        .iter()
        .map(|e| {
            let rev = registry.reverse_of(&e.join);
            let fwd_nat = natural(&e.join, &e.from);
            let rev_nat = natural(rev, &e.to);
            let (from, to) = (renum(&e.from), renum(&e.to));
            let keep = match (fwd_nat, rev_nat) {
                (true, false) => true,
                (false, true) => false,
                _ => (from.node, &from.port) <= (to.node, &to.port),
            };
            if keep {
                Edge { label: 0, join: e.join.clone(), from, to }
            } else {
                Edge { label: 0, join: rev.to_string(), from: to, to: from }
            }
        })
        .collect();
    edges.sort_by(|a, b| {
        let ka = sorted_pair(&a.from, &a.to);
        let kb = sorted_pair(&b.from, &b.to);
        ka.cmp(&kb)
    });
    for (i, e) in edges.iter_mut().enumerate() {
        e.label = i as u32 + 1;
    }
    graph.with_parts(nodes, edges).expect("canonical form of a valid graph is valid")
}

fn sorted_pair<'a>(a: &'a Endpoint, b: &'a Endpoint) -> (&'a Endpoint, &'a Endpoint) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
