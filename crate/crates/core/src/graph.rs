//! The graph form of a composite object: object instances as nodes, typed
//! directed joins as edges bound to ports. This is what a tensorial term
//! means once the order of factors and the choice of labels are forgotten.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::registry::{Direction, Registry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Endpoint {
    pub node: NodeId,
    pub port: String,
}

impl Endpoint {
    pub fn new(node: NodeId, port: impl Into<String>) -> Self {
        Endpoint { node, port: port.into() }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: NodeId,
    pub object: String,
    pub param: Option<u64>,
}

/// A join between two ports. `from` is the superscript (out) end of `join`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub label: u32,
    pub join: String,
    pub from: Endpoint,
    pub to: Endpoint,
}

impl Edge {
    /// The other endpoint, with the join type as seen leaving `end`.
    pub fn seen_from<'a>(&'a self, end: &Endpoint, registry: &'a Registry) -> Option<(&'a str, &'a Endpoint)> {
        if &self.from == end {
            Some((self.join.as_str(), &self.to))
        } else if &self.to == end {
            Some((registry.reverse_of(&self.join), &self.from))
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreePort {
    pub node: NodeId,
    pub port: String,
    pub join: String,
    pub direction: Direction,
}

impl FreePort {
    /// The join an attachment here would carry, described outward from this
    /// node: the port's own join when it is an out port, its reverse otherwise.
    pub fn outward_join<'a>(&'a self, registry: &'a Registry) -> &'a str {
        match self.direction {
            Direction::Out => &self.join,
            Direction::In => registry.reverse_of(&self.join),
        }
    }
}

#[derive(Clone)]
pub struct CompositeGraph {
    registry: Arc<Registry>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl PartialEq for CompositeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for CompositeGraph {}

impl fmt::Debug for CompositeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeGraph").field("nodes", &self.nodes).field("edges", &self.edges).finish()
    }
}

impl CompositeGraph {
    /// Validates and builds a graph. Nodes are kept sorted by id and edges
    /// by label.
    pub fn new(registry: Arc<Registry>, mut nodes: Vec<Node>, mut edges: Vec<Edge>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        edges.sort_by_key(|e| e.label);
        for w in nodes.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::DuplicateNode(w[0].id));
            }
        }
        for w in edges.windows(2) {
            if w[0].label == w[1].label {
                return Err(Error::DuplicateEdgeLabel(w[0].label));
            }
        }
        for n in &nodes {
            let ty = registry.object(&n.object)?;
            match (ty.takes_param, n.param) {
                (true, None) => {
                    return Err(Error::ParamMismatch {
                        object: n.object.clone(),
                        detail: "requires a [n] parameter".into(),
                    })
                }
                (false, Some(_)) => {
                    return Err(Error::ParamMismatch { object: n.object.clone(), detail: "takes no parameter".into() })
                }
                _ => {}
            }
        }
        let g = CompositeGraph { registry, nodes, edges };
        let mut bound = BTreeSet::new();
        for e in &g.edges {
            let join = g.registry.join(&e.join)?;
            if join.is_null {
                return Err(Error::PortMismatch {
                    label: e.label,
                    join: e.join.clone(),
                    node: e.from.node,
                    port: e.from.port.clone(),
                });
            }
            if e.from.node == e.to.node {
                return Err(Error::SelfLoop(e.label));
            }
            for (end, role) in [(&e.from, Direction::Out), (&e.to, Direction::In)] {
                let node = g.node(end.node).ok_or(Error::UnknownNode(end.node))?;
                let ty = g.registry.object(&node.object)?;
                let port = ty
                    .port(&end.port)
                    .ok_or_else(|| Error::UnknownPort { object: node.object.clone(), port: end.port.clone() })?;
                if !g.registry.port_accepts(port, &e.join, role) {
                    return Err(Error::PortMismatch {
                        label: e.label,
                        join: e.join.clone(),
                        node: end.node,
                        port: end.port.clone(),
                    });
                }
                if !bound.insert(end.clone()) {
                    return Err(Error::PortBoundTwice { node: end.node, port: end.port.clone() });
                }
            }
        }
        Ok(g)
    }

    pub fn empty(registry: Arc<Registry>) -> Self {
        CompositeGraph { registry, nodes: Vec::new(), edges: Vec::new() }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| &self.nodes[i])
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn edge(&self, label: u32) -> Option<&Edge> {
        self.edges.binary_search_by_key(&label, |e| e.label).ok().map(|i| &self.edges[i])
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Edge bound at each endpoint.
    pub fn bindings(&self) -> BTreeMap<&Endpoint, &Edge> {
        let mut m = BTreeMap::new();
        for e in &self.edges {
            m.insert(&e.from, e);
            m.insert(&e.to, e);
        }
        m
    }

    pub(crate) fn with_parts(&self, nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        CompositeGraph::new(self.registry.clone(), nodes, edges)
    }

    /// Subgraph on the given node set, keeping every edge with both ends inside.
    pub fn induced(&self, ids: &BTreeSet<NodeId>) -> CompositeGraph {
        let nodes = self.nodes.iter().filter(|n| ids.contains(&n.id)).cloned().collect();
        let edges =
            self.edges.iter().filter(|e| ids.contains(&e.from.node) && ids.contains(&e.to.node)).cloned().collect();
        CompositeGraph { registry: self.registry.clone(), nodes, edges }
    }

    /// Connected components, each keeping its original node ids, ordered by
    /// smallest node id. The graph is the null-join union of its components.
    pub fn components(&self) -> Vec<CompositeGraph> {
        let index: BTreeMap<NodeId, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, index[&e.from.node]);
            let b = find(&mut parent, index[&e.to.node]);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<NodeId>> = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().insert(n.id);
        }
        groups.values().map(|ids| self.induced(ids)).collect()
    }

    /// Unbound ports, sorted by node id then port id.
    pub fn free_ports(&self) -> Vec<FreePort> {
        let bound = self.bindings();
        let mut out = Vec::new();
        for n in &self.nodes {
            let ty = self.registry.object(&n.object).expect("validated");
            let mut ports: Vec<_> = ty.ports.iter().collect();
            ports.sort_by(|a, b| a.id.cmp(&b.id));
            for p in ports {
                let end = Endpoint::new(n.id, p.id.clone());
                if !bound.contains_key(&end) {
                    out.push(FreePort {
                        node: n.id,
                        port: p.id.clone(),
                        join: p.accepts.clone(),
                        direction: p.direction,
                    });
                }
            }
        }
        out
    }

    /// Places `other` beside `self` with only implicit null joins between
    /// them. Node ids and edge labels of `other` are shifted past those of
    /// `self`.
    pub fn disjoint_union(&self, other: &CompositeGraph) -> CompositeGraph {
        let node_shift = self.nodes.last().map_or(0, |n| n.id.0 + 1);
        let label_shift = self.edges.last().map_or(0, |e| e.label);
        let shift = |end: &Endpoint| Endpoint::new(NodeId(end.node.0 + node_shift), end.port.clone());
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().map(|n| Node { id: NodeId(n.id.0 + node_shift), ..n.clone() }));
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge {
            label: e.label + label_shift,
            join: e.join.clone(),
            from: shift(&e.from),
            to: shift(&e.to),
        }));
        CompositeGraph { registry: self.registry.clone(), nodes, edges }
    }

    /// Applies an injective relabeling to the edges.
    pub fn relabel_edges(&self, mut f: impl FnMut(u32) -> u32) -> Result<CompositeGraph> {
        let edges = self.edges.iter().map(|e| Edge { label: f(e.label), ..e.clone() }).collect();
        self.with_parts(self.nodes.clone(), edges)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "nodes": self.nodes.iter().map(|n| serde_json::json!({
                "id": n.id.0, "object": n.object, "param": n.param,
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "label": e.label, "join": e.join,
                "from": {"node": e.from.node.0, "port": e.from.port},
                "to": {"node": e.to.node.0, "port": e.to.port},
            })).collect::<Vec<_>>(),
            "freePorts": self.free_ports().iter().map(|p| serde_json::json!({
                "node": p.node.0, "port": p.port, "join": p.join, "dir": p.direction,
            })).collect::<Vec<_>>(),
        })
    }
}
