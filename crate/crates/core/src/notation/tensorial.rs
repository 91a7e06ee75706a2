//! The tensorial notation: `A^{a1 b2} B_{a1}^{c3} C_{b2 c3}`.
//!
//! Raised indices are the out ends of joins and lowered ones the in ends.
//! A `~` marks an index as reversed: `~a1` stands for a join of the reverse
//! type of `a`, written from the other side. `a1@p` pins the index to port
//! `p`; unpinned indices take the first free matching port in declared
//! order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::{is_join_name, Cursor};
use crate::error::{Error, Result};
use crate::graph::{CompositeGraph, Edge, Endpoint, Node, NodeId};
use crate::registry::{Direction, ObjectType, Port, Registry};
use crate::rewrite::canonicalize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Sup,
    Sub,
}

impl Side {
    pub fn role(self) -> Direction {
        match self {
            Side::Sup => Direction::Out,
            Side::Sub => Direction::In,
        }
    }

    fn marker(self) -> char {
        match self {
            Side::Sup => '^',
            Side::Sub => '_',
        }
    }

    fn word(self) -> &'static str {
        match self {
            Side::Sup => "superscript",
            Side::Sub => "subscript",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Index {
    pub reversed: bool,
    pub join: String,
    pub label: u32,
    pub port: Option<String>,
}

impl Index {
    /// The join type the index denotes at its written position.
    pub fn literal_join<'a>(&'a self, registry: &'a Registry) -> &'a str {
        if self.reversed {
            registry.reverse_of(&self.join)
        } else {
            &self.join
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reversed {
            f.write_str("~")?;
        }
        write!(f, "{}{}", self.join, self.label)?;
        if let Some(p) = &self.port {
            write!(f, "@{p}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub object: String,
    pub param: Option<u64>,
    pub indices: Vec<(Side, Index)>,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.object)?;
        if let Some(p) = self.param {
            write!(f, "[{p}]")?;
        }
        let mut i = 0;
        while i < self.indices.len() {
            let side = self.indices[i].0;
            write!(f, "{}{{", side.marker())?;
            let mut first = true;
            while i < self.indices.len() && self.indices[i].0 == side {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{}", self.indices[i].1)?;
                first = false;
                i += 1;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TensorialTerm {
    pub factors: Vec<Factor>,
}

impl fmt::Display for TensorialTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// Parses the text of a term. With a registry, an index such as `jHT01` is
/// split into a registered join and a label; without one, the label is the
/// whole trailing run of digits.
pub fn parse_term(text: &str, registry: Option<&Registry>) -> Result<TensorialTerm> {
    let mut c = Cursor::new(text);
    let factors = parse_factors(&mut c, registry)?;
    c.skip_ws();
    if !c.at_end() {
        return Err(c.error(format!("unexpected {}", c.describe())));
    }
    if factors.is_empty() {
        return Err(c.error("empty term"));
    }
    Ok(TensorialTerm { factors })
}

pub(crate) fn parse_factors(c: &mut Cursor<'_>, registry: Option<&Registry>) -> Result<Vec<Factor>> {
    let mut factors = Vec::new();
    loop {
        c.skip_ws();
        if !c.peek().is_some_and(|ch| ch.is_ascii_uppercase()) {
            return Ok(factors);
        }
        factors.push(parse_factor(c, registry)?);
    }
}

pub(crate) fn parse_factor(c: &mut Cursor<'_>, registry: Option<&Registry>) -> Result<Factor> {
    let object = c.name().ok_or_else(|| c.error(format!("expected an object name, found {}", c.describe())))?;
    let param = if c.eat('[') {
        let p = c.integer()?;
        c.expect(']')?;
        Some(p)
    } else {
        None
    };
    let mut indices = Vec::new();
    loop {
        c.skip_ws();
        let side = if c.eat_str("^{") {
            Side::Sup
        } else if c.eat_str("_{") {
            Side::Sub
        } else {
            break;
        };
        let before = indices.len();
        loop {
            c.skip_ws();
            if c.eat('}') {
                break;
            }
            indices.push((side, parse_index(c, registry)?));
        }
        if indices.len() == before {
            return Err(c.error("empty index group"));
        }
    }
    Ok(Factor { object: object.to_string(), param, indices })
}

fn parse_index(c: &mut Cursor<'_>, registry: Option<&Registry>) -> Result<Index> {
    let start = c.pos();
    let reversed = c.eat('~');
    let token =
        c.join_token().ok_or_else(|| c.error(format!("expected an index such as `a1`, found {}", c.describe())))?;
    let (join, label) = split_index(token, registry, start)?;
    let port = if c.eat('@') {
        Some(c.port_id().ok_or_else(|| c.error("expected a port id after `@`"))?.to_string())
    } else {
        None
    };
    Ok(Index { reversed, join, label, port })
}

fn split_index(token: &str, registry: Option<&Registry>, pos: usize) -> Result<(String, u32)> {
    let digits = token.bytes().rev().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return Err(Error::syntax(pos, format!("index `{token}` has no label")));
    }
    let first_split = token.len() - digits;
    let label_of = |k: usize| {
        token[k..].parse::<u32>().map_err(|_| Error::syntax(pos, format!("label in `{token}` is out of range")))
    };
    let Some(reg) = registry else {
        return Ok((token[..first_split].to_string(), label_of(first_split)?));
    };
    let candidates: Vec<usize> = (first_split..token.len()).filter(|&k| reg.has_join(&token[..k])).collect();
    match candidates.as_slice() {
        [] => Err(Error::UnknownJoin(token[..first_split].to_string())),
        [k] => Ok((token[..*k].to_string(), label_of(*k)?)),
        many => Err(Error::AmbiguousIndex {
            index: token.to_string(),
            candidates: many.iter().map(|&k| token[..k].to_string()).collect(),
        }),
    }
}

/// Builds the graph of a parsed term, numbering nodes from `first_id`.
pub(crate) fn build_graph(term: &TensorialTerm, registry: &Arc<Registry>, first_id: u32) -> Result<CompositeGraph> {
    let reg = registry.as_ref();
    let mut types: Vec<&ObjectType> = Vec::with_capacity(term.factors.len());
    for f in &term.factors {
        types.push(reg.object(&f.object)?);
        for (_, idx) in &f.indices {
            reg.join(&idx.join)?;
        }
    }

    let mut occurrences: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (fi, f) in term.factors.iter().enumerate() {
        for (ii, (_, idx)) in f.indices.iter().enumerate() {
            occurrences.entry(idx.label).or_default().push((fi, ii));
        }
    }
    let entry = |(fi, ii): (usize, usize)| -> &(Side, Index) { &term.factors[fi].indices[ii] };
    let mut dropped = BTreeSet::new();
    for (&label, occ) in &occurrences {
        if occ.len() > 2 {
            return Err(Error::LabelCount { label, count: occ.len() });
        }
        let (s1, i1) = entry(occ[0]);
        if occ.len() == 1 {
            // an open join: the port is named but stays free
            if reg.join(i1.literal_join(reg))?.is_null {
                dropped.insert(label);
            }
            continue;
        }
        let (s2, i2) = entry(occ[1]);
        if i1.join != i2.join || i1.reversed != i2.reversed {
            return Err(Error::LabelPairing { label, detail: format!("is written both as `{i1}` and as `{i2}`") });
        }
        if s1 == s2 {
            return Err(Error::LabelPairing { label, detail: format!("appears twice on the {} side", s1.word()) });
        }
        if reg.join(i1.literal_join(reg))?.is_null {
            dropped.insert(label);
        }
    }

    let node_id = |fi: usize| NodeId(first_id + fi as u32);
    let mut ports: BTreeMap<(usize, usize), String> = BTreeMap::new();
    for (fi, f) in term.factors.iter().enumerate() {
        let ty = types[fi];
        let mut bound = BTreeSet::new();
        let live = || f.indices.iter().enumerate().filter(|(_, (_, idx))| !dropped.contains(&idx.label));
        for (ii, (side, idx)) in live().filter(|(_, (_, idx))| idx.port.is_some()) {
            let pid = idx.port.as_deref().expect("filtered");
            let port = ty.port(pid).ok_or_else(|| Error::UnknownPort { object: ty.name.clone(), port: pid.into() })?;
            let lit = idx.literal_join(reg);
            if !reg.port_accepts(port, lit, side.role()) {
                return Err(Error::PortMismatch {
                    label: idx.label,
                    join: lit.into(),
                    node: node_id(fi),
                    port: pid.into(),
                });
            }
            if !bound.insert(pid) {
                return Err(Error::PortBoundTwice { node: node_id(fi), port: pid.into() });
            }
            ports.insert((fi, ii), pid.to_string());
        }
        for (ii, (side, idx)) in live().filter(|(_, (_, idx))| idx.port.is_none()) {
            let lit = idx.literal_join(reg);
            let mut fitting = ty.ports.iter().filter(|p| reg.port_accepts(p, lit, side.role())).peekable();
            if fitting.peek().is_none() {
                return Err(Error::NoFreePort { object: ty.name.clone(), index: idx.to_string() });
            }
            let Some(port) = fitting.find(|p| !bound.contains(p.id.as_str())) else {
                return Err(Error::NoFreePort { object: ty.name.clone(), index: idx.to_string() });
            };
            bound.insert(port.id.as_str());
            ports.insert((fi, ii), port.id.clone());
        }
    }

    let nodes = term
        .factors
        .iter()
        .enumerate()
        .map(|(fi, f)| Node { id: node_id(fi), object: f.object.clone(), param: f.param })
        .collect();
    let mut edges = Vec::new();
    for (&label, occ) in &occurrences {
        if dropped.contains(&label) || occ.len() == 1 {
            continue;
        }
        let (sup, sub) = if entry(occ[0]).0 == Side::Sup { (occ[0], occ[1]) } else { (occ[1], occ[0]) };
        let end = |at: (usize, usize)| Endpoint::new(node_id(at.0), ports[&at].clone());
        edges.push(Edge { label, join: entry(sup).1.literal_join(reg).to_string(), from: end(sup), to: end(sub) });
    }
    CompositeGraph::new(registry.clone(), nodes, edges)
}

pub fn parse_tensorial(text: &str, registry: &Arc<Registry>) -> Result<CompositeGraph> {
    let term = parse_term(text, Some(registry))?;
    build_graph(&term, registry, 0)
}

/// Parses a term against the registry `infer_registry` derives from it.
pub fn parse_tensorial_inferred(text: &str) -> Result<CompositeGraph> {
    let term = parse_term(text, None)?;
    let registry = Arc::new(infer_registry(&term)?);
    build_graph(&term, &registry, 0)
}

/// The smallest registry under which the term is well typed. Every join `j`
/// is paired with a reverse `j_R`. Explicitly pinned ports keep their names;
/// the others are named `j_out1`, `j_out2`, ... (or `j_in1`, ...), enough of
/// each for the busiest factor of the type.
pub fn infer_registry(term: &TensorialTerm) -> Result<Registry> {
    #[derive(Default)]
    struct Shape {
        param: Option<bool>,
        pinned: Vec<Port>,
        counts: Vec<((String, Direction), usize)>,
    }
    let mut reg = Registry::with_null();
    let mut shapes: BTreeMap<&str, Shape> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for f in &term.factors {
        for (_, idx) in &f.indices {
            if !reg.has_join(&idx.join) {
                reg.register_join_type(&idx.join, &format!("{}_R", idx.join), false)?;
            }
        }
        if !shapes.contains_key(f.object.as_str()) {
            order.push(&f.object);
        }
        let shape = shapes.entry(&f.object).or_default();
        let has = f.param.is_some();
        if shape.param.is_some_and(|p| p != has) {
            return Err(Error::ParamMismatch {
                object: f.object.clone(),
                detail: "is used both with and without a parameter".into(),
            });
        }
        shape.param = Some(has);
        let mut local: Vec<((String, Direction), usize)> = Vec::new();
        for (side, idx) in &f.indices {
            let dir = if idx.reversed { side.role().opposite() } else { side.role() };
            if let Some(pid) = &idx.port {
                match shape.pinned.iter().find(|p| &p.id == pid) {
                    Some(p) if p.accepts != idx.join || p.direction != dir => {
                        return Err(Error::DuplicatePort { object: f.object.clone(), port: pid.clone() });
                    }
                    Some(_) => {}
                    None => shape.pinned.push(Port::new(pid.clone(), idx.join.clone(), dir)),
                }
                continue;
            }
            let key = (idx.join.clone(), dir);
            match local.iter_mut().find(|(k, _)| *k == key) {
                Some((_, n)) => *n += 1,
                None => local.push((key, 1)),
            }
        }
        for (key, n) in local {
            match shape.counts.iter_mut().find(|(k, _)| *k == key) {
                Some((_, m)) => *m = (*m).max(n),
                None => shape.counts.push((key, n)),
            }
        }
    }
    for name in order {
        let shape = shapes.remove(name).expect("recorded");
        let mut ports = shape.pinned;
        for ((join, dir), n) in shape.counts {
            for k in 1..=n {
                ports.push(Port::new(format!("{join}_{dir}{k}"), join.clone(), dir));
            }
        }
        reg.register_object_type(name, shape.param.unwrap_or(false), ports)?;
    }
    Ok(reg)
}

struct Slot {
    side: Side,
    index: Index,
    port: String,
    literal: String,
}

/// Canonical text: nodes in canonical order, each node's joins in declared
/// port order, labels numbered by first appearance. Ports are spelled out
/// only where the default binding would pick a different one.
pub fn print_tensorial(graph: &CompositeGraph) -> String {
    render(&canonicalize(graph), true)
}

/// The graph as stored: nodes in their given order, each join read in its
/// stored direction, edge labels kept.
pub fn print_tensorial_literal(graph: &CompositeGraph) -> String {
    render(graph, false)
}

fn render(g: &CompositeGraph, renumber_labels: bool) -> String {
    let reg = g.registry().as_ref();
    let bindings = g.bindings();
    let mut renumber: BTreeMap<u32, u32> = BTreeMap::new();
    let mut factors = Vec::with_capacity(g.nodes().len());
    for node in g.nodes() {
        let ty = reg.object(&node.object).expect("graph types are registered");
        let mut slots = Vec::new();
        for p in &ty.ports {
            let end = Endpoint::new(node.id, p.id.clone());
            let Some(edge) = bindings.get(&end) else {
                continue;
            };
            let side = if edge.from == end { Side::Sup } else { Side::Sub };
            let (reversed, join) = if is_join_name(&edge.join) || !is_join_name(reg.reverse_of(&edge.join)) {
                (false, edge.join.clone())
            } else {
                (true, reg.reverse_of(&edge.join).to_string())
            };
            let next = renumber.len() as u32 + 1;
            let label = if renumber_labels { *renumber.entry(edge.label).or_insert(next) } else { edge.label };
            slots.push(Slot {
                side,
                index: Index { reversed, join, label, port: None },
                port: p.id.clone(),
                literal: edge.join.clone(),
            });
        }
        pin_where_needed(reg, ty, &mut slots);
        factors.push(Factor {
            object: node.object.clone(),
            param: node.param,
            indices: slots.into_iter().map(|s| (s.side, s.index)).collect(),
        });
    }
    TensorialTerm { factors }.to_string()
}

/// Pins ports one at a time until the default binding reproduces the
/// intended one.
fn pin_where_needed(reg: &Registry, ty: &ObjectType, slots: &mut [Slot]) {
    loop {
        let mut bound: BTreeSet<&str> =
            slots.iter().filter(|s| s.index.port.is_some()).map(|s| s.port.as_str()).collect();
        let mut wrong = None;
        for (i, s) in slots.iter().enumerate().filter(|(_, s)| s.index.port.is_none()) {
            let pick = ty
                .ports
                .iter()
                .find(|p| !bound.contains(p.id.as_str()) && reg.port_accepts(p, &s.literal, s.side.role()));
            match pick {
                Some(p) if p.id == s.port => {
                    bound.insert(&s.port);
                }
                _ => {
                    wrong = Some(i);
                    break;
                }
            }
        }
        match wrong {
            Some(i) => slots[i].index.port = Some(slots[i].port.clone()),
            None => return,
        }
    }
}
