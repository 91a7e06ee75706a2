//! Labeled unit tiles. The generalized state of a composite is the set of
//! displacements between every pair of tiles that are connected by joins,
//! `((m, n), (dx, dy))`, where the displacement runs from tile `m` to tile
//! `n`. An `x` join from `u` to `v` puts `v` one unit to the right of `u`,
//! a `y` join one unit above.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{fail, Backend, BackendError};
use crate::graph::{CompositeGraph, NodeId};
use crate::registry::Registry;
use crate::tree::{JoinBundle, Leaf};

pub type Offset = (i64, i64);

fn add(a: Offset, b: Offset) -> Offset {
    (a.0 + b.0, a.1 + b.1)
}

fn neg(a: Offset) -> Offset {
    (-a.0, -a.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inconsistency {
    /// Two different displacements were forced for the same pair.
    Conflict { pair: (u64, u64) },
    /// Two distinct tiles ended up at the same position.
    Coincident { pair: (u64, u64) },
}

impl std::fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Inconsistency::Conflict { pair: (m, n) } if m == n => write!(f, "the joins around tile {m} do not close"),
            Inconsistency::Conflict { pair } => write!(f, "tiles {} and {} get two displacements", pair.0, pair.1),
            Inconsistency::Coincident { pair } => write!(f, "tiles {} and {} share a position", pair.0, pair.1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validity {
    Ok,
    Inconsistent(Inconsistency),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileState {
    pairs: BTreeMap<(u64, u64), Offset>,
    validity: Validity,
    labels: BTreeMap<NodeId, u64>,
}

impl TileState {
    pub fn single(node: NodeId, label: u64) -> Self {
        TileState {
            pairs: BTreeMap::from([((label, label), (0, 0))]),
            validity: Validity::Ok,
            labels: BTreeMap::from([(node, label)]),
        }
    }

    pub fn empty() -> Self {
        TileState { pairs: BTreeMap::new(), validity: Validity::Ok, labels: BTreeMap::new() }
    }

    pub fn pairs(&self) -> &BTreeMap<(u64, u64), Offset> {
        &self.pairs
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    pub fn is_consistent(&self) -> bool {
        self.validity == Validity::Ok
    }

    pub fn possible(&self) -> bool {
        self.is_consistent()
    }

    pub fn tile_labels(&self) -> BTreeSet<u64> {
        self.pairs.keys().map(|k| k.0).collect()
    }

    /// Label sets of the connected parts, each sorted, ordered by least label.
    pub fn components(&self) -> Vec<BTreeSet<u64>> {
        let mut out: Vec<BTreeSet<u64>> = Vec::new();
        let mut seen = BTreeSet::new();
        for m in self.tile_labels() {
            if seen.insert(m) {
                let part: BTreeSet<u64> = self.partners(m).collect();
                seen.extend(part.iter().copied());
                out.push(part);
            }
        }
        out
    }

    fn partners(&self, m: u64) -> impl Iterator<Item = u64> + '_ {
        self.pairs.range((m, 0)..=(m, u64::MAX)).map(|(k, _)| k.1)
    }

    /// Displacement from `m` to `n`; `None` across components.
    pub fn displacement(&self, m: u64, n: u64) -> Result<Option<Offset>, BackendError> {
        for t in [m, n] {
            if !self.pairs.contains_key(&(t, t)) {
                return fail(format!("unknown tile label {t}"));
            }
        }
        Ok(self.pairs.get(&(m, n)).copied())
    }

    fn component_of(&self, label: u64) -> Result<Vec<u64>, BackendError> {
        if !self.pairs.contains_key(&(label, label)) {
            return fail(format!("unknown tile label {label}"));
        }
        Ok(self.partners(label).collect())
    }

    fn extent(&self, label: u64, axis: fn(Offset) -> i64) -> Result<i64, BackendError> {
        self.require_consistent()?;
        let values: Vec<i64> = self.component_of(label)?.into_iter().map(|n| axis(self.pairs[&(label, n)])).collect();
        let lo = values.iter().min().expect("component contains its own tile");
        let hi = values.iter().max().expect("component contains its own tile");
        Ok(hi - lo + 1)
    }

    /// Width in tiles of the component containing `label`.
    pub fn width(&self, label: u64) -> Result<i64, BackendError> {
        self.extent(label, |d| d.0)
    }

    pub fn height(&self, label: u64) -> Result<i64, BackendError> {
        self.extent(label, |d| d.1)
    }

    fn require_consistent(&self) -> Result<(), BackendError> {
        match self.validity {
            Validity::Ok => Ok(()),
            Validity::Inconsistent(why) => fail(format!("state is inconsistent: {why}")),
        }
    }

    /// Inserts a displacement and its negation. A clash keeps the value
    /// already present and marks the state inconsistent.
    fn record(&mut self, m: u64, n: u64, d: Offset) {
        for (key, value) in [((m, n), d), ((n, m), neg(d))] {
            match self.pairs.get(&key) {
                Some(&old) if old != value => {
                    if self.validity == Validity::Ok {
                        self.validity = Validity::Inconsistent(Inconsistency::Conflict { pair: (m.min(n), m.max(n)) });
                    }
                }
                Some(_) => {}
                None => {
                    self.pairs.insert(key, value);
                }
            }
        }
    }

    fn check_coincidence(&mut self) {
        if self.validity != Validity::Ok {
            return;
        }
        if let Some((&(m, n), _)) = self.pairs.iter().find(|(&(m, n), &d)| m != n && d == (0, 0)) {
            self.validity = Validity::Inconsistent(Inconsistency::Coincident { pair: (m, n) });
        }
    }

    fn label_of(&self, node: NodeId) -> Result<u64, BackendError> {
        match self.labels.get(&node) {
            Some(&l) => Ok(l),
            None => fail(format!("node {node} is not part of this state")),
        }
    }
}

/// A consistent state in compact form: per component, the least label is
/// the fiducial tile and every tile carries its displacement from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiducialComponent {
    pub fiducial: u64,
    pub positions: BTreeMap<u64, Offset>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiducialState {
    pub components: Vec<FiducialComponent>,
}

pub fn compress(state: &TileState) -> Result<FiducialState, BackendError> {
    state.require_consistent()?;
    let components = state
        .components()
        .into_iter()
        .map(|part| {
            let fiducial = *part.first().expect("components are nonempty");
            let positions = part.iter().map(|&n| (n, state.pairs[&(fiducial, n)])).collect();
            FiducialComponent { fiducial, positions }
        })
        .collect();
    Ok(FiducialState { components })
}

/// Rebuilds all pairwise displacements by subtraction. Node bindings are
/// not part of the compact form, so the result carries none.
pub fn expand(fiducial: &FiducialState) -> TileState {
    let mut pairs = BTreeMap::new();
    for c in &fiducial.components {
        for (&m, &pm) in &c.positions {
            for (&n, &pn) in &c.positions {
                pairs.insert((m, n), (pn.0 - pm.0, pn.1 - pm.1));
            }
        }
    }
    let mut state = TileState { pairs, validity: Validity::Ok, labels: BTreeMap::new() };
    state.check_coincidence();
    state
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryQuery {
    Displacement(u64, u64),
    Width(u64),
    Height(u64),
    Possible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryValue {
    Displacement(Option<Offset>),
    Extent(i64),
    Possible(bool),
}

pub fn geometry(state: &TileState, query: GeometryQuery) -> Result<GeometryValue, BackendError> {
    Ok(match query {
        GeometryQuery::Displacement(m, n) => {
            state.require_consistent()?;
            GeometryValue::Displacement(state.displacement(m, n)?)
        }
        GeometryQuery::Width(t) => GeometryValue::Extent(state.width(t)?),
        GeometryQuery::Height(t) => GeometryValue::Extent(state.height(t)?),
        GeometryQuery::Possible => GeometryValue::Possible(state.possible()),
    })
}

pub struct TileBackend {
    registry: Arc<Registry>,
    offsets: BTreeMap<String, Offset>,
}

impl TileBackend {
    /// Offsets `x = (1, 0)` and `y = (0, 1)`; their reverses are negated.
    pub fn new(registry: Arc<Registry>) -> Self {
        let offsets = BTreeMap::from([("x".to_string(), (1, 0)), ("y".to_string(), (0, 1))]);
        TileBackend { registry, offsets }
    }

    pub fn with_offset(mut self, join: &str, offset: Offset) -> Self {
        self.offsets.insert(join.to_string(), offset);
        self
    }

    pub fn offset(&self, join: &str) -> Option<Offset> {
        if let Some(&d) = self.offsets.get(join) {
            return Some(d);
        }
        self.offsets.get(self.registry.reverse_of(join)).map(|&d| neg(d))
    }
}

impl Backend for TileBackend {
    type State = TileState;

    fn validate(&self, graph: &CompositeGraph) -> Result<(), BackendError> {
        let mut seen = BTreeMap::new();
        for n in graph.nodes() {
            let Some(label) = n.param else {
                return fail(format!("{} {} has no tile label", n.object, n.id));
            };
            if let Some(prev) = seen.insert(label, n.id) {
                return fail(format!("tile label {label} used by both {prev} and {}", n.id));
            }
        }
        for e in graph.edges() {
            if self.offset(&e.join).is_none() {
                return fail(format!("join `{}` has no tile offset", e.join));
            }
        }
        Ok(())
    }

    fn atomic_state(&self, leaf: &Leaf) -> Result<TileState, BackendError> {
        match leaf.param {
            Some(label) => Ok(TileState::single(leaf.node, label)),
            None => fail(format!("{} {} has no tile label", leaf.object, leaf.node)),
        }
    }

    fn join_states(&self, left: &TileState, right: &TileState, bundle: &JoinBundle) -> Result<TileState, BackendError> {
        let mut out = self.disjoint_union(left, right)?;
        for j in bundle.joins() {
            let Some(offset) = self.offset(&j.join) else {
                return fail(format!("join `{}` has no tile offset", j.join));
            };
            let u = left.label_of(j.left.node)?;
            let v = right.label_of(j.right.node)?;
            let near: Vec<(u64, Offset)> = out.partners(u).map(|m| (m, out.pairs[&(m, u)])).collect();
            let far: Vec<(u64, Offset)> = out.partners(v).map(|n| (n, out.pairs[&(v, n)])).collect();
            for &(m, to_u) in &near {
                for &(n, from_v) in &far {
                    out.record(m, n, add(add(to_u, offset), from_v));
                }
            }
        }
        out.check_coincidence();
        Ok(out)
    }

    fn disjoint_union(&self, left: &TileState, right: &TileState) -> Result<TileState, BackendError> {
        let lt = left.tile_labels();
        if let Some(t) = right.tile_labels().iter().find(|t| lt.contains(t)) {
            return fail(format!("tile label {t} appears on both sides"));
        }
        let mut out = left.clone();
        out.pairs.extend(right.pairs.iter().map(|(k, v)| (*k, *v)));
        out.labels.extend(right.labels.iter().map(|(k, v)| (*k, *v)));
        if out.validity == Validity::Ok {
            out.validity = right.validity;
        }
        Ok(out)
    }

    /// Consistent states compare their displacement tables. An
    /// inconsistent state carries no meaningful displacements, and which
    /// defect is met first depends on the order, so only the component
    /// partition is compared.
    fn states_equal(&self, a: &TileState, b: &TileState) -> bool {
        match (a.validity, b.validity) {
            (Validity::Ok, Validity::Ok) => a.pairs == b.pairs,
            (Validity::Inconsistent(_), Validity::Inconsistent(_)) => a.pairs.keys().eq(b.pairs.keys()),
            _ => false,
        }
    }
}
