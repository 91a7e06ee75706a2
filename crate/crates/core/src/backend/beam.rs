//! Penrose objects: square cross-section beams joined end to end at right
//! angles. Each beam lives on the integer lattice in units of its width;
//! in its own frame a beam of length `L` fills cells `(i, 0, 0)` for
//! `0 <= i < L`, with the tail at `i = 0` and the head at `i = L - 1`.
//!
//! A join `jXYk` attaches end `Y` of the second beam to end `X` of the
//! first. The second beam's end cell sits just beyond the first beam's end
//! face, and the second beam runs off at a right angle along one of the four
//! side directions `+y, +z, -y, -z` of the first beam, selected by `k`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use super::{fail, Backend, BackendError};
use crate::error::Result;
use crate::graph::{CompositeGraph, NodeId};
use crate::registry::{Direction, Port, Registry};
use crate::tree::{JoinBundle, Leaf};

pub type Vec3 = [i64; 3];

/// A proper rotation of the cube: a signed permutation matrix with
/// determinant one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rotation24(pub [[i8; 3]; 3]);

impl Rotation24 {
    pub const IDENTITY: Rotation24 = Rotation24([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
    /// Quarter turn about x.
    pub const RX: Rotation24 = Rotation24([[1, 0, 0], [0, 0, -1], [0, 1, 0]]);
    /// Quarter turn about z.
    pub const RZ: Rotation24 = Rotation24([[0, -1, 0], [1, 0, 0], [0, 0, 1]]);

    /// The whole group, closed from the two quarter turns, sorted.
    pub fn all() -> &'static [Rotation24] {
        static GROUP: OnceLock<Vec<Rotation24>> = OnceLock::new();
        GROUP.get_or_init(|| {
            let mut found = BTreeSet::from([Rotation24::IDENTITY]);
            let mut frontier = vec![Rotation24::IDENTITY];
            while let Some(r) = frontier.pop() {
                for g in [Rotation24::RX, Rotation24::RZ] {
                    let next = r.mul(&g);
                    if found.insert(next) {
                        frontier.push(next);
                    }
                }
            }
            found.into_iter().collect()
        })
    }

    pub fn mul(&self, other: &Rotation24) -> Rotation24 {
        let mut m = [[0i8; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Rotation24(m)
    }

    pub fn transpose(&self) -> Rotation24 {
        let mut m = [[0i8; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[j][i];
            }
        }
        Rotation24(m)
    }

    pub fn inverse(&self) -> Rotation24 {
        self.transpose()
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let mut out = [0i64; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| i64::from(self.0[i][k]) * v[k]).sum();
        }
        out
    }

    pub fn determinant(&self) -> i64 {
        let m = |i: usize, j: usize| i64::from(self.0[i][j]);
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    }

    /// Quarter turn about the unit axis `k`: `v -> k (k.v) + k x v`.
    fn quarter_turn(k: Vec3) -> Rotation24 {
        let mut m = [[0i8; 3]; 3];
        for (j, e) in [[1, 0, 0], [0, 1, 0], [0, 0, 1]].into_iter().enumerate() {
            let dot: i64 = (0..3).map(|i| k[i] * e[i]).sum();
            let c = cross(k, e);
            for i in 0..3 {
                m[i][j] = (k[i] * dot + c[i]) as i8;
            }
        }
        Rotation24(m)
    }
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(s: i64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

/// Rigid placement of a beam frame: local `p` sits at `rotation p + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pose {
    pub rotation: Rotation24,
    pub translation: Vec3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose { rotation: Rotation24::IDENTITY, translation: [0, 0, 0] };

    pub fn new(rotation: Rotation24, translation: Vec3) -> Self {
        Pose { rotation, translation }
    }

    /// `self` after `other`: first place by `other`, then by `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation.mul(&other.rotation),
            translation: add(self.rotation.apply(other.translation), self.translation),
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.inverse();
        Pose { rotation: rt, translation: scale(-1, rt.apply(self.translation)) }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        add(self.rotation.apply(p), self.translation)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    Head,
    Tail,
}

impl End {
    fn letter(self) -> char {
        match self {
            End::Head => 'H',
            End::Tail => 'T',
        }
    }

    /// Local cell of this end on a beam of length `len`.
    pub fn cell(self, len: i64) -> Vec3 {
        match self {
            End::Head => [len - 1, 0, 0],
            End::Tail => [0, 0, 0],
        }
    }
}

/// A forward right-angle end join.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndJoin {
    pub first: End,
    pub second: End,
    pub twist: u8,
}

impl EndJoin {
    pub fn all() -> Vec<EndJoin> {
        let mut out = Vec::new();
        for first in [End::Head, End::Tail] {
            for second in [End::Head, End::Tail] {
                for twist in 0..4 {
                    out.push(EndJoin { first, second, twist });
                }
            }
        }
        out
    }

    pub fn name(&self) -> String {
        format!("j{}{}{}", self.first.letter(), self.second.letter(), self.twist)
    }

    pub fn parse(name: &str) -> Option<EndJoin> {
        let b = name.as_bytes();
        if b.len() != 4 || b[0] != b'j' {
            return None;
        }
        let end = |c: u8| match c {
            b'H' => Some(End::Head),
            b'T' => Some(End::Tail),
            _ => None,
        };
        let twist = match b[3] {
            c @ b'0'..=b'3' => c - b'0',
            _ => return None,
        };
        Some(EndJoin { first: end(b[1])?, second: end(b[2])?, twist })
    }

    /// Pose of the second beam in the first beam's frame.
    pub fn relative_pose(&self, first_len: i64, second_len: i64) -> Pose {
        let beyond = match self.first {
            End::Head => [first_len, 0, 0],
            End::Tail => [-1, 0, 0],
        };
        let side = [[0, 1, 0], [0, 0, 1], [0, -1, 0], [0, 0, -1]][usize::from(self.twist)];
        // The second beam runs away from its joined end, along +x from a tail
        // and along -x from a head.
        let along = match self.second {
            End::Tail => side,
            End::Head => scale(-1, side),
        };
        let rotation = Rotation24::quarter_turn(cross([1, 0, 0], along));
        Pose { rotation, translation: sub(beyond, rotation.apply(self.second.cell(second_len))) }
    }
}

pub const BEAM_OBJECT: &str = "Beam";

/// The beam vocabulary: sixteen forward joins with their reverses, the null
/// join, and a `Beam` object with an out and an in port for each forward
/// join.
pub fn standard_registry(lengths: &BTreeMap<u64, i64>) -> Result<Registry> {
    let mut reg = Registry::with_null();
    let mut ports = Vec::new();
    for j in EndJoin::all() {
        let name = j.name();
        reg.register_join_type(&name, &format!("{name}_R"), false)?;
        ports.push(Port::new(format!("{name}_out"), name.clone(), Direction::Out));
        ports.push(Port::new(format!("{name}_in"), name, Direction::In));
    }
    reg.register_object_type(BEAM_OBJECT, true, ports)?;
    for (&id, &len) in lengths {
        reg.set_beam_length(id, len);
    }
    Ok(reg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Impossibility {
    /// A closed chain of joins does not come back to where it started.
    CycleMismatch { beam: u64 },
    /// Two beams of one component fill the same cell.
    Overlap { beams: (u64, u64), cell: Vec3 },
}

impl std::fmt::Display for Impossibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Impossibility::CycleMismatch { beam } => write!(f, "joins force two poses for beam {beam}"),
            Impossibility::Overlap { beams, cell } => {
                write!(f, "beams {} and {} overlap at ({}, {}, {})", beams.0, beams.1, cell[0], cell[1], cell[2])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeamValidity {
    Ok,
    Impossible(Impossibility),
}

/// One rigid part: poses relative to the least beam id, which sits at the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeamComponent {
    pub fiducial: u64,
    pub poses: BTreeMap<u64, Pose>,
}

impl BeamComponent {
    fn rebased(poses: BTreeMap<u64, Pose>) -> Self {
        let (&fiducial, base) = poses.iter().next().expect("components are nonempty");
        let back = base.inverse();
        let poses = poses.iter().map(|(&b, p)| (b, back.compose(p))).collect();
        BeamComponent { fiducial, poses }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeamState {
    components: Vec<BeamComponent>,
    lengths: BTreeMap<u64, i64>,
    validity: BeamValidity,
    ids: BTreeMap<NodeId, u64>,
}

impl BeamState {
    pub fn empty() -> Self {
        BeamState { components: Vec::new(), lengths: BTreeMap::new(), validity: BeamValidity::Ok, ids: BTreeMap::new() }
    }

    pub fn components(&self) -> &[BeamComponent] {
        &self.components
    }

    pub fn lengths(&self) -> &BTreeMap<u64, i64> {
        &self.lengths
    }

    pub fn validity(&self) -> BeamValidity {
        self.validity
    }

    /// 1 when the object can be built, 0 otherwise.
    pub fn possible(&self) -> u8 {
        u8::from(self.validity == BeamValidity::Ok)
    }

    pub fn partition(&self) -> Vec<BTreeSet<u64>> {
        self.components.iter().map(|c| c.poses.keys().copied().collect()).collect()
    }

    fn locate(&self, beam: u64) -> Option<(usize, Pose)> {
        self.components.iter().enumerate().find_map(|(i, c)| c.poses.get(&beam).map(|p| (i, *p)))
    }

    fn mark(&mut self, why: Impossibility) {
        if self.validity == BeamValidity::Ok {
            self.validity = BeamValidity::Impossible(why);
        }
    }

    fn check_overlap(&mut self, index: usize) {
        let comp = &self.components[index];
        let mut owner: BTreeMap<Vec3, u64> = BTreeMap::new();
        for (&b, pose) in &comp.poses {
            for i in 0..self.lengths[&b] {
                let cell = pose.apply([i, 0, 0]);
                if let Some(&other) = owner.get(&cell) {
                    self.mark(Impossibility::Overlap { beams: (other, b), cell });
                    return;
                }
                owner.insert(cell, b);
            }
        }
    }
}

pub struct BeamBackend {
    registry: Arc<Registry>,
}

impl BeamBackend {
    pub fn new(registry: Arc<Registry>) -> Self {
        BeamBackend { registry }
    }

    /// Pose of the right beam in the left beam's frame for `join` read
    /// from `left` to `right`.
    pub fn join_pose(&self, join: &str, left_len: i64, right_len: i64) -> Option<Pose> {
        if let Some(j) = EndJoin::parse(join) {
            return Some(j.relative_pose(left_len, right_len));
        }
        let forward = EndJoin::parse(self.registry.reverse_of(join))?;
        Some(forward.relative_pose(right_len, left_len).inverse())
    }

    fn length(&self, beam: u64) -> Result<i64, BackendError> {
        match self.registry.beam_lengths().get(&beam) {
            Some(&len) if len >= 1 => Ok(len),
            Some(&len) => fail(format!("beam {beam} has nonpositive length {len}")),
            None => fail(format!("no length given for beam {beam}")),
        }
    }
}

impl Backend for BeamBackend {
    type State = BeamState;

    fn validate(&self, graph: &CompositeGraph) -> Result<(), BackendError> {
        let mut seen = BTreeMap::new();
        for n in graph.nodes() {
            let Some(id) = n.param else {
                return fail(format!("{} {} has no beam id", n.object, n.id));
            };
            if let Some(prev) = seen.insert(id, n.id) {
                return fail(format!("beam id {id} used by both {prev} and {}", n.id));
            }
            self.length(id)?;
        }
        for e in graph.edges() {
            if self.join_pose(&e.join, 1, 1).is_none() {
                return fail(format!("`{}` is not a beam join", e.join));
            }
        }
        Ok(())
    }

    fn atomic_state(&self, leaf: &Leaf) -> Result<BeamState, BackendError> {
        let Some(id) = leaf.param else {
            return fail(format!("{} {} has no beam id", leaf.object, leaf.node));
        };
        let len = self.length(id)?;
        Ok(BeamState {
            components: vec![BeamComponent { fiducial: id, poses: BTreeMap::from([(id, Pose::IDENTITY)]) }],
            lengths: BTreeMap::from([(id, len)]),
            validity: BeamValidity::Ok,
            ids: BTreeMap::from([(leaf.node, id)]),
        })
    }

    fn join_states(&self, left: &BeamState, right: &BeamState, bundle: &JoinBundle) -> Result<BeamState, BackendError> {
        let mut out = self.disjoint_union(left, right)?;
        for j in bundle.joins() {
            let (Some(&u), Some(&v)) = (left.ids.get(&j.left.node), right.ids.get(&j.right.node)) else {
                return fail(format!("bundle join {} -> {} leaves the states", j.left, j.right));
            };
            let Some(rel) = self.join_pose(&j.join, out.lengths[&u], out.lengths[&v]) else {
                return fail(format!("`{}` is not a beam join", j.join));
            };
            let (cu, pu) = out.locate(u).expect("joined beam is present");
            let (cv, pv) = out.locate(v).expect("joined beam is present");
            let implied = pu.compose(&rel);
            if cu == cv {
                if implied != pv {
                    out.mark(Impossibility::CycleMismatch { beam: v });
                }
                continue;
            }
            let shift = implied.compose(&pv.inverse());
            let moved = out.components[cv].poses.iter().map(|(&b, p)| (b, shift.compose(p))).collect::<Vec<_>>();
            let mut poses = out.components[cu].poses.clone();
            poses.extend(moved);
            let (hi, lo) = (cu.max(cv), cu.min(cv));
            out.components.remove(hi);
            out.components[lo] = BeamComponent::rebased(poses);
            out.components.sort_by_key(|c| c.fiducial);
            let index = out.components.iter().position(|c| c.poses.contains_key(&u)).expect("merged");
            out.check_overlap(index);
        }
        Ok(out)
    }

    fn disjoint_union(&self, left: &BeamState, right: &BeamState) -> Result<BeamState, BackendError> {
        if let Some(b) = right.lengths.keys().find(|b| left.lengths.contains_key(b)) {
            return fail(format!("beam id {b} appears on both sides"));
        }
        let mut out = left.clone();
        out.components.extend(right.components.iter().cloned());
        out.components.sort_by_key(|c| c.fiducial);
        out.lengths.extend(right.lengths.iter().map(|(k, v)| (*k, *v)));
        out.ids.extend(right.ids.iter().map(|(k, v)| (*k, *v)));
        if out.validity == BeamValidity::Ok {
            out.validity = right.validity;
        }
        Ok(out)
    }

    /// Possible states compare their normalized poses. Impossible states
    /// compare only the partition into rigid parts.
    fn states_equal(&self, a: &BeamState, b: &BeamState) -> bool {
        if a.lengths != b.lengths {
            return false;
        }
        match (a.validity, b.validity) {
            (BeamValidity::Ok, BeamValidity::Ok) => a.components == b.components,
            (BeamValidity::Impossible(_), BeamValidity::Impossible(_)) => a.partition() == b.partition(),
            _ => false,
        }
    }
}
