//! The vocabulary of a composition domain: join types and object types with
//! typed ports.
//!
//! A registry is built during a load phase and then shared read-only
//! (usually behind an [`Arc`](std::sync::Arc)) by every graph built over it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of a join a port sits on. `Out` is the raised (superscript)
/// side, `In` the lowered (subscript) side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Out => Direction::In,
            Direction::In => Direction::Out,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Out => "out",
            Direction::In => "in",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinType {
    pub name: String,
    /// Name of the same join described in the opposite direction.
    pub reverse: String,
    pub is_null: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub id: String,
    #[serde(rename = "join")]
    pub accepts: String,
    #[serde(rename = "dir")]
    pub direction: Direction,
}

impl Port {
    pub fn new(id: impl Into<String>, accepts: impl Into<String>, direction: Direction) -> Self {
        Port { id: id.into(), accepts: accepts.into(), direction }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectType {
    pub name: String,
    /// Whether instances carry an integer parameter, as in `T[3]`.
    pub takes_param: bool,
    /// Ports in declared order. Declared order drives index-to-port binding
    /// and the index order of tensor data.
    pub ports: Vec<Port>,
}

impl ObjectType {
    pub fn port(&self, id: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.id == id)
    }

    pub fn port_index(&self, id: &str) -> Option<usize> {
        self.ports.iter().position(|p| p.id == id)
    }

    /// The complete join: every port of the type.
    pub fn complete_join(&self) -> Vec<&str> {
        self.ports.iter().map(|p| p.id.as_str()).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    joins: BTreeMap<String, JoinType>,
    objects: BTreeMap<String, ObjectType>,
    dims: BTreeMap<String, usize>,
    beam_lengths: BTreeMap<u64, i64>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty registry holding only the null join `0`.
    pub fn with_null() -> Self {
        let mut r = Self::new();
        r.register_join_type("0", "0", true).expect("fresh registry");
        r
    }

    pub fn register_join_type(&mut self, name: &str, reverse: &str, is_null: bool) -> Result<&mut Self> {
        if self.joins.contains_key(name) {
            return Err(Error::DuplicateJoin(name.to_string()));
        }
        if is_null {
            if name != reverse {
                return Err(Error::NullNotSelfReverse(name.to_string()));
            }
            if let Some(existing) = self.null_join() {
                return Err(Error::SecondNullJoin { existing: existing.name.clone(), name: name.to_string() });
            }
        }
        if name != reverse && self.joins.contains_key(reverse) {
            return Err(Error::ReverseConflict { name: name.to_string(), reverse: reverse.to_string() });
        }
        self.joins.insert(name.to_string(), JoinType { name: name.to_string(), reverse: reverse.to_string(), is_null });
        if name != reverse {
            self.joins.insert(
                reverse.to_string(),
                JoinType { name: reverse.to_string(), reverse: name.to_string(), is_null },
            );
        }
        Ok(self)
    }

    pub fn register_object_type(&mut self, name: &str, takes_param: bool, ports: Vec<Port>) -> Result<&mut Self> {
        if self.objects.contains_key(name) {
            return Err(Error::DuplicateObject(name.to_string()));
        }
        for (i, port) in ports.iter().enumerate() {
            let join = self.join(&port.accepts)?;
            if join.is_null {
                return Err(Error::NullPort { object: name.to_string(), port: port.id.clone() });
            }
            if ports[..i].iter().any(|p| p.id == port.id) {
                return Err(Error::DuplicatePort { object: name.to_string(), port: port.id.clone() });
            }
        }
        self.objects.insert(name.to_string(), ObjectType { name: name.to_string(), takes_param, ports });
        Ok(self)
    }

    /// Dimension of the system carried by a join type (circuit backend).
    pub fn set_dim(&mut self, join: &str, dim: usize) -> Result<&mut Self> {
        self.join(join)?;
        self.dims.insert(join.to_string(), dim);
        Ok(self)
    }

    pub fn set_beam_length(&mut self, beam: u64, length: i64) -> &mut Self {
        self.beam_lengths.insert(beam, length);
        self
    }

    pub fn join(&self, name: &str) -> Result<&JoinType> {
        self.joins.get(name).ok_or_else(|| Error::UnknownJoin(name.to_string()))
    }

    pub fn has_join(&self, name: &str) -> bool {
        self.joins.contains_key(name)
    }

    pub fn object(&self, name: &str) -> Result<&ObjectType> {
        self.objects.get(name).ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn joins(&self) -> impl Iterator<Item = &JoinType> {
        self.joins.values()
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectType> {
        self.objects.values()
    }

    pub fn null_join(&self) -> Option<&JoinType> {
        self.joins.values().find(|j| j.is_null)
    }

    /// Reverse of a registered join; unknown names map to themselves.
    pub fn reverse_of<'a>(&'a self, name: &'a str) -> &'a str {
        self.joins.get(name).map(|j| j.reverse.as_str()).unwrap_or(name)
    }

    /// Dimension for a join, falling back to its reverse.
    pub fn dim(&self, join: &str) -> Option<usize> {
        self.dims.get(join).or_else(|| self.dims.get(self.reverse_of(join))).copied()
    }

    pub fn dims(&self) -> &BTreeMap<String, usize> {
        &self.dims
    }

    pub fn beam_lengths(&self) -> &BTreeMap<u64, i64> {
        &self.beam_lengths
    }

    /// Whether an edge of type `join`, seen from an endpoint playing `role`
    /// (`Out` for the superscript end), may bind to `port`. A port declared
    /// as `a`/out equally accepts an `a^R` edge on its `In` end.
    pub fn port_accepts(&self, port: &Port, join: &str, role: Direction) -> bool {
        (port.accepts == join && port.direction == role)
            || (self.reverse_of(&port.accepts) == join && port.direction == role.opposite())
    }

    /// Loads the JSON registry document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: RegistryDoc = serde_json::from_str(text)?;
        doc.into_registry()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let mut seen = std::collections::BTreeSet::new();
        let mut joins = Vec::new();
        for j in self.joins.values() {
            if seen.contains(&j.name) {
                continue;
            }
            seen.insert(j.name.clone());
            seen.insert(j.reverse.clone());
            joins.push(JoinDoc { name: j.name.clone(), reverse: j.reverse.clone(), null: j.is_null });
        }
        let objects: Vec<ObjectDoc> = self
            .objects
            .values()
            .map(|o| ObjectDoc { name: o.name.clone(), params: u8::from(o.takes_param), ports: o.ports.clone() })
            .collect();
        let doc = RegistryDoc {
            joins,
            objects,
            dims: self.dims.clone(),
            beam_lengths: self.beam_lengths.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        };
        serde_json::to_value(doc).expect("registry serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct JoinDoc {
    name: String,
    reverse: String,
    #[serde(default)]
    null: bool,
}

#[derive(Serialize, Deserialize)]
struct ObjectDoc {
    name: String,
    #[serde(default)]
    params: u8,
    #[serde(default)]
    ports: Vec<Port>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryDoc {
    joins: Vec<JoinDoc>,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    dims: BTreeMap<String, usize>,
    #[serde(default, rename = "beamLengths", skip_serializing_if = "BTreeMap::is_empty")]
    beam_lengths: BTreeMap<String, i64>,
}

impl RegistryDoc {
    fn into_registry(self) -> Result<Registry> {
        let mut r = Registry::new();
        for j in &self.joins {
            // both halves of a pair may be listed
            if let Ok(existing) = r.join(&j.name) {
                if existing.reverse == j.reverse && existing.is_null == j.null {
                    continue;
                }
            }
            r.register_join_type(&j.name, &j.reverse, j.null)?;
        }
        if r.null_join().is_none() {
            r.register_join_type("0", "0", true)?;
        }
        for o in self.objects {
            let takes_param = match o.params {
                0 => false,
                1 => true,
                n => return Err(Error::RegistryFormat(format!("object `{}`: params must be 0 or 1, got {n}", o.name))),
            };
            r.register_object_type(&o.name, takes_param, o.ports)?;
        }
        for (join, dim) in self.dims {
            if dim == 0 {
                return Err(Error::RegistryFormat(format!("dimension of `{join}` must be positive")));
            }
            r.set_dim(&join, dim)?;
        }
        for (id, len) in self.beam_lengths {
            let id: u64 = id.parse().map_err(|_| Error::RegistryFormat(format!("beam id `{id}` is not an integer")))?;
            r.set_beam_length(id, len);
        }
        Ok(r)
    }
}
