//! Generalized-state backends.
//!
//! A backend supplies the state of a single object and the two ways of
//! combining states: along a bundle of joins, and side by side under the
//! null join. All three operations must be pure functions; evaluation over
//! different composition orders relies on nothing else.

pub mod beam;
pub mod circuit;
pub mod tile;

use crate::graph::CompositeGraph;
use crate::tree::{JoinBundle, Leaf};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackendError(pub String);

impl std::fmt::Display for BackendError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BackendError {}

pub(crate) fn fail<T>(msg: impl Into<String>) -> Result<T, BackendError> {
    Err(BackendError(msg.into()))
}

pub trait Backend {
    type State: Clone + std::fmt::Debug;

    /// Checks graph-level preconditions before any folding.
    fn validate(&self, _graph: &CompositeGraph) -> Result<(), BackendError> {
        Ok(())
    }

    fn atomic_state(&self, leaf: &Leaf) -> Result<Self::State, BackendError>;

    fn join_states(
        &self,
        left: &Self::State,
        right: &Self::State,
        bundle: &JoinBundle,
    ) -> Result<Self::State, BackendError>;

    fn disjoint_union(&self, left: &Self::State, right: &Self::State) -> Result<Self::State, BackendError>;

    /// The backend's notion of state equality.
    fn states_equal(&self, a: &Self::State, b: &Self::State) -> bool;
}
