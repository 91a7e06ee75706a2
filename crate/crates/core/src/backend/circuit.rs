//! Probabilistic circuits: the generalized state of an operation is a real
//! tensor with one index per port, and joining is index contraction
//! (a sum over the shared index of products of entries).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{fail, Backend, BackendError};
use crate::error::{Error, Result};
use crate::graph::Endpoint;
use crate::registry::{Direction, Registry};
use crate::tree::{JoinBundle, Leaf};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Tensor table document. Tensors are dense and row-major with index order
/// equal to the object type's declared port order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TensorTable {
    #[serde(default)]
    pub dims: BTreeMap<String, usize>,
    #[serde(default)]
    pub tensors: BTreeMap<String, Tensor>,
}

impl TensorTable {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::RegistryFormat(format!("tensor table: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSpec {
    pub join: String,
    pub dim: usize,
    pub direction: Direction,
    pub binding: Endpoint,
}

/// Free indices and the dense data over them. No indices means a scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitState {
    pub indices: Vec<IndexSpec>,
    pub data: Vec<f64>,
}

impl CircuitState {
    pub fn scalar(value: f64) -> Self {
        CircuitState { indices: Vec::new(), data: vec![value] }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        self.indices.is_empty().then(|| self.data[0])
    }

    pub fn shape(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i.dim).collect()
    }

    /// Reorders the indices to the given endpoint order.
    pub fn permuted(&self, order: &[&Endpoint]) -> Option<CircuitState> {
        if order.len() != self.indices.len() {
            return None;
        }
        let perm: Vec<usize> =
            order.iter().map(|end| self.indices.iter().position(|i| &i.binding == *end)).collect::<Option<_>>()?;
        let old_strides = strides(&self.shape());
        let indices: Vec<IndexSpec> = perm.iter().map(|&p| self.indices[p].clone()).collect();
        let new_shape: Vec<usize> = indices.iter().map(|i| i.dim).collect();
        let total: usize = new_shape.iter().product();
        let mut data = vec![0.0; total];
        let mut coord = vec![0usize; new_shape.len()];
        for slot in data.iter_mut() {
            let off: usize = coord.iter().zip(&perm).map(|(c, &p)| c * old_strides[p]).sum();
            *slot = self.data[off];
            advance(&mut coord, &new_shape);
        }
        Some(CircuitState { indices, data })
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Row-major odometer step.
fn advance(coord: &mut [usize], shape: &[usize]) {
    for i in (0..coord.len()).rev() {
        coord[i] += 1;
        if coord[i] < shape[i] {
            return;
        }
        coord[i] = 0;
    }
}

/// Contracts `a` with `b` over the index pairs; remaining indices of `a`
/// come first, then those of `b`. With no pairs this is the outer product.
pub fn contract(a: &CircuitState, b: &CircuitState, pairs: &[(usize, usize)]) -> CircuitState {
    let sa = strides(&a.shape());
    let sb = strides(&b.shape());
    let a_free: Vec<usize> = (0..a.indices.len()).filter(|i| !pairs.iter().any(|p| p.0 == *i)).collect();
    let b_free: Vec<usize> = (0..b.indices.len()).filter(|i| !pairs.iter().any(|p| p.1 == *i)).collect();
    let out_shape: Vec<usize> =
        a_free.iter().map(|&i| a.indices[i].dim).chain(b_free.iter().map(|&i| b.indices[i].dim)).collect();
    let sum_shape: Vec<usize> = pairs.iter().map(|&(i, _)| a.indices[i].dim).collect();

    let sum_total: usize = sum_shape.iter().product();
    let mut sum_offsets = Vec::with_capacity(sum_total);
    let mut c = vec![0usize; sum_shape.len()];
    for _ in 0..sum_total {
        let oa: usize = pairs.iter().zip(&c).map(|(&(i, _), &k)| k * sa[i]).sum();
        let ob: usize = pairs.iter().zip(&c).map(|(&(_, j), &k)| k * sb[j]).sum();
        sum_offsets.push((oa, ob));
        advance(&mut c, &sum_shape);
    }

    let total: usize = out_shape.iter().product();
    let mut data = Vec::with_capacity(total);
    let mut coord = vec![0usize; out_shape.len()];
    for _ in 0..total {
        let (ca, cb) = coord.split_at(a_free.len());
        let base_a: usize = a_free.iter().zip(ca).map(|(&i, &k)| k * sa[i]).sum();
        let base_b: usize = b_free.iter().zip(cb).map(|(&j, &k)| k * sb[j]).sum();
        let mut acc = 0.0;
        for &(oa, ob) in &sum_offsets {
            acc += a.data[base_a + oa] * b.data[base_b + ob];
        }
        data.push(acc);
        advance(&mut coord, &out_shape);
    }
    let indices =
        a_free.iter().map(|&i| a.indices[i].clone()).chain(b_free.iter().map(|&j| b.indices[j].clone())).collect();
    CircuitState { indices, data }
}

pub struct CircuitBackend {
    registry: Arc<Registry>,
    dims: BTreeMap<String, usize>,
    tensors: BTreeMap<String, Tensor>,
    tolerance: f64,
}

impl CircuitBackend {
    /// Uses the registry's dimensions, extended by those in the table. A
    /// join given two different dimensions is an error.
    pub fn new(registry: Arc<Registry>, table: TensorTable) -> Result<Self> {
        let mut dims = registry.dims().clone();
        for (join, d) in table.dims {
            registry.join(&join)?;
            if d == 0 {
                return Err(Error::RegistryFormat(format!("dimension of `{join}` must be positive")));
            }
            let existing = dims.get(&join).copied().or_else(|| registry.dim(&join));
            if existing.is_some_and(|e| e != d) {
                return Err(Error::RegistryFormat(format!("conflicting dimensions for `{join}`")));
            }
            dims.insert(join, d);
        }
        Ok(CircuitBackend { registry, dims, tensors: table.tensors, tolerance: DEFAULT_TOLERANCE })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn dim(&self, join: &str) -> Option<usize> {
        self.dims.get(join).or_else(|| self.dims.get(self.registry.reverse_of(join))).copied()
    }

    fn index_fits(&self, idx: &IndexSpec, join: &str, role: Direction) -> bool {
        (idx.join == join && idx.direction == role)
            || (self.registry.reverse_of(&idx.join) == join && idx.direction == role.opposite())
    }
}

impl Backend for CircuitBackend {
    type State = CircuitState;

    fn atomic_state(&self, leaf: &Leaf) -> Result<CircuitState, BackendError> {
        let ty = self.registry.object(&leaf.object).map_err(|e| BackendError(e.to_string()))?;
        let Some(tensor) = self.tensors.get(&leaf.object) else {
            return fail(format!("no tensor for object type `{}`", leaf.object));
        };
        let mut indices = Vec::with_capacity(ty.ports.len());
        for p in &ty.ports {
            let Some(dim) = self.dim(&p.accepts) else {
                return fail(format!("no dimension for join `{}`", p.accepts));
            };
            indices.push(IndexSpec {
                join: p.accepts.clone(),
                dim,
                direction: p.direction,
                binding: Endpoint::new(leaf.node, p.id.clone()),
            });
        }
        let expected: Vec<usize> = indices.iter().map(|i| i.dim).collect();
        if tensor.shape != expected {
            return fail(format!(
                "tensor for `{}` has shape {:?}, ports need {:?}",
                leaf.object, tensor.shape, expected
            ));
        }
        let len: usize = expected.iter().product();
        if tensor.data.len() != len {
            return fail(format!("tensor for `{}` has {} entries, shape needs {len}", leaf.object, tensor.data.len()));
        }
        if tensor.data.iter().any(|x| !x.is_finite()) {
            return fail(format!("tensor for `{}` has non-finite entries", leaf.object));
        }
        Ok(CircuitState { indices, data: tensor.data.clone() })
    }

    fn join_states(
        &self,
        left: &CircuitState,
        right: &CircuitState,
        bundle: &JoinBundle,
    ) -> Result<CircuitState, BackendError> {
        let mut pairs = Vec::with_capacity(bundle.len());
        for j in bundle.joins() {
            let Some(li) = left.indices.iter().position(|i| i.binding == j.left) else {
                return fail(format!("{} is not a free index of the left state", j.left));
            };
            let Some(ri) = right.indices.iter().position(|i| i.binding == j.right) else {
                return fail(format!("{} is not a free index of the right state", j.right));
            };
            if !self.index_fits(&left.indices[li], &j.join, Direction::Out)
                || !self.index_fits(&right.indices[ri], &j.join, Direction::In)
            {
                return fail(format!("join `{}` does not pair {} with {}", j.join, j.left, j.right));
            }
            if left.indices[li].dim != right.indices[ri].dim {
                return fail(format!("dimension mismatch between {} and {}", j.left, j.right));
            }
            pairs.push((li, ri));
        }
        Ok(contract(left, right, &pairs))
    }

    fn disjoint_union(&self, left: &CircuitState, right: &CircuitState) -> Result<CircuitState, BackendError> {
        Ok(contract(left, right, &[]))
    }

    fn states_equal(&self, a: &CircuitState, b: &CircuitState) -> bool {
        let order: Vec<&Endpoint> = a.indices.iter().map(|i| &i.binding).collect();
        let Some(b) = b.permuted(&order) else {
            return false;
        };
        a.indices == b.indices && a.data.iter().zip(&b.data).all(|(&x, &y)| rel_close(x, y, self.tolerance))
    }
}

pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    x == y || (x - y).abs() <= tol * x.abs().max(y.abs())
}
