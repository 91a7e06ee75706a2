//! Generators and brute-force oracles shared by the integration tests. The
//! oracles deliberately avoid the library's own algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;
use std::sync::Arc;

use compose_core::backend::circuit::{Tensor, TensorTable};
use compose_core::{CompositeGraph, Direction, Edge, Endpoint, Node, NodeId, Port, Registry};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn load_registry(name: &str) -> Arc<Registry> {
    Arc::new(Registry::load(data_path(name)).expect("data registry loads"))
}

pub fn read_term(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).expect("term file").trim().to_string()
}

/// Three joins and three object types with mixed ports.
pub fn generic_registry() -> Arc<Registry> {
    use Direction::{In, Out};
    let mut r = Registry::with_null();
    for j in ["a", "b", "c"] {
        r.register_join_type(j, &format!("{j}_R"), false).unwrap();
    }
    r.register_object_type(
        "P",
        false,
        vec![Port::new("a1", "a", Out), Port::new("a2", "a", Out), Port::new("b", "b", In), Port::new("c", "c", Out)],
    )
    .unwrap();
    r.register_object_type(
        "Q",
        false,
        vec![Port::new("a", "a", In), Port::new("b", "b", Out), Port::new("ci", "c", In), Port::new("co", "c", Out)],
    )
    .unwrap();
    r.register_object_type(
        "R",
        false,
        vec![Port::new("a", "a", In), Port::new("bi", "b", In), Port::new("bo", "b", Out), Port::new("c", "c", In)],
    )
    .unwrap();
    r.set_dim("a", 2).unwrap();
    r.set_dim("b", 3).unwrap();
    r.set_dim("c", 2).unwrap();
    Arc::new(r)
}

pub fn forward_joins(reg: &Registry) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for j in reg.joins() {
        if j.is_null || seen.contains(&j.name) {
            continue;
        }
        seen.insert(j.name.clone());
        seen.insert(j.reverse.clone());
        out.push(j.name.clone());
    }
    out
}

/// How node parameters are drawn.
#[derive(Clone, Copy)]
pub enum Params {
    None,
    /// Distinct labels, shuffled.
    Distinct,
}

/// A random valid graph with `n` nodes. Up to `attempts` edges are placed
/// between free ports of distinct nodes, and each is stored in a random
/// reading direction.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    reg: &Arc<Registry>,
    n: usize,
    attempts: usize,
    params: Params,
) -> CompositeGraph {
    let types: Vec<String> = reg.objects().map(|o| o.name.clone()).collect();
    let mut labels: Vec<u64> = (1..=n as u64).collect();
    labels.shuffle(rng);
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            id: NodeId(i as u32),
            object: types[rng.gen_range(0..types.len())].clone(),
            param: match params {
                Params::None => None,
                Params::Distinct => Some(labels[i]),
            },
        })
        .collect();
    let joins = forward_joins(reg);
    let mut bound: BTreeSet<Endpoint> = BTreeSet::new();
    let mut edges = Vec::new();
    for _ in 0..attempts {
        let j = &joins[rng.gen_range(0..joins.len())];
        let free = |role: Direction, bound: &BTreeSet<Endpoint>| -> Vec<Endpoint> {
            let mut out = Vec::new();
            for node in &nodes {
                for p in &reg.object(&node.object).unwrap().ports {
                    let end = Endpoint::new(node.id, p.id.clone());
                    if !bound.contains(&end) && reg.port_accepts(p, j, role) {
                        out.push(end);
                    }
                }
            }
            out
        };
        let outs = free(Direction::Out, &bound);
        let ins = free(Direction::In, &bound);
        let Some(from) = outs.choose(rng).cloned() else { continue };
        let ins: Vec<Endpoint> = ins.into_iter().filter(|e| e.node != from.node).collect();
        let Some(to) = ins.choose(rng).cloned() else { continue };
        bound.insert(from.clone());
        bound.insert(to.clone());
        let label = edges.len() as u32 + 1;
        if rng.gen_bool(0.5) {
            edges.push(Edge { label, join: j.clone(), from, to });
        } else {
            edges.push(Edge { label, join: reg.reverse_of(j).to_string(), from: to, to: from });
        }
    }
    CompositeGraph::new(reg.clone(), nodes, edges).expect("generator builds valid graphs")
}

/// Random tensors for every object type, shaped by the registry's dims.
/// Integer entries when `integer` is set.
pub fn random_tensors(rng: &mut ChaCha8Rng, reg: &Registry, integer: bool) -> TensorTable {
    let mut tensors = BTreeMap::new();
    for o in reg.objects() {
        let shape: Vec<usize> = o.ports.iter().map(|p| reg.dim(&p.accepts).unwrap()).collect();
        let len = shape.iter().product();
        let data = (0..len)
            .map(|_| if integer { f64::from(rng.gen_range(-3i32..=4)) } else { rng.gen_range(0.0..1.0) })
            .collect();
        tensors.insert(o.name.clone(), Tensor { shape, data });
    }
    TensorTable { dims: BTreeMap::new(), tensors }
}

/// An edge in orientation-free form: the two ports, sorted, with the join
/// as read leaving the first.
fn edge_key(reg: &Registry, e: &Edge, map: &dyn Fn(NodeId) -> NodeId) -> ((NodeId, String), (NodeId, String), String) {
    let a = (map(e.from.node), e.from.port.clone());
    let b = (map(e.to.node), e.to.port.clone());
    if a <= b {
        (a, b, e.join.clone())
    } else {
        (b, a, reg.reverse_of(&e.join).to_string())
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Isomorphism by trying every node bijection.
pub fn brute_isomorphic(g1: &CompositeGraph, g2: &CompositeGraph) -> bool {
    let reg = g1.registry();
    let (n1, n2) = (g1.nodes(), g2.nodes());
    if n1.len() != n2.len() || g1.edges().len() != g2.edges().len() {
        return false;
    }
    let mut target: Vec<_> = g2.edges().iter().map(|e| edge_key(reg, e, &|n| n)).collect();
    target.sort();
    for perm in permutations(n1.len()) {
        if n1.iter().zip(&perm).any(|(a, &j)| a.object != n2[j].object || a.param != n2[j].param) {
            continue;
        }
        let map = |id: NodeId| n2[perm[n1.iter().position(|n| n.id == id).unwrap()]].id;
        let mut mine: Vec<_> = g1.edges().iter().map(|e| edge_key(reg, e, &map)).collect();
        mine.sort();
        if mine == target {
            return true;
        }
    }
    false
}

/// Full tensor of a circuit graph by summing over every assignment of
/// every index. Free indices are ordered as `graph.free_ports()`.
pub fn einsum_oracle(graph: &CompositeGraph, table: &TensorTable) -> (Vec<Endpoint>, Vec<f64>) {
    let reg = graph.registry();
    let free: Vec<Endpoint> = graph.free_ports().iter().map(|f| Endpoint::new(f.node, f.port.clone())).collect();
    let dim_of = |end: &Endpoint| {
        let node = graph.node(end.node).unwrap();
        let p = reg.object(&node.object).unwrap().port(&end.port).unwrap();
        reg.dim(&p.accepts).unwrap()
    };
    // variables: one per edge, then one per free port
    let mut var_of: BTreeMap<Endpoint, usize> = BTreeMap::new();
    let mut dims = Vec::new();
    for e in graph.edges() {
        var_of.insert(e.from.clone(), dims.len());
        var_of.insert(e.to.clone(), dims.len());
        dims.push(dim_of(&e.from));
    }
    let free_vars: Vec<usize> = free
        .iter()
        .map(|f| {
            var_of.insert(f.clone(), dims.len());
            dims.push(dim_of(f));
            dims.len() - 1
        })
        .collect();
    let out_len: usize = free_vars.iter().map(|&v| dims[v]).product();
    let mut out = vec![0.0; out_len];
    let total: usize = dims.iter().product();
    let mut values = vec![0usize; dims.len()];
    for mut k in 0..total {
        for (i, d) in dims.iter().enumerate().rev() {
            values[i] = k % d;
            k /= d;
        }
        let mut prod = 1.0;
        for node in graph.nodes() {
            let ty = reg.object(&node.object).unwrap();
            let t = &table.tensors[&node.object];
            let mut off = 0;
            for (pi, p) in ty.ports.iter().enumerate() {
                let v = var_of[&Endpoint::new(node.id, p.id.clone())];
                off = off * t.shape[pi] + values[v];
            }
            prod *= t.data[off];
        }
        let mut o = 0;
        for &v in &free_vars {
            o = o * dims[v] + values[v];
        }
        out[o] += prod;
    }
    (free, out)
}

/// Tile positions by breadth-first propagation from the least label of
/// each component. `None` when some edge disagrees with the placement or
/// two tiles share a cell.
pub fn tile_positions(graph: &CompositeGraph) -> Option<BTreeMap<u64, (i64, i64)>> {
    let reg = graph.registry();
    let offset = |join: &str| -> (i64, i64) {
        match join {
            "x" => (1, 0),
            "y" => (0, 1),
            other => {
                let d = match reg.reverse_of(other) {
                    "x" => (1, 0),
                    "y" => (0, 1),
                    _ => panic!("not a tile join"),
                };
                (-d.0, -d.1)
            }
        }
    };
    let label = |id: NodeId| graph.node(id).unwrap().param.unwrap();
    let mut pos: BTreeMap<u64, (i64, i64)> = BTreeMap::new();
    let mut order: Vec<u64> = graph.nodes().iter().map(|n| n.param.unwrap()).collect();
    order.sort();
    for start in order {
        if pos.contains_key(&start) {
            continue;
        }
        pos.insert(start, (0, 0));
        let mut queue = VecDeque::from([start]);
        while let Some(m) = queue.pop_front() {
            for e in graph.edges() {
                let (a, b) = (label(e.from.node), label(e.to.node));
                let d = offset(&e.join);
                let step = if a == m {
                    Some((b, (pos[&m].0 + d.0, pos[&m].1 + d.1)))
                } else if b == m {
                    Some((a, (pos[&m].0 - d.0, pos[&m].1 - d.1)))
                } else {
                    None
                };
                if let Some((n, p)) = step {
                    match pos.get(&n) {
                        Some(&q) if q != p => return None,
                        Some(_) => {}
                        None => {
                            pos.insert(n, p);
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
    }
    Some(pos)
}

/// Components of a graph as sets of node params, by breadth-first search.
pub fn param_components(graph: &CompositeGraph) -> Vec<BTreeSet<u64>> {
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = graph.nodes().iter().map(|n| (n.id, vec![])).collect();
    for e in graph.edges() {
        adj.get_mut(&e.from.node).unwrap().push(e.to.node);
        adj.get_mut(&e.to.node).unwrap().push(e.from.node);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in graph.nodes() {
        if !seen.insert(n.id) {
            continue;
        }
        let mut part = BTreeSet::from([n.param.unwrap()]);
        let mut queue = VecDeque::from([n.id]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[&u] {
                if seen.insert(v) {
                    part.insert(graph.node(v).unwrap().param.unwrap());
                    queue.push_back(v);
                }
            }
        }
        out.push(part);
    }
    out.sort();
    out
}

pub type Mat = [[i64; 3]; 3];

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut m = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn mat_vec(a: &Mat, v: [i64; 3]) -> [i64; 3] {
    let mut out = [0; 3];
    for i in 0..3 {
        for k in 0..3 {
            out[i] += a[i][k] * v[k];
        }
    }
    out
}

/// 4x4 homogeneous matrix placing the second beam in the first beam's
/// frame. The bend is the quarter turn about `k = x cross axis`, so it sends
/// `x -> axis`, `k -> k` and `axis -> -x`; the remaining basis vectors are
/// `+-k` or `+-axis`. The joined end cell lands just past the first beam's
/// end face.
pub fn beam_join_matrix(name: &str, first_len: i64, second_len: i64) -> [[i64; 4]; 4] {
    let b = name.as_bytes();
    let head_first = b[1] == b'H';
    let head_second = b[2] == b'H';
    let twist = usize::from(b[3] - b'0');
    let side: [i64; 3] = [[0, 1, 0], [0, 0, 1], [0, -1, 0], [0, 0, -1]][twist];
    let axis = if head_second { side.map(|v| -v) } else { side };
    let k = [0, -axis[2], axis[1]];
    let image = |e: [i64; 3]| -> [i64; 3] {
        if e == [1, 0, 0] {
            return axis;
        }
        let along_k: i64 = (0..3).map(|i| e[i] * k[i]).sum();
        let along_axis: i64 = (0..3).map(|i| e[i] * axis[i]).sum();
        if along_k != 0 {
            k.map(|v| v * along_k)
        } else {
            [-along_axis, 0, 0]
        }
    };
    let cols = [image([1, 0, 0]), image([0, 1, 0]), image([0, 0, 1])];
    let mut rot: Mat = [[0; 3]; 3];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..3 {
            rot[i][j] = col[i];
        }
    }
    let beyond = if head_first { [first_len, 0, 0] } else { [-1, 0, 0] };
    let end_cell = if head_second { [second_len - 1, 0, 0] } else { [0, 0, 0] };
    let moved = mat_vec(&rot, end_cell);
    let mut h = [[0; 4]; 4];
    for i in 0..3 {
        h[i][..3].copy_from_slice(&rot[i]);
        h[i][3] = beyond[i] - moved[i];
    }
    h[3][3] = 1;
    h
}

pub fn hmul(a: &[[i64; 4]; 4], b: &[[i64; 4]; 4]) -> [[i64; 4]; 4] {
    let mut m = [[0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub const HID: [[i64; 4]; 4] = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
