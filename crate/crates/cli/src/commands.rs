use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use compose_core::backend::beam::{BeamBackend, BeamState, BeamValidity};
use compose_core::backend::circuit::{CircuitBackend, CircuitState, TensorTable};
use compose_core::backend::tile::{compress, TileBackend, TileState, Validity};
use compose_core::backend::Backend;
use compose_core::notation::{
    infer_registry, parse_bipartite, parse_tensorial, parse_term, print_bipartite, print_tensorial,
    print_tensorial_literal, to_dot, TensorialTerm,
};
use compose_core::rewrite::{
    alpha_equivalent, canonicalize, default_order, enumerate_orders, evaluate, evaluate_tree, flatten, prune,
    reverse_join, RuleSet,
};
use compose_core::{BipartiteTree, CompositeGraph, Registry};
use serde_json::{json, Value};

use crate::format::{document, num, offset, sig12, vec3};
use crate::{BackendKind, Cli, Command, Failure, Format, Options, Outcome};

type Run = Result<Outcome, Failure>;

struct Input {
    graph: CompositeGraph,
    tree: Option<BipartiteTree>,
}

fn plain(text: String) -> Run {
    Ok(Outcome { text, defective: false })
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Reads every input against one registry: the given one, or else the
/// smallest registry typing all of the inputs together.
fn load_all(opts: &Options, paths: &[&Path]) -> Result<Vec<Input>, Failure> {
    let texts = paths.iter().map(|p| read_text(p)).collect::<Result<Vec<_>, _>>()?;
    let registry = match &opts.registry {
        Some(path) => Arc::new(Registry::load(path)?),
        None => {
            if opts.format == Format::Bipartite {
                return Err(Failure::Usage("bipartite input needs --registry".into()));
            }
            let mut all = TensorialTerm { factors: Vec::new() };
            for t in &texts {
                all.factors.extend(parse_term(t, None)?.factors);
            }
            Arc::new(infer_registry(&all)?)
        }
    };
    texts
        .iter()
        .map(|t| match opts.format {
            Format::Tensorial => Ok(Input { graph: parse_tensorial(t, &registry)?, tree: None }),
            Format::Bipartite => {
                let tree = parse_bipartite(t, &registry)?;
                Ok(Input { graph: flatten(&tree, &registry)?, tree: Some(tree) })
            }
        })
        .collect()
}

fn load(opts: &Options, path: &Path) -> Result<Input, Failure> {
    Ok(load_all(opts, &[path])?.remove(0))
}

fn line(text: String) -> String {
    text + "\n"
}

pub fn run(cli: &Cli) -> Run {
    let o = &cli.opts;
    match &cli.command {
        Command::Parse { input } => parse_cmd(o, input),
        Command::Check { input } => check_cmd(o, input),
        Command::Canon { input } => canon_cmd(o, input),
        Command::Equiv { first, second } => equiv_cmd(o, first, second),
        Command::Reverse { input, label } => reverse_cmd(o, input, *label),
        Command::Orders { input } => orders_cmd(o, input),
        Command::Prune { input, keep, rules } => prune_cmd(o, input, keep, rules.as_deref()),
        Command::Render { input } => render_cmd(o, input),
        Command::Eval { input } => eval_cmd(o, input),
    }
}

fn parse_cmd(o: &Options, path: &Path) -> Run {
    let input = load(o, path)?;
    let text = match o.format {
        Format::Tensorial => print_tensorial(&input.graph),
        Format::Bipartite => {
            let tree = input.tree.or_else(|| default_order(&input.graph)).expect("bipartite input is nonempty");
            print_bipartite(&tree, input.graph.registry())
        }
    };
    if o.json {
        return plain(document("parse", json!({"text": text, "graph": input.graph.to_json_value()})));
    }
    plain(line(text))
}

enum Evaluator {
    Circuit(CircuitBackend),
    Tile(TileBackend),
    Beam(BeamBackend),
}

fn evaluator(o: &Options, registry: &Arc<Registry>) -> Result<Option<Evaluator>, Failure> {
    Ok(match o.backend {
        None => None,
        Some(BackendKind::Circuit) => {
            let path =
                o.tensors.as_ref().ok_or_else(|| Failure::Usage("the circuit backend needs --tensors".into()))?;
            let table = TensorTable::load(path)?;
            Some(Evaluator::Circuit(CircuitBackend::new(registry.clone(), table)?))
        }
        Some(BackendKind::Tile) => Some(Evaluator::Tile(TileBackend::new(registry.clone()))),
        Some(BackendKind::Beam) => Some(Evaluator::Beam(BeamBackend::new(registry.clone()))),
    })
}

fn check_cmd(o: &Options, path: &Path) -> Run {
    let input = load(o, path)?;
    let g = &input.graph;
    let checked = match evaluator(o, g.registry())? {
        None => Ok(()),
        Some(Evaluator::Circuit(b)) => b.validate(g),
        Some(Evaluator::Tile(b)) => b.validate(g),
        Some(Evaluator::Beam(b)) => b.validate(g),
    };
    checked.map_err(|e| Failure::Usage(e.to_string()))?;
    let (nodes, edges, parts, free) = (g.nodes().len(), g.edges().len(), g.components().len(), g.free_ports().len());
    if o.json {
        return plain(document(
            "check",
            json!({"valid": true, "nodes": nodes, "edges": edges, "components": parts, "freePorts": free}),
        ));
    }
    plain(format!("valid: true\nnodes: {nodes}\nedges: {edges}\ncomponents: {parts}\nfree-ports: {free}\n"))
}

fn canon_cmd(o: &Options, path: &Path) -> Run {
    let canon = canonicalize(&load(o, path)?.graph);
    let text = print_tensorial(&canon);
    if o.json {
        return plain(document("canon", json!({"text": text, "graph": canon.to_json_value()})));
    }
    plain(line(text))
}

fn equiv_cmd(o: &Options, first: &Path, second: &Path) -> Run {
    let inputs = load_all(o, &[first, second])?;
    let same = alpha_equivalent(&inputs[0].graph, &inputs[1].graph);
    if o.json {
        return plain(document("equiv", json!({"equivalent": same})));
    }
    plain(format!("equivalent: {same}\n"))
}

fn reverse_cmd(o: &Options, path: &Path, label: u32) -> Run {
    let g = reverse_join(&load(o, path)?.graph, label)?;
    let text = print_tensorial_literal(&g);
    if o.json {
        return plain(document("reverse", json!({"label": label, "text": text, "graph": g.to_json_value()})));
    }
    plain(line(text))
}

/// Evaluates every tree and reports whether all states agree.
fn all_agree<B: Backend>(g: &CompositeGraph, trees: &[BipartiteTree], backend: &B) -> Result<bool, Failure> {
    backend.validate(g).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut first: Option<B::State> = None;
    for t in trees {
        let s = evaluate_tree(t, backend)?;
        match &first {
            None => first = Some(s),
            Some(f) if !backend.states_equal(f, &s) => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

fn orders_cmd(o: &Options, path: &Path) -> Run {
    let g = load(o, path)?.graph;
    let backend = evaluator(o, g.registry())?;
    let canon = print_tensorial(&canonicalize(&g));
    let trees: Vec<BipartiteTree> = enumerate_orders(&g, o.max_nodes)?.collect();
    let mut canonical_equal = true;
    for t in &trees {
        let flat = flatten(t, g.registry())?;
        canonical_equal &= print_tensorial(&canonicalize(&flat)) == canon;
    }
    let states_agree = match &backend {
        None => None,
        Some(b) => Some(match b {
            Evaluator::Circuit(b) => all_agree(&g, &trees, b)?,
            Evaluator::Tile(b) => all_agree(&g, &trees, b)?,
            Evaluator::Beam(b) => all_agree(&g, &trees, b)?,
        }),
    };
    let independent = canonical_equal && states_agree.unwrap_or(true);
    let outcome = |text| Ok(Outcome { text, defective: !independent });
    if o.json {
        return outcome(document(
            "orders",
            json!({
                "orders": trees.len(),
                "canonicalEqual": canonical_equal,
                "statesAgree": states_agree,
                "orderIndependent": independent,
            }),
        ));
    }
    let mut text = format!("orders: {}\ncanonical-equal: {canonical_equal}\n", trees.len());
    if let Some(agree) = states_agree {
        text.push_str(&format!("states-agree: {agree}\n"));
    }
    text.push_str(&format!("order-independent: {independent}\n"));
    outcome(text)
}

fn prune_cmd(o: &Options, path: &Path, keep: &[String], rules: Option<&Path>) -> Run {
    let g = load(o, path)?.graph;
    let rules = match rules {
        Some(p) => RuleSet::load(p)?,
        None => RuleSet::default(),
    };
    let keep: BTreeSet<String> = keep.iter().map(|k| k.trim().to_string()).filter(|k| !k.is_empty()).collect();
    for k in &keep {
        g.registry().join(k)?;
    }
    let pruned = prune(&g, &keep, &rules)?;
    let text = print_tensorial(&pruned);
    let removed = g.edges().len() - pruned.edges().len();
    if o.json {
        return plain(document("prune", json!({"text": text, "removed": removed, "graph": pruned.to_json_value()})));
    }
    plain(line(text))
}

fn render_cmd(o: &Options, path: &Path) -> Run {
    let g = load(o, path)?.graph;
    let dot = to_dot(&g);
    if o.json {
        return plain(document("render", json!({"dot": dot})));
    }
    plain(dot)
}

fn eval_cmd(o: &Options, path: &Path) -> Run {
    let input = load(o, path)?;
    let g = &input.graph;
    let order = input.tree.as_ref();
    match evaluator(o, g.registry())? {
        None => Err(Failure::Usage("eval needs --backend circuit|tile|beam".into())),
        Some(Evaluator::Circuit(b)) => Ok(circuit_report(o, &evaluate(g, &b, order)?)),
        Some(Evaluator::Tile(b)) => tile_report(o, &evaluate(g, &b, order)?),
        Some(Evaluator::Beam(b)) => Ok(beam_report(o, &evaluate(g, &b, order)?)),
    }
}

fn circuit_report(o: &Options, s: &CircuitState) -> Outcome {
    let text = if o.json {
        let indices: Vec<Value> = s
            .indices
            .iter()
            .map(|i| json!({"node": i.binding.node.0, "port": i.binding.port, "join": i.join, "dir": i.direction, "dim": i.dim}))
            .collect();
        document(
            "eval",
            json!({
                "backend": "circuit",
                "indices": indices,
                "shape": s.shape(),
                "data": s.data.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            }),
        )
    } else if let Some(v) = s.as_scalar() {
        format!("value: {}\n", sig12(v))
    } else {
        let idx: Vec<String> = s.indices.iter().map(|i| format!("{}.{}", i.binding.node, i.binding.port)).collect();
        let data: Vec<String> = s.data.iter().map(|&x| sig12(x)).collect();
        format!("indices: {}\nshape: {:?}\ndata: {}\n", idx.join(" "), s.shape(), data.join(" "))
    };
    Outcome { text, defective: false }
}

fn tile_report(o: &Options, s: &TileState) -> Run {
    let reason = match s.validity() {
        Validity::Ok => None,
        Validity::Inconsistent(why) => Some(why.to_string()),
    };
    let fiducial = match reason {
        None => Some(compress(s).map_err(|e| Failure::Internal(e.to_string()))?),
        Some(_) => None,
    };
    let text = if o.json {
        let components: Vec<Value> = fiducial
            .iter()
            .flat_map(|f| &f.components)
            .map(|c| {
                let positions: serde_json::Map<String, Value> =
                    c.positions.iter().map(|(l, &(x, y))| (l.to_string(), json!([x, y]))).collect();
                json!({"fiducial": c.fiducial, "positions": positions})
            })
            .collect();
        document(
            "eval",
            json!({
                "backend": "tile",
                "consistent": reason.is_none(),
                "reason": reason,
                "components": components,
                "partition": s.components(),
            }),
        )
    } else {
        let mut text = String::new();
        match &fiducial {
            Some(f) => {
                for c in &f.components {
                    let parts: Vec<String> = c.positions.iter().map(|(l, &p)| format!("{l}:{}", offset(p))).collect();
                    text.push_str(&format!("component {}: {}\n", c.fiducial, parts.join(" ")));
                }
                text.push_str("consistent: true\n");
            }
            None => {
                text.push_str("consistent: false\n");
                text.push_str(&format!("reason: {}\n", reason.as_deref().unwrap_or_default()));
            }
        }
        text
    };
    Ok(Outcome { text, defective: !s.is_consistent() })
}

fn beam_report(o: &Options, s: &BeamState) -> Outcome {
    let reason = match s.validity() {
        BeamValidity::Ok => None,
        BeamValidity::Impossible(why) => Some(why.to_string()),
    };
    let possible = reason.is_none();
    let rows =
        |r: &compose_core::backend::beam::Rotation24| r.0.iter().map(|row| row.map(i64::from)).collect::<Vec<_>>();
    let text = if o.json {
        let components: Vec<Value> = if possible {
            s.components()
                .iter()
                .map(|c| {
                    let poses: serde_json::Map<String, Value> = c
                        .poses
                        .iter()
                        .map(|(b, p)| {
                            (b.to_string(), json!({"rotation": rows(&p.rotation), "translation": p.translation}))
                        })
                        .collect();
                    json!({"fiducial": c.fiducial, "poses": poses})
                })
                .collect()
        } else {
            Vec::new()
        };
        document(
            "eval",
            json!({
                "backend": "beam",
                "possible": possible,
                "value": s.possible(),
                "reason": reason,
                "components": components,
                "partition": s.partition(),
            }),
        )
    } else {
        let mut text = String::new();
        if possible {
            for c in s.components() {
                text.push_str(&format!("component {}:\n", c.fiducial));
                for (b, p) in &c.poses {
                    let r = rows(&p.rotation);
                    text.push_str(&format!(
                        "  beam {b} (length {}): at {} axes {} {} {}\n",
                        s.lengths()[b],
                        vec3(p.translation),
                        vec3([r[0][0], r[1][0], r[2][0]]),
                        vec3([r[0][1], r[1][1], r[2][1]]),
                        vec3([r[0][2], r[1][2], r[2][2]]),
                    ));
                }
            }
            text.push_str("possible: true\n");
        } else {
            text.push_str("possible: false\n");
            text.push_str(&format!("reason: {}\n", reason.as_deref().unwrap_or_default()));
        }
        text
    };
    Outcome { text, defective: !possible }
}
