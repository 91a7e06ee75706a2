//! Graphviz export. Arrows run from the out end of each join to its in end;
//! free ports are drawn as small point nodes.

use std::fmt::Write;

use crate::graph::CompositeGraph;
use crate::registry::Direction;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(graph: &CompositeGraph) -> String {
    let mut out = String::from("digraph composite {\n");
    for n in graph.nodes() {
        let label = match n.param {
            Some(p) => format!("{}[{p}]", n.object),
            None => n.object.clone(),
        };
        writeln!(out, "  n{} [label={}];", n.id.0, quote(&label)).expect("writing to a string");
    }
    for e in graph.edges() {
        writeln!(out, "  n{} -> n{} [label={}];", e.from.node.0, e.to.node.0, quote(&e.join))
            .expect("writing to a string");
    }
    for (i, f) in graph.free_ports().iter().enumerate() {
        writeln!(out, "  f{i} [shape=point];").expect("writing to a string");
        let label = format!("{}.{}", f.port, f.join);
        let line = match f.direction {
            Direction::Out => format!("  n{} -> f{i} [label={}];", f.node.0, quote(&label)),
            Direction::In => format!("  f{i} -> n{} [label={}];", f.node.0, quote(&label)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("}\n");
    out
}
