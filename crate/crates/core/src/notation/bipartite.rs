//! The bipartite notation: nested pairs with their join bundles,
//! `((A, B)@{a: A.p -> B.p}, C)@{b: A.q -> C.q; c: B.r -> C.s}`.
//!
//! A binding names the join, then the out end in the left part and the in
//! end in the right part. Objects are named by type; when a type occurs more
//! than once within a part, `T#2` is its second occurrence there in textual
//! order. A plain term may stand in for a part; it is composed in textual
//! order.

use std::sync::Arc;

use super::tensorial::{build_graph, parse_factors, Factor, TensorialTerm};
use super::{is_join_name, Cursor};
use crate::error::{Error, Result};
use crate::graph::Endpoint;
use crate::registry::Registry;
use crate::rewrite::{default_order, flatten};
use crate::tree::{BipartiteTree, BundleJoin, JoinBundle, Leaf};

struct NameRef {
    name: String,
    nth: Option<usize>,
}

impl std::fmt::Display for NameRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name)?;
        if let Some(k) = self.nth {
            write!(f, "#{k}")?;
        }
        Ok(())
    }
}

struct Binding {
    reversed: bool,
    join: String,
    left: (NameRef, String),
    right: (NameRef, String),
}

enum Item {
    Term(Vec<Factor>),
    Pair(Box<Item>, Box<Item>, Vec<Binding>),
}

fn parse_item(c: &mut Cursor<'_>, registry: &Registry) -> Result<Item> {
    c.skip_ws();
    if c.eat('(') {
        let left = parse_item(c, registry)?;
        c.skip_ws();
        c.expect(',')?;
        let right = parse_item(c, registry)?;
        c.skip_ws();
        c.expect(')')?;
        c.skip_ws();
        c.expect('@')?;
        c.skip_ws();
        let bindings = if c.eat('0') {
            Vec::new()
        } else {
            c.expect('{')?;
            let mut out = vec![parse_binding(c)?];
            loop {
                c.skip_ws();
                if c.eat('}') {
                    break;
                }
                c.expect(';')?;
                out.push(parse_binding(c)?);
            }
            out
        };
        return Ok(Item::Pair(Box::new(left), Box::new(right), bindings));
    }
    let factors = parse_factors(c, Some(registry))?;
    if factors.is_empty() {
        return Err(c.error(format!("expected `(` or an object name, found {}", c.describe())));
    }
    Ok(Item::Term(factors))
}

fn parse_binding(c: &mut Cursor<'_>) -> Result<Binding> {
    c.skip_ws();
    let reversed = c.eat('~');
    let join = c.join_token().ok_or_else(|| c.error(format!("expected a join name, found {}", c.describe())))?;
    c.skip_ws();
    c.expect(':')?;
    let left = parse_end(c)?;
    c.skip_ws();
    if !c.eat_str("->") {
        return Err(c.error(format!("expected `->`, found {}", c.describe())));
    }
    let right = parse_end(c)?;
    Ok(Binding { reversed, join: join.to_string(), left, right })
}

fn parse_end(c: &mut Cursor<'_>) -> Result<(NameRef, String)> {
    c.skip_ws();
    let name = c.name().ok_or_else(|| c.error(format!("expected an object name, found {}", c.describe())))?;
    let nth = if c.eat('#') { Some(c.integer()?) } else { None };
    c.expect('.')?;
    let port = c.port_id().ok_or_else(|| c.error(format!("expected a port id, found {}", c.describe())))?;
    Ok((NameRef { name: name.to_string(), nth }, port.to_string()))
}

fn resolve(leaves: &[&Leaf], name: &NameRef) -> Result<Leaf> {
    let same: Vec<&&Leaf> = leaves.iter().filter(|l| l.object == name.name).collect();
    let hit = match name.nth {
        Some(k) if k >= 1 => same.get(k - 1),
        Some(_) => None,
        None if same.len() == 1 => same.first(),
        None => None,
    };
    hit.map(|l| (**l).clone()).ok_or_else(|| Error::UnresolvedName(name.to_string()))
}

fn to_tree(item: Item, registry: &Arc<Registry>, next_id: &mut u32) -> Result<BipartiteTree> {
    match item {
        Item::Term(factors) => {
            let n = factors.len() as u32;
            let graph = build_graph(&TensorialTerm { factors }, registry, *next_id)?;
            *next_id += n;
            Ok(default_order(&graph).expect("terms are nonempty"))
        }
        Item::Pair(left, right, bindings) => {
            let left = to_tree(*left, registry, next_id)?;
            let right = to_tree(*right, registry, next_id)?;
            let (ll, rl) = (left.leaves(), right.leaves());
            let mut joins = Vec::with_capacity(bindings.len());
            for b in bindings {
                registry.join(&b.join)?;
                let join = if b.reversed { registry.reverse_of(&b.join).to_string() } else { b.join.clone() };
                let l = resolve(&ll, &b.left.0)?;
                let r = resolve(&rl, &b.right.0)?;
                joins.push(BundleJoin {
                    join,
                    left: Endpoint::new(l.node, b.left.1),
                    right: Endpoint::new(r.node, b.right.1),
                });
            }
            Ok(BipartiteTree::join(left, right, JoinBundle::new(joins)))
        }
    }
}

/// Parses a bipartite term into a tree and checks that the tree describes a
/// valid graph.
pub fn parse_bipartite(text: &str, registry: &Arc<Registry>) -> Result<BipartiteTree> {
    let mut c = Cursor::new(text);
    let item = parse_item(&mut c, registry)?;
    c.skip_ws();
    if !c.at_end() {
        return Err(c.error(format!("unexpected {}", c.describe())));
    }
    let mut next_id = 0;
    let tree = to_tree(item, registry, &mut next_id)?;
    flatten(&tree, registry)?;
    Ok(tree)
}

fn leaf_name(leaves: &[&Leaf], node: crate::graph::NodeId) -> String {
    let leaf = leaves.iter().find(|l| l.node == node).expect("bundle ends lie in their subtree");
    let same: Vec<&&Leaf> = leaves.iter().filter(|l| l.object == leaf.object).collect();
    if same.len() == 1 {
        leaf.object.clone()
    } else {
        let k = same.iter().position(|l| l.node == node).expect("present") + 1;
        format!("{}#{k}", leaf.object)
    }
}

pub fn print_bipartite(tree: &BipartiteTree, registry: &Registry) -> String {
    match tree {
        BipartiteTree::Leaf(l) => match l.param {
            Some(p) => format!("{}[{p}]", l.object),
            None => l.object.clone(),
        },
        BipartiteTree::Node { left, right, bundle } => {
            let mut out = format!("({}, {})@", print_bipartite(left, registry), print_bipartite(right, registry));
            if bundle.is_null() {
                out.push('0');
                return out;
            }
            let (ll, rl) = (left.leaves(), right.leaves());
            let parts: Vec<String> = bundle
                .joins()
                .iter()
                .map(|j| {
                    let join = if is_join_name(&j.join) || !is_join_name(registry.reverse_of(&j.join)) {
                        j.join.clone()
                    } else {
                        format!("~{}", registry.reverse_of(&j.join))
                    };
                    format!(
                        "{join}: {}.{} -> {}.{}",
                        leaf_name(&ll, j.left.node),
                        j.left.port,
                        leaf_name(&rl, j.right.node),
                        j.right.port
                    )
                })
                .collect();
            out.push('{');
            out.push_str(&parts.join("; "));
            out.push('}');
            out
        }
    }
}
