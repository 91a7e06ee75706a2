mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use compose_core::backend::circuit::{CircuitBackend, TensorTable};
use compose_core::backend::tile::TileBackend;
use compose_core::notation::{parse_bipartite, parse_tensorial, print_tensorial};
use compose_core::rewrite::{
    alpha_equivalent, canonical_order, canonicalize, certificate, complement_join, enumerate_orders, evaluate,
    factorize, flatten, imply_joins, is_minimal, is_sufficient, order_count, prune, reassemble, reverse_join,
    Bipartition, ImplicationRule, RuleSet,
};
use compose_core::{BundleJoin, CompositeGraph, Direction, Endpoint, Error, NodeId, Port, Registry};

fn two_way_registry() -> Arc<Registry> {
    let mut r = Registry::with_null();
    r.register_join_type("a", "a_R", false).unwrap();
    for name in ["A", "B"] {
        r.register_object_type(
            name,
            false,
            vec![Port::new("o", "a", Direction::Out), Port::new("i", "a", Direction::In)],
        )
        .unwrap();
    }
    Arc::new(r)
}

fn reversal_registry() -> Arc<Registry> {
    let mut r = Registry::with_null();
    r.register_join_type("a", "a_R", false).unwrap();
    r.register_join_type("b", "b_R", false).unwrap();
    r.register_object_type("A", false, vec![Port::new("p", "a", Direction::Out), Port::new("q", "b", Direction::Out)])
        .unwrap();
    r.register_object_type("C", false, vec![Port::new("p", "a", Direction::In), Port::new("r", "a", Direction::Out)])
        .unwrap();
    r.register_object_type("B", false, vec![Port::new("q", "b", Direction::In), Port::new("r", "a", Direction::In)])
        .unwrap();
    Arc::new(r)
}

fn triangle() -> CompositeGraph {
    parse_tensorial(&read_term("triangle.term"), &load_registry("circuit.json")).unwrap()
}

fn squares() -> CompositeGraph {
    parse_tensorial(&read_term("squares.term"), &load_registry("squares.json")).unwrap()
}

fn square_rules() -> RuleSet {
    RuleSet::load(data_path("square-rules.json")).unwrap()
}

#[test]
fn alpha_equivalence_needs_matching_directions() {
    let r = two_way_registry();
    let g1 = parse_tensorial("A^{a1} B_{a1}", &r).unwrap();
    let g2 = parse_tensorial("A_{a1} B^{a1}", &r).unwrap();
    assert!(!alpha_equivalent(&g1, &g2));
    assert!(alpha_equivalent(&g1, &parse_tensorial("B_{a4} A^{a4}", &r).unwrap()));
}

#[test]
fn canonical_forms() {
    let r = load_registry("circuit.json");
    let single = canonicalize(&parse_tensorial("B", &r).unwrap());
    assert_eq!(print_tensorial(&single), "B");
    assert!(single.edges().is_empty());

    let g1 = parse_tensorial("A^{a1} B_{a1} A^{a2} B_{a2} C", &r).unwrap();
    let g2 = parse_tensorial("C B_{a9} A^{a9} B_{a3} A^{a3}", &r).unwrap();
    let (c1, c2) = (canonicalize(&g1), canonicalize(&g2));
    assert_eq!(print_tensorial(&c1), print_tensorial(&c2));
    assert_eq!(certificate(&g1), certificate(&g2));
    assert!(brute_isomorphic(&g1, &g2));
    assert_eq!(print_tensorial(&c1), "A^{a1} B_{a1} A^{a2} B_{a2} C");
    assert_eq!(canonical_order(&g1).len(), 5);
}

#[test]
fn reversal_example_reads_both_ways() {
    let r = reversal_registry();
    let g = parse_tensorial("A^{a1 b2} C_{a1}^{a3} B_{b2 a3}", &r).unwrap();
    let reversed = reverse_join(&g, 1).unwrap();
    let spelled = parse_tensorial("A^{b2}_{~a1} C^{~a1 a3} B_{b2 a3}", &r).unwrap();
    assert!(alpha_equivalent(&reversed, &spelled));
    assert!(alpha_equivalent(&reversed, &g));
    let e = reversed.edge(1).unwrap();
    assert_eq!(e.join, "a_R");
    assert_eq!(e.from.node, NodeId(1));
    let twice = reverse_join(&reversed, 1).unwrap();
    assert_eq!(print_tensorial(&canonicalize(&twice)), print_tensorial(&canonicalize(&g)));
    assert_eq!(twice.edges(), g.edges());
    assert!(matches!(reverse_join(&g, 9), Err(Error::UnknownEdge(9))));
}

#[test]
fn factorize_triangle() {
    let g = triangle();
    let (left, right, bundle) = factorize(&g, &Bipartition::new(&g, [NodeId(0)]).unwrap());
    assert_eq!(left.nodes().len(), 1);
    assert_eq!(right.edges().len(), 1);
    let joins: Vec<&str> = bundle.joins().iter().map(|j| j.join.as_str()).collect();
    assert_eq!(joins, ["a", "b"]);
    assert!(bundle.joins().iter().all(|j| j.left.node == NodeId(0)));

    let (_, _, beta) = factorize(&g, &Bipartition::new(&g, [NodeId(1)]).unwrap());
    assert_eq!(
        beta.joins(),
        [
            BundleJoin {
                join: "a_R".into(),
                left: Endpoint::new(NodeId(1), "p"),
                right: Endpoint::new(NodeId(0), "p")
            },
            BundleJoin { join: "c".into(), left: Endpoint::new(NodeId(1), "r"), right: Endpoint::new(NodeId(2), "s") },
        ]
    );
    assert_eq!(beta.compound_type(), "a_Rc");

    let (l, r, b) = factorize(&g, &Bipartition::new(&g, [NodeId(1)]).unwrap());
    let back = flatten(&reassemble(&l, &r, b).unwrap(), g.registry()).unwrap();
    assert!(alpha_equivalent(&back, &g));
}

#[test]
fn factorize_at_a_gap_is_null() {
    let r = load_registry("circuit.json");
    let g = parse_tensorial("A^{a1} B_{a1} C", &r).unwrap();
    let (_, _, bundle) = factorize(&g, &Bipartition::new(&g, [NodeId(0), NodeId(1)]).unwrap());
    assert!(bundle.is_null());
    assert!(Bipartition::new(&g, []).is_err());
    assert!(Bipartition::new(&g, [NodeId(0), NodeId(1), NodeId(2)]).is_err());
}

#[test]
fn order_counts() {
    let r = load_registry("circuit.json");
    let one = parse_tensorial("A", &r).unwrap();
    assert_eq!(enumerate_orders(&one, 8).unwrap().count(), 1);
    let trees: Vec<_> = enumerate_orders(&triangle(), 8).unwrap().collect();
    assert_eq!(trees.len(), 3);
    let tops: BTreeSet<String> = trees.iter().map(|t| t.shape()).collect();
    assert_eq!(tops.len(), 3);
    let tri4 = compose_core::notation::parse_tensorial_inferred(&read_term("tri.term")).unwrap();
    assert_eq!(enumerate_orders(&tri4, 8).unwrap().count(), 15);
    assert_eq!(order_count(4), 15);
    assert!(matches!(enumerate_orders(&tri4, 3), Err(Error::BoundExceeded { nodes: 4, bound: 3 })));
}

#[test]
fn complements_of_tile_bundles() {
    let reg = load_registry("tiles.json");
    let tile = reg.object("T").unwrap();
    assert_eq!(complement_join(tile, &["right"]).unwrap(), ["left", "top", "bottom"]);
    assert_eq!(complement_join(tile, &[]).unwrap(), ["right", "left", "top", "bottom"]);
    assert!(complement_join(tile, &["right", "left", "top", "bottom"]).unwrap().is_empty());
    assert!(matches!(complement_join(tile, &["side"]), Err(Error::NotOnType { .. })));
}

#[test]
fn pruning_squares() {
    let g = squares();
    let rules = square_rules();
    let keep_a: BTreeSet<String> = ["a".to_string()].into();
    let pruned = prune(&g, &keep_a, &rules).unwrap();
    assert_eq!(print_tensorial(&pruned), "A^{a1} B_{a1}^{a2} C_{a2}");
    let restored = imply_joins(&pruned, &rules).unwrap();
    assert!(alpha_equivalent(&restored, &g));

    let all: BTreeSet<String> = ["a".to_string(), "b".to_string()].into();
    assert_eq!(prune(&g, &all, &rules).unwrap().edges(), g.edges());

    let keep_b: BTreeSet<String> = ["b".to_string()].into();
    assert!(matches!(prune(&g, &keep_b, &rules), Err(Error::PruneLoss(_))));

    assert!(is_sufficient(std::slice::from_ref(&g), &keep_a, &rules));
    assert!(is_minimal(std::slice::from_ref(&g), &keep_a, &rules));
    assert!(!is_minimal(&[g], &all, &rules));
}

#[test]
fn implied_joins() {
    let reg = load_registry("squares.json");
    let chain = parse_tensorial("A^{a1} B_{a1}^{a2} C_{a2}", &reg).unwrap();
    let rules = square_rules();
    let closed = imply_joins(&chain, &rules).unwrap();
    let added = closed.edges().last().unwrap();
    assert_eq!((added.join.as_str(), added.from.node, added.to.node), ("b", NodeId(0), NodeId(2)));
    assert_eq!(imply_joins(&closed, &rules).unwrap().edges(), closed.edges());
    assert_eq!(imply_joins(&chain, &RuleSet::default()).unwrap().edges(), chain.edges());
}

#[test]
fn implied_join_against_a_different_join_is_a_contradiction() {
    let mut r = Registry::with_null();
    for j in ["a", "b", "z"] {
        r.register_join_type(j, &format!("{j}_R"), false).unwrap();
    }
    let mut ports = Vec::new();
    for j in ["a", "b", "z"] {
        ports.push(Port::new(format!("{j}o"), j, Direction::Out));
        ports.push(Port::new(format!("{j}i"), j, Direction::In));
    }
    r.register_object_type("S", false, ports).unwrap();
    let g = parse_tensorial("S^{a1 z3} S_{a1}^{a2} S_{a2 z3}", &Arc::new(r)).unwrap();
    let rules = RuleSet::new(vec![ImplicationRule::new("a", "a", "b")]);
    assert!(matches!(imply_joins(&g, &rules), Err(Error::Contradiction { .. })));
}

#[test]
fn evaluation_examples() {
    let reg = load_registry("circuit.json");
    let table = TensorTable::load(data_path("tensors.json")).unwrap();
    let backend = CircuitBackend::new(reg.clone(), table).unwrap();
    let p = evaluate(&triangle(), &backend, None).unwrap().as_scalar().unwrap();
    // sum over a, b of A[a][b] * B[a][b], since C is the identity
    assert!((p - 0.49).abs() < 1e-12, "{p}");

    let tiles = load_registry("tiles.json");
    let one = parse_tensorial("T[5]", &tiles).unwrap();
    let s = evaluate(&one, &TileBackend::new(tiles.clone()), None).unwrap();
    assert_eq!(s.pairs().len(), 1);
    assert_eq!(s.pairs()[&(5, 5)], (0, 0));

    let order = parse_bipartite("((A, B)@{a: A.p -> B.p}, C)@{b: A.q -> C.q; c: B.r -> C.s}", &reg).unwrap();
    let q = evaluate(&triangle(), &backend, Some(&order)).unwrap().as_scalar().unwrap();
    assert_eq!(p, q);
    let wrong = parse_bipartite("((A, B)@{a: A.p -> B.p}, C)@{b: A.q -> C.q}", &reg).unwrap();
    assert!(matches!(evaluate(&triangle(), &backend, Some(&wrong)), Err(Error::OrderMismatch(_))));
}
