mod common;

use std::collections::BTreeSet;

use common::*;
use compose_core::backend::beam::{Pose, Rotation24};
use compose_core::backend::tile::{compress, expand, TileBackend};
use compose_core::backend::Backend;
use compose_core::notation::{parse_bipartite, parse_tensorial, parse_term, print_bipartite, print_tensorial};
use compose_core::rewrite::{
    alpha_equivalent, canonicalize, default_order, enumerate_orders, evaluate, evaluate_tree, factorize, flatten,
    imply_joins, reassemble, reverse_join, Bipartition, ImplicationRule, RuleSet,
};
use compose_core::{CompositeGraph, NodeId};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn generic(seed: u64, n: usize) -> CompositeGraph {
    let mut rng = rng(seed);
    random_graph(&mut rng, &generic_registry(), n, 2 * n, Params::None)
}

fn tiled(seed: u64, n: usize) -> CompositeGraph {
    let mut rng = rng(seed);
    random_graph(&mut rng, &load_registry("tiles.json"), n, n + 1, Params::Distinct)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse_is_alpha_equivalent(seed in any::<u64>(), n in 1usize..=6) {
        let g = generic(seed, n);
        let text = print_tensorial(&g);
        let back = parse_tensorial(&text, g.registry()).unwrap();
        prop_assert!(alpha_equivalent(&g, &back), "{}", text);
        prop_assert_eq!(print_tensorial(&back), text);
    }

    #[test]
    fn factor_order_does_not_matter(seed in any::<u64>(), n in 1usize..=6) {
        let g = generic(seed, n);
        let mut term = parse_term(&print_tensorial(&g), Some(g.registry())).unwrap();
        term.factors.shuffle(&mut rng(seed ^ 0x5eed));
        let shuffled = parse_tensorial(&term.to_string(), g.registry()).unwrap();
        prop_assert!(alpha_equivalent(&g, &shuffled));
        prop_assert_eq!(print_tensorial(&canonicalize(&shuffled)), print_tensorial(&canonicalize(&g)));
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>(), n in 1usize..=6) {
        let c = canonicalize(&generic(seed, n));
        prop_assert_eq!(print_tensorial(&canonicalize(&c)), print_tensorial(&c));
    }

    #[test]
    fn reversal_is_an_involution(seed in any::<u64>(), n in 2usize..=6, pick in any::<prop::sample::Index>()) {
        let g = generic(seed, n);
        prop_assume!(!g.edges().is_empty());
        let label = g.edges()[pick.index(g.edges().len())].label;
        let once = reverse_join(&g, label).unwrap();
        prop_assert!(alpha_equivalent(&once, &g));
        let twice = reverse_join(&once, label).unwrap();
        prop_assert_eq!(twice.edges(), g.edges());
    }

    #[test]
    fn factorize_then_reassemble(seed in any::<u64>(), n in 2usize..=6, mask in 1u32..63) {
        let g = generic(seed, n);
        let left: Vec<NodeId> = g.node_ids().into_iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, id)| id).collect();
        prop_assume!(!left.is_empty() && left.len() < n);
        let (l, r, bundle) = factorize(&g, &Bipartition::new(&g, left).unwrap());
        prop_assert_eq!(l.edges().len() + r.edges().len() + bundle.len(), g.edges().len());
        let back = flatten(&reassemble(&l, &r, bundle).unwrap(), g.registry()).unwrap();
        prop_assert!(alpha_equivalent(&back, &g));
    }

    #[test]
    fn bipartite_print_round_trips(seed in any::<u64>(), n in 1usize..=5) {
        let g = generic(seed, n);
        let reg = g.registry();
        let tree = default_order(&g).unwrap();
        let text = print_bipartite(&tree, reg);
        let back = parse_bipartite(&text, reg).unwrap();
        prop_assert!(alpha_equivalent(&flatten(&back, reg).unwrap(), &g), "{}", text);
    }

    #[test]
    fn tile_orders_agree(seed in any::<u64>(), n in 1usize..=5, pick in any::<prop::sample::Index>()) {
        let g = tiled(seed, n);
        let backend = TileBackend::new(g.registry().clone());
        let trees: Vec<_> = enumerate_orders(&g, 8).unwrap().collect();
        let a = evaluate(&g, &backend, None).unwrap();
        let b = evaluate_tree(&trees[pick.index(trees.len())], &backend).unwrap();
        prop_assert!(backend.states_equal(&a, &b));
        prop_assert_eq!(a.is_consistent(), tile_positions(&g).is_some());
    }

    #[test]
    fn consistent_tile_states_are_antisymmetric_and_additive(seed in any::<u64>(), n in 1usize..=6) {
        let g = tiled(seed, n);
        let s = evaluate(&g, &TileBackend::new(g.registry().clone()), None).unwrap();
        prop_assume!(s.is_consistent());
        for (&(m, k), &(dx, dy)) in s.pairs() {
            prop_assert_eq!(s.pairs()[&(k, m)], (-dx, -dy));
            for (&(k2, j), &(ex, ey)) in s.pairs() {
                if k2 == k {
                    prop_assert_eq!(s.pairs()[&(m, j)], (dx + ex, dy + ey));
                }
            }
        }
        let round = expand(&compress(&s).unwrap());
        prop_assert_eq!(round.pairs(), s.pairs());
        let parts: BTreeSet<BTreeSet<u64>> = s.components().into_iter().collect();
        let want: BTreeSet<BTreeSet<u64>> = param_components(&g).into_iter().collect();
        prop_assert_eq!(parts, want);
    }

    #[test]
    fn rotations_stay_in_the_group(i in 0usize..24, j in 0usize..24) {
        let all = Rotation24::all();
        let (a, b) = (all[i], all[j]);
        prop_assert!(all.contains(&a.mul(&b)));
        prop_assert!(all.contains(&a.inverse()));
        prop_assert_eq!(a.mul(&a.inverse()), Rotation24::IDENTITY);
        prop_assert_eq!(a.determinant(), 1);
    }

    #[test]
    fn poses_invert(i in 0usize..24, t in prop::array::uniform3(-20i64..20), p in prop::array::uniform3(-20i64..20)) {
        let pose = Pose::new(Rotation24::all()[i], t);
        prop_assert_eq!(pose.compose(&pose.inverse()), Pose::IDENTITY);
        prop_assert_eq!(pose.inverse().apply(pose.apply(p)), p);
    }

    #[test]
    fn implied_joins_reach_a_fixpoint(seed in any::<u64>(), n in 2usize..=6) {
        let g = generic(seed, n);
        let rules = RuleSet::new(vec![ImplicationRule::new("a", "b", "c"), ImplicationRule::new("b", "b", "a")]);
        if let Ok(once) = imply_joins(&g, &rules) {
            prop_assert!(once.edges().len() >= g.edges().len());
            let twice = imply_joins(&once, &rules).unwrap();
            prop_assert_eq!(twice.edges(), once.edges());
        }
    }
}
