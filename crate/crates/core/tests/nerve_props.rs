mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::*;
use dendrolab_core::nerve::*;
use dendrolab_core::rational::rat;
use dendrolab_core::{Order, Rational, Subdendrite};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random tree plus `extra` chords, lengths 1 or 1/2.
fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> MetricGraph {
    let mut edges: Vec<(usize, usize, Rational)> = Vec::new();
    let len = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { rat(1, 1) } else { rat(1, 2) };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let l = len(rng);
        edges.push((u, v, l));
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !edges.iter().any(|(a, b, _)| (*a, *b) == (u, v) || (*a, *b) == (v, u)) {
            let l = len(rng);
            edges.push((u, v, l));
        }
    }
    MetricGraph::new(n, edges).unwrap()
}

/// Edges reached by a random walk of whole edges from a random node.
fn random_subspace(rng: &mut ChaCha8Rng, g: &MetricGraph) -> GraphSubspace {
    let start = rng.gen_range(0..g.node_count());
    let mut reached = vec![start];
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(0..2 * g.edges().len() + 1) {
        let u = reached[rng.gen_range(0..reached.len())];
        let inc = g.incident(u);
        if inc.is_empty() {
            break;
        }
        let (v, e) = inc[rng.gen_range(0..inc.len())];
        if !edges.contains(&e) {
            edges.push(e);
        }
        if !reached.contains(&v) {
            reached.push(v);
        }
    }
    GraphSubspace::new(g, vec![start], edges).unwrap()
}

/// The pieces, glued at shared points, form a connected acyclic graph.
fn is_tree(g: &MetricGraph, t: &GraphTree) -> bool {
    let at = |e: usize, s: &Rational| {
        let edge = &g.edges()[e];
        if *s == rat(0, 1) {
            GPoint::Node(edge.u)
        } else if *s == edge.len {
            GPoint::Node(edge.v)
        } else {
            GPoint::Edge { edge: e, s: s.clone() }
        }
    };
    let mut ids: BTreeMap<GPoint, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    for (e, a, b) in &t.pieces {
        let mut id = |p: GPoint| {
            let n = ids.len();
            *ids.entry(p).or_insert(n)
        };
        let (x, y) = (id(at(*e, a)), id(at(*e, b)));
        edges.push((x.min(y), x.max(y)));
    }
    if edges.is_empty() {
        return true;
    }
    is_tree_nerve(&NerveGraph { vertices: ids.len(), edges })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_subspaces_are_tree_like(seed in any::<u64>(), e in 0usize..3) {
        let eps = [rat(1, 2), rat(1, 4), rat(1, 8)][e].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = wm(&[Order::Finite(3), Order::Omega], rat(1, 4), 2);
        let k = random_subtree(&mut rng, &w, 4);
        let g = Arc::new(MetricGraph::from_subdendrite(&k));
        let r = tree_like_check(&g, &eps).unwrap();
        prop_assert!(r.tree_like);
        prop_assert!(is_tree_nerve(&r.nerve));
        prop_assert!(r.cover.mesh_bound() < eps);
        prop_assert!(r.cover.covers_graph());
    }

    #[test]
    fn graph_tree_approximations(seed in any::<u64>(), n in 1usize..8, extra in 0usize..4, e in 0usize..3) {
        let eps = [rat(1, 2), rat(1, 4), rat(1, 8)][e].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, extra);
        let k = random_subspace(&mut rng, &g);
        let a = tree_approximation_graph(&g, &k, &eps).unwrap();
        prop_assert!(a.hausdorff < eps);
        for (edge, _, _) in &a.tree.pieces {
            prop_assert!(k.edges().contains(edge));
        }
        prop_assert!(is_tree(&g, &a.tree));
    }

    #[test]
    fn subdendrite_tree_approximations(seed in any::<u64>(), e in 0usize..3) {
        let eps = [rat(1, 2), rat(1, 4), rat(1, 8)][e].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
        let k = random_subtree(&mut rng, &w, 5);
        let (t, h) = tree_approximation(&k, &eps).unwrap();
        prop_assert!(t.is_subset(&k));
        prop_assert!(h < eps);
    }

    #[test]
    fn graphs_with_long_cycles_are_not_tree_like(seed in any::<u64>(), n in 3usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // A cycle of n unit edges with random pendant edges.
        let mut edges: Vec<(usize, usize, Rational)> = (0..n).map(|i| (i, (i + 1) % n, rat(1, 1))).collect();
        let pendants = rng.gen_range(0..3);
        for j in 0..pendants {
            edges.push((rng.gen_range(0..n), n + j, rat(1, 2)));
        }
        let g = Arc::new(MetricGraph::new(n + pendants, edges).unwrap());
        let r = tree_like_check(&g, &rat(1, 2)).unwrap();
        prop_assert!(!r.tree_like);
        let mut nodes = r.cycle_nodes.clone();
        nodes.sort_unstable();
        prop_assert_eq!(nodes, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn every_node_subtree_of_small_builds_is_tree_like() {
    for w in [wm(&[Order::Finite(3)], rat(1, 4), 1), wm(&[Order::Omega], rat(1, 4), 1)] {
        for k in node_subset_subtrees(&w) {
            for eps in [rat(1, 2), rat(1, 4), rat(1, 8)] {
                let g = Arc::new(MetricGraph::from_subdendrite(&k));
                assert!(tree_like_check(&g, &eps).unwrap().tree_like);
            }
        }
        let whole = Arc::new(MetricGraph::from_subdendrite(&Subdendrite::whole(&w)));
        assert!(tree_like_check(&whole, &rat(1, 8)).unwrap().tree_like);
    }
}

#[test]
fn unit_square_has_a_cycle_obstruction() {
    let g = Arc::new(
        MetricGraph::new(4, vec![(0, 1, rat(1, 1)), (1, 2, rat(1, 1)), (2, 3, rat(1, 1)), (3, 0, rat(1, 1))]).unwrap(),
    );
    let r = tree_like_check(&g, &rat(1, 2)).unwrap();
    assert!(!r.tree_like);
    assert!(r.cycle.is_some());
    assert_eq!(r.cycle_nodes.len(), 4);
    assert!(tree_like_check(&g, &rat(10, 1)).unwrap().tree_like);
}
