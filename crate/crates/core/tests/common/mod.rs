#![allow(dead_code)]

use std::sync::Arc;

use dendrolab_core::backforth::Context;
use dendrolab_core::rational::rat;
use dendrolab_core::wazewski::{build_wm, RefinementSchedule};
use dendrolab_core::{Dendrite, NodeId, Order, Point, Rational, Subdendrite};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn wm(orders: &[Order], ratio: Rational, depth: u32) -> Arc<Dendrite> {
    let s = RefinementSchedule::new(orders, 1, ratio, depth).unwrap();
    Arc::new(build_wm(&s).unwrap())
}

/// `W_3` at depth 3 with sprouts a quarter of their parent edge.
pub fn w3_depth3() -> Arc<Dendrite> {
    wm(&[Order::Finite(3)], rat(1, 4), 3)
}

/// `W_{3,ω}` at depth 3 with sprouts an eighth of their parent edge.
pub fn w3omega_depth3() -> Arc<Dendrite> {
    wm(&[Order::Finite(3), Order::Omega], rat(1, 8), 3)
}

/// A random tree on `n` nodes attached uniformly to earlier nodes, with unit
/// or half edges; node orders are their degrees.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Arc<Dendrite> {
    let mut edges = Vec::new();
    let mut degree = vec![0u32; n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let len = if rng.gen_bool(0.5) { rat(1, 1) } else { rat(1, 2) };
        edges.push((u, v, len));
        degree[u] += 1;
        degree[v] += 1;
    }
    let orders = degree.into_iter().map(Order::Finite).collect();
    Arc::new(Dendrite::new(orders, edges, None).unwrap())
}

/// A node or an edge point at a multiple of 1/8.
pub fn random_point(rng: &mut ChaCha8Rng, w: &Dendrite) -> Point {
    if rng.gen_bool(0.3) {
        return Point::Node(rng.gen_range(0..w.node_count()));
    }
    let e = rng.gen_range(0..w.edges().len());
    w.point_on_edge(e, rat(rng.gen_range(0..=8), 8))
}

pub fn random_subtree(rng: &mut ChaCha8Rng, w: &Arc<Dendrite>, max_points: usize) -> Subdendrite {
    let k = rng.gen_range(1..=max_points);
    let pts: Vec<Point> = (0..k).map(|_| random_point(rng, w)).collect();
    Subdendrite::hull(w, &pts).unwrap()
}

/// All subtrees spanned by nonempty node subsets, deduplicated.
pub fn node_subset_subtrees(w: &Arc<Dendrite>) -> Vec<Subdendrite> {
    let n = w.node_count();
    let mut out: Vec<Subdendrite> = Vec::new();
    for mask in 1u32..(1 << n) {
        let pts: Vec<Point> = (0..n).filter(|i| mask & (1 << i) != 0).map(Point::Node).collect();
        let k = Subdendrite::hull(w, &pts).unwrap();
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn between(w: &Dendrite, a: NodeId, b: NodeId, c: NodeId) -> bool {
    w.node_distance(a, b) + w.node_distance(b, c) == w.node_distance(a, c)
}

/// Labels of a node on one side: ambient order, plus membership or a hitting time.
struct Labels {
    w: Arc<Dendrite>,
    member: Option<Vec<bool>>,
    hits: Option<Vec<usize>>,
    base: Option<NodeId>,
}

fn labels(ctx: &Context) -> (Labels, Labels) {
    match ctx {
        Context::Subcontinua { k1, k2 } => {
            let side = |k: &Subdendrite| Labels {
                w: k.ambient().clone(),
                member: Some(k.ambient().nodes().map(|u| k.contains_node(u)).collect()),
                hits: None,
                base: None,
            };
            (side(k1), side(k2))
        }
        Context::Chains { c1, c2 } => {
            let side = |c: &dendrolab_core::chain::Chain| Labels {
                w: c.ambient().clone(),
                member: None,
                hits: Some(
                    c.ambient()
                        .nodes()
                        .map(|u| c.hitting_time(&Point::Node(u)).unwrap())
                        .collect(),
                ),
                base: c.root().node(),
            };
            (side(c1), side(c2))
        }
    }
}

/// Exhaustive search for a bijection between all branching nodes that keeps
/// orders, labels and betweenness (base points included). Works by plain
/// backtracking over assignments in id order, checking every relation among
/// the assigned nodes as it goes.
pub fn oracle_total(ctx: &Context) -> bool {
    let (l1, l2) = labels(ctx);
    let b1 = l1.w.branching_nodes();
    let b2 = l2.w.branching_nodes();
    if b1.len() != b2.len() {
        return false;
    }
    let mut assigned: Vec<(NodeId, NodeId)> = match (l1.base, l2.base) {
        (Some(x), Some(y)) => vec![(x, y)],
        _ => Vec::new(),
    };
    let mut used = vec![false; l2.w.node_count()];
    fn fits(l1: &Labels, l2: &Labels, assigned: &[(NodeId, NodeId)], s: NodeId, t: NodeId) -> bool {
        if l1.w.order(s) != l2.w.order(t) {
            return false;
        }
        if let (Some(m1), Some(m2)) = (&l1.member, &l2.member) {
            if m1[s] != m2[t] {
                return false;
            }
        }
        if let (Some(h1), Some(h2)) = (&l1.hits, &l2.hits) {
            if assigned.iter().any(|&(a, b)| h1[s].cmp(&h1[a]) != h2[t].cmp(&h2[b])) {
                return false;
            }
        }
        for (i, &(a, fa)) in assigned.iter().enumerate() {
            for &(b, fb) in &assigned[i + 1..] {
                let triples = [
                    (between(&l1.w, a, s, b), between(&l2.w, fa, t, fb)),
                    (between(&l1.w, s, a, b), between(&l2.w, t, fa, fb)),
                    (between(&l1.w, a, b, s), between(&l2.w, fa, fb, t)),
                ];
                if triples.iter().any(|(x, y)| x != y) {
                    return false;
                }
            }
        }
        true
    }
    fn go(l1: &Labels, l2: &Labels, b1: &[NodeId], b2: &[NodeId], assigned: &mut Vec<(NodeId, NodeId)>, used: &mut [bool]) -> bool {
        let Some((&s, rest)) = b1.split_first() else {
            return true;
        };
        for &t in b2 {
            if used[t] || !fits(l1, l2, assigned, s, t) {
                continue;
            }
            used[t] = true;
            assigned.push((s, t));
            if go(l1, l2, rest, b2, assigned, used) {
                return true;
            }
            assigned.pop();
            used[t] = false;
        }
        false
    }
    go(&l1, &l2, &b1, &b2, &mut assigned, &mut used)
}

pub fn shuffled<T: Clone>(rng: &mut ChaCha8Rng, xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.shuffle(rng);
    v
}

pub fn random_arcish(rng: &mut ChaCha8Rng, w: &Arc<Dendrite>, max_points: usize) -> Subdendrite {
    loop {
        let k = random_subtree(rng, w, max_points.max(2));
        if !k.is_degenerate() {
            return k;
        }
    }
}

/// Points of `a` spaced at most `step` apart along every edge piece.
pub fn grid_points(a: &Subdendrite, step: &Rational) -> Vec<Point> {
    let w = a.ambient();
    let mut out: Vec<Point> = a.extremes().to_vec();
    for (e, edge) in w.edges().iter().enumerate() {
        let Some((lo, hi)) = a.slice(e) else { continue };
        let len = (&hi - &lo) * &edge.len;
        let m = (&len / step).ceil().to_integer();
        let m: i64 = m.try_into().unwrap();
        let m = m.max(1);
        for j in 0..=m {
            out.push(w.point_on_edge(e, &lo + (&hi - &lo) * rat(j, m)));
        }
    }
    out
}

/// Hausdorff distance with the sup taken over grid points only.
pub fn grid_hausdorff(a: &Subdendrite, b: &Subdendrite, step: &Rational) -> Rational {
    let one = |x: &Subdendrite, y: &Subdendrite| {
        grid_points(x, step)
            .iter()
            .map(|p| y.distance_to(p).unwrap())
            .max()
            .unwrap()
    };
    let (p, q) = (one(a, b), one(b, a));
    if p > q { p } else { q }
}
