//! Finite approximations of generalized Ważewski dendrites: iterated
//! refinement for `W_M`, and inverse-limit stages for `W_ω` with the chain γ.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::tree::{Dendrite, NodeId, Order, Point, Subdendrite};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementSchedule {
    orders: Vec<Order>,
    count: u32,
    ratio: Rational,
    depth: u32,
}

impl RefinementSchedule {
    pub fn new(orders: &[Order], count: u32, ratio: Rational, depth: u32) -> Result<Self> {
        let set: BTreeSet<Order> = orders.iter().copied().collect();
        if set.is_empty() {
            return Err(Error::InvalidArgument("the order set is empty".into()));
        }
        if let Some(bad) = set.iter().find(|o| matches!(o, Order::Finite(m) if *m < 3)) {
            return Err(Error::InvalidArgument(format!("order {bad} is not a branching order")));
        }
        if count == 0 {
            return Err(Error::InvalidArgument("insertion count must be at least 1".into()));
        }
        if !(rational::zero() < ratio && ratio < rational::one()) {
            return Err(Error::InvalidArgument("sprout ratio must lie in (0,1)".into()));
        }
        Ok(RefinementSchedule { orders: set.into_iter().collect(), count, ratio, depth })
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn with_depth(&self, depth: u32) -> Self {
        RefinementSchedule { depth, ..self.clone() }
    }
}

/// Depth 0 is the unit arc `0 - 1`. Each level walks the current edges in
/// order and splits every edge `(u, v)` at `i/(k+1)` (`k = count·|M|`, ids
/// assigned in that walk), cycling through `M` for the orders. Sprouts hang
/// off each new node and end in order-1 leaves.
pub fn build_wm(schedule: &RefinementSchedule) -> Result<Dendrite> {
    let mut orders = vec![Order::Finite(1), Order::Finite(1)];
    let mut edges: Vec<(NodeId, NodeId, Rational)> = vec![(0, 1, rational::one())];
    let k = schedule.count as usize * schedule.orders.len();
    for level in 1..=schedule.depth {
        let mut next = Vec::with_capacity(edges.len() * (k + 1) * 2);
        for (u, v, len) in &edges {
            let piece = len / rational::int(k as i64 + 1);
            let sprout = len * &schedule.ratio;
            let mut prev = *u;
            for i in 0..k {
                let order = schedule.orders[i % schedule.orders.len()];
                let id = orders.len();
                orders.push(order);
                next.push((prev, id, piece.clone()));
                let sprouts = match order {
                    Order::Finite(m) => m as usize - 2,
                    Order::Omega => level as usize + 1,
                };
                for _ in 0..sprouts {
                    let leaf = orders.len();
                    orders.push(Order::Finite(1));
                    next.push((id, leaf, sprout.clone()));
                }
                prev = id;
            }
            next.push((prev, *v, piece));
        }
        edges = next;
    }
    Dendrite::new(orders, edges, Some(schedule.depth))
}

/// The point of `fine` at the position of `p` in `coarse`, where `fine` is a
/// refinement of `coarse` (old node ids kept, old edges subdivided).
pub fn relocate_point(coarse: &Dendrite, fine: &Dendrite, p: &Point) -> Result<Point> {
    coarse.check_point(p)?;
    match p {
        Point::Node(u) => Ok(Point::Node(*u)),
        Point::Edge { lo, hi, t } => {
            let e = coarse.edge_between(*lo, *hi).expect("checked");
            let s = t * &coarse.edge(e).len;
            fine.point_toward(&Point::Node(*lo), &Point::Node(*hi), &s)
        }
    }
}

pub fn relocate_subdendrite(k: &Subdendrite, fine: &Arc<Dendrite>) -> Result<Subdendrite> {
    let points = k
        .extremes()
        .iter()
        .map(|p| relocate_point(k.ambient(), fine, p))
        .collect::<Result<Vec<_>>>()?;
    Subdendrite::hull(fine, &points)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BondingFunction {
    pairs: Vec<(Rational, Rational)>,
}

impl BondingFunction {
    pub fn new(pairs: Vec<(Rational, Rational)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (a, b) in &pairs {
            if !(rational::zero() < *a && a < b && *b <= rational::one()) {
                return Err(Error::InvalidArgument(format!(
                    "pair ({}, {}) must satisfy 0 < a < b <= 1",
                    rational::format(a),
                    rational::format(b)
                )));
            }
            if !seen.insert(a.clone()) {
                return Err(Error::InvalidArgument(format!("repeated branch parameter {}", rational::format(a))));
            }
        }
        Ok(BondingFunction { pairs })
    }

    pub fn pairs(&self) -> &[(Rational, Rational)] {
        &self.pairs
    }

    /// Top of the branch of pair `m` in the stage trees for parameter `t`.
    pub fn tip(&self, m: usize, t: &Rational) -> Rational {
        let (a, b) = &self.pairs[m];
        a + (t - a) * (b - a) / (rational::one() - a)
    }

    /// Parameters `t < 1` at which the tip of some pair lands on another branch parameter.
    pub fn tip_hitting_times(&self) -> Vec<Rational> {
        let mut out = BTreeSet::new();
        for (n, (a, b)) in self.pairs.iter().enumerate() {
            for (m, (c, _)) in self.pairs.iter().enumerate() {
                if m == n || c <= a {
                    continue;
                }
                let t = a + (c - a) * (rational::one() - a) / (b - a);
                if t < rational::one() && *c < t {
                    out.insert(t);
                }
            }
        }
        out.into_iter().collect()
    }
}

/// One branch of the stage tree: points whose varying coordinate runs over
/// `(base, top]` (or `[0, top]` for the diagonal).
#[derive(Clone, Debug)]
struct Segment {
    parent: Option<usize>,
    pair: Option<usize>,
    base: Rational,
    top: Rational,
}

/// The stage-`k` tree for parameter `t` as a list of segments in creation order.
fn segments(f: &BondingFunction, t: &Rational, k: u32) -> Vec<Segment> {
    let mut segs = vec![Segment { parent: None, pair: None, base: rational::zero(), top: t.clone() }];
    for _ in 1..k {
        let current = segs.len();
        for s in 0..current {
            for (m, (a, _)) in f.pairs.iter().enumerate() {
                if a >= t {
                    continue;
                }
                let seg = &segs[s];
                let inside = if seg.parent.is_none() {
                    *a <= seg.top
                } else {
                    seg.base < *a && *a <= seg.top
                };
                if inside {
                    segs.push(Segment { parent: Some(s), pair: Some(m), base: a.clone(), top: f.tip(m, t) });
                }
            }
        }
    }
    segs
}

/// A stage tree with, for each segment, its node parameters and ids.
struct Stage {
    tree: Dendrite,
    /// Sorted `(parameter, node)` along each segment; branch segments start at
    /// their attachment node.
    marks: Vec<Vec<(Rational, NodeId)>>,
}

fn realize(f: &BondingFunction, t: &Rational, segs: &[Segment], k: u32) -> Result<Stage> {
    let growth: BTreeSet<&Rational> = f.pairs.iter().map(|(a, _)| a).filter(|a| *a < t).collect();
    let mut orders: Vec<Order> = Vec::new();
    let mut edges = Vec::new();
    let mut marks: Vec<Vec<(Rational, NodeId)>> = Vec::with_capacity(segs.len());
    for (s, seg) in segs.iter().enumerate() {
        let mut params: BTreeSet<Rational> = BTreeSet::new();
        params.insert(seg.top.clone());
        for a in &growth {
            let inside = if seg.parent.is_none() {
                **a <= seg.top
            } else {
                seg.base < **a && **a <= seg.top
            };
            if inside {
                params.insert((*a).clone());
            }
        }
        let mut list = Vec::new();
        match seg.parent {
            None => {
                list.push((rational::zero(), orders.len()));
                orders.push(Order::Finite(1));
                params.remove(&rational::zero());
            }
            Some(p) => {
                let at = marks[p]
                    .iter()
                    .find(|(x, _)| *x == seg.base)
                    .map(|(_, id)| *id)
                    .expect("attachment is a node of the parent");
                list.push((seg.base.clone(), at));
            }
        }
        for x in params {
            let id = orders.len();
            let order = if growth.contains(&x) { Order::Omega } else { Order::Finite(1) };
            orders.push(order);
            let (px, pid) = list.last().unwrap().clone();
            edges.push((pid, id, &x - &px));
            list.push((x, id));
        }
        marks.push(list);
        let _ = s;
    }
    let tree = Dendrite::new(orders, edges, Some(k))?;
    Ok(Stage { tree, marks })
}

/// The stage-`k` tree of the inverse limit of `[0,t]` under `f_t`; node 0 is the 0-sequence.
pub fn inverse_limit_stage(f: &BondingFunction, t: &Rational, k: u32) -> Result<Dendrite> {
    check_stage_args(t, k)?;
    Ok(realize(f, t, &segments(f, t, k), k)?.tree)
}

fn check_stage_args(t: &Rational, k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(rational::zero() < *t && *t <= rational::one()) {
        return Err(Error::InvalidArgument("t must lie in (0,1]".into()));
    }
    Ok(())
}

/// Degree-1 nodes of the stage tree that are growth sites.
pub fn rational_branch_endpoints(f: &BondingFunction, t: &Rational, k: u32) -> Result<Vec<Point>> {
    let w = inverse_limit_stage(f, t, k)?;
    Ok(w.nodes()
        .filter(|&u| w.degree(u) == 1 && w.order(u) == Order::Omega)
        .map(Point::Node)
        .collect())
}

fn point_on_segment(stage: &Stage, s: usize, x: &Rational) -> Result<Point> {
    let list = &stage.marks[s];
    let i = list.partition_point(|(p, _)| p <= x);
    let (p0, u) = &list[i - 1];
    if p0 == x || i == list.len() {
        return Ok(Point::Node(*u));
    }
    let (_, v) = &list[i];
    stage.tree.point_from(*u, *v, &(x - p0))
}

/// `γ(t)` for each grid value, embedded in the `t = 1` stage tree and preceded
/// by the singleton at the 0-sequence.
pub fn gamma_chain(f: &BondingFunction, k: u32, grid: &[Rational]) -> Result<Chain> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if grid.last() != Some(&rational::one()) {
        return Err(Error::InvalidArgument("the grid must end at 1".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] <= rational::zero() {
        return Err(Error::InvalidArgument("the grid must be strictly increasing inside (0,1]".into()));
    }
    let one = rational::one();
    let segs = segments(f, &one, k);
    let stage = realize(f, &one, &segs, k)?;
    let w = Arc::new(stage.tree.clone());
    let mut elements = vec![Subdendrite::singleton(&w, Point::Node(0))?];
    for t in grid {
        let mut present = vec![false; segs.len()];
        let mut tops: Vec<Rational> = vec![rational::zero(); segs.len()];
        let mut points = vec![Point::Node(0)];
        for (s, seg) in segs.iter().enumerate() {
            let (ok, top) = match (seg.parent, seg.pair) {
                (None, _) => (true, t.clone()),
                (Some(p), Some(m)) => {
                    let a = &seg.base;
                    let parent_ok = present[p]
                        && if segs[p].parent.is_none() { *a <= tops[p] } else { segs[p].base < *a && *a <= tops[p] };
                    (parent_ok && a < t, f.tip(m, t))
                }
                _ => unreachable!(),
            };
            if ok {
                present[s] = true;
                points.push(point_on_segment(&stage, s, &top)?);
                tops[s] = top;
            }
        }
        elements.push(Subdendrite::hull(&w, &points)?);
    }
    Chain::new(elements)
}
