//! Hausdorff distances between subdendrites and chains, open balls cut into
//! edge intervals, and Vietoris basic sets.

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::tree::{Dendrite, EdgeId, NodeId, Point, Subdendrite};

/// A sub-interval of an edge's parameter range `[0,1]` with open or closed ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, t: &Rational) -> bool {
        let above = if self.lo_closed { *t >= self.lo } else { *t > self.lo };
        let below = if self.hi_closed { *t <= self.hi } else { *t < self.hi };
        above && below
    }

    pub fn intersect_closed(&self, a: &Rational, b: &Rational) -> Interval {
        let (lo, lo_closed) = if *a > self.lo || (*a == self.lo && self.lo_closed) {
            (a.clone(), true)
        } else {
            (self.lo.clone(), self.lo_closed)
        };
        let (hi, hi_closed) = if *b < self.hi || (*b == self.hi && self.hi_closed) {
            (b.clone(), true)
        } else {
            (self.hi.clone(), self.hi_closed)
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }

    /// Whether this (possibly empty) interval lies inside the closed `[a,b]`.
    pub fn within_closed(&self, a: &Rational, b: &Rational) -> bool {
        self.is_empty() || (self.lo >= *a && self.hi <= *b)
    }
}

/// Whether the union of `pieces` covers the closed interval `[a,b]`.
pub fn covers(a: &Rational, b: &Rational, pieces: &[Interval]) -> bool {
    let mut cuts = vec![a.clone(), b.clone()];
    for p in pieces.iter().filter(|p| !p.is_empty()) {
        for t in [&p.lo, &p.hi] {
            if t >= a && t <= b {
                cuts.push(t.clone());
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut probes = cuts.clone();
    for w in cuts.windows(2) {
        probes.push(rational::half(&(&w[0] + &w[1])));
    }
    probes.iter().all(|t| pieces.iter().any(|p| p.contains(t)))
}

/// The open ball `B(center, r)` restricted to edge `e`, as parameter intervals.
pub fn ball_on_edge(w: &Dendrite, center: &Point, r: &Rational, e: EdgeId) -> Vec<Interval> {
    let edge = w.edge(e);
    let len = &edge.len;
    let zero = rational::zero();
    let one = rational::one();
    if let Some(tc) = w.param_on(e, center) {
        let reach = r / len;
        let lo = &tc - &reach;
        let hi = &tc + &reach;
        let (lo, lo_closed) = if lo < zero { (zero, true) } else { (lo, false) };
        let (hi, hi_closed) = if hi > one { (one, true) } else { (hi, false) };
        return vec![Interval { lo, hi, lo_closed, hi_closed }];
    }
    let mut out = Vec::new();
    let dl = w.distance_unchecked(center, &Point::Node(edge.lo));
    if *r > dl {
        let hi = (r - &dl) / len;
        let (hi, hi_closed) = if hi > one { (one.clone(), true) } else { (hi, false) };
        out.push(Interval { lo: zero.clone(), hi, lo_closed: true, hi_closed });
    }
    let dh = w.distance_unchecked(center, &Point::Node(edge.hi));
    if *r > dh {
        let lo = &one - (r - &dh) / len;
        let (lo, lo_closed) = if lo < zero { (zero, true) } else { (lo, false) };
        out.push(Interval { lo, hi: one, lo_closed, hi_closed: true });
    }
    out
}

/// `B(center, r) ∩ outer ⊆ inner`, checked edge by edge.
pub fn ball_part_within(
    center: &Point,
    r: &Rational,
    outer: &Subdendrite,
    inner: &Subdendrite,
) -> bool {
    let w = outer.ambient();
    let nodes: Vec<NodeId> = outer
        .nodes()
        .into_iter()
        .filter(|&u| w.distance_unchecked(center, &Point::Node(u)) < *r)
        .collect();
    let edges: Vec<EdgeId> = (0..w.edges().len()).collect();
    ball_part_within_local(center, r, outer, inner, &nodes, &edges)
}

/// As [`ball_part_within`], given the nodes inside the ball and a superset of
/// the edges meeting it.
pub(crate) fn ball_part_within_local(
    center: &Point,
    r: &Rational,
    outer: &Subdendrite,
    inner: &Subdendrite,
    nodes: &[NodeId],
    edges: &[EdgeId],
) -> bool {
    let w = outer.ambient();
    if nodes.iter().any(|&u| outer.contains_node(u) && !inner.contains_node(u)) {
        return false;
    }
    for &e in edges {
        if outer.same_slice(inner, e) {
            continue;
        }
        let Some((a, b)) = outer.slice(e) else { continue };
        let inner_slice = inner.slice(e);
        for piece in ball_on_edge(w, center, r, e) {
            let part = piece.intersect_closed(&a, &b);
            if part.is_empty() {
                continue;
            }
            match &inner_slice {
                Some((c, d)) if part.within_closed(c, d) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Nodes at distance `< r` from node `b`, and the edges touching them.
pub(crate) fn ball_support(w: &Dendrite, b: NodeId, r: &Rational) -> (Vec<NodeId>, Vec<EdgeId>) {
    let mut nodes = vec![b];
    let mut edges = Vec::new();
    let mut stack = vec![(b, usize::MAX, rational::zero())];
    while let Some((u, from, d)) = stack.pop() {
        for &(v, e) in w.incident(u) {
            if v == from {
                continue;
            }
            edges.push(e);
            let dv = &d + &w.edge(e).len;
            if dv < *r {
                nodes.push(v);
                stack.push((v, u, dv));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    (nodes, edges)
}

/// `B(center, r) ⊆ k` in the ambient of `k`.
pub fn ball_within(center: &Point, r: &Rational, k: &Subdendrite) -> bool {
    ball_part_within(center, r, &Subdendrite::whole(k.ambient()), k)
}

/// `max_{p ∈ a} d(p, b)`; the distance to a subtree is convex along geodesics,
/// so the maximum is attained at an extreme of `a`.
pub fn directed_hausdorff(a: &Subdendrite, b: &Subdendrite) -> Result<Rational> {
    a.require_same_ambient(b)?;
    let mut best = rational::zero();
    if a.is_subset(b) {
        return Ok(best);
    }
    for p in a.extremes() {
        if b.contains(p) {
            continue;
        }
        let d = b.distance_to(p)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

pub fn hausdorff(a: &Subdendrite, b: &Subdendrite) -> Result<Rational> {
    Ok(rational::max(&directed_hausdorff(a, b)?, &directed_hausdorff(b, a)?))
}

/// Hausdorff distance between the element sets of two chains.
pub fn hausdorff2(c1: &Chain, c2: &Chain) -> Result<Rational> {
    if !c1.elements()[0].same_ambient(&c2.elements()[0]) {
        return Err(Error::AmbientMismatch);
    }
    let mut table = Vec::with_capacity(c1.len());
    for k in c1.elements() {
        let mut row = Vec::with_capacity(c2.len());
        for l in c2.elements() {
            row.push(hausdorff(k, l)?);
        }
        table.push(row);
    }
    let mut best = rational::zero();
    for row in &table {
        let m = row.iter().min().expect("chains are nonempty");
        best = rational::max(&best, m);
    }
    for j in 0..c2.len() {
        let m = table.iter().map(|row| &row[j]).min().expect("chains are nonempty");
        best = rational::max(&best, m);
    }
    Ok(best)
}

/// `⟨U_1, …, U_n⟩` with every `U_i` an open ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VietorisBasic {
    opens: Vec<(Point, Rational)>,
}

impl VietorisBasic {
    pub fn new(opens: Vec<(Point, Rational)>) -> Result<Self> {
        if opens.is_empty() {
            return Err(Error::InvalidArgument("a Vietoris basic set needs an open".into()));
        }
        if opens.iter().any(|(_, r)| !rational::is_positive(r)) {
            return Err(Error::InvalidArgument("ball radii must be positive".into()));
        }
        Ok(VietorisBasic { opens })
    }

    pub fn opens(&self) -> &[(Point, Rational)] {
        &self.opens
    }
}

/// `k ⊆ ⋃ U_i` and `k ∩ U_i ≠ ∅` for every `i`.
pub fn vietoris_member(k: &Subdendrite, v: &VietorisBasic) -> Result<bool> {
    let w = k.ambient();
    for (c, _) in &v.opens {
        w.check_point(c)?;
    }
    for (c, r) in &v.opens {
        if k.distance_to(c)? >= *r {
            return Ok(false);
        }
    }
    for u in k.nodes() {
        let p = Point::Node(u);
        if !v.opens.iter().any(|(c, r)| w.distance_unchecked(c, &p) < *r) {
            return Ok(false);
        }
    }
    for e in 0..w.edges().len() {
        let Some((a, b)) = k.slice(e) else { continue };
        let pieces: Vec<Interval> = v
            .opens
            .iter()
            .flat_map(|(c, r)| ball_on_edge(w, c, r, e))
            .collect();
        if !covers(&a, &b, &pieces) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest consecutive Hausdorff gap of a nested sequence.
pub fn max_gap(elements: &[Subdendrite]) -> Result<Rational> {
    let mut best = rational::zero();
    for w in elements.windows(2) {
        let h = hausdorff(&w[0], &w[1])?;
        if h > best {
            best = h;
        }
    }
    Ok(best)
}
