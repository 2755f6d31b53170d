//! Maximal order arcs at finite resolution: nested subdendrites from a
//! singleton root to the whole ambient.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fullness::is_full;
use crate::hyperspace::{ball_part_within_local, ball_support, hausdorff, hausdorff2, max_gap};
use crate::rational::{self, Rational};
use crate::tree::{Dendrite, NodeId, Piece, Point, Subdendrite};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    elements: Vec<Subdendrite>,
    mesh: Rational,
}

impl Chain {
    /// Records the largest consecutive Hausdorff gap as the mesh.
    pub fn new(elements: Vec<Subdendrite>) -> Result<Self> {
        Self::validate(&elements)?;
        let mesh = max_gap(&elements)?;
        Ok(Chain { elements, mesh })
    }

    /// Uses `mesh` as the recorded fidelity; every consecutive gap must stay below it.
    pub fn with_mesh(elements: Vec<Subdendrite>, mesh: Rational) -> Result<Self> {
        Self::validate(&elements)?;
        let gap = max_gap(&elements)?;
        if gap > mesh {
            return Err(Error::InvalidChain(format!(
                "consecutive gap {} exceeds the mesh {}",
                rational::format(&gap),
                rational::format(&mesh)
            )));
        }
        Ok(Chain { elements, mesh })
    }

    fn validate(elements: &[Subdendrite]) -> Result<()> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidChain("no elements".into()));
        };
        if !first.is_degenerate() {
            return Err(Error::InvalidChain("the first element is not a singleton".into()));
        }
        if !elements.last().unwrap().is_whole() {
            return Err(Error::InvalidChain("the last element is not the whole space".into()));
        }
        for (i, w) in elements.windows(2).enumerate() {
            if !w[0].same_ambient(&w[1]) {
                return Err(Error::AmbientMismatch);
            }
            if !w[0].is_proper_subset(&w[1]) {
                return Err(Error::InvalidChain(format!(
                    "element {i} is not strictly inside element {}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn elements(&self) -> &[Subdendrite] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mesh(&self) -> &Rational {
        &self.mesh
    }

    pub fn ambient(&self) -> &Arc<Dendrite> {
        self.elements[0].ambient()
    }

    pub fn root(&self) -> Point {
        self.elements[0].extremes()[0].clone()
    }

    /// Least index whose element contains `x`.
    pub fn hitting_time(&self, x: &Point) -> Result<usize> {
        self.ambient().check_point(x)?;
        Ok(self
            .elements
            .iter()
            .position(|k| k.contains(x))
            .expect("the last element is the whole space"))
    }

    /// Nodes sharing the hitting time of `x`.
    pub fn hitting_level(&self, x: &Point) -> Result<Vec<Point>> {
        let i = self.hitting_time(x)?;
        let w = self.ambient();
        let mut out = Vec::new();
        for u in w.nodes() {
            let p = Point::Node(u);
            if self.hitting_time(&p)? == i {
                out.push(p);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WillfulMode {
    AllArcs,
    /// Arcs from the root to every ambient node.
    RootArcs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WillfulWitness {
    #[serde(serialize_with = "crate::io::serialize_point")]
    pub from: Point,
    #[serde(serialize_with = "crate::io::serialize_point")]
    pub to: Point,
    pub i: usize,
    pub j: usize,
}

/// `K ∩ A` for the arc `A` given by its pieces, as an interval of arc length
/// measured from the start of the arc.
fn trace(k: &Subdendrite, pieces: &[Piece]) -> Option<(Rational, Rational)> {
    let w = k.ambient();
    let mut offset = rational::zero();
    let mut hit: Option<(Rational, Rational)> = None;
    for piece in pieces {
        let len = &w.edge(piece.edge).len;
        let span = num_traits::Signed::abs(&(&piece.to - &piece.from)) * len;
        if let Some((a, b)) = k.slice(piece.edge) {
            let (lo, hi) = if piece.from <= piece.to {
                (rational::max(&a, &piece.from), rational::min(&b, &piece.to))
            } else {
                (rational::max(&a, &piece.to), rational::min(&b, &piece.from))
            };
            if lo <= hi {
                let at = |t: &Rational| &offset + num_traits::Signed::abs(&(t - &piece.from)) * len;
                let (x, y) = (at(&lo), at(&hi));
                let (x, y) = if x <= y { (x, y) } else { (y, x) };
                hit = Some(match hit {
                    None => (x, y),
                    Some((p, q)) => (rational::min(&p, &x), rational::max(&q, &y)),
                });
            }
        }
        offset += span;
    }
    hit
}

fn arc_violation(elements: &[Subdendrite], from: &Point, to: &Point) -> Option<(usize, usize)> {
    let w = elements[0].ambient();
    let pieces = w.path_pieces(from, to);
    let full = w.distance_unchecked(from, to);
    for i in 0..elements.len().saturating_sub(1) {
        let (k, l) = (&elements[i], &elements[i + 1]);
        // K ∩ A = A exactly when K holds both ends
        if k.contains(from) && k.contains(to) {
            break;
        }
        // a change on a whole-edge piece changes K ∩ A
        let whole_piece = |p: &Piece| p.from.is_zero() && p.to.is_one() || p.from.is_one() && p.to.is_zero();
        if pieces.iter().any(|p| whole_piece(p) && !k.same_slice(l, p.edge)) {
            continue;
        }
        let Some((a, b)) = trace(k, &pieces) else { continue };
        if !(a.is_zero() && b == full) && trace(l, &pieces) == Some((a, b)) {
            return Some((i, i + 1));
        }
    }
    None
}

fn arcs(w: &Dendrite, root: &Point, mode: WillfulMode) -> Vec<(Point, Point)> {
    match mode {
        WillfulMode::AllArcs => {
            let mut out = Vec::new();
            for u in w.nodes() {
                for v in u + 1..w.node_count() {
                    out.push((Point::Node(u), Point::Node(v)));
                }
            }
            out
        }
        WillfulMode::RootArcs => w
            .nodes()
            .map(Point::Node)
            .filter(|p| p != root)
            .map(|p| (root.clone(), p))
            .collect(),
    }
}

/// Every boundary point of `k` (an end of a slice short of the edge's far
/// node) is pushed further by `l`. This is willfulness over all arcs for the
/// step `k ⊆ l`: an arc met properly by `k` leaves it through such a point.
fn exits_grow(k: &Subdendrite, l: &Subdendrite) -> bool {
    let w = k.ambient();
    (0..w.edges().len()).all(|e| match (k.slice(e), l.slice(e)) {
        (None, _) => true,
        (Some((a, b)), Some((a2, b2))) => {
            (a.is_zero() || a2 < a) && (b.is_one() || b2 > b)
        }
        (Some(_), None) => false,
    })
}

/// Willfulness over all arcs for the single step `k ⊆ l`, without enumerating arcs.
pub fn step_is_willful(k: &Subdendrite, l: &Subdendrite) -> bool {
    exits_grow(k, l)
}

/// The first arc (in id order) on which some element stalls. All arcs are
/// screened step by step first; the enumeration only runs to name a witness.
pub fn willful_violation(c: &Chain, mode: WillfulMode) -> Option<WillfulWitness> {
    if mode == WillfulMode::AllArcs && c.elements().windows(2).all(|p| exits_grow(&p[0], &p[1])) {
        return None;
    }
    willful_violation_exhaustive(c, mode)
}

/// Plain enumeration over the arcs of `mode`, then `i`, then `j`.
pub fn willful_violation_exhaustive(c: &Chain, mode: WillfulMode) -> Option<WillfulWitness> {
    for (from, to) in arcs(c.ambient(), &c.root(), mode) {
        if let Some((i, j)) = arc_violation(c.elements(), &from, &to) {
            return Some(WillfulWitness { from, to, i, j });
        }
    }
    None
}

pub fn is_willful(c: &Chain, mode: WillfulMode) -> bool {
    willful_violation(c, mode).is_none()
}

/// Willfulness of the single step `k ⊊ l` for a root lying in `k`.
pub fn pair_is_willful(root: &Point, k: &Subdendrite, l: &Subdendrite, mode: WillfulMode) -> bool {
    let pair = [k.clone(), l.clone()];
    arcs(k.ambient(), root, mode)
        .iter()
        .all(|(from, to)| arc_violation(&pair, from, to).is_none())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenericReport {
    /// (i) the root is an ambient endpoint.
    pub root_endpoint: bool,
    /// (ii) every step leaves new material within epsilon of each branching node.
    pub nowhere_dense_steps: bool,
    /// (iii) no element has two extremes at ambient branching nodes.
    pub branch_extremes: bool,
    /// (iv) willful, tested on root arcs.
    pub willful: bool,
    /// First offending `(step, node)` for (ii).
    pub dense_failure: Option<(usize, NodeId)>,
    /// Elements violating (iii).
    pub branch_extreme_failures: Vec<usize>,
    pub willful_witness: Option<WillfulWitness>,
}

impl GenericReport {
    pub fn passed(&self) -> bool {
        self.root_endpoint && self.nowhere_dense_steps && self.branch_extremes && self.willful
    }

    /// Index of the first failing condition, as used in error messages.
    pub fn first_failure(&self) -> Option<&'static str> {
        [
            (self.root_endpoint, "i"),
            (self.nowhere_dense_steps, "ii"),
            (self.branch_extremes, "iii"),
            (self.willful, "iv"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

fn root_is_endpoint(c: &Chain) -> bool {
    let w = c.ambient();
    matches!(c.root(), Point::Node(u) if w.degree(u) == 1 && w.is_endpoint(u))
}

/// First step `(i, b)` with `B(b, ε) ∩ K_{i+1} ⊆ K_i` for a branching node `b ∈ K_i`.
fn dense_failure(c: &Chain, epsilon: &Rational) -> Option<(usize, NodeId)> {
    let w = c.ambient();
    let support: Vec<(NodeId, Vec<NodeId>, Vec<usize>)> = w
        .branching_nodes()
        .into_iter()
        .map(|b| {
            let (nodes, edges) = ball_support(w, b, epsilon);
            (b, nodes, edges)
        })
        .collect();
    for (i, pair) in c.elements().windows(2).enumerate() {
        for (b, nodes, edges) in &support {
            if pair[0].contains_node(*b)
                && ball_part_within_local(&Point::Node(*b), epsilon, &pair[1], &pair[0], nodes, edges)
            {
                return Some((i, *b));
            }
        }
    }
    None
}

fn branching_extremes(k: &Subdendrite) -> Vec<NodeId> {
    let w = k.ambient();
    k.extremes()
        .iter()
        .filter_map(Point::node)
        .filter(|&u| w.is_branching(u))
        .collect()
}

pub fn check_generic_conditions(c: &Chain, epsilon: &Rational) -> Result<GenericReport> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let dense = dense_failure(c, epsilon);
    let branch_extreme_failures: Vec<usize> = c
        .elements()
        .iter()
        .enumerate()
        .filter(|(_, k)| branching_extremes(k).len() > 1)
        .map(|(i, _)| i)
        .collect();
    let witness = willful_violation(c, WillfulMode::RootArcs);
    Ok(GenericReport {
        root_endpoint: root_is_endpoint(c),
        nowhere_dense_steps: dense.is_none(),
        branch_extremes: branch_extreme_failures.is_empty(),
        willful: witness.is_none(),
        dense_failure: dense,
        branch_extreme_failures,
        willful_witness: witness,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaReport {
    pub root_endpoint: bool,
    pub nowhere_dense_steps: bool,
    /// Elements with a branching extreme have all extremes at branching nodes
    /// or ambient endpoints, and every point lies within epsilon of a branching extreme.
    pub branch_endpoint_density: bool,
    pub willful: bool,
    pub density_failures: Vec<usize>,
}

impl OmegaReport {
    pub fn passed(&self) -> bool {
        self.root_endpoint && self.nowhere_dense_steps && self.branch_endpoint_density && self.willful
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        [
            (self.root_endpoint, "i"),
            (self.nowhere_dense_steps, "ii"),
            (self.branch_endpoint_density, "iii"),
            (self.willful, "iv"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

/// `max_{p ∈ K} min_{s ∈ S} d(p, s)`: attained at a node, an extreme of `K`,
/// or a midpoint between two points of `S`.
fn covering_radius(k: &Subdendrite, s: &[Point]) -> Rational {
    let w = k.ambient();
    let mut probes: Vec<Point> = k.nodes().into_iter().map(Point::Node).collect();
    probes.extend(k.extremes().iter().cloned());
    for (i, a) in s.iter().enumerate() {
        for b in &s[i + 1..] {
            let half = rational::half(&w.distance_unchecked(a, b));
            if let Ok(m) = w.point_toward(a, b, &half) {
                if k.contains(&m) {
                    probes.push(m);
                }
            }
        }
    }
    probes
        .iter()
        .map(|p| s.iter().map(|q| w.distance_unchecked(p, q)).min().expect("nonempty"))
        .max()
        .unwrap_or_else(rational::zero)
}

fn density_ok(k: &Subdendrite, epsilon: &Rational) -> bool {
    let w = k.ambient();
    let eb: Vec<Point> = branching_extremes(k).into_iter().map(Point::Node).collect();
    if eb.is_empty() {
        return true;
    }
    let others_ok = k.extremes().iter().all(|x| match x {
        Point::Node(u) => w.is_branching(*u) || w.is_endpoint(*u),
        Point::Edge { .. } => false,
    });
    others_ok && covering_radius(k, &eb) < *epsilon
}

/// The conditions used for chains on ω-ambients.
pub fn check_omega_conditions(c: &Chain, epsilon: &Rational) -> Result<OmegaReport> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let density_failures: Vec<usize> = c
        .elements()
        .iter()
        .enumerate()
        .filter(|(_, k)| !density_ok(k, epsilon))
        .map(|(i, _)| i)
        .collect();
    Ok(OmegaReport {
        root_endpoint: root_is_endpoint(c),
        nowhere_dense_steps: dense_failure(c, epsilon).is_none(),
        branch_endpoint_density: density_failures.is_empty(),
        willful: is_willful(c, WillfulMode::RootArcs),
        density_failures,
    })
}

/// Every nondegenerate element is full.
pub fn check_full_chain(c: &Chain) -> bool {
    c.elements().iter().filter(|k| !k.is_degenerate()).all(is_full)
}

/// Every non-root node is an extreme (a point of order at most one) of the
/// element that first contains it.
pub fn endpoint_of_hitting_time(c: &Chain) -> Result<bool> {
    let w = c.ambient();
    let root = c.root();
    for u in w.nodes() {
        let p = Point::Node(u);
        if p == root {
            continue;
        }
        let k = &c.elements()[c.hitting_time(&p)?];
        if k.degree_at(u) > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Lane {
    base: NodeId,
    leaf: NodeId,
    len: Rational,
    /// Stretch grown at core speed before the lane starts creeping.
    lead: Rational,
    speed: Rational,
    /// Time at which the creeping starts.
    start: Rational,
}

/// A chain passing the generic conditions at resolution `delta`, grown from a
/// seeded random endpoint.
///
/// Points off the leaf edges are reached at a seeded time `τ` (path length
/// weighted by per-edge speeds). Each leaf edge is a lane: once its base is
/// reached it creeps toward the middle of what is left, halving the remaining
/// gap at every recorded step, and is only completed by the final element.
pub fn generate_generic_chain(w: &Arc<Dendrite>, seed: u64, delta: &Rational) -> Result<Chain> {
    if !rational::is_positive(delta) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let roots: Vec<NodeId> = w
        .nodes()
        .filter(|&u| w.degree(u) == 1 && w.is_endpoint(u))
        .collect();
    if roots.is_empty() {
        return Err(Error::precondition("the ambient has no endpoint to root a chain at"));
    }
    let reach = lane_reach(w, delta);
    let feasible: Vec<NodeId> = roots.iter().copied().filter(|&r| lane_shortfall(&reach, r).is_none()).collect();
    if feasible.is_empty() {
        let b = lane_shortfall(&reach, roots[0]).expect("infeasible");
        return Err(Error::RefineNeeded(format!(
            "branching node {b} has no leaf edge close enough for resolution {}",
            rational::format(delta)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = feasible[rng.gen_range(0..feasible.len())];
    for _ in 0..32 {
        let speeds: Vec<Rational> = (0..w.edges().len())
            .map(|_| rational::rat(rng.gen_range(33..=64), 64))
            .collect();
        if let Some(chain) = grow(w, root, &speeds, delta)? {
            return Ok(chain);
        }
    }
    Err(Error::RefineNeeded("could not separate node hitting times".into()))
}

/// For each branching node, the leaves of the lanes whose creeping frontier
/// stays within `delta` of it.
fn lane_reach(w: &Dendrite, delta: &Rational) -> Vec<(NodeId, Vec<NodeId>)> {
    let lanes: Vec<(NodeId, NodeId, Rational)> = w
        .leaves()
        .into_iter()
        .filter(|_| w.node_count() > 2)
        .map(|leaf| {
            let (base, e) = w.incident(leaf)[0];
            let len = &w.edge(e).len;
            let lead = rational::max(&(len - delta), &rational::zero());
            (base, leaf, &lead + rational::half(&(len - &lead)))
        })
        .collect();
    w.branching_nodes()
        .into_iter()
        .map(|b| {
            let near = lanes
                .iter()
                .filter(|(base, _, reach)| w.node_distance(b, *base) + reach <= *delta)
                .map(|(_, leaf, _)| *leaf)
                .collect();
            (b, near)
        })
        .collect()
}

/// A branching node out of reach of every lane once `root` (whose own leaf
/// edge is not a lane) is fixed.
fn lane_shortfall(reach: &[(NodeId, Vec<NodeId>)], root: NodeId) -> Option<NodeId> {
    reach
        .iter()
        .find(|(_, near)| near.iter().all(|&leaf| leaf == root))
        .map(|(b, _)| *b)
}

/// `None` when two nodes would be reached at the same time.
fn grow(w: &Arc<Dendrite>, root: NodeId, speeds: &[Rational], delta: &Rational) -> Result<Option<Chain>> {
    let n = w.node_count();
    let is_lane = |e: usize| {
        let edge = w.edge(e);
        (w.degree(edge.lo) == 1 && edge.lo != root) || (w.degree(edge.hi) == 1 && edge.hi != root)
    };
    let mut tau: Vec<Option<Rational>> = vec![None; n];
    let mut parent: Vec<Option<(NodeId, usize)>> = vec![None; n];
    tau[root] = Some(rational::zero());
    let mut stack = vec![root];
    let mut lanes = Vec::new();
    while let Some(u) = stack.pop() {
        let tu = tau[u].clone().unwrap();
        for &(v, e) in w.incident(u) {
            if tau[v].is_some() || parent[u].is_some_and(|(p, _)| p == v) {
                continue;
            }
            if is_lane(e) && w.edge(e).len > rational::zero() && w.degree(v) == 1 && n > 2 {
                let len = w.edge(e).len.clone();
                let lead = rational::max(&(&len - delta), &rational::zero());
                let start = &tu + &lead / &speeds[e];
                lanes.push(Lane { base: u, leaf: v, len, lead, speed: speeds[e].clone(), start });
                parent[v] = Some((u, e));
                continue;
            }
            tau[v] = Some(&tu + &w.edge(e).len / &speeds[e]);
            parent[v] = Some((u, e));
            stack.push(v);
        }
    }
    let lane_leaves: BTreeSet<NodeId> = lanes.iter().map(|l| l.leaf).collect();

    let mut events: Vec<Rational> = tau.iter().flatten().cloned().collect();
    let distinct: BTreeSet<Rational> = events.iter().cloned().collect();
    if distinct.len() != events.len() {
        return Ok(None);
    }
    events.extend(lanes.iter().map(|l| l.start.clone()));
    let events: BTreeSet<Rational> = events.into_iter().collect();
    let events: Vec<Rational> = events.into_iter().collect();
    let step = rational::half(delta);
    let mut times = vec![events[0].clone()];
    for pair in events.windows(2) {
        let gap = &pair[1] - &pair[0];
        let parts = (&gap / &step).ceil().to_integer().to_i64().unwrap_or(1).max(1);
        for r in 1..parts {
            times.push(&pair[0] + &gap * rational::rat(r, parts));
        }
        times.push(pair[1].clone());
    }

    let mut elements = Vec::with_capacity(times.len() + 1);
    for (idx, t) in times.iter().enumerate() {
        let mut points = vec![Point::Node(root)];
        for v in 0..n {
            if lane_leaves.contains(&v) || v == root {
                continue;
            }
            let (p, e) = parent[v].expect("reached");
            let (tp, tv) = (tau[p].clone().unwrap(), tau[v].clone().unwrap());
            if tv <= *t {
                points.push(Point::Node(v));
            } else if tp <= *t {
                let s = (t - &tp) * &speeds[e];
                points.push(w.point_from(p, v, &s)?);
            }
        }
        for lane in &lanes {
            let tb = tau[lane.base].clone().unwrap();
            if tb > *t {
                continue;
            }
            let s = if *t <= lane.start {
                (t - &tb) * &lane.speed
            } else {
                let k = times[..=idx].iter().filter(|x| **x > lane.start).count() as u32;
                let rest = &lane.len - &lane.lead;
                let shrink = rational::one() - Rational::new(1.into(), num_bigint::BigInt::from(2).pow(k));
                &lane.lead + rest * shrink / rational::int(2)
            };
            points.push(w.point_from(lane.base, lane.leaf, &s)?);
        }
        elements.push(Subdendrite::hull(w, &points)?);
    }
    elements.push(Subdendrite::whole(w));
    elements.dedup();
    let chain = Chain::with_mesh(elements, delta.clone())?;
    let report = check_generic_conditions(&chain, delta)?;
    if !report.passed() {
        return Err(Error::RefineNeeded(format!(
            "generated chain fails condition ({}) at this depth",
            report.first_failure().unwrap_or("?")
        )));
    }
    Ok(Some(chain))
}

/// Root-shifted variants of `c`: a short arc from a nearby point `y` to the
/// root is grown first, then every element is enlarged by that arc.
pub fn root_shifted(c: &Chain, shift: &Rational) -> Result<Option<Chain>> {
    let w = c.ambient();
    let x = c.root();
    let target = match &x {
        Point::Node(u) => match w.incident(*u).first() {
            Some(&(v, _)) => Point::Node(v),
            None => return Ok(None),
        },
        Point::Edge { hi, .. } => Point::Node(*hi),
    };
    let y = w.point_toward(&x, &target, shift)?;
    if y == x {
        return Ok(None);
    }
    let mut elements = vec![Subdendrite::singleton(w, y.clone())?];
    for r in 1..=4 {
        let p = w.point_toward(&y, &x, &(shift * rational::rat(r, 4)))?;
        elements.push(Subdendrite::arc(w, y.clone(), p)?);
    }
    let stem = Subdendrite::arc(w, y, x)?;
    for k in c.elements() {
        elements.push(k.union(&stem)?);
    }
    elements.dedup();
    Ok(Some(Chain::new(elements)?))
}

/// Every harness chain within `epsilon` of `c` (in `h²`) has its root within `epsilon`.
pub fn root_continuity_probe(c: &Chain, epsilon: &Rational) -> Result<bool> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let w = c.ambient();
    let mut candidates = vec![c.clone()];
    for (num, den) in [(1, 8), (1, 4), (1, 2), (3, 4), (1, 1), (3, 2), (2, 1)] {
        if let Some(shifted) = root_shifted(c, &(epsilon * rational::rat(num, den)))? {
            candidates.push(shifted);
        }
    }
    for other in &candidates {
        if hausdorff2(c, other)? < *epsilon && w.distance_unchecked(&c.root(), &other.root()) >= *epsilon {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Replaces every nondegenerate element by its fullness repair; consecutive
/// duplicates are merged.
pub fn repaired(c: &Chain, epsilon: &Rational) -> Result<Chain> {
    let mut elements = Vec::with_capacity(c.len());
    for k in c.elements() {
        elements.push(if k.is_degenerate() {
            k.clone()
        } else {
            crate::fullness::perturb_to_full(k, epsilon)?
        });
    }
    elements.dedup();
    let mut out: Vec<Subdendrite> = Vec::with_capacity(elements.len());
    for k in elements {
        if out.last().is_none_or(|prev| prev.is_proper_subset(&k)) {
            out.push(k);
        }
    }
    Chain::new(out)
}

/// Hausdorff distance between two subdendrites, re-exported for chain callers.
pub fn gap(a: &Subdendrite, b: &Subdendrite) -> Result<Rational> {
    hausdorff(a, b)
}
