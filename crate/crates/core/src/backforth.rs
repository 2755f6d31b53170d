//! Back-and-forth construction of partial isomorphisms between branching nodes.
//!
//! Steps alternate: even steps map the least unmapped source branching node,
//! odd steps give a preimage to the least unmapped target branching node. A
//! node lying off the current tree has its first point on the tree mapped
//! first. Among admissible images the node itself comes first, then ascending
//! ids; the first choice from which all requested steps can be completed is
//! kept.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::{check_generic_conditions, check_omega_conditions, Chain};
use crate::error::{Error, Result};
use crate::fullness::{is_full, is_nowhere_dense};
use crate::hyperspace::hausdorff;
use crate::io::point_json;
use crate::rational::{self, Rational};
use crate::tree::{Dendrite, NodeId, Order, Point, Subdendrite};

const SEARCH_BUDGET: usize = 200_000;

#[derive(Clone, Debug)]
pub enum Context {
    Subcontinua { k1: Subdendrite, k2: Subdendrite },
    Chains { c1: Chain, c2: Chain },
}

#[derive(Clone, Debug)]
pub struct PartialIso {
    context: Context,
    base: Option<(NodeId, NodeId)>,
    pairs: Vec<(NodeId, NodeId)>,
}

impl PartialIso {
    /// Builds an iso from explicit pairs without checking anything; use
    /// [`check_invariants`] to validate.
    pub fn from_pairs(context: Context, pairs: Vec<(NodeId, NodeId)>) -> Result<Self> {
        let base = base_of(&context)?;
        Ok(PartialIso { context, base, pairs })
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    /// Chain roots; subcontinua have no base point.
    pub fn base(&self) -> Option<(NodeId, NodeId)> {
        self.base
    }

    /// `(source, target)` in the order they were added.
    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source_ambient(&self) -> &Arc<Dendrite> {
        match &self.context {
            Context::Subcontinua { k1, .. } => k1.ambient(),
            Context::Chains { c1, .. } => c1.ambient(),
        }
    }

    pub fn target_ambient(&self) -> &Arc<Dendrite> {
        match &self.context {
            Context::Subcontinua { k2, .. } => k2.ambient(),
            Context::Chains { c2, .. } => c2.ambient(),
        }
    }

    pub fn image(&self, s: NodeId) -> Option<NodeId> {
        self.tree_pairs().into_iter().find(|p| p.0 == s).map(|p| p.1)
    }

    /// Pairs plus the base pair, which together span the induced trees.
    fn tree_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.base.into_iter().chain(self.pairs.iter().copied()).collect()
    }

    pub fn source_tree(&self) -> Option<Subdendrite> {
        induced_tree(self.source_ambient(), self.tree_pairs().iter().map(|p| p.0))
    }

    pub fn target_tree(&self) -> Option<Subdendrite> {
        induced_tree(self.target_ambient(), self.tree_pairs().iter().map(|p| p.1))
    }

    pub fn to_json(&self) -> Value {
        let kind = match self.context {
            Context::Subcontinua { .. } => "subcontinua",
            Context::Chains { .. } => "chains",
        };
        json!({
            "context": kind,
            "base": self.base.map(|(x, y)| json!([x, y])),
            "pairs": self
                .pairs
                .iter()
                .map(|&(s, t)| json!([point_json(&Point::Node(s)), point_json(&Point::Node(t))]))
                .collect::<Vec<_>>(),
        })
    }
}

fn induced_tree(w: &Arc<Dendrite>, nodes: impl Iterator<Item = NodeId>) -> Option<Subdendrite> {
    let pts: Vec<Point> = nodes.map(Point::Node).collect();
    if pts.is_empty() {
        return None;
    }
    Some(Subdendrite::hull(w, &pts).expect("nodes are valid points"))
}

fn base_of(context: &Context) -> Result<Option<(NodeId, NodeId)>> {
    match context {
        Context::Subcontinua { .. } => Ok(None),
        Context::Chains { c1, c2 } => {
            let node = |c: &Chain, name: &str| {
                c.root()
                    .node()
                    .ok_or_else(|| Error::condition("i", format!("root of {name} is not a node")))
            };
            Ok(Some((node(c1, "C1")?, node(c2, "C2")?)))
        }
    }
}

/// Per-node labels of one side.
struct Side<'a> {
    w: &'a Dendrite,
    branching: Vec<NodeId>,
    member: Option<Vec<bool>>,
    hits: Option<Vec<usize>>,
}

impl<'a> Side<'a> {
    fn new(w: &'a Dendrite, member: Option<&Subdendrite>, chain: Option<&Chain>) -> Result<Self> {
        let member = member.map(|k| w.nodes().map(|u| k.contains_node(u)).collect());
        let hits = match chain {
            Some(c) => Some(
                w.nodes()
                    .map(|u| c.hitting_time(&Point::Node(u)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        Ok(Side {
            w,
            branching: w.branching_nodes(),
            member,
            hits,
        })
    }

    fn describe(&self, u: NodeId) -> String {
        let mut s = format!("order {}", self.w.order(u));
        if let Some(m) = &self.member {
            s += if m[u] { ", inside" } else { ", outside" };
        }
        if let Some(h) = &self.hits {
            s += &format!(", hitting time {}", h[u]);
        }
        s
    }
}

fn sides_for(context: &Context) -> Result<[Side<'_>; 2]> {
    Ok(match context {
        Context::Subcontinua { k1, k2 } => [
            Side::new(k1.ambient(), Some(k1), None)?,
            Side::new(k2.ambient(), Some(k2), None)?,
        ],
        Context::Chains { c1, c2 } => [
            Side::new(c1.ambient(), None, Some(c1))?,
            Side::new(c2.ambient(), None, Some(c2))?,
        ],
    })
}

/// Where a node sits relative to the current tree on its side.
#[derive(Clone, Copy, Debug)]
enum Loc {
    /// Nothing mapped yet.
    Free,
    /// Strictly inside the tree edge between two adjacent tree nodes.
    On(NodeId, NodeId),
    /// Off the tree, with this first point on it.
    Off(NodeId),
}

struct Exhausted;

struct Engine<'a> {
    sides: [Side<'a>; 2],
    maps: [Vec<Option<NodeId>>; 2],
    base: Option<(NodeId, NodeId)>,
    pairs: Vec<(NodeId, NodeId)>,
    steps: usize,
    budget: usize,
    failure: Option<(usize, String)>,
}

impl<'a> Engine<'a> {
    fn new(sides: [Side<'a>; 2], base: Option<(NodeId, NodeId)>, steps: usize) -> Self {
        let maps = [vec![None; sides[0].w.node_count()], vec![None; sides[1].w.node_count()]];
        Engine {
            sides,
            maps,
            base,
            pairs: Vec::new(),
            steps,
            budget: SEARCH_BUDGET,
            failure: None,
        }
    }

    fn base_on(&self, d: usize) -> Option<NodeId> {
        self.base.map(|(x, y)| if d == 0 { x } else { y })
    }

    fn in_tree(&self, d: usize, u: NodeId) -> bool {
        self.maps[d][u].is_some() || self.base_on(d) == Some(u)
    }

    fn image(&self, d: usize, u: NodeId) -> NodeId {
        if self.base_on(d) == Some(u) {
            return self.base_on(1 - d).expect("base on both sides");
        }
        self.maps[d][u].expect("mapped node")
    }

    fn tree_nodes(&self, d: usize) -> Vec<NodeId> {
        let w = self.sides[d].w;
        self.base_on(d)
            .into_iter()
            .chain(w.nodes().filter(|&u| self.maps[d][u].is_some()))
            .collect()
    }

    fn hull(&self, d: usize, nodes: &[NodeId]) -> Vec<bool> {
        let w = self.sides[d].w;
        let mut h = vec![false; w.node_count()];
        if let Some(&first) = nodes.first() {
            h[first] = true;
            for &n in &nodes[1..] {
                for u in w.node_path(first, n) {
                    h[u] = true;
                }
            }
        }
        h
    }

    fn locate(&self, d: usize, b: NodeId) -> Loc {
        let w = self.sides[d].w;
        let nodes = self.tree_nodes(d);
        if nodes.is_empty() {
            return Loc::Free;
        }
        let hull = self.hull(d, &nodes);
        if !hull[b] {
            let z = w
                .node_path(b, nodes[0])
                .into_iter()
                .find(|&u| hull[u])
                .expect("path ends on the tree");
            return Loc::Off(z);
        }
        // Interior tree points have exactly two tree directions; otherwise
        // they would be medians of tree nodes and hence tree nodes themselves.
        let ends: Vec<NodeId> = w
            .incident(b)
            .iter()
            .filter(|(v, _)| hull[*v])
            .map(|&(v, _)| {
                let (mut prev, mut cur) = (b, v);
                while !self.in_tree(d, cur) {
                    let next = w
                        .incident(cur)
                        .iter()
                        .map(|p| p.0)
                        .find(|&x| x != prev && hull[x])
                        .expect("tree path continues");
                    prev = cur;
                    cur = next;
                }
                cur
            })
            .collect();
        assert_eq!(ends.len(), 2, "tree closure broken at node {b}");
        Loc::On(ends[0], ends[1])
    }

    fn raw_candidates(&self, d: usize, loc: Loc) -> Vec<NodeId> {
        let to = &self.sides[1 - d];
        let w = to.w;
        match loc {
            Loc::Free => w.nodes().collect(),
            Loc::On(n1, n2) => {
                let path = w.node_path(self.image(d, n1), self.image(d, n2));
                path[1..path.len() - 1].to_vec()
            }
            Loc::Off(z) => {
                let pz = self.image(d, z);
                let nodes = self.tree_nodes(1 - d);
                let hull = self.hull(1 - d, &nodes);
                let mut seen = vec![false; w.node_count()];
                seen[pz] = true;
                let mut stack = vec![pz];
                let mut out = Vec::new();
                while let Some(u) = stack.pop() {
                    for &(v, _) in w.incident(u) {
                        if !seen[v] && !hull[v] {
                            seen[v] = true;
                            out.push(v);
                            stack.push(v);
                        }
                    }
                }
                out
            }
        }
    }

    fn labels_match(&self, d: usize, b: NodeId, c: NodeId) -> bool {
        let (from, to) = (&self.sides[d], &self.sides[1 - d]);
        if from.w.order(b) != to.w.order(c) {
            return false;
        }
        if let (Some(m1), Some(m2)) = (&from.member, &to.member) {
            if m1[b] != m2[c] {
                return false;
            }
        }
        if let (Some(h1), Some(h2)) = (&from.hits, &to.hits) {
            for &(s, t) in &self.pairs {
                let (s, t) = if d == 0 { (s, t) } else { (t, s) };
                if h1[b].cmp(&h1[s]) != h2[c].cmp(&h2[t]) {
                    return false;
                }
            }
        }
        true
    }

    fn candidates(&self, d: usize, b: NodeId, loc: Loc) -> Vec<NodeId> {
        let to = &self.sides[1 - d];
        let mut out: Vec<NodeId> = self
            .raw_candidates(d, loc)
            .into_iter()
            .filter(|&c| to.w.is_branching(c) && self.maps[1 - d][c].is_none())
            .filter(|&c| self.labels_match(d, b, c))
            .collect();
        out.sort_unstable();
        if let Some(i) = out.iter().position(|&c| c == b) {
            out[..=i].rotate_right(1);
        }
        out
    }

    fn push(&mut self, d: usize, b: NodeId, c: NodeId) -> std::result::Result<(), Exhausted> {
        if self.budget == 0 {
            return Err(Exhausted);
        }
        self.budget -= 1;
        self.maps[d][b] = Some(c);
        self.maps[1 - d][c] = Some(b);
        self.pairs.push(if d == 0 { (b, c) } else { (c, b) });
        Ok(())
    }

    fn pop(&mut self, d: usize, b: NodeId, c: NodeId) {
        self.maps[d][b] = None;
        self.maps[1 - d][c] = None;
        self.pairs.pop();
    }

    fn record(&mut self, step: usize, d: usize, b: NodeId, loc: Loc) {
        if self.failure.as_ref().is_some_and(|(s, _)| *s > step) {
            return;
        }
        let place = match loc {
            Loc::Free => "anywhere".to_string(),
            Loc::On(n1, n2) => format!("strictly between {} and {}", self.image(d, n1), self.image(d, n2)),
            Loc::Off(z) => format!("off the tree with first point {}", self.image(d, z)),
        };
        let dir = if d == 0 { "forth" } else { "back" };
        self.failure = Some((
            step,
            format!(
                "step {step} ({dir}): no unused branching node {place} matches node {b} ({})",
                self.sides[d].describe(b)
            ),
        ));
    }

    fn next_unmapped(&self, d: usize) -> Option<NodeId> {
        self.sides[d].branching.iter().copied().find(|&u| self.maps[d][u].is_none())
    }

    fn search(&mut self, step: usize) -> std::result::Result<bool, Exhausted> {
        if step >= self.steps {
            return Ok(true);
        }
        let d = step % 2;
        match self.next_unmapped(d) {
            Some(b) => self.place(step, d, b),
            None if self.next_unmapped(1 - d).is_none() => Ok(true),
            None => self.search(step + 1),
        }
    }

    fn place(&mut self, step: usize, d: usize, b: NodeId) -> std::result::Result<bool, Exhausted> {
        let loc = self.locate(d, b);
        if let Loc::Off(z) = loc {
            if !self.in_tree(d, z) {
                let zloc = self.locate(d, z);
                let cands = self.candidates(d, z, zloc);
                if cands.is_empty() {
                    self.record(step, d, z, zloc);
                }
                for c in cands {
                    self.push(d, z, c)?;
                    if self.place(step, d, b)? {
                        return Ok(true);
                    }
                    self.pop(d, z, c);
                }
                return Ok(false);
            }
        }
        let cands = self.candidates(d, b, loc);
        if cands.is_empty() {
            self.record(step, d, b, loc);
        }
        for c in cands {
            self.push(d, b, c)?;
            if self.search(step + 1)? {
                return Ok(true);
            }
            self.pop(d, b, c);
        }
        Ok(false)
    }
}

fn run(context: Context, steps: usize) -> Result<PartialIso> {
    let base = base_of(&context)?;
    let pairs = {
        let sides = sides_for(&context)?;
        let mut engine = Engine::new(sides, base, steps);
        match engine.search(0) {
            Ok(true) => engine.pairs,
            Ok(false) => {
                let why = engine
                    .failure
                    .map(|f| f.1)
                    .unwrap_or_else(|| "no admissible extension".into());
                return Err(Error::RefineNeeded(why));
            }
            Err(Exhausted) => {
                let why = engine.failure.map(|f| f.1).unwrap_or_default();
                return Err(Error::RefineNeeded(format!(
                    "search budget of {SEARCH_BUDGET} extensions exhausted; deepest failure: {why}"
                )));
            }
        }
    };
    Ok(PartialIso { context, base, pairs })
}

/// Maps branching nodes so that `K1` corresponds to `K2`.
pub fn bf_subcontinua(k1: &Subdendrite, k2: &Subdendrite, steps: usize) -> Result<PartialIso> {
    k1.require_same_ambient(k2)?;
    let mesh = k1.ambient().mesh();
    for (name, k) in [("K1", k1), ("K2", k2)] {
        if !is_full(k) {
            return Err(Error::condition("full", format!("{name} is not full")));
        }
        if !is_nowhere_dense(k, &mesh)? {
            return Err(Error::condition(
                "nowhere-dense",
                format!("{name} contains a ball of radius {} around a branching node", rational::format(&mesh)),
            ));
        }
    }
    run(
        Context::Subcontinua {
            k1: k1.clone(),
            k2: k2.clone(),
        },
        steps,
    )
}

fn chain_scale(c1: &Chain, c2: &Chain) -> Rational {
    rational::max(c1.mesh(), c2.mesh())
}

/// Maps branching nodes so that hitting times correspond, for chains meeting
/// the generic conditions at the coarser of the two meshes.
pub fn bf_chains(c1: &Chain, c2: &Chain, steps: usize) -> Result<PartialIso> {
    let eps = chain_scale(c1, c2);
    for (name, c) in [("C1", c1), ("C2", c2)] {
        let report = check_generic_conditions(c, &eps)?;
        if let Some(cond) = report.first_failure() {
            return Err(Error::condition(
                cond,
                format!("{name} fails condition ({cond}) at epsilon {}", rational::format(&eps)),
            ));
        }
    }
    run(
        Context::Chains {
            c1: c1.clone(),
            c2: c2.clone(),
        },
        steps,
    )
}

/// As [`bf_chains`] for chains on ambients whose branching nodes all have
/// order ω. Equal hitting times are matched with equal hitting times.
pub fn bf_chains_omega(c1: &Chain, c2: &Chain, steps: usize) -> Result<PartialIso> {
    let eps = chain_scale(c1, c2);
    for (name, c) in [("C1", c1), ("C2", c2)] {
        let w = c.ambient();
        if let Some(u) = w.branching_nodes().into_iter().find(|&u| w.order(u) != Order::Omega) {
            return Err(Error::precondition(format!(
                "{name}: branching node {u} has order {}, expected omega",
                w.order(u)
            )));
        }
        let report = check_omega_conditions(c, &eps)?;
        if let Some(cond) = report.first_failure() {
            return Err(Error::condition(
                cond,
                format!("{name} fails condition ({cond}) at epsilon {}", rational::format(&eps)),
            ));
        }
    }
    run(
        Context::Chains {
            c1: c1.clone(),
            c2: c2.clone(),
        },
        steps,
    )
}

fn node_between(w: &Dendrite, a: NodeId, b: NodeId, c: NodeId) -> bool {
    w.node_distance(a, b) + w.node_distance(b, c) == w.node_distance(a, c)
}

fn median(w: &Dendrite, a: NodeId, b: NodeId, c: NodeId) -> NodeId {
    w.node_path(a, b)
        .into_iter()
        .min_by(|&x, &y| w.node_distance(c, x).cmp(&w.node_distance(c, y)))
        .expect("path is nonempty")
}

/// Re-checks every invariant directly from the pairs: injectivity, branching
/// and order labels, membership or hitting-time order, betweenness on all
/// triples, and closure of the tree nodes under branch points.
pub fn check_invariants(iso: &PartialIso) -> Result<()> {
    let bad = |m: String| Err(Error::Inconsistent(m));
    let (w1, w2) = (iso.source_ambient(), iso.target_ambient());
    let sides = sides_for(&iso.context)?;
    let pts = iso.tree_pairs();
    for (i, &(s, t)) in iso.pairs.iter().enumerate() {
        if s >= w1.node_count() || t >= w2.node_count() {
            return bad(format!("pair {i} ({s}, {t}) names a missing node"));
        }
        if !w1.is_branching(s) || !w2.is_branching(t) {
            return bad(format!("pair ({s}, {t}) is not between branching nodes"));
        }
        if w1.order(s) != w2.order(t) {
            return bad(format!("pair ({s}, {t}) changes the order"));
        }
        if let (Some(m1), Some(m2)) = (&sides[0].member, &sides[1].member) {
            if m1[s] != m2[t] {
                return bad(format!("pair ({s}, {t}) breaks membership"));
            }
        }
    }
    for (i, &(s, t)) in pts.iter().enumerate() {
        for &(s2, t2) in &pts[i + 1..] {
            if s == s2 || t == t2 {
                return bad(format!("pairs ({s}, {t}) and ({s2}, {t2}) are not injective"));
            }
        }
    }
    if let (Some(h1), Some(h2)) = (&sides[0].hits, &sides[1].hits) {
        for &(s, t) in &iso.pairs {
            for &(s2, t2) in &iso.pairs {
                if (h1[s] <= h1[s2]) != (h2[t] <= h2[t2]) {
                    return bad(format!("pairs ({s}, {t}) and ({s2}, {t2}) break the hitting-time order"));
                }
            }
        }
    }
    let n = pts.len();
    for i in 0..n {
        for j in 0..n {
            for k in (i + 1)..n {
                if j == i || j == k {
                    continue;
                }
                let (a, b, c) = (pts[i], pts[j], pts[k]);
                if node_between(w1, a.0, b.0, c.0) != node_between(w2, a.1, b.1, c.1) {
                    return bad(format!(
                        "betweenness of {} among {} and {} is not preserved",
                        b.0, a.0, c.0
                    ));
                }
            }
        }
    }
    let closure_violation = |a: (NodeId, NodeId), b: (NodeId, NodeId), c: (NodeId, NodeId)| {
        let m1 = median(w1, a.0, b.0, c.0);
        let m2 = median(w2, a.1, b.1, c.1);
        if !pts.contains(&(m1, m2)) {
            Some(format!("branch point of {}, {}, {} is not matched with its counterpart", a.0, b.0, c.0))
        } else {
            None
        }
    };
    match iso.base {
        Some(base) => {
            for i in 0..n {
                for j in (i + 1)..n {
                    if let Some(m) = closure_violation(pts[i], pts[j], base) {
                        return bad(m);
                    }
                }
            }
        }
        None => {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        if let Some(m) = closure_violation(pts[i], pts[j], pts[k]) {
                            return bad(m);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetDefect {
    pub label: String,
    /// `None` when exactly one of the two sets misses its induced tree.
    #[serde(serialize_with = "serialize_opt")]
    pub defect: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub tree_nodes: usize,
    pub tree_edges: usize,
    /// Tree edges on which the map could be pinned at every set boundary.
    pub pinned_edges: usize,
    pub sets: Vec<SetDefect>,
    pub zero_defect: bool,
}

fn serialize_opt<S: serde::Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(r) => s.serialize_str(&rational::format(r)),
        None => s.serialize_none(),
    }
}

/// Knots `(source, target)` of a monotone piecewise-linear map on one edge.
fn edge_knots(
    bounds: &[(Option<(Rational, Rational)>, Option<(Rational, Rational)>)],
    l1: &Rational,
    l2: &Rational,
) -> (Vec<(Rational, Rational)>, bool) {
    let plain = vec![(rational::zero(), rational::zero()), (l1.clone(), l2.clone())];
    let mut knots = plain.clone();
    for b in bounds {
        match b {
            (None, None) => {}
            (Some((lo1, hi1)), Some((lo2, hi2))) => {
                knots.push((lo1.clone(), lo2.clone()));
                knots.push((hi1.clone(), hi2.clone()));
            }
            _ => return (plain, false),
        }
    }
    knots.sort();
    knots.dedup();
    for pair in knots.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.0.cmp(&b.0) != a.1.cmp(&b.1) || a.0 == b.0 {
            return (plain, false);
        }
    }
    (knots, true)
}

fn apply_knots(knots: &[(Rational, Rational)], s: &Rational) -> Rational {
    for pair in knots.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if *s <= b.0 {
            return &a.1 + (s - &a.0) * (&b.1 - &a.1) / (&b.0 - &a.0);
        }
    }
    knots.last().expect("two knots").1.clone()
}

/// Parameters, measured from `a`, of `S ∩ [a, b]`.
fn interval_on(w: &Arc<Dendrite>, set: &Subdendrite, a: NodeId, b: NodeId) -> Result<Option<(Rational, Rational)>> {
    let arc = Subdendrite::arc(w, Point::Node(a), Point::Node(b))?;
    Ok(set.intersection(&arc)?.map(|piece| {
        let ds: Vec<Rational> = piece
            .extremes()
            .iter()
            .map(|p| w.distance_unchecked(&Point::Node(a), p))
            .collect();
        (ds.iter().min().expect("extreme").clone(), ds.iter().max().expect("extreme").clone())
    }))
}

struct TreeMap<'a> {
    w1: &'a Arc<Dendrite>,
    w2: &'a Arc<Dendrite>,
    edges: Vec<((NodeId, NodeId), (NodeId, NodeId), Vec<(Rational, Rational)>)>,
}

impl TreeMap<'_> {
    fn map_point(&self, p: &Point, pts: &[(NodeId, NodeId)]) -> Result<Point> {
        if let Some(u) = p.node() {
            if let Some(&(_, t)) = pts.iter().find(|q| q.0 == u) {
                return Ok(Point::Node(t));
            }
        }
        for ((a, b), (fa, fb), knots) in &self.edges {
            let da = self.w1.distance_unchecked(&Point::Node(*a), p);
            let db = self.w1.distance_unchecked(p, &Point::Node(*b));
            if da.clone() + db == self.w1.node_distance(*a, *b) {
                return self.w2.point_toward(&Point::Node(*fa), &Point::Node(*fb), &apply_knots(knots, &da));
            }
        }
        Err(Error::Inconsistent(format!("point {p} is not on the induced tree")))
    }
}

/// Extends the node bijection to a homeomorphism of the induced trees,
/// linear between set boundaries on each tree edge, and measures how far the
/// image of each tracked set is from its counterpart.
pub fn extend_and_verify(iso: &PartialIso) -> Result<VerifyReport> {
    check_invariants(iso)?;
    let (w1, w2) = (iso.source_ambient(), iso.target_ambient());
    let pts = iso.tree_pairs();
    let sets: Vec<(String, Subdendrite, Subdendrite)> = match &iso.context {
        Context::Subcontinua { k1, k2 } => vec![("K".into(), k1.clone(), k2.clone())],
        Context::Chains { c1, c2 } => {
            let mut classes: Vec<(usize, usize)> = iso
                .pairs
                .iter()
                .map(|&(s, t)| Ok((c1.hitting_time(&Point::Node(s))?, c2.hitting_time(&Point::Node(t))?)))
                .collect::<Result<_>>()?;
            classes.sort_unstable();
            classes.dedup();
            classes
                .into_iter()
                .map(|(i, j)| (format!("K{i} -> K{j}"), c1.elements()[i].clone(), c2.elements()[j].clone()))
                .collect()
        }
    };
    let (Some(t1), Some(t2)) = (iso.source_tree(), iso.target_tree()) else {
        return Ok(VerifyReport {
            tree_nodes: 0,
            tree_edges: 0,
            pinned_edges: 0,
            sets: Vec::new(),
            zero_defect: true,
        });
    };
    let n = pts.len();
    let mut map = TreeMap { w1, w2, edges: Vec::new() };
    let mut pinned = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (pts[i], pts[j]);
            let adjacent1 = (0..n).all(|k| k == i || k == j || !node_between(w1, a.0, pts[k].0, b.0));
            let adjacent2 = (0..n).all(|k| k == i || k == j || !node_between(w2, a.1, pts[k].1, b.1));
            if adjacent1 != adjacent2 {
                return Err(Error::Inconsistent(format!("tree edge ({}, {}) has no counterpart", a.0, b.0)));
            }
            if !adjacent1 {
                continue;
            }
            let bounds = sets
                .iter()
                .map(|(_, s1, s2)| Ok((interval_on(w1, s1, a.0, b.0)?, interval_on(w2, s2, a.1, b.1)?)))
                .collect::<Result<Vec<_>>>()?;
            let (knots, exact) = edge_knots(&bounds, &w1.node_distance(a.0, b.0), &w2.node_distance(a.1, b.1));
            pinned += usize::from(exact);
            map.edges.push(((a.0, b.0), (a.1, b.1), knots));
        }
    }
    let mut defects = Vec::new();
    for (label, s1, s2) in &sets {
        let a = s1.intersection(&t1)?;
        let b = s2.intersection(&t2)?;
        let defect = match (a, b) {
            (None, None) => Some(rational::zero()),
            (Some(a), Some(b)) => {
                let image: Vec<Point> = a
                    .extremes()
                    .iter()
                    .map(|p| map.map_point(p, &pts))
                    .collect::<Result<_>>()?;
                Some(hausdorff(&Subdendrite::hull(w2, &image)?, &b)?)
            }
            _ => None,
        };
        defects.push(SetDefect {
            label: label.clone(),
            defect,
        });
    }
    Ok(VerifyReport {
        tree_nodes: n,
        tree_edges: map.edges.len(),
        pinned_edges: pinned,
        zero_defect: defects.iter().all(|d| d.defect.as_ref().is_some_and(|x| *x == rational::zero())),
        sets: defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::tree::fixtures::y3;

    /// Two order-3 nodes 1 and 2 on a spine 0-1-2-3 with legs 4 and 5.
    fn double_y() -> Arc<Dendrite> {
        let o = |m| Order::Finite(m);
        Arc::new(
            Dendrite::new(
                vec![o(1), o(3), o(3), o(1), o(1), o(1)],
                vec![
                    (0, 1, rat(1, 1)),
                    (1, 2, rat(1, 1)),
                    (2, 3, rat(1, 1)),
                    (1, 4, rat(1, 1)),
                    (2, 5, rat(1, 1)),
                ],
                None,
            )
            .unwrap(),
        )
    }

    fn edge(lo: NodeId, hi: NodeId, t: Rational) -> Point {
        Point::Edge { lo, hi, t }
    }

    #[test]
    fn identity_on_equal_subcontinua() {
        let w = double_y();
        let h = rat(1, 4);
        let k = Subdendrite::hull(
            &w,
            &[edge(0, 1, rat(3, 4)), edge(2, 3, h.clone()), edge(1, 4, h.clone()), edge(2, 5, h)],
        )
        .unwrap();
        let iso = bf_subcontinua(&k, &k, 4).unwrap();
        assert_eq!(iso.pairs(), &[(1, 1), (2, 2)]);
        check_invariants(&iso).unwrap();
        let report = extend_and_verify(&iso).unwrap();
        assert!(report.zero_defect, "{report:?}");
    }

    #[test]
    fn swapped_pair_is_caught() {
        let w = double_y();
        let k = Subdendrite::whole(&w);
        let ctx = Context::Subcontinua { k1: k.clone(), k2: k };
        let iso = PartialIso::from_pairs(ctx.clone(), vec![(1, 2), (2, 1)]).unwrap();
        check_invariants(&iso).unwrap();
        // Relabelling the spine the other way round is a valid iso; breaking
        // injectivity is not.
        let bad = PartialIso::from_pairs(ctx, vec![(1, 2), (2, 2)]).unwrap();
        assert!(matches!(extend_and_verify(&bad), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn chains_share_hitting_order() {
        let w = y3();
        let c = Chain::new(vec![
            Subdendrite::singleton(&w, Point::Node(0)).unwrap(),
            Subdendrite::arc(&w, Point::Node(0), Point::Node(1)).unwrap(),
            Subdendrite::whole(&w),
        ])
        .unwrap();
        let iso = run(
            Context::Chains {
                c1: c.clone(),
                c2: c,
            },
            2,
        )
        .unwrap();
        assert_eq!(iso.base(), Some((0, 0)));
        assert_eq!(iso.pairs(), &[(1, 1)]);
        assert!(extend_and_verify(&iso).unwrap().zero_defect);
    }

    #[test]
    fn knots_follow_boundaries() {
        let bounds = vec![(Some((rat(0, 1), rat(1, 3))), Some((rat(0, 1), rat(1, 2))))];
        let (knots, exact) = edge_knots(&bounds, &rat(1, 1), &rat(1, 1));
        assert!(exact);
        assert_eq!(apply_knots(&knots, &rat(1, 3)), rat(1, 2));
        assert_eq!(apply_knots(&knots, &rat(2, 3)), rat(3, 4));
        let clash = vec![(Some((rat(0, 1), rat(1, 3))), None)];
        assert!(!edge_knots(&clash, &rat(1, 1), &rat(1, 1)).1);
    }
}
