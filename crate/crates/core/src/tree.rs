//! Finite metric trees, points on them, subdendrites and the first point map.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub type NodeId = usize;
pub type EdgeId = usize;

/// Branch order a node has in the limit object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Finite(u32),
    Omega,
}

impl Order {
    pub fn is_branching(self) -> bool {
        match self {
            Order::Finite(m) => m >= 3,
            Order::Omega => true,
        }
    }

    fn admits_degree(self, degree: usize) -> bool {
        match self {
            Order::Finite(m) => degree <= m as usize,
            Order::Omega => true,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(m) => write!(f, "{m}"),
            Order::Omega => write!(f, "omega"),
        }
    }
}

/// A node, or a position strictly inside the edge `(lo, hi)` with `lo < hi`,
/// `t` measured from `lo`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Node(NodeId),
    Edge { lo: NodeId, hi: NodeId, t: Rational },
}

impl Point {
    pub fn node(&self) -> Option<NodeId> {
        match self {
            Point::Node(u) => Some(*u),
            Point::Edge { .. } => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Node(u) => write!(f, "{u}"),
            Point::Edge { lo, hi, t } => write!(f, "({lo},{hi})@{}", rational::format(t)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub lo: NodeId,
    pub hi: NodeId,
    pub len: Rational,
}

/// One traversed stretch of a path: parameters are measured from the edge's `lo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Piece {
    pub edge: EdgeId,
    pub from: Rational,
    pub to: Rational,
}

#[derive(Clone, Debug)]
pub struct Dendrite {
    orders: Vec<Order>,
    edges: Vec<Edge>,
    depth_tag: Option<u32>,
    adj: Vec<Vec<(NodeId, EdgeId)>>,
    edge_of: HashMap<(NodeId, NodeId), EdgeId>,
    parent: Vec<Option<(NodeId, EdgeId)>>,
    depth: Vec<usize>,
    root_dist: Vec<Rational>,
}

impl PartialEq for Dendrite {
    fn eq(&self, other: &Self) -> bool {
        self.orders == other.orders && self.edges == other.edges && self.depth_tag == other.depth_tag
    }
}

impl Eq for Dendrite {}

impl Dendrite {
    /// Nodes are `0..orders.len()`; edge endpoints may be given in either order.
    pub fn new(
        orders: Vec<Order>,
        edges: Vec<(NodeId, NodeId, Rational)>,
        depth_tag: Option<u32>,
    ) -> Result<Self> {
        let n = orders.len();
        let bad = |m: String| Err(Error::InvalidDendrite(m));
        if n == 0 {
            return bad("no nodes".into());
        }
        if edges.len() != n - 1 {
            return bad(format!("{} nodes need {} edges, got {}", n, n - 1, edges.len()));
        }
        if let Some(u) = orders.iter().position(|o| *o == Order::Finite(0)) {
            return bad(format!("node {u} has target order 0"));
        }
        let mut adj = vec![Vec::new(); n];
        let mut edge_of = HashMap::new();
        let mut out = Vec::with_capacity(edges.len());
        for (u, v, len) in edges {
            if u >= n || v >= n {
                return bad(format!("edge ({u},{v}) uses an unknown node"));
            }
            if u == v {
                return bad(format!("self loop at {u}"));
            }
            if !rational::is_positive(&len) {
                return bad(format!("edge ({u},{v}) has nonpositive length"));
            }
            let (lo, hi) = (u.min(v), u.max(v));
            if edge_of.contains_key(&(lo, hi)) {
                return bad(format!("duplicate edge ({lo},{hi})"));
            }
            let id = out.len();
            edge_of.insert((lo, hi), id);
            adj[lo].push((hi, id));
            adj[hi].push((lo, id));
            out.push(Edge { lo, hi, len });
        }
        for (u, order) in orders.iter().enumerate() {
            if !order.admits_degree(adj[u].len()) {
                return bad(format!("node {u} has degree {} above its order {order}", adj[u].len()));
            }
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut root_dist = vec![rational::zero(); n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, e));
                    depth[v] = depth[u] + 1;
                    root_dist[v] = &root_dist[u] + &out[e].len;
                    queue.push_back(v);
                }
            }
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return bad(format!("node {u} is disconnected"));
        }
        Ok(Dendrite {
            orders,
            edges: out,
            depth_tag,
            adj,
            edge_of,
            parent,
            depth,
            root_dist,
        })
    }

    pub fn node_count(&self) -> usize {
        self.orders.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.edge_of.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn order(&self, u: NodeId) -> Order {
        self.orders[u]
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn depth_tag(&self) -> Option<u32> {
        self.depth_tag
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    /// `(neighbour, edge)` pairs in insertion order.
    pub fn incident(&self, u: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adj[u]
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count()
    }

    /// Ambient branching node: target order at least 3 (including truncated growth sites).
    pub fn is_branching(&self, u: NodeId) -> bool {
        self.orders[u].is_branching()
    }

    pub fn branching_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&u| self.is_branching(u)).collect()
    }

    /// Ambient endpoint: a node of target order 1.
    pub fn is_endpoint(&self, u: NodeId) -> bool {
        self.orders[u] == Order::Finite(1)
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes().filter(|&u| self.degree(u) == 1).collect()
    }

    /// Longest edge.
    pub fn mesh(&self) -> Rational {
        self.edges.iter().map(|e| e.len.clone()).max().unwrap_or_else(rational::zero)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        match p {
            Point::Node(u) if *u < self.node_count() => Ok(()),
            Point::Node(u) => Err(Error::InvalidPoint(format!("no node {u}"))),
            Point::Edge { lo, hi, t } => {
                if lo >= hi || self.edge_between(*lo, *hi).is_none() {
                    return Err(Error::InvalidPoint(format!("no edge ({lo},{hi})")));
                }
                if *t <= rational::zero() || *t >= rational::one() {
                    return Err(Error::InvalidPoint(format!(
                        "edge parameter {} outside (0,1)",
                        rational::format(t)
                    )));
                }
                Ok(())
            }
        }
    }

    /// Canonical point at parameter `t` (from `lo`) on edge `e`.
    pub fn point_on_edge(&self, e: EdgeId, t: Rational) -> Point {
        let edge = &self.edges[e];
        if t.is_zero() {
            Point::Node(edge.lo)
        } else if t.is_one() {
            Point::Node(edge.hi)
        } else {
            Point::Edge {
                lo: edge.lo,
                hi: edge.hi,
                t,
            }
        }
    }

    /// Point at distance `s` from `u` along the edge `u`–`v`.
    pub fn point_from(&self, u: NodeId, v: NodeId, s: &Rational) -> Result<Point> {
        let e = self
            .edge_between(u, v)
            .ok_or_else(|| Error::InvalidPoint(format!("no edge ({u},{v})")))?;
        let len = &self.edges[e].len;
        if *s < rational::zero() || s > len {
            return Err(Error::InvalidPoint("offset beyond the edge".into()));
        }
        let frac = s / len;
        let t = if u == self.edges[e].lo { frac } else { rational::one() - frac };
        Ok(self.point_on_edge(e, t))
    }

    pub(crate) fn edge_id_of(&self, p: &Point) -> Option<EdgeId> {
        match p {
            Point::Node(_) => None,
            Point::Edge { lo, hi, .. } => self.edge_between(*lo, *hi),
        }
    }

    /// Edge parameter of `p` if `p` lies on the closed edge `e`.
    pub(crate) fn param_on(&self, e: EdgeId, p: &Point) -> Option<Rational> {
        let edge = &self.edges[e];
        match p {
            Point::Node(u) if *u == edge.lo => Some(rational::zero()),
            Point::Node(u) if *u == edge.hi => Some(rational::one()),
            Point::Node(_) => None,
            Point::Edge { lo, hi, t } if *lo == edge.lo && *hi == edge.hi => Some(t.clone()),
            Point::Edge { .. } => None,
        }
    }

    fn anchors(&self, p: &Point) -> Vec<(NodeId, Rational)> {
        match p {
            Point::Node(u) => vec![(*u, rational::zero())],
            Point::Edge { lo, hi, t } => {
                let len = &self.edges[self.edge_between(*lo, *hi).expect("checked point")].len;
                vec![(*lo, t * len), (*hi, (rational::one() - t) * len)]
            }
        }
    }

    fn lca(&self, mut u: NodeId, mut v: NodeId) -> NodeId {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].expect("non-root").0;
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].expect("non-root").0;
        }
        while u != v {
            u = self.parent[u].expect("non-root").0;
            v = self.parent[v].expect("non-root").0;
        }
        u
    }

    pub fn node_distance(&self, u: NodeId, v: NodeId) -> Rational {
        let w = self.lca(u, v);
        &self.root_dist[u] + &self.root_dist[v] - &self.root_dist[w] * rational::int(2)
    }

    /// Node sequence of the path from `u` to `v`, both included.
    pub fn node_path(&self, u: NodeId, v: NodeId) -> Vec<NodeId> {
        let w = self.lca(u, v);
        let mut up = vec![u];
        let mut x = u;
        while x != w {
            x = self.parent[x].expect("non-root").0;
            up.push(x);
        }
        let mut down = Vec::new();
        let mut y = v;
        while y != w {
            down.push(y);
            y = self.parent[y].expect("non-root").0;
        }
        up.extend(down.into_iter().rev());
        up
    }

    fn same_edge(&self, p: &Point, q: &Point) -> Option<EdgeId> {
        let e = self.edge_id_of(p).or_else(|| self.edge_id_of(q))?;
        (self.param_on(e, p).is_some() && self.param_on(e, q).is_some()).then_some(e)
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<Rational> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: &Point, q: &Point) -> Rational {
        if let Some(e) = self.same_edge(p, q) {
            let d = self.param_on(e, p).unwrap() - self.param_on(e, q).unwrap();
            return num_traits::Signed::abs(&d) * &self.edges[e].len;
        }
        let mut best: Option<Rational> = None;
        for (a, da) in self.anchors(p) {
            for (b, db) in self.anchors(q) {
                let d = &da + &db + self.node_distance(a, b);
                if best.as_ref().is_none_or(|x| d < *x) {
                    best = Some(d);
                }
            }
        }
        best.expect("anchors are nonempty")
    }

    /// Pieces of the geodesic from `p` to `q` in travel order.
    pub(crate) fn path_pieces(&self, p: &Point, q: &Point) -> Vec<Piece> {
        if p == q {
            return Vec::new();
        }
        if let Some(e) = self.same_edge(p, q) {
            return vec![Piece {
                edge: e,
                from: self.param_on(e, p).unwrap(),
                to: self.param_on(e, q).unwrap(),
            }];
        }
        let mut best: Option<(Rational, NodeId, NodeId)> = None;
        for (a, da) in self.anchors(p) {
            for (b, db) in self.anchors(q) {
                let d = &da + &db + self.node_distance(a, b);
                if best.as_ref().is_none_or(|x| d < x.0) {
                    best = Some((d, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("anchors are nonempty");
        let mut pieces = Vec::new();
        if let Some(e) = self.edge_id_of(p) {
            pieces.push(Piece {
                edge: e,
                from: self.param_on(e, p).unwrap(),
                to: self.param_on(e, &Point::Node(a)).unwrap(),
            });
        }
        let nodes = self.node_path(a, b);
        for w in nodes.windows(2) {
            let e = self.edge_between(w[0], w[1]).expect("tree path");
            let lo_first = self.edges[e].lo == w[0];
            let (from, to) = if lo_first {
                (rational::zero(), rational::one())
            } else {
                (rational::one(), rational::zero())
            };
            pieces.push(Piece { edge: e, from, to });
        }
        if let Some(e) = self.edge_id_of(q) {
            pieces.push(Piece {
                edge: e,
                from: self.param_on(e, &Point::Node(b)).unwrap(),
                to: self.param_on(e, q).unwrap(),
            });
        }
        pieces
    }

    /// The point at distance `s` from `p` on the geodesic toward `q` (clamped at `q`).
    pub fn point_toward(&self, p: &Point, q: &Point, s: &Rational) -> Result<Point> {
        self.check_point(p)?;
        self.check_point(q)?;
        let mut left = s.clone();
        for piece in self.path_pieces(p, q) {
            let len = &self.edges[piece.edge].len;
            let span = num_traits::Signed::abs(&(&piece.to - &piece.from)) * len;
            if left <= span {
                let step = &left / len;
                let t = if piece.to > piece.from {
                    &piece.from + step
                } else {
                    &piece.from - step
                };
                return Ok(self.point_on_edge(piece.edge, t));
            }
            left -= span;
        }
        Ok(q.clone())
    }

    /// Whether `z` lies on the arc from `x` to `y`.
    pub fn between(&self, x: &Point, y: &Point, z: &Point) -> Result<bool> {
        Ok(self.distance(x, z)? + self.distance(z, y)? == self.distance(x, y)?)
    }

    pub(crate) fn between_unchecked(&self, x: &Point, y: &Point, z: &Point) -> bool {
        self.distance_unchecked(x, z) + self.distance_unchecked(z, y) == self.distance_unchecked(x, y)
    }
}

/// Realized set of a subdendrite: member nodes plus, per edge, the closed
/// parameter interval it covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Region {
    nodes: Vec<bool>,
    cover: Vec<Option<(Rational, Rational)>>,
}

impl Region {
    fn empty(w: &Dendrite) -> Self {
        Region {
            nodes: vec![false; w.node_count()],
            cover: vec![None; w.edges.len()],
        }
    }

    fn add_point(&mut self, w: &Dendrite, p: &Point) {
        match p {
            Point::Node(u) => self.nodes[*u] = true,
            Point::Edge { .. } => {
                let e = w.edge_id_of(p).expect("checked point");
                let t = w.param_on(e, p).unwrap();
                self.widen(e, t.clone(), t);
            }
        }
    }

    fn widen(&mut self, e: EdgeId, a: Rational, b: Rational) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.cover[e] = Some(match self.cover[e].take() {
            None => (a, b),
            Some((x, y)) => (rational::min(&x, &a), rational::max(&y, &b)),
        });
    }

    fn add_piece(&mut self, w: &Dendrite, piece: &Piece) {
        let edge = &w.edges[piece.edge];
        for t in [&piece.from, &piece.to] {
            if t.is_zero() {
                self.nodes[edge.lo] = true;
            } else if t.is_one() {
                self.nodes[edge.hi] = true;
            }
        }
        if piece.from != piece.to {
            self.widen(piece.edge, piece.from.clone(), piece.to.clone());
        }
    }

    /// Closed parameter interval of the region on edge `e`, if any.
    pub fn slice(&self, w: &Dendrite, e: EdgeId) -> Option<(Rational, Rational)> {
        if let Some(c) = &self.cover[e] {
            return Some(c.clone());
        }
        let edge = &w.edges[e];
        if self.nodes[edge.lo] {
            Some((rational::zero(), rational::zero()))
        } else if self.nodes[edge.hi] {
            Some((rational::one(), rational::one()))
        } else {
            None
        }
    }

    pub fn contains(&self, w: &Dendrite, p: &Point) -> bool {
        match p {
            Point::Node(u) => self.nodes[*u],
            Point::Edge { t, .. } => {
                let e = w.edge_id_of(p).expect("checked point");
                matches!(&self.cover[e], Some((a, b)) if a <= t && t <= b)
            }
        }
    }

    pub fn contains_node(&self, u: NodeId) -> bool {
        self.nodes[u]
    }

    /// Number of incident edges along which the region leaves node `u`.
    pub fn degree(&self, w: &Dendrite, u: NodeId) -> usize {
        if !self.nodes[u] {
            return 0;
        }
        w.adj[u]
            .iter()
            .filter(|&&(_, e)| match &self.cover[e] {
                Some((a, b)) if a < b => {
                    if w.edges[e].lo == u {
                        a.is_zero()
                    } else {
                        b.is_one()
                    }
                }
                _ => false,
            })
            .count()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.nodes.iter().zip(&other.nodes).all(|(a, b)| !a || *b)
            && self.cover.iter().zip(&other.cover).all(|(x, y)| match (x, y) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some((a, b)), Some((c, d))) => c <= a && b <= d,
            })
    }

    pub fn intersect(&self, w: &Dendrite, other: &Region) -> Option<Region> {
        let mut out = Region::empty(w);
        let mut any = false;
        for u in 0..self.nodes.len() {
            out.nodes[u] = self.nodes[u] && other.nodes[u];
            any |= out.nodes[u];
        }
        for e in 0..self.cover.len() {
            if let (Some((a, b)), Some((c, d))) = (&self.cover[e], &other.cover[e]) {
                let lo = rational::max(a, c);
                let hi = rational::min(b, d);
                if lo <= hi {
                    // a bare endpoint is already recorded in `nodes`
                    if lo == hi && (lo.is_zero() || lo.is_one()) {
                        continue;
                    }
                    out.cover[e] = Some((lo, hi));
                    any = true;
                }
            }
        }
        any.then_some(out)
    }

    fn member_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter(|(_, b)| **b).map(|(u, _)| u)
    }

    fn extremes(&self, w: &Dendrite) -> Vec<Point> {
        let mut out = Vec::new();
        for u in self.member_nodes() {
            if self.degree(w, u) <= 1 {
                out.push(Point::Node(u));
            }
        }
        for (e, c) in self.cover.iter().enumerate() {
            if let Some((a, b)) = c {
                if !a.is_zero() {
                    out.push(w.point_on_edge(e, a.clone()));
                }
                if !b.is_one() && a != b {
                    out.push(w.point_on_edge(e, b.clone()));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// A subcontinuum of a dendrite: the geodesic hull of its extreme points.
#[derive(Clone, Debug)]
pub struct Subdendrite {
    ambient: Arc<Dendrite>,
    extremes: Vec<Point>,
    region: Region,
}

impl PartialEq for Subdendrite {
    fn eq(&self, other: &Self) -> bool {
        self.same_ambient(other) && self.extremes == other.extremes
    }
}

impl Eq for Subdendrite {}

impl Subdendrite {
    pub fn hull(ambient: &Arc<Dendrite>, points: &[Point]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidSubdendrite("no extreme points".into()));
        };
        for p in points {
            ambient.check_point(p)?;
        }
        let mut region = Region::empty(ambient);
        region.add_point(ambient, first);
        for p in &points[1..] {
            region.add_point(ambient, p);
            for piece in ambient.path_pieces(first, p) {
                region.add_piece(ambient, &piece);
            }
        }
        Ok(Self::from_region(ambient, region))
    }

    pub(crate) fn from_region(ambient: &Arc<Dendrite>, region: Region) -> Self {
        let extremes = region.extremes(ambient);
        Subdendrite {
            ambient: Arc::clone(ambient),
            extremes,
            region,
        }
    }

    pub fn whole(ambient: &Arc<Dendrite>) -> Self {
        let mut region = Region::empty(ambient);
        region.nodes.iter_mut().for_each(|b| *b = true);
        for c in region.cover.iter_mut() {
            *c = Some((rational::zero(), rational::one()));
        }
        Self::from_region(ambient, region)
    }

    pub fn singleton(ambient: &Arc<Dendrite>, p: Point) -> Result<Self> {
        Self::hull(ambient, &[p])
    }

    pub fn arc(ambient: &Arc<Dendrite>, p: Point, q: Point) -> Result<Self> {
        Self::hull(ambient, &[p, q])
    }

    pub fn ambient(&self) -> &Arc<Dendrite> {
        &self.ambient
    }

    pub fn extremes(&self) -> &[Point] {
        &self.extremes
    }

    pub fn same_ambient(&self, other: &Subdendrite) -> bool {
        Arc::ptr_eq(&self.ambient, &other.ambient) || self.ambient == other.ambient
    }

    pub(crate) fn require_same_ambient(&self, other: &Subdendrite) -> Result<()> {
        if self.same_ambient(other) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.ambient.check_point(p).is_ok() && self.region.contains(&self.ambient, p)
    }

    pub fn contains_node(&self, u: NodeId) -> bool {
        self.region.contains_node(u)
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.region.member_nodes().collect()
    }

    /// Closed parameter interval covered on edge `e`.
    pub fn slice(&self, e: EdgeId) -> Option<(Rational, Rational)> {
        self.region.slice(&self.ambient, e)
    }

    /// `self.slice(e) == other.slice(e)` without cloning.
    pub(crate) fn same_slice(&self, other: &Subdendrite, e: EdgeId) -> bool {
        let (x, y) = (&self.region, &other.region);
        match (&x.cover[e], &y.cover[e]) {
            (None, None) => {
                let edge = &self.ambient.edges[e];
                let key = |r: &Region| (r.nodes[edge.lo], !r.nodes[edge.lo] && r.nodes[edge.hi]);
                key(x) == key(y)
            }
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.extremes.len() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.region.nodes.iter().all(|b| *b)
            && self
                .region
                .cover
                .iter()
                .all(|c| matches!(c, Some((a, b)) if a.is_zero() && b.is_one()))
    }

    pub fn is_subset(&self, other: &Subdendrite) -> bool {
        self.same_ambient(other) && self.region.is_subset(&other.region)
    }

    pub fn is_proper_subset(&self, other: &Subdendrite) -> bool {
        self.is_subset(other) && self.region != other.region
    }

    pub fn intersection(&self, other: &Subdendrite) -> Result<Option<Subdendrite>> {
        self.require_same_ambient(other)?;
        Ok(self
            .region
            .intersect(&self.ambient, &other.region)
            .map(|r| Self::from_region(&self.ambient, r)))
    }

    /// Union of two overlapping subdendrites.
    pub fn union(&self, other: &Subdendrite) -> Result<Subdendrite> {
        self.require_same_ambient(other)?;
        let mut points = self.extremes.clone();
        points.extend(other.extremes.iter().cloned());
        if self.intersection(other)?.is_none() {
            return Err(Error::InvalidSubdendrite("union of disjoint subdendrites".into()));
        }
        Subdendrite::hull(&self.ambient, &points)
    }

    /// Total length of the realized set.
    pub fn length(&self) -> Rational {
        let mut total = rational::zero();
        for (e, c) in self.region.cover.iter().enumerate() {
            if let Some((a, b)) = c {
                total += (b - a) * &self.ambient.edges[e].len;
            }
        }
        total
    }

    /// Whether the subdendrite leaves node `u` along edge `e` with positive length.
    pub fn covers_direction(&self, u: NodeId, e: EdgeId) -> bool {
        match &self.region.cover[e] {
            Some((a, b)) if a < b => {
                if self.ambient.edges[e].lo == u {
                    a.is_zero()
                } else {
                    b.is_one()
                }
            }
            _ => false,
        }
    }

    /// Number of directions of `u` covered by the subdendrite.
    pub fn degree_at(&self, u: NodeId) -> usize {
        self.region.degree(&self.ambient, u)
    }

    /// Order of `p` in the subdendrite; at nodes where every ambient direction
    /// is covered the node's target order is reported instead of its degree.
    pub fn order_of(&self, p: &Point) -> Result<Order> {
        self.ambient.check_point(p)?;
        if !self.region.contains(&self.ambient, p) {
            return Err(Error::NotInSubdendrite);
        }
        match p {
            Point::Edge { t, .. } => {
                let e = self.ambient.edge_id_of(p).unwrap();
                let (a, b) = self.region.cover[e].clone().expect("contained");
                Ok(if *t == a || *t == b { Order::Finite(1) } else { Order::Finite(2) })
            }
            Point::Node(u) => {
                let deg = self.region.degree(&self.ambient, *u);
                if deg == self.ambient.degree(*u) && deg > 0 {
                    Ok(self.ambient.order(*u))
                } else {
                    Ok(Order::Finite(deg.max(1) as u32))
                }
            }
        }
    }

    /// The canonical extremes.
    pub fn endpoints(&self) -> Vec<Point> {
        self.extremes.clone()
    }

    /// Nodes whose order in the subdendrite is at least 3.
    pub fn branch_points(&self) -> Vec<Point> {
        self.nodes()
            .into_iter()
            .map(Point::Node)
            .filter(|p| self.order_of(p).map(Order::is_branching).unwrap_or(false))
            .collect()
    }

    /// The point of the subdendrite that lies on every arc from `y` into it.
    pub fn first_point_map(&self, y: &Point) -> Result<Point> {
        self.ambient.check_point(y)?;
        Ok(self.first_point_unchecked(y))
    }

    pub(crate) fn first_point_unchecked(&self, y: &Point) -> Point {
        if self.region.contains(&self.ambient, y) {
            return y.clone();
        }
        self.first_hit(y, &self.extremes[0])
    }

    /// First point of the subdendrite met when travelling from `y` to `target`,
    /// which must itself belong to the subdendrite.
    pub(crate) fn first_hit(&self, y: &Point, target: &Point) -> Point {
        let w = &*self.ambient;
        if self.region.contains(w, y) {
            return y.clone();
        }
        for piece in w.path_pieces(y, target) {
            if let Some((a, b)) = self.region.slice(w, piece.edge) {
                let hit = if piece.from <= piece.to {
                    let first = rational::max(&piece.from, &a);
                    (first <= piece.to && first <= b).then_some(first)
                } else {
                    let first = rational::min(&piece.from, &b);
                    (first >= piece.to && first >= a).then_some(first)
                };
                if let Some(t) = hit {
                    return w.point_on_edge(piece.edge, t);
                }
            }
        }
        target.clone()
    }

    /// Distance from `y` to the nearest point of the subdendrite.
    pub fn distance_to(&self, y: &Point) -> Result<Rational> {
        let r = self.first_point_map(y)?;
        Ok(self.ambient.distance_unchecked(y, &r))
    }
}
