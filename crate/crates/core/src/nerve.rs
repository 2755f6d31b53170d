//! Finite metric graphs, covers by open balls, nerves, tree-likeness at a
//! resolution, and tree approximations of connected subspaces.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::hausdorff;
use crate::rational::{self, Rational};
use crate::tree::{Dendrite, Point, Subdendrite};

pub type GEdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GEdge {
    pub u: usize,
    pub v: usize,
    pub len: Rational,
}

/// A connected or disconnected simple graph with positive rational edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricGraph {
    n: usize,
    edges: Vec<GEdge>,
    adj: Vec<Vec<(usize, GEdgeId)>>,
}

/// A node, or the point at arc length `s` from `edges[edge].u` with `0 < s < len`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GPoint {
    Node(usize),
    Edge { edge: GEdgeId, s: Rational },
}

impl MetricGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, Rational)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut out = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for (i, (u, v, len)) in edges.into_iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!("edge {i} names a node outside 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("edge {i} is a loop")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidArgument(format!("edge {i} duplicates ({u},{v})")));
            }
            if !rational::is_positive(&len) {
                return Err(Error::InvalidArgument(format!("edge {i} has nonpositive length")));
            }
            adj[u].push((v, i));
            adj[v].push((u, i));
            out.push(GEdge { u, v, len });
        }
        Ok(MetricGraph { n, edges: out, adj })
    }

    pub fn from_dendrite(w: &Dendrite) -> Self {
        let edges = w.edges().iter().map(|e| (e.lo, e.hi, e.len.clone())).collect();
        MetricGraph::new(w.node_count(), edges).expect("dendrites are simple graphs")
    }

    /// The subdendrite as a graph: its nodes, plus one node per extreme that
    /// sits strictly inside an edge.
    pub fn from_subdendrite(k: &Subdendrite) -> Self {
        let w = k.ambient();
        let mut ids: BTreeMap<Point, usize> = BTreeMap::new();
        let id = |p: Point, ids: &mut BTreeMap<Point, usize>| {
            let next = ids.len();
            *ids.entry(p).or_insert(next)
        };
        for u in k.nodes() {
            id(Point::Node(u), &mut ids);
        }
        let mut edges = Vec::new();
        for (e, edge) in w.edges().iter().enumerate() {
            let Some((lo, hi)) = k.slice(e) else { continue };
            if lo == hi {
                continue;
            }
            let a = id(w.point_on_edge(e, lo.clone()), &mut ids);
            let b = id(w.point_on_edge(e, hi.clone()), &mut ids);
            edges.push((a, b, (hi - lo) * &edge.len));
        }
        if ids.is_empty() {
            id(k.extremes()[0].clone(), &mut ids);
        }
        MetricGraph::new(ids.len(), edges).expect("slices form a simple graph")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[GEdge] {
        &self.edges
    }

    pub fn incident(&self, u: usize) -> &[(usize, GEdgeId)] {
        &self.adj[u]
    }

    pub fn check_point(&self, p: &GPoint) -> Result<()> {
        match p {
            GPoint::Node(u) if *u < self.n => Ok(()),
            GPoint::Edge { edge, s } if *edge < self.edges.len() => {
                if rational::is_positive(s) && *s < self.edges[*edge].len {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!("arc length {} outside edge {edge}", rational::format(s))))
                }
            }
            _ => Err(Error::InvalidPoint(format!("{p:?} is not in the graph"))),
        }
    }

    /// Shortest-path distances from `p` to every node.
    pub fn node_distances(&self, p: &GPoint) -> Vec<Option<Rational>> {
        let mut dist: Vec<Option<Rational>> = vec![None; self.n];
        let mut heap = BinaryHeap::new();
        match p {
            GPoint::Node(u) => heap.push(Reverse((rational::zero(), *u))),
            GPoint::Edge { edge, s } => {
                let e = &self.edges[*edge];
                heap.push(Reverse((s.clone(), e.u)));
                heap.push(Reverse((&e.len - s, e.v)));
            }
        }
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist[u].is_some() {
                continue;
            }
            for &(v, e) in &self.adj[u] {
                if dist[v].is_none() {
                    heap.push(Reverse((&d + &self.edges[e].len, v)));
                }
            }
            dist[u] = Some(d);
        }
        dist
    }

    pub fn distance(&self, p: &GPoint, q: &GPoint) -> Option<Rational> {
        let d = self.node_distances(p);
        let mut best = match q {
            GPoint::Node(v) => d[*v].clone(),
            GPoint::Edge { edge, s } => {
                let e = &self.edges[*edge];
                let a = d[e.u].as_ref().map(|x| x + s);
                let b = d[e.v].as_ref().map(|x| x + (&e.len - s));
                a.into_iter().chain(b).min()
            }
        };
        if let (GPoint::Edge { edge: e1, s: s1 }, GPoint::Edge { edge: e2, s: s2 }) = (p, q) {
            if e1 == e2 {
                let direct = if s1 > s2 { s1 - s2 } else { s2 - s1 };
                best = Some(best.map_or(direct.clone(), |b| rational::min(&b, &direct)));
            }
        }
        best
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        if self.n == 0 {
            return false;
        }
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }

    /// Farthest distance from `u` to any point of the graph.
    fn eccentricity(&self, u: usize) -> Rational {
        let d = self.node_distances(&GPoint::Node(u));
        let mut best = rational::zero();
        for e in &self.edges {
            if let (Some(a), Some(b)) = (&d[e.u], &d[e.v]) {
                let far = rational::half(&(a + b + &e.len));
                if far > best {
                    best = far;
                }
            }
        }
        best
    }

    fn point_at(&self, e: GEdgeId, s: Rational) -> GPoint {
        let edge = &self.edges[e];
        if s.is_zero() {
            GPoint::Node(edge.u)
        } else if s == edge.len {
            GPoint::Node(edge.v)
        } else {
            GPoint::Edge { edge: e, s }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub center: GPoint,
    pub radius: Rational,
}

/// Finite cover of a metric graph by open balls.
#[derive(Clone, Debug)]
pub struct Cover {
    graph: Arc<MetricGraph>,
    balls: Vec<Ball>,
}

impl Cover {
    pub fn new(graph: Arc<MetricGraph>, balls: Vec<Ball>) -> Result<Self> {
        for b in &balls {
            graph.check_point(&b.center)?;
            if !rational::is_positive(&b.radius) {
                return Err(Error::InvalidArgument("ball radius must be positive".into()));
            }
        }
        Ok(Cover { graph, balls })
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    /// Upper bound on the largest diameter of an open set of the cover.
    pub fn mesh_bound(&self) -> Rational {
        let whole = self.graph.edges.iter().map(|e| e.len.clone()).sum::<Rational>();
        self.balls
            .iter()
            .map(|b| rational::min(&(&b.radius * rational::int(2)), &whole))
            .max()
            .unwrap_or_else(rational::zero)
    }

    /// Whether every point of the graph lies in some ball.
    pub fn covers_graph(&self) -> bool {
        let prints: Vec<Footprint> = self.balls.iter().map(|b| footprint(&self.graph, b)).collect();
        let nodes_ok = (0..self.graph.n).all(|u| prints.iter().any(|f| f.nodes[u]));
        nodes_ok
            && self.graph.edges.iter().enumerate().all(|(e, edge)| {
                let mut ivs: Vec<Iv> = prints.iter().flat_map(|f| f.edges.get(&e).cloned().unwrap_or_default()).collect();
                ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
                // Nodes are covered, so only interior gaps matter.
                let mut reach = rational::zero();
                for iv in ivs {
                    if iv.lo > reach || (iv.lo == reach && !iv.lo_closed && !reach.is_zero()) {
                        return false;
                    }
                    if iv.hi > reach {
                        reach = iv.hi;
                    }
                }
                reach == edge.len
            })
    }
}

/// Part of an edge in arc-length coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Iv {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

impl Iv {
    fn contains(&self, x: &Rational) -> bool {
        (*x > self.lo || (*x == self.lo && self.lo_closed)) && (*x < self.hi || (*x == self.hi && self.hi_closed))
    }

    fn meets(&self, other: &Iv) -> bool {
        let lo = rational::max(&self.lo, &other.lo);
        let hi = rational::min(&self.hi, &other.hi);
        lo < hi || (lo == hi && self.contains(&lo) && other.contains(&lo))
    }
}

struct Footprint {
    nodes: Vec<bool>,
    edges: BTreeMap<GEdgeId, Vec<Iv>>,
}

fn footprint(g: &MetricGraph, b: &Ball) -> Footprint {
    let d = g.node_distances(&b.center);
    let r = &b.radius;
    let nodes: Vec<bool> = d.iter().map(|x| x.as_ref().is_some_and(|x| x < r)).collect();
    let mut edges: BTreeMap<GEdgeId, Vec<Iv>> = BTreeMap::new();
    for (e, edge) in g.edges.iter().enumerate() {
        let mut ivs = Vec::new();
        if let Some(du) = d[edge.u].as_ref().filter(|x| *x < r) {
            let reach = r - du;
            ivs.push(Iv {
                lo: rational::zero(),
                hi: rational::min(&reach, &edge.len),
                lo_closed: true,
                hi_closed: reach > edge.len,
            });
        }
        if let Some(dv) = d[edge.v].as_ref().filter(|x| *x < r) {
            let reach = r - dv;
            ivs.push(Iv {
                lo: rational::max(&(&edge.len - &reach), &rational::zero()),
                hi: edge.len.clone(),
                lo_closed: reach > edge.len,
                hi_closed: true,
            });
        }
        if let GPoint::Edge { edge: ce, s } = &b.center {
            if *ce == e {
                let lo = s - r;
                let hi = s + r;
                ivs.push(Iv {
                    lo_closed: lo < rational::zero(),
                    hi_closed: hi > edge.len,
                    lo: rational::max(&lo, &rational::zero()),
                    hi: rational::min(&hi, &edge.len),
                });
            }
        }
        if !ivs.is_empty() {
            edges.insert(e, ivs);
        }
    }
    Footprint { nodes, edges }
}

fn footprints_meet(a: &Footprint, b: &Footprint) -> bool {
    if a.nodes.iter().zip(&b.nodes).any(|(x, y)| *x && *y) {
        return true;
    }
    a.edges.iter().any(|(e, ivs)| {
        b.edges
            .get(e)
            .is_some_and(|other| ivs.iter().any(|x| other.iter().any(|y| x.meets(y))))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NerveGraph {
    pub vertices: usize,
    /// `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl NerveGraph {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }

    /// Some simple cycle, as a vertex sequence without repetition.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut parent: Vec<Option<usize>> = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        for root in 0..self.vertices {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if parent[u] == Some(v) {
                        continue;
                    }
                    if seen[v] {
                        // Both ends are in the DFS forest: join their root paths.
                        let path_to_root = |mut x: usize| {
                            let mut p = vec![x];
                            while let Some(y) = parent[x] {
                                p.push(y);
                                x = y;
                            }
                            p
                        };
                        let pu = path_to_root(u);
                        let pv = path_to_root(v);
                        let common = pu.iter().find(|x| pv.contains(x)).copied()?;
                        let mut cycle: Vec<usize> = pu.iter().copied().take_while(|&x| x != common).collect();
                        cycle.push(common);
                        let back: Vec<usize> = pv.iter().copied().take_while(|&x| x != common).collect();
                        cycle.extend(back.into_iter().rev());
                        return Some(cycle);
                    }
                    seen[v] = true;
                    parent[v] = Some(u);
                    stack.push(v);
                }
            }
        }
        None
    }
}

pub fn nerve(c: &Cover) -> NerveGraph {
    let prints: Vec<Footprint> = c.balls.iter().map(|b| footprint(&c.graph, b)).collect();
    let mut edges = Vec::new();
    for i in 0..prints.len() {
        for j in (i + 1)..prints.len() {
            if footprints_meet(&prints[i], &prints[j]) {
                edges.push((i, j));
            }
        }
    }
    NerveGraph {
        vertices: prints.len(),
        edges,
    }
}

pub fn is_tree_nerve(g: &NerveGraph) -> bool {
    g.is_connected() && g.edges.len() + 1 == g.vertices
}

/// Largest `g` with every edge length an integer multiple of `g`.
fn length_gcd(g: &MetricGraph) -> Option<Rational> {
    let mut num = num_bigint::BigInt::zero();
    let mut den = num_bigint::BigInt::from(1);
    for e in &g.edges {
        den = den.lcm(e.len.denom());
    }
    for e in &g.edges {
        num = num.gcd(&(e.len.numer() * (&den / e.len.denom())));
    }
    (!num.is_zero()).then(|| Rational::new(num, den))
}

/// The cover tried first: one ball around a centre when the whole graph is
/// small enough, otherwise balls of radius `3h/5` at every point of the
/// subdivision of spacing `h ≤ epsilon/4` (with `h` dividing every length).
/// Adjacent centres are `h` apart and all others at least `2h`, so the nerve
/// is the subdivided graph itself.
pub fn canonical_cover(g: &Arc<MetricGraph>, epsilon: &Rational) -> Result<Cover> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if !g.is_connected() {
        return Err(Error::InvalidArgument("the graph is not connected".into()));
    }
    let (centre, ecc) = (0..g.n)
        .map(|u| (u, g.eccentricity(u)))
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("nonempty graph");
    if &ecc * rational::int(2) < *epsilon {
        let radius = &ecc + (rational::half(epsilon) - &ecc) / rational::int(2);
        return Cover::new(g.clone(), vec![Ball { center: GPoint::Node(centre), radius }]);
    }
    let unit = length_gcd(g).expect("a graph this large has edges");
    let quarter = epsilon / rational::int(4);
    let pieces = (&unit / &quarter).ceil().to_integer();
    let h = &unit / Rational::from_integer(pieces);
    let radius = &h * rational::rat(3, 5);
    let mut balls: Vec<Ball> = (0..g.n)
        .map(|u| Ball {
            center: GPoint::Node(u),
            radius: radius.clone(),
        })
        .collect();
    for (e, edge) in g.edges.iter().enumerate() {
        let steps = (&edge.len / &h).to_integer().to_usize().expect("subdivision count fits");
        for j in 1..steps {
            balls.push(Ball {
                center: GPoint::Edge {
                    edge: e,
                    s: &h * rational::int(j as i64),
                },
                radius: radius.clone(),
            });
        }
    }
    Cover::new(g.clone(), balls)
}

#[derive(Clone, Debug)]
pub struct TreeLikeReport {
    pub tree_like: bool,
    pub cover: Cover,
    pub nerve: NerveGraph,
    /// Ball indices of a nerve cycle when no tree nerve was found.
    pub cycle: Option<Vec<usize>>,
    /// The graph nodes that centres of that cycle sit on, in cycle order.
    pub cycle_nodes: Vec<usize>,
}

const ABSORB_ROUNDS: usize = 8;

/// Replaces the balls of a nerve cycle by one ball around one of their centres
/// when that ball is still finer than epsilon.
fn absorb(c: &Cover, cycle: &[usize], epsilon: &Rational) -> Option<Cover> {
    let g = &c.graph;
    let mut best: Option<(Rational, GPoint)> = None;
    for &i in cycle {
        let centre = &c.balls[i].center;
        let reach = cycle
            .iter()
            .map(|&j| g.distance(centre, &c.balls[j].center).map(|d| d + &c.balls[j].radius))
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .max()?;
        if &reach * rational::int(2) < *epsilon && best.as_ref().is_none_or(|b| reach < b.0) {
            best = Some((reach, centre.clone()));
        }
    }
    let (radius, center) = best?;
    let mut balls: Vec<Ball> = c
        .balls
        .iter()
        .enumerate()
        .filter(|(i, _)| !cycle.contains(i))
        .map(|(_, b)| b.clone())
        .collect();
    balls.push(Ball { center, radius });
    Cover::new(g.clone(), balls).ok()
}

fn cycle_rank(n: &NerveGraph) -> usize {
    (n.edges.len() + 1).saturating_sub(n.vertices)
}

/// Looks for a cover of mesh below epsilon with a tree nerve: the canonical
/// cover first, then a few rounds merging the balls of a nerve cycle.
pub fn tree_like_check(g: &Arc<MetricGraph>, epsilon: &Rational) -> Result<TreeLikeReport> {
    let canonical = canonical_cover(g, epsilon)?;
    let first = nerve(&canonical);
    if is_tree_nerve(&first) {
        return Ok(TreeLikeReport {
            tree_like: true,
            cover: canonical,
            nerve: first,
            cycle: None,
            cycle_nodes: Vec::new(),
        });
    }
    let mut current = (canonical.clone(), first.clone());
    for _ in 0..ABSORB_ROUNDS {
        let Some(cycle) = current.1.find_cycle() else { break };
        let Some(next) = absorb(&current.0, &cycle, epsilon) else { break };
        let n = nerve(&next);
        if cycle_rank(&n) >= cycle_rank(&current.1) {
            break;
        }
        if is_tree_nerve(&n) {
            return Ok(TreeLikeReport {
                tree_like: true,
                cover: next,
                nerve: n,
                cycle: None,
                cycle_nodes: Vec::new(),
            });
        }
        current = (next, n);
    }
    let cycle = first.find_cycle();
    let cycle_nodes = cycle
        .iter()
        .flatten()
        .filter_map(|&i| match canonical.balls[i].center {
            GPoint::Node(u) => Some(u),
            GPoint::Edge { .. } => None,
        })
        .collect();
    Ok(TreeLikeReport {
        tree_like: false,
        cover: canonical,
        nerve: first,
        cycle,
        cycle_nodes,
    })
}

/// A connected union of whole edges and nodes of a metric graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSubspace {
    nodes: Vec<usize>,
    edges: Vec<GEdgeId>,
}

impl GraphSubspace {
    /// Endpoints of the listed edges are added to the nodes.
    pub fn new(g: &MetricGraph, nodes: Vec<usize>, edges: Vec<GEdgeId>) -> Result<Self> {
        let mut member = vec![false; g.n];
        for &u in &nodes {
            if u >= g.n {
                return Err(Error::InvalidArgument(format!("node {u} is not in the graph")));
            }
            member[u] = true;
        }
        for &e in &edges {
            let edge = g.edges.get(e).ok_or_else(|| Error::InvalidArgument(format!("no edge {e}")))?;
            member[edge.u] = true;
            member[edge.v] = true;
        }
        let nodes: Vec<usize> = (0..g.n).filter(|&u| member[u]).collect();
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("empty subspace".into()));
        }
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        let sub = GraphSubspace { nodes, edges };
        if !sub.is_connected(g) {
            return Err(Error::InvalidArgument("subspace is not connected".into()));
        }
        Ok(sub)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GEdgeId] {
        &self.edges
    }

    fn is_connected(&self, g: &MetricGraph) -> bool {
        let mut seen = vec![false; g.n];
        let mut stack = vec![self.nodes[0]];
        seen[self.nodes[0]] = true;
        while let Some(u) = stack.pop() {
            for &e in &self.edges {
                let edge = &g.edges[e];
                for (a, b) in [(edge.u, edge.v), (edge.v, edge.u)] {
                    if a == u && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        self.nodes.iter().all(|&u| seen[u])
    }
}

/// A tree inside a metric graph: closed pieces `(edge, from, to)` in arc
/// length, or a single point when there are none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphTree {
    pub pieces: Vec<(GEdgeId, Rational, Rational)>,
    pub point: GPoint,
}

#[derive(Clone, Debug)]
pub struct TreeApproximation {
    pub tree: GraphTree,
    pub net: Vec<GPoint>,
    pub hausdorff: Rational,
}

/// The subspace subdivided at spacing at most `step`: vertices are points,
/// pieces join consecutive ones along an edge.
struct Refined {
    points: Vec<GPoint>,
    pieces: Vec<(usize, usize, Rational, GEdgeId, Rational)>,
    adj: Vec<Vec<(usize, usize)>>,
}

fn refine(g: &MetricGraph, edges: &[GEdgeId], step: &Rational) -> Refined {
    let mut index: BTreeMap<GPoint, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut id = |p: GPoint, points: &mut Vec<GPoint>| {
        *index.entry(p.clone()).or_insert_with(|| {
            points.push(p);
            points.len() - 1
        })
    };
    let mut pieces = Vec::new();
    for &e in edges {
        let len = &g.edges[e].len;
        let m = (len / step).ceil().to_integer().to_i64().expect("piece count fits").max(1);
        let h = len / rational::int(m);
        let mut prev = id(GPoint::Node(g.edges[e].u), &mut points);
        for j in 1..=m {
            let s = &h * rational::int(j);
            let next = id(g.point_at(e, s.clone()), &mut points);
            pieces.push((prev, next, h.clone(), e, &s - &h));
            prev = next;
        }
    }
    let mut adj = vec![Vec::new(); points.len()];
    for (k, (a, b, ..)) in pieces.iter().enumerate() {
        adj[*a].push((*b, k));
        adj[*b].push((*a, k));
    }
    Refined { points, pieces, adj }
}

fn refined_distances(r: &Refined, sources: &[usize]) -> Vec<Option<Rational>> {
    let mut dist: Vec<Option<Rational>> = vec![None; r.points.len()];
    let mut heap: BinaryHeap<Reverse<(Rational, usize)>> = sources.iter().map(|&s| Reverse((rational::zero(), s))).collect();
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u].is_some() {
            continue;
        }
        for &(v, k) in &r.adj[u] {
            if dist[v].is_none() {
                heap.push(Reverse((&d + &r.pieces[k].2, v)));
            }
        }
        dist[u] = Some(d);
    }
    dist
}

/// Shortest path inside the refined subspace, ties broken towards lower ids.
fn refined_path(r: &Refined, from: usize, to: usize) -> Vec<usize> {
    let dist = refined_distances(r, &[to]);
    let mut path = vec![from];
    let mut u = from;
    while u != to {
        let du = dist[u].as_ref().expect("connected");
        let next = r.adj[u]
            .iter()
            .filter(|&&(v, k)| dist[v].as_ref().is_some_and(|dv| dv + &r.pieces[k].2 == *du))
            .map(|&(v, _)| v)
            .min()
            .expect("a step towards the target");
        path.push(next);
        u = next;
    }
    path
}

/// Net points first, then arcs from each back to the first one, each cut at
/// the first point where it meets the tree built so far.
pub fn tree_approximation_graph(g: &MetricGraph, k: &GraphSubspace, epsilon: &Rational) -> Result<TreeApproximation> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if k.edges.is_empty() {
        let p = GPoint::Node(k.nodes[0]);
        if k.nodes.len() > 1 {
            return Err(Error::InvalidArgument("subspace is not connected".into()));
        }
        return Ok(TreeApproximation {
            tree: GraphTree { pieces: Vec::new(), point: p.clone() },
            net: vec![p],
            hausdorff: rational::zero(),
        });
    }
    let third = epsilon / rational::int(3);
    let r = refine(g, &k.edges, &(epsilon / rational::int(6)));
    let mut net: Vec<usize> = Vec::new();
    for u in 0..r.points.len() {
        let d = refined_distances(&r, &[u]);
        if net.iter().all(|&a| d[a].as_ref().is_some_and(|x| *x > third)) {
            net.push(u);
        }
    }
    let mut in_tree = vec![false; r.points.len()];
    let mut used = vec![false; r.pieces.len()];
    in_tree[net[0]] = true;
    for &a in &net[1..] {
        let path = refined_path(&r, a, net[0]);
        for w in path.windows(2) {
            if in_tree[w[0]] {
                break;
            }
            let k = r.adj[w[0]].iter().find(|p| p.0 == w[1]).expect("adjacent").1;
            used[k] = true;
            in_tree[w[0]] = true;
        }
    }
    let mut pieces: Vec<(GEdgeId, Rational, Rational)> = r
        .pieces
        .iter()
        .zip(&used)
        .filter(|(_, u)| **u)
        .map(|((_, _, h, e, s), _)| (*e, s.clone(), s + h))
        .collect();
    pieces.sort();
    let tree = GraphTree {
        pieces,
        point: r.points[net[0]].clone(),
    };
    let hausdorff = distance_to_tree(g, k, &tree, epsilon)?;
    Ok(TreeApproximation {
        tree,
        net: net.iter().map(|&u| r.points[u].clone()).collect(),
        hausdorff,
    })
}

/// `max_{p ∈ K} d(p, T)` for `T ⊆ K`, which is then the Hausdorff distance.
pub fn distance_to_tree(g: &MetricGraph, k: &GraphSubspace, t: &GraphTree, epsilon: &Rational) -> Result<Rational> {
    // Refine the whole graph so that every tree piece is a union of pieces.
    let mut cuts: BTreeMap<GEdgeId, Vec<Rational>> = BTreeMap::new();
    for (e, a, b) in &t.pieces {
        cuts.entry(*e).or_default().extend([a.clone(), b.clone()]);
    }
    let all: Vec<GEdgeId> = (0..g.edges.len()).collect();
    let base = refine(g, &all, &(epsilon / rational::int(6)));
    let mut index: BTreeMap<GPoint, usize> = BTreeMap::new();
    for (i, p) in base.points.iter().enumerate() {
        index.insert(p.clone(), i);
    }
    let mut points = base.points.clone();
    let mut segs: Vec<(usize, usize, Rational, GEdgeId, Rational)> = Vec::new();
    for &e in &all {
        let mut marks: Vec<Rational> = base
            .pieces
            .iter()
            .filter(|p| p.3 == e)
            .flat_map(|p| [p.4.clone(), &p.4 + &p.2])
            .collect();
        marks.extend(cuts.get(&e).cloned().unwrap_or_default());
        marks.sort();
        marks.dedup();
        for w in marks.windows(2) {
            let mut id = |s: &Rational| {
                let p = g.point_at(e, s.clone());
                *index.entry(p.clone()).or_insert_with(|| {
                    points.push(p);
                    points.len() - 1
                })
            };
            let (a, b) = (id(&w[0]), id(&w[1]));
            segs.push((a, b, &w[1] - &w[0], e, w[0].clone()));
        }
    }
    let mut adj = vec![Vec::new(); points.len()];
    for (i, (a, b, ..)) in segs.iter().enumerate() {
        adj[*a].push((*b, i));
        adj[*b].push((*a, i));
    }
    let fine = Refined { points, pieces: segs, adj };
    let in_t = |e: GEdgeId, lo: &Rational, hi: &Rational| t.pieces.iter().any(|(te, a, b)| *te == e && a <= lo && hi <= b);
    let mut sources: Vec<usize> = Vec::new();
    for (a, b, h, e, s) in &fine.pieces {
        if in_t(*e, s, &(s + h)) {
            sources.extend([*a, *b]);
        }
    }
    if sources.is_empty() {
        sources.push(*index.get(&t.point).expect("tree point is a refinement vertex"));
    }
    let dist = refined_distances(&fine, &sources);
    let mut worst = rational::zero();
    for (a, b, h, e, _) in &fine.pieces {
        if !k.edges.contains(e) {
            continue;
        }
        let (Some(da), Some(db)) = (&dist[*a], &dist[*b]) else {
            return Err(Error::InvalidArgument("tree and subspace lie in different components".into()));
        };
        let far = rational::half(&(da + db + h));
        if far > worst {
            worst = far;
        }
    }
    for &u in &k.nodes {
        if let Some(Some(d)) = index.get(&GPoint::Node(u)).map(|&i| dist[i].clone()) {
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// Hull of a greedy epsilon/3-net of `K`, taken from points at spacing at
/// most epsilon/6 along its edges.
pub fn tree_approximation(k: &Subdendrite, epsilon: &Rational) -> Result<(Subdendrite, Rational)> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let w = k.ambient();
    let step = epsilon / rational::int(6);
    let third = epsilon / rational::int(3);
    let mut candidates: Vec<Point> = k.extremes().to_vec();
    for u in k.nodes() {
        candidates.push(Point::Node(u));
    }
    for (e, edge) in w.edges().iter().enumerate() {
        let Some((lo, hi)) = k.slice(e) else { continue };
        let len = (&hi - &lo) * &edge.len;
        let m = (&len / &step).ceil().to_integer().to_i64().expect("piece count fits").max(1);
        for j in 0..=m {
            candidates.push(w.point_on_edge(e, &lo + (&hi - &lo) * rational::rat(j, m)));
        }
    }
    candidates.sort();
    candidates.dedup();
    let mut net: Vec<Point> = Vec::new();
    for p in candidates {
        if net.iter().all(|q| w.distance_unchecked(&p, q) > third) {
            net.push(p);
        }
    }
    let t = Subdendrite::hull(w, &net)?;
    let h = hausdorff(&t, k)?;
    Ok((t, h))
}
