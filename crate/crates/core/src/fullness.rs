//! Maximality of branching nodes, fullness, nowhere density at a resolution,
//! endpoint comparison and the perturbation that repairs fullness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::ball_within;
use crate::rational::{self, Rational};
use crate::tree::{NodeId, Order, Point, Subdendrite};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaximalityMode {
    /// The first point map fiber over `b` is `{b}`.
    Fiber,
    /// No arc from an outside node reaches `K` first at `b`.
    Arc,
    /// `K` meets every component of the ambient minus `b`.
    Component,
}

fn branch_node(k: &Subdendrite, b: &Point) -> Result<NodeId> {
    k.ambient().check_point(b)?;
    let Some(u) = b.node() else {
        return Err(Error::InvalidArgument(format!("{b} is not a node")));
    };
    if !k.contains_node(u) {
        return Err(Error::NotInSubdendrite);
    }
    Ok(u)
}

pub fn is_maximal_branch(k: &Subdendrite, b: &Point, mode: MaximalityMode) -> Result<bool> {
    let u = branch_node(k, b)?;
    let w = k.ambient();
    Ok(match mode {
        MaximalityMode::Component => k.degree_at(u) == w.degree(u),
        MaximalityMode::Fiber => w.incident(u).iter().all(|&(_, e)| {
            let mid = w.point_on_edge(e, rational::rat(1, 2));
            k.first_point_unchecked(&mid) != *b
        }),
        MaximalityMode::Arc => w
            .nodes()
            .filter(|&y| !k.contains_node(y))
            .all(|y| k.first_hit(&Point::Node(y), b) != *b),
    })
}

/// Nondegenerate, and every ambient branching node inside is a maximal branching point.
pub fn is_full(k: &Subdendrite) -> bool {
    !k.is_degenerate() && maximality_failures(k).is_empty()
}

/// Ambient branching nodes of `k` that are not maximal branching points of `k`.
pub fn maximality_failures(k: &Subdendrite) -> Vec<NodeId> {
    let w = k.ambient();
    k.nodes()
        .into_iter()
        .filter(|&u| w.is_branching(u))
        .filter(|&u| {
            let p = Point::Node(u);
            let branching = k.order_of(&p).map(Order::is_branching).unwrap_or(false);
            !(branching && is_maximal_branch(k, &p, MaximalityMode::Component).unwrap_or(false))
        })
        .collect()
}

/// Adds, at every failing branching node, a segment of length
/// `min(epsilon/2, edge/2)` into each direction the subdendrite misses.
pub fn perturb_to_full(k: &Subdendrite, epsilon: &Rational) -> Result<Subdendrite> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if k.is_degenerate() {
        return Err(Error::precondition("perturb_to_full needs a nondegenerate subdendrite"));
    }
    let w = k.ambient();
    let failures = maximality_failures(k);
    if failures.is_empty() {
        return Ok(k.clone());
    }
    let mut points = k.extremes().to_vec();
    let step = rational::half(epsilon);
    for u in failures {
        for &(v, e) in w.incident(u) {
            if !k.covers_direction(u, e) {
                let len = &w.edge(e).len;
                let s = rational::min(&step, &rational::half(len));
                points.push(w.point_from(u, v, &s)?);
            }
        }
    }
    Subdendrite::hull(w, &points)
}

/// No open ball of radius `epsilon` around an ambient branching node lies in `k`.
pub fn is_nowhere_dense(k: &Subdendrite, epsilon: &Rational) -> Result<bool> {
    if !rational::is_positive(epsilon) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let w = k.ambient();
    Ok(k
        .nodes()
        .into_iter()
        .filter(|&u| w.is_branching(u))
        .all(|u| !ball_within(&Point::Node(u), epsilon, k)))
}

/// The component of the ambient minus `from` that contains the node `toward`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    #[serde(serialize_with = "crate::io::serialize_point")]
    pub from: Point,
    pub toward: NodeId,
}

impl Component {
    pub fn contains(&self, k: &Subdendrite, p: &Point) -> bool {
        let w = k.ambient();
        *p != self.from && !w.between_unchecked(p, &Point::Node(self.toward), &self.from)
    }
}

/// Extremes of `k` that are not ambient endpoints, each with a component of
/// the ambient minus that extreme which misses `k`. The witness is `None` for a
/// truncated growth site whose finite tree has no uncovered direction.
pub fn endpoint_diff(k: &Subdendrite) -> Vec<(Point, Option<Component>)> {
    let w = k.ambient();
    let mut out = Vec::new();
    for x in k.extremes() {
        let witness = match x {
            Point::Node(u) => {
                if w.is_endpoint(*u) {
                    continue;
                }
                w.incident(*u)
                    .iter()
                    .filter(|&&(_, e)| !k.covers_direction(*u, e))
                    .map(|&(v, _)| v)
                    .min()
                    .map(|v| Component { from: x.clone(), toward: v })
            }
            Point::Edge { lo, hi, t } => {
                let e = w.edge_between(*lo, *hi).expect("valid point");
                let (a, _) = k.slice(e).expect("extreme lies in k");
                let toward = if k.is_degenerate() || *t == a { *lo } else { *hi };
                Some(Component { from: x.clone(), toward })
            }
        };
        out.push((x.clone(), witness));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FullCopyReport {
    /// No extreme of K is an ambient branching node.
    pub endpoints_avoid_branching: bool,
    /// Maximal arcs (pairs of extremes) examined.
    pub arcs_checked: usize,
    /// Arcs whose branch-order multiset inside K differs from the ambient's.
    pub order_mismatches: Vec<(String, String)>,
    pub passed: bool,
}

/// Finite witness that a full subdendrite is a copy of the ambient.
pub fn full_copy_diagnostics(k: &Subdendrite) -> Result<FullCopyReport> {
    if !is_full(k) {
        return Err(Error::precondition("full_copy_diagnostics needs a full subdendrite"));
    }
    let w = k.ambient();
    let whole = Subdendrite::whole(w);
    let endpoints_avoid_branching = k
        .extremes()
        .iter()
        .all(|x| x.node().is_none_or(|u| !w.is_branching(u)));
    let mut branching = Vec::new();
    for u in k.nodes().into_iter().filter(|&u| w.is_branching(u)) {
        let b = Point::Node(u);
        let orders = (k.order_of(&b)?, whole.order_of(&b)?);
        branching.push((b, orders));
    }
    let ext = k.extremes();
    let mut order_mismatches = Vec::new();
    let mut arcs_checked = 0;
    // Arcs only through points of matching order cannot mismatch.
    let any_differs = branching.iter().any(|(_, (o_k, o_w))| o_k != o_w);
    for i in 0..ext.len() {
        for j in i + 1..ext.len() {
            arcs_checked += 1;
            if !any_differs {
                continue;
            }
            let mut inside = Vec::new();
            let mut ambient = Vec::new();
            for (b, (o_k, o_w)) in &branching {
                if *b != ext[i] && *b != ext[j] && w.between_unchecked(&ext[i], &ext[j], b) {
                    inside.push(*o_k);
                    ambient.push(*o_w);
                }
            }
            inside.sort();
            ambient.sort();
            if inside != ambient {
                order_mismatches.push((ext[i].to_string(), ext[j].to_string()));
            }
        }
    }
    let passed = endpoints_avoid_branching && order_mismatches.is_empty();
    Ok(FullCopyReport {
        endpoints_avoid_branching,
        arcs_checked,
        order_mismatches,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperspace::hausdorff;
    use crate::rational::{int, rat};
    use crate::tree::fixtures::y3;

    const A: Point = Point::Node(0);
    const B: Point = Point::Node(1);
    const C: Point = Point::Node(2);
    const D: Point = Point::Node(3);

    fn mid_ab() -> Point {
        Point::Edge { lo: 0, hi: 1, t: rat(1, 2) }
    }

    fn all_modes(k: &Subdendrite, b: &Point) -> bool {
        let modes = [MaximalityMode::Fiber, MaximalityMode::Arc, MaximalityMode::Component];
        let v: Vec<bool> = modes.iter().map(|m| is_maximal_branch(k, b, *m).unwrap()).collect();
        assert!(v.iter().all(|x| *x == v[0]), "modes disagree: {v:?}");
        v[0]
    }

    #[test]
    fn maximality_examples() {
        let w = y3();
        assert!(all_modes(&Subdendrite::whole(&w), &B));
        assert!(!all_modes(&Subdendrite::arc(&w, A, C).unwrap(), &B));
        assert!(!all_modes(&Subdendrite::arc(&w, A, B).unwrap(), &B));
        let ab = Subdendrite::arc(&w, A, B).unwrap();
        assert!(is_maximal_branch(&ab, &C, MaximalityMode::Arc).is_err());
        assert!(is_maximal_branch(&ab, &mid_ab(), MaximalityMode::Arc).is_err());
    }

    #[test]
    fn fullness_examples() {
        let w = y3();
        assert!(is_full(&Subdendrite::whole(&w)));
        assert!(!is_full(&Subdendrite::arc(&w, A, C).unwrap()));
        assert!(is_full(&Subdendrite::arc(&w, A, mid_ab()).unwrap()));
        assert!(!is_full(&Subdendrite::singleton(&w, A).unwrap()));
    }

    #[test]
    fn perturbation_examples() {
        let w = y3();
        let ac = Subdendrite::arc(&w, A, C).unwrap();
        let eps = rat(1, 4);
        let k = perturb_to_full(&ac, &eps).unwrap();
        assert!(is_full(&k));
        assert!(ac.is_subset(&k));
        assert_eq!(hausdorff(&ac, &k).unwrap(), rat(1, 8));
        assert!(k.contains(&Point::Edge { lo: 1, hi: 3, t: rat(1, 8) }));
        let whole = Subdendrite::whole(&w);
        assert_eq!(perturb_to_full(&whole, &eps).unwrap(), whole);
        let big = perturb_to_full(&ac, &int(10)).unwrap();
        assert!(is_full(&big));
        assert_eq!(hausdorff(&ac, &big).unwrap(), rat(1, 2));
        assert!(perturb_to_full(&ac, &int(0)).is_err());
    }

    #[test]
    fn nowhere_density_examples() {
        let w = y3();
        let half = rat(1, 2);
        assert!(!is_nowhere_dense(&Subdendrite::whole(&w), &half).unwrap());
        assert!(is_nowhere_dense(&Subdendrite::arc(&w, A, C).unwrap(), &half).unwrap());
        assert!(is_nowhere_dense(&Subdendrite::singleton(&w, D).unwrap(), &half).unwrap());
        assert!(is_nowhere_dense(&Subdendrite::singleton(&w, B).unwrap(), &half).unwrap());
        assert!(is_nowhere_dense(&Subdendrite::whole(&w), &int(0)).is_err());
    }

    #[test]
    fn endpoint_diff_examples() {
        let w = y3();
        assert!(endpoint_diff(&Subdendrite::whole(&w)).is_empty());
        let ab = Subdendrite::arc(&w, A, B).unwrap();
        let diff = endpoint_diff(&ab);
        assert_eq!(diff.len(), 1);
        let (x, comp) = &diff[0];
        assert_eq!(*x, B);
        let comp = comp.clone().unwrap();
        assert!(comp.toward == 2 || comp.toward == 3);
        assert!(!comp.contains(&ab, &A) && !comp.contains(&ab, &B));

        let mb = Subdendrite::arc(&w, mid_ab(), B).unwrap();
        let diff = endpoint_diff(&mb);
        assert_eq!(diff.len(), 2);
        let c0 = diff[0].1.clone().unwrap();
        let c1 = diff[1].1.clone().unwrap();
        for p in [A, B, C, D, mid_ab(), Point::Edge { lo: 0, hi: 1, t: rat(1, 4) }] {
            assert!(!(c0.contains(&mb, &p) && c1.contains(&mb, &p)));
        }
        assert!(c0.contains(&mb, &A) || c1.contains(&mb, &A));
    }

    #[test]
    fn diagnostics() {
        let w = y3();
        let report = full_copy_diagnostics(&Subdendrite::whole(&w)).unwrap();
        assert!(report.passed);
        assert_eq!(report.arcs_checked, 3);
        let ab = Subdendrite::arc(&w, A, B).unwrap();
        assert!(full_copy_diagnostics(&ab).is_err());
    }
}
