//! Graphviz output.

use std::fmt::Write;

use num_traits::{One, Zero};

use crate::nerve::{Cover, GPoint, NerveGraph};
use crate::rational::format;
use crate::tree::{Dendrite, Order, Subdendrite};

fn order_label(o: Order) -> String {
    match o {
        Order::Finite(m) => m.to_string(),
        Order::Omega => "ω".into(),
    }
}

/// The dendrite with node orders and edge lengths. Nodes and edges of
/// `highlight` are drawn filled and bold; an edge only partly inside gets a
/// dashed style and its parameter range.
pub fn dendrite_dot(w: &Dendrite, highlight: Option<&Subdendrite>) -> String {
    let mut out = String::from("graph dendrite {\n  node [shape=circle, fontsize=10];\n");
    for u in w.nodes() {
        let mut attrs = format!("label=\"{}\\n{}\"", u, order_label(w.order(u)));
        if highlight.is_some_and(|k| k.contains_node(u)) {
            attrs.push_str(", style=filled, fillcolor=lightblue");
        }
        let _ = writeln!(out, "  {u} [{attrs}];");
    }
    for (e, edge) in w.edges().iter().enumerate() {
        let mut attrs = format!("label=\"{}\"", format(&edge.len));
        if let Some((lo, hi)) = highlight.and_then(|k| k.slice(e)) {
            if lo.is_zero() && hi.is_one() {
                attrs.push_str(", penwidth=3, color=blue");
            } else {
                attrs = format!(
                    "label=\"{} [{}, {}]\", style=dashed, penwidth=3, color=blue",
                    format(&edge.len),
                    format(&lo),
                    format(&hi)
                );
            }
        }
        let _ = writeln!(out, "  {} -- {} [{attrs}];", edge.lo, edge.hi);
    }
    out.push_str("}\n");
    out
}

fn point_label(p: &GPoint) -> String {
    match p {
        GPoint::Node(u) => format!("node {u}"),
        GPoint::Edge { edge, s } => format!("edge {edge} at {}", format(s)),
    }
}

/// One vertex per ball, labelled by centre and radius.
pub fn nerve_dot(cover: &Cover, nerve: &NerveGraph) -> String {
    let mut out = String::from("graph nerve {\n  node [shape=box, fontsize=10];\n");
    for (i, b) in cover.balls().iter().enumerate() {
        let _ = writeln!(out, "  {i} [label=\"B{i}\\n{}\\nr={}\"];", point_label(&b.center), format(&b.radius));
    }
    for (i, j) in &nerve.edges {
        let _ = writeln!(out, "  {i} -- {j};");
    }
    out.push_str("}\n");
    out
}
