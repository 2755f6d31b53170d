//! JSON formats for dendrites, points, subdendrites, chains and pair lists.
//!
//! Rationals are strings `"p/q"`. A point is either a bare node id or
//! `{"edge": [lo, hi], "t": "p/q"}` with `t` measured from `edge[0]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::nerve::MetricGraph;
use crate::rational::{self, Rational};
use crate::tree::{Dendrite, Order, Point, Subdendrite};

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum PointDto {
    Node(usize),
    Edge { edge: [usize; 2], t: String },
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(untagged)]
enum OrderDto {
    Finite(u32),
    Named(String),
}

#[derive(Serialize, Deserialize, Debug, Clone)]
struct NodeDto {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<OrderDto>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct DendriteDto {
    nodes: Vec<NodeDto>,
    edges: Vec<(usize, usize, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth: Option<u32>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
struct SubdendriteDto {
    extremes: Vec<PointDto>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
struct ChainDto {
    space: DendriteDto,
    elements: Vec<Vec<PointDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mesh: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(untagged)]
enum GraphNodesDto {
    Count(usize),
    List(Vec<NodeDto>),
}

/// Orders on listed nodes are accepted and ignored, so dendrite files load too.
#[derive(Serialize, Deserialize, Debug, Clone)]
struct GraphDto {
    nodes: GraphNodesDto,
    edges: Vec<(usize, usize, String)>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

fn from_text<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(json_error)
}

fn parse_rat(s: &str) -> Result<Rational> {
    rational::parse(s)
}

pub fn point_dto(p: &Point) -> PointDto {
    match p {
        Point::Node(u) => PointDto::Node(*u),
        Point::Edge { lo, hi, t } => PointDto::Edge {
            edge: [*lo, *hi],
            t: rational::format(t),
        },
    }
}

pub fn serialize_point<S: Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    point_dto(p).serialize(s)
}

pub fn point_json(p: &Point) -> Value {
    serde_json::to_value(point_dto(p)).expect("points serialize")
}

/// Edge endpoints may be listed in either order; the result is canonical.
pub fn point_from_dto(w: &Dendrite, dto: &PointDto) -> Result<Point> {
    let p = match dto {
        PointDto::Node(u) => Point::Node(*u),
        PointDto::Edge { edge: [a, b], t } => {
            let t = parse_rat(t)?;
            let e = w
                .edge_between(*a, *b)
                .ok_or_else(|| Error::InvalidPoint(format!("no edge ({a},{b})")))?;
            if t < rational::zero() || t > rational::one() {
                return Err(Error::InvalidPoint(format!("edge parameter {} outside [0,1]", rational::format(&t))));
            }
            let t = if *a < *b { t } else { rational::one() - t };
            w.point_on_edge(e, t)
        }
    };
    w.check_point(&p)?;
    Ok(p)
}

pub fn parse_point(w: &Dendrite, text: &str) -> Result<Point> {
    point_from_dto(w, &from_text::<PointDto>(text)?)
}

fn dendrite_from_dto(dto: &DendriteDto) -> Result<Dendrite> {
    let n = dto.nodes.len();
    let mut orders: Vec<Option<Order>> = vec![None; n];
    for node in &dto.nodes {
        if node.id >= n {
            return Err(Error::InvalidDendrite(format!("node ids must be 0..{}; found {}", n, node.id)));
        }
        if orders[node.id].is_some() {
            return Err(Error::InvalidDendrite(format!("duplicate node id {}", node.id)));
        }
        let order = match &node.order {
            Some(OrderDto::Finite(m)) => Order::Finite(*m),
            Some(OrderDto::Named(s)) if s.eq_ignore_ascii_case("omega") => Order::Omega,
            Some(OrderDto::Named(s)) => return Err(Error::InvalidDendrite(format!("unknown order {s:?}"))),
            None => return Err(Error::InvalidDendrite(format!("node {} has no order", node.id))),
        };
        orders[node.id] = Some(order);
    }
    let orders = orders.into_iter().map(Option::unwrap).collect();
    let edges = dto
        .edges
        .iter()
        .map(|(u, v, len)| Ok((*u, *v, parse_rat(len)?)))
        .collect::<Result<Vec<_>>>()?;
    Dendrite::new(orders, edges, dto.depth)
}

pub fn parse_dendrite(text: &str) -> Result<Dendrite> {
    dendrite_from_dto(&from_text(text)?)
}

fn dendrite_dto(w: &Dendrite) -> DendriteDto {
    DendriteDto {
        nodes: w
            .nodes()
            .map(|u| NodeDto {
                id: u,
                order: Some(match w.order(u) {
                    Order::Finite(m) => OrderDto::Finite(m),
                    Order::Omega => OrderDto::Named("omega".into()),
                }),
            })
            .collect(),
        edges: w
            .edges()
            .iter()
            .map(|e| (e.lo, e.hi, rational::format(&e.len)))
            .collect(),
        depth: w.depth_tag(),
    }
}

pub fn dendrite_json(w: &Dendrite) -> Value {
    serde_json::to_value(dendrite_dto(w)).expect("dendrites serialize")
}

pub fn parse_subdendrite(w: &Arc<Dendrite>, text: &str) -> Result<Subdendrite> {
    let dto: SubdendriteDto = from_text(text)?;
    let points = dto
        .extremes
        .iter()
        .map(|p| point_from_dto(w, p))
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::InvalidSubdendrite("no extremes".into()));
    }
    Subdendrite::hull(w, &points)
}

pub fn subdendrite_json(k: &Subdendrite) -> Value {
    json!({ "extremes": k.extremes().iter().map(point_json).collect::<Vec<_>>() })
}

/// Without a `"mesh"` field the largest consecutive gap is used.
pub fn parse_chain(text: &str) -> Result<Chain> {
    let dto: ChainDto = from_text(text)?;
    let w = Arc::new(dendrite_from_dto(&dto.space)?);
    let mut elements = Vec::with_capacity(dto.elements.len());
    for (i, pts) in dto.elements.iter().enumerate() {
        let points = pts
            .iter()
            .map(|p| point_from_dto(&w, p))
            .collect::<Result<Vec<_>>>()?;
        if points.is_empty() {
            return Err(Error::InvalidChain(format!("element {i} has no extremes")));
        }
        elements.push(Subdendrite::hull(&w, &points)?);
    }
    match &dto.mesh {
        Some(m) => Chain::with_mesh(elements, parse_rat(m)?),
        None => Chain::new(elements),
    }
}

pub fn chain_json(c: &Chain) -> Value {
    json!({
        "space": dendrite_json(c.ambient()),
        "elements": c
            .elements()
            .iter()
            .map(|k| k.extremes().iter().map(point_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "mesh": rational::format(c.mesh()),
    })
}

/// `[["a","b"], ...]` with `0 < a < b < 1` in every pair.
pub fn parse_pairs(text: &str) -> Result<Vec<(Rational, Rational)>> {
    let raw: Vec<(String, String)> = from_text(text)?;
    let pairs = raw
        .iter()
        .map(|(a, b)| Ok((parse_rat(a)?, parse_rat(b)?)))
        .collect::<Result<Vec<_>>>()?;
    for (a, b) in &pairs {
        if !(rational::zero() < *a && a < b && *b < rational::one()) {
            return Err(Error::InvalidArgument(format!(
                "pair ({}, {}) must satisfy 0 < a < b < 1",
                rational::format(a),
                rational::format(b)
            )));
        }
    }
    Ok(pairs)
}

pub fn pairs_json(pairs: &[(Rational, Rational)]) -> Value {
    json!(pairs
        .iter()
        .map(|(a, b)| [rational::format(a), rational::format(b)])
        .collect::<Vec<_>>())
}

pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let dto: GraphDto = from_text(text)?;
    let n = match &dto.nodes {
        GraphNodesDto::Count(n) => *n,
        GraphNodesDto::List(nodes) => {
            let mut ids: Vec<usize> = nodes.iter().map(|x| x.id).collect();
            ids.sort_unstable();
            if ids.iter().enumerate().any(|(i, &id)| i != id) {
                return Err(Error::InvalidArgument(format!("node ids must be 0..{}", nodes.len())));
            }
            nodes.len()
        }
    };
    let edges = dto
        .edges
        .iter()
        .map(|(u, v, len)| Ok((*u, *v, parse_rat(len)?)))
        .collect::<Result<Vec<_>>>()?;
    MetricGraph::new(n, edges)
}

pub fn graph_json(g: &MetricGraph) -> Value {
    json!({
        "nodes": g.node_count(),
        "edges": g.edges().iter().map(|e| json!([e.u, e.v, rational::format(&e.len)])).collect::<Vec<_>>(),
    })
}
