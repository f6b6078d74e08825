//! Shortest paths over the navgraph.
//!
//! A* orders its open set by `f = g + h` where `g` is the accumulated
//! center-to-center cost and `h` the straight-line distance from a polygon
//! center to the goal polygon's center, scaled by [`HEURISTIC_SCALE`].
//! Dijkstra is the same search with `h = 0`. The polygon corridor found by
//! either is turned into user-facing corners with the funnel algorithm.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use glam::DVec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bake::{NavMesh, PolyId};
use crate::geom;
use crate::navgraph::{locate_polygon, NavGraph};

/// Multiplier on the straight-line heuristic.
pub const HEURISTIC_SCALE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Start,
    Goal,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("{0:?} point is off the navmesh")]
    OffMesh(Endpoint),
    #[error("no path between start and goal")]
    NoPath,
    #[error("corridor polygons {0} and {1} are not adjacent")]
    InvalidCorridor(PolyId, PolyId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Astar,
    Dijkstra,
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "astar" | "a*" => Ok(Self::Astar),
            "dijkstra" => Ok(Self::Dijkstra),
            other => Err(format!("unknown algorithm '{other}'")),
        }
    }
}

/// One entry of the open set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchNode {
    pub polygon: PolyId,
    pub g: f64,
    pub h: f64,
    pub f: f64,
    pub parent: Option<PolyId>,
}

impl SearchNode {
    fn new(polygon: PolyId, g: f64, h: f64, parent: Option<PolyId>) -> Self {
        Self { polygon, g, h, f: g + h, parent }
    }
}

impl Eq for SearchNode {}

impl Ord for SearchNode {
    // BinaryHeap is a max-heap: "greater" means popped first, so lower f,
    // then lower h, then lower id compare greater.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.polygon.cmp(&self.polygon))
    }
}

impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub corridor: Vec<PolyId>,
    pub corners: Vec<DVec3>,
    /// Sum of traversed graph edge weights (center to center).
    pub cost: f64,
    pub nodes_expanded: usize,
    /// Largest number of polygons held in open + closed at once.
    pub peak_set_size: usize,
    #[serde(with = "duration_micros")]
    pub elapsed: Duration,
}

mod duration_micros {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_micros(u64::deserialize(d)?))
    }
}

/// Raw graph search output, before corner extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPath {
    pub corridor: Vec<PolyId>,
    pub cost: f64,
    pub nodes_expanded: usize,
    pub peak_set_size: usize,
    pub elapsed: Duration,
}

/// Straight-line distance from a polygon center to `goal_point`.
pub fn heuristic(navmesh: &NavMesh, node: PolyId, goal_point: DVec3) -> f64 {
    navmesh.polygons[node as usize].center.distance(goal_point)
}

/// Best-first search between two graph nodes.
///
/// `h` must be non-negative; `blocked` nodes are never entered. When
/// `trace` is given, the f value of every expansion is appended to it.
pub fn search_graph(
    graph: &NavGraph,
    start: PolyId,
    goal: PolyId,
    h: impl Fn(PolyId) -> f64,
    blocked: impl Fn(PolyId) -> bool,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<GraphPath, PathError> {
    let clock = Instant::now();
    if blocked(start) || blocked(goal) {
        return Err(PathError::NoPath);
    }
    let n = graph.node_count();
    let mut best_g = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<PolyId>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut discovered = 1usize;
    let mut peak = 1usize;
    let mut expanded = 0usize;
    let mut open = BinaryHeap::new();

    best_g[start as usize] = 0.0;
    open.push(SearchNode::new(start, 0.0, h(start), None));

    while let Some(node) = open.pop() {
        let i = node.polygon as usize;
        if closed[i] || node.g > best_g[i] {
            continue;
        }
        closed[i] = true;
        expanded += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(node.f);
        }
        if node.polygon == goal {
            let mut corridor = vec![goal];
            let mut cur = goal;
            while let Some(p) = parent[cur as usize] {
                corridor.push(p);
                cur = p;
            }
            corridor.reverse();
            return Ok(GraphPath {
                corridor,
                cost: node.g,
                nodes_expanded: expanded,
                peak_set_size: peak,
                elapsed: clock.elapsed(),
            });
        }
        for edge in graph.neighbors(node.polygon) {
            let j = edge.to as usize;
            if closed[j] || blocked(edge.to) {
                continue;
            }
            let g = node.g + edge.weight;
            if g < best_g[j] {
                if best_g[j].is_infinite() {
                    discovered += 1;
                    peak = peak.max(discovered);
                }
                best_g[j] = g;
                parent[j] = Some(node.polygon);
                open.push(SearchNode::new(edge.to, g, h(edge.to), Some(node.polygon)));
            }
        }
    }
    Err(PathError::NoPath)
}

/// Options for [`find_path`].
#[derive(Clone, Copy)]
pub struct SearchOptions<'a> {
    pub algorithm: Algorithm,
    pub heuristic_scale: f64,
    pub blocked: Option<&'a dyn Fn(PolyId) -> bool>,
}

impl Default for SearchOptions<'_> {
    fn default() -> Self {
        Self { algorithm: Algorithm::Astar, heuristic_scale: HEURISTIC_SCALE, blocked: None }
    }
}

/// Locates both endpoints, searches, and extracts funnel corners. The
/// elapsed time covers the graph search only.
pub fn find_path(
    graph: &NavGraph,
    navmesh: &NavMesh,
    start: DVec3,
    goal: DVec3,
    options: SearchOptions<'_>,
) -> Result<PathResult, PathError> {
    let start_poly = locate_polygon(navmesh, start).ok_or(PathError::OffMesh(Endpoint::Start))?;
    let goal_poly = locate_polygon(navmesh, goal).ok_or(PathError::OffMesh(Endpoint::Goal))?;
    let target = navmesh.polygons[goal_poly as usize].center;
    let scale = match options.algorithm {
        Algorithm::Astar => options.heuristic_scale,
        Algorithm::Dijkstra => 0.0,
    };
    let blocked = |p: PolyId| options.blocked.is_some_and(|b| b(p));
    let path = search_graph(
        graph,
        start_poly,
        goal_poly,
        |p| if scale == 0.0 { 0.0 } else { scale * heuristic(navmesh, p, target) },
        blocked,
        None,
    )?;
    let corners = funnel(navmesh, &path.corridor, start, goal)?;
    Ok(PathResult {
        corridor: path.corridor,
        corners,
        cost: path.cost,
        nodes_expanded: path.nodes_expanded,
        peak_set_size: path.peak_set_size,
        elapsed: path.elapsed,
    })
}

pub fn astar(graph: &NavGraph, navmesh: &NavMesh, start: DVec3, goal: DVec3) -> Result<PathResult, PathError> {
    find_path(graph, navmesh, start, goal, SearchOptions::default())
}

pub fn dijkstra(graph: &NavGraph, navmesh: &NavMesh, start: DVec3, goal: DVec3) -> Result<PathResult, PathError> {
    let options = SearchOptions { algorithm: Algorithm::Dijkstra, ..Default::default() };
    find_path(graph, navmesh, start, goal, options)
}

/// Ordered (left, right) portal endpoints along a corridor, relative to the
/// direction of travel.
pub fn corridor_portals(navmesh: &NavMesh, corridor: &[PolyId]) -> Result<Vec<(DVec3, DVec3)>, PathError> {
    corridor
        .windows(2)
        .map(|w| {
            // polygons wind counter-clockwise, so leaving through edge a→b
            // puts b on the left
            let (a, b) = navmesh.portal(w[0], w[1]).ok_or(PathError::InvalidCorridor(w[0], w[1]))?;
            Ok((b, a))
        })
        .collect()
}

/// String-pulls the corridor into its shortest corner polyline.
pub fn funnel(
    navmesh: &NavMesh,
    corridor: &[PolyId],
    start: DVec3,
    goal: DVec3,
) -> Result<Vec<DVec3>, PathError> {
    let mut portals = vec![(start, start)];
    portals.extend(corridor_portals(navmesh, corridor)?);
    portals.push((goal, goal));

    let p2 = geom::xz;
    let mut corners = vec![start];
    let (mut apex, mut left, mut right) = (start, start, start);
    let (mut left_idx, mut right_idx) = (0usize, 0usize);
    let mut i = 1;
    while i < portals.len() {
        let (l, r) = portals[i];

        // tighten the right leg
        if geom::cross(p2(apex), p2(right), p2(r)) >= 0.0 {
            if p2(apex) == p2(right) || geom::cross(p2(apex), p2(left), p2(r)) < 0.0 {
                right = r;
                right_idx = i;
            } else {
                // right crossed over left: left becomes a corner
                push_corner(&mut corners, left);
                apex = left;
                right = apex;
                right_idx = left_idx;
                i = left_idx + 1;
                continue;
            }
        }

        // tighten the left leg
        if geom::cross(p2(apex), p2(left), p2(l)) <= 0.0 {
            if p2(apex) == p2(left) || geom::cross(p2(apex), p2(right), p2(l)) > 0.0 {
                left = l;
                left_idx = i;
            } else {
                push_corner(&mut corners, right);
                apex = right;
                left = apex;
                left_idx = right_idx;
                i = right_idx + 1;
                continue;
            }
        }
        i += 1;
    }
    push_corner(&mut corners, goal);
    Ok(corners)
}

fn push_corner(corners: &mut Vec<DVec3>, p: DVec3) {
    if corners.last() != Some(&p) {
        corners.push(p);
    }
}

/// Sum of consecutive 3D distances.
pub fn path_length(corners: &[DVec3]) -> f64 {
    corners.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Polyline through the portal midpoints, for comparison with the funnel.
pub fn portal_midpoint_path(
    navmesh: &NavMesh,
    corridor: &[PolyId],
    start: DVec3,
    goal: DVec3,
) -> Result<Vec<DVec3>, PathError> {
    let mut pts = vec![start];
    pts.extend(corridor_portals(navmesh, corridor)?.into_iter().map(|(l, r)| (l + r) * 0.5));
    pts.push(goal);
    Ok(pts)
}
