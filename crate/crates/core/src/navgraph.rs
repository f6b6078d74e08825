//! The navmesh as a weighted search graph: one node per polygon, one
//! undirected edge per portal.

use glam::DVec3;

use crate::bake::{NavMesh, PolyId};
use crate::geom;

/// Points farther than this above or below a polygon surface do not locate
/// onto it.
pub const LOCATE_MAX_DY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub to: PolyId,
    /// center → portal midpoint → neighbor center, in 3D
    pub weight: f64,
    pub portal_mid: DVec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavGraph {
    adjacency: Vec<Vec<GraphEdge>>,
}

impl NavGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, node: PolyId) -> &[GraphEdge] {
        &self.adjacency[node as usize]
    }

    pub fn weight(&self, a: PolyId, b: PolyId) -> Option<f64> {
        self.neighbors(a).iter().find(|e| e.to == b).map(|e| e.weight)
    }

    /// Builds a graph directly from weighted edges; used for synthetic
    /// graphs in tests and benchmarks.
    pub fn from_edges(node_count: usize, edges: &[(PolyId, PolyId, f64)]) -> Self {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b, w) in edges {
            adjacency[a as usize].push(GraphEdge { to: b, weight: w, portal_mid: DVec3::ZERO });
            adjacency[b as usize].push(GraphEdge { to: a, weight: w, portal_mid: DVec3::ZERO });
        }
        Self { adjacency }
    }
}

pub fn build_graph(navmesh: &NavMesh) -> NavGraph {
    let adjacency = navmesh
        .polygons
        .iter()
        .map(|poly| {
            poly.neighbors
                .iter()
                .enumerate()
                .filter_map(|(e, n)| {
                    let to = (*n)?;
                    let other = navmesh.polygon(to)?;
                    let (a, b) = poly.edge(e);
                    let mid = (a + b) * 0.5;
                    let weight = poly.center.distance(mid) + mid.distance(other.center);
                    Some(GraphEdge { to, weight, portal_mid: mid })
                })
                .collect()
        })
        .collect();
    NavGraph { adjacency }
}

/// Polygon under `point`: the footprint must contain its (x, z) and the
/// surface must lie within [`LOCATE_MAX_DY`] of its y. Nearest surface wins;
/// ties go to the lowest id.
pub fn locate_polygon(navmesh: &NavMesh, point: DVec3) -> Option<PolyId> {
    let p = geom::xz(point);
    let mut best: Option<(f64, PolyId)> = None;
    for poly in &navmesh.polygons {
        let Some(h) = poly.surface_height(p, 1e-9) else { continue };
        let dy = (h - point.y).abs();
        if dy > LOCATE_MAX_DY {
            continue;
        }
        if best.is_none_or(|(d, _)| dy < d) {
            best = Some((dy, poly.id));
        }
    }
    best.map(|(_, id)| id)
}

/// Nearest navmesh surface point to `point` by horizontal distance, with
/// the polygon it lies on.
pub fn closest_point(navmesh: &NavMesh, point: DVec3) -> Option<(PolyId, DVec3, f64)> {
    let p = geom::xz(point);
    let mut best: Option<(f64, f64, PolyId, DVec3)> = None;
    for poly in &navmesh.polygons {
        let q = poly.closest_point(p);
        let d = geom::xz(q).distance(p);
        let dy = (q.y - point.y).abs();
        let better = match best {
            None => true,
            Some((bd, bdy, _, _)) => d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && dy < bdy),
        };
        if better {
            best = Some((d, dy, poly.id, q));
        }
    }
    best.map(|(d, _, id, q)| (id, q, d))
}
