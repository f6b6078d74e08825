//! Navmesh baking.
//!
//! The pipeline runs voxelize → filter_walkable → erode_by_radius →
//! build_regions → build_polygons. Every stage is deterministic: ties are
//! broken by ascending cell or vertex index and no stage depends on hash
//! iteration order.

mod heightfield;
mod polygonize;

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geom;
use crate::ingest::{IngestError, TriangleMesh};

pub use heightfield::{
    build_regions, erode_by_radius, filter_walkable, voxelize, voxelize_capped, Heightfield, Span,
    DEFAULT_MAX_COLUMNS,
};
pub use polygonize::{build_polygons, MAX_POLY_VERTS, TILE_CELLS};

pub type PolyId = u32;

#[derive(Debug, Error)]
pub enum BakeError {
    #[error(transparent)]
    Mesh(#[from] IngestError),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("heightfield of {width}x{depth} columns exceeds the cap of {cap}")]
    GridTooLarge { width: usize, depth: usize, cap: usize },
    #[error("triangulation failed for region {region}: {reason}")]
    TriangulationFailure { region: u32, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BakeParams {
    pub cell_size: f64,
    pub cell_height: f64,
    pub region_min_cells: u32,
}

impl Default for BakeParams {
    fn default() -> Self {
        Self { cell_size: 0.25, cell_height: 0.2, region_min_cells: 8 }
    }
}

impl BakeParams {
    pub fn validate(&self) -> Result<(), BakeError> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(BakeError::InvalidParams("cell_size must be > 0".into()));
        }
        if !(self.cell_height > 0.0 && self.cell_height.is_finite()) {
            return Err(BakeError::InvalidParams("cell_height must be > 0".into()));
        }
        if self.region_min_cells < 1 {
            return Err(BakeError::InvalidParams("region_min_cells must be >= 1".into()));
        }
        Ok(())
    }
}

/// Physical constraints of the navigating agent.
///
/// Fields are public so tests can build edge-case profiles (e.g. a zero
/// radius); [`AgentProfile::new`] enforces the production invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub radius: f64,
    pub height: f64,
    pub max_slope_deg: f64,
    pub max_step_height: f64,
    pub max_speed: f64,
}

impl Default for AgentProfile {
    fn default() -> Self {
        Self { radius: 0.3, height: 1.7, max_slope_deg: 45.0, max_step_height: 0.4, max_speed: 1.4 }
    }
}

impl AgentProfile {
    pub fn new(
        radius: f64,
        height: f64,
        max_slope_deg: f64,
        max_step_height: f64,
        max_speed: f64,
    ) -> Result<Self, BakeError> {
        let profile = Self { radius, height, max_slope_deg, max_step_height, max_speed };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), BakeError> {
        let bad = |m: &str| Err(BakeError::InvalidParams(m.into()));
        if !(self.radius > 0.0) {
            return bad("agent radius must be > 0");
        }
        if !(self.height > 0.0) {
            return bad("agent height must be > 0");
        }
        if !(self.max_slope_deg > 0.0 && self.max_slope_deg < 90.0) {
            return bad("max slope must be in (0, 90) degrees");
        }
        if !(self.max_step_height >= 0.0) {
            return bad("max step height must be >= 0");
        }
        if !(self.max_speed > 0.0) {
            return bad("max speed must be > 0");
        }
        Ok(())
    }
}

/// One convex walkable cell of the navmesh.
///
/// `vertices` wind counter-clockwise in the (x, z) plane. `neighbors[i]` is
/// the polygon across edge `i` (from `vertices[i]` to `vertices[i + 1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavPolygon {
    pub id: PolyId,
    pub vertices: Vec<DVec3>,
    pub neighbors: Vec<Option<PolyId>>,
    pub center: DVec3,
}

impl NavPolygon {
    pub fn footprint(&self) -> Vec<DVec2> {
        self.vertices.iter().map(|&v| geom::xz(v)).collect()
    }

    pub fn area(&self) -> f64 {
        geom::signed_area(&self.footprint())
    }

    pub fn edge(&self, i: usize) -> (DVec3, DVec3) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    /// Edge index shared with `other`, if adjacent.
    pub fn portal_edge_to(&self, other: PolyId) -> Option<usize> {
        self.neighbors.iter().position(|n| *n == Some(other))
    }

    pub fn height_range(&self) -> (f64, f64) {
        self.vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.y), hi.max(v.y)))
    }

    /// Surface height at the (x, z) of `p`, if inside the footprint.
    pub fn surface_height(&self, p: DVec2, eps: f64) -> Option<f64> {
        if !geom::point_in_convex(&self.footprint(), p, eps) {
            return None;
        }
        geom::height_in_polygon(&self.vertices, p, eps.max(1e-9)).or(Some(self.center.y))
    }

    /// Closest footprint point to `p` (xz), with its surface height.
    pub fn closest_point(&self, p: DVec2) -> DVec3 {
        let fp = self.footprint();
        if geom::point_in_convex(&fp, p, 0.0) {
            let y = geom::height_in_polygon(&self.vertices, p, 1e-9).unwrap_or(self.center.y);
            return DVec3::new(p.x, y, p.y);
        }
        let n = self.vertices.len();
        let mut best = (f64::INFINITY, DVec3::ZERO);
        for i in 0..n {
            let (a, b) = self.edge(i);
            let (q, t) = geom::closest_point_on_segment(geom::xz(a), geom::xz(b), p);
            let d = q.distance_squared(p);
            if d < best.0 {
                best = (d, DVec3::new(q.x, a.y + (b.y - a.y) * t, q.y));
            }
        }
        best.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavMesh {
    pub polygons: Vec<NavPolygon>,
    pub bake_params: BakeParams,
    pub agent: AgentProfile,
    pub source_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NavMeshDefect {
    TooFewVertices(PolyId),
    NotConvex(PolyId),
    IdMismatch { index: usize, id: PolyId },
    NeighborCountMismatch(PolyId),
    DanglingNeighbor { poly: PolyId, neighbor: PolyId },
    AsymmetricNeighbor { poly: PolyId, neighbor: PolyId },
    PortalMismatch { poly: PolyId, neighbor: PolyId },
}

impl NavMesh {
    pub fn polygon(&self, id: PolyId) -> Option<&NavPolygon> {
        self.polygons.get(id as usize)
    }

    /// Sum of projected (xz) polygon areas.
    pub fn total_area(&self) -> f64 {
        self.polygons.iter().map(NavPolygon::area).sum()
    }

    pub fn portal_count(&self) -> usize {
        self.polygons.iter().flat_map(|p| p.neighbors.iter()).filter(|n| n.is_some()).count()
    }

    /// Portal endpoints between two adjacent polygons, as seen from `from`.
    pub fn portal(&self, from: PolyId, to: PolyId) -> Option<(DVec3, DVec3)> {
        let poly = self.polygon(from)?;
        poly.portal_edge_to(to).map(|e| poly.edge(e))
    }

    /// Checks convexity, id layout, neighbor symmetry, and that every portal
    /// edge is geometrically shared.
    pub fn check(&self) -> Vec<NavMeshDefect> {
        let mut defects = Vec::new();
        for (index, poly) in self.polygons.iter().enumerate() {
            if poly.id as usize != index {
                defects.push(NavMeshDefect::IdMismatch { index, id: poly.id });
            }
            if poly.vertices.len() < 3 {
                defects.push(NavMeshDefect::TooFewVertices(poly.id));
                continue;
            }
            if poly.neighbors.len() != poly.vertices.len() {
                defects.push(NavMeshDefect::NeighborCountMismatch(poly.id));
                continue;
            }
            if !geom::is_convex_ccw(&poly.footprint(), 1e-9) {
                defects.push(NavMeshDefect::NotConvex(poly.id));
            }
            for (e, n) in poly.neighbors.iter().enumerate() {
                let Some(n) = *n else { continue };
                let Some(other) = self.polygon(n) else {
                    defects.push(NavMeshDefect::DanglingNeighbor { poly: poly.id, neighbor: n });
                    continue;
                };
                let Some(back) = other.portal_edge_to(poly.id) else {
                    defects.push(NavMeshDefect::AsymmetricNeighbor { poly: poly.id, neighbor: n });
                    continue;
                };
                if other.neighbors.len() != other.vertices.len() {
                    continue;
                }
                let (a, b) = poly.edge(e);
                let (c, d) = other.edge(back);
                if a.distance(d) > 1e-6 || b.distance(c) > 1e-6 {
                    defects.push(NavMeshDefect::PortalMismatch { poly: poly.id, neighbor: n });
                }
            }
        }
        defects
    }

    /// Number of connected components of the polygon adjacency graph.
    pub fn component_count(&self) -> usize {
        let n = self.polygons.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                for nb in self.polygons[i].neighbors.iter().flatten() {
                    let j = *nb as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    }
}

/// Digest of the mesh geometry, used to tie a navmesh to its source scan.
pub fn mesh_digest(mesh: &TriangleMesh) -> String {
    let mut hasher = Sha256::new();
    hasher.update((mesh.vertices.len() as u64).to_le_bytes());
    for v in &mesh.vertices {
        for c in [v.x, v.y, v.z] {
            hasher.update(c.to_le_bytes());
        }
    }
    hasher.update((mesh.triangles.len() as u64).to_le_bytes());
    for t in &mesh.triangles {
        for i in t {
            hasher.update(i.to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

/// Full bake: scan mesh to convex-polygon navmesh.
pub fn bake(
    mesh: &TriangleMesh,
    agent: &AgentProfile,
    params: &BakeParams,
) -> Result<NavMesh, BakeError> {
    agent.validate()?;
    let hf = voxelize(mesh, params)?;
    let hf = filter_walkable(hf, mesh, agent);
    let hf = erode_by_radius(hf, agent);
    let hf = build_regions(hf, params);
    build_polygons(&hf)
}
