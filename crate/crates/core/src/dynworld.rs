//! Runtime obstacles that block whole navmesh polygons.
//!
//! A [`WorldState`] pairs the immutable baked navmesh with the active
//! obstacle set and a generation counter that increments on every mutation.
//! [`SharedWorld`] publishes immutable snapshots so planners never observe a
//! half-applied change.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, RwLock};

use glam::{DVec2, DVec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bake::{NavMesh, NavPolygon, PolyId};
use crate::geom;
use crate::navgraph::{build_graph, NavGraph};
use crate::pathfind::{find_path, Algorithm, PathError, PathResult, SearchOptions, HEURISTIC_SCALE};

pub type ObstacleId = u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObstacleShape {
    /// Axis-aligned box.
    Box { min: DVec3, max: DVec3 },
    /// Vertical cylinder standing on `base`.
    Cylinder { base: DVec3, radius: f64, height: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: ObstacleId,
    pub shape: ObstacleShape,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("obstacle {0} already exists")]
    DuplicateObstacleId(ObstacleId),
    #[error("no obstacle with id {0}")]
    UnknownObstacleId(ObstacleId),
    #[error("invalid obstacle: {0}")]
    InvalidObstacle(String),
}

impl Obstacle {
    pub fn new_box(id: ObstacleId, min: DVec3, max: DVec3) -> Self {
        Self { id, shape: ObstacleShape::Box { min, max } }
    }

    pub fn new_cylinder(id: ObstacleId, base: DVec3, radius: f64, height: f64) -> Self {
        Self { id, shape: ObstacleShape::Cylinder { base, radius, height } }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let ok = match &self.shape {
            ObstacleShape::Box { min, max } => {
                min.is_finite() && max.is_finite() && (*max - *min).cmpgt(DVec3::ZERO).all()
            }
            ObstacleShape::Cylinder { base, radius, height } => {
                base.is_finite() && radius.is_finite() && height.is_finite() && *radius > 0.0 && *height > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(WorldError::InvalidObstacle(format!("obstacle {} needs finite, positive extents", self.id)))
        }
    }

    pub fn vertical_span(&self) -> (f64, f64) {
        match &self.shape {
            ObstacleShape::Box { min, max } => (min.y, max.y),
            ObstacleShape::Cylinder { base, height, .. } => (base.y, base.y + height),
        }
    }

    /// Whether the obstacle's footprint overlaps the polygon's with positive
    /// area and their vertical ranges meet within `tolerance`.
    pub fn intersects(&self, poly: &NavPolygon, tolerance: f64) -> bool {
        let (lo, hi) = poly.height_range();
        let (y0, y1) = self.vertical_span();
        if hi < y0 - tolerance || lo > y1 + tolerance {
            return false;
        }
        let fp = poly.footprint();
        match &self.shape {
            ObstacleShape::Box { min, max } => {
                let rect = [
                    DVec2::new(min.x, min.z),
                    DVec2::new(max.x, min.z),
                    DVec2::new(max.x, max.z),
                    DVec2::new(min.x, max.z),
                ];
                geom::convex_overlap(&fp, &rect, 1e-9)
            }
            ObstacleShape::Cylinder { base, radius, .. } => {
                geom::circle_overlaps_convex(&fp, geom::xz(*base), *radius, 1e-9)
            }
        }
    }
}

/// Navmesh plus active obstacles at one generation.
#[derive(Debug, Clone)]
pub struct WorldState {
    navmesh: Arc<NavMesh>,
    graph: Arc<NavGraph>,
    obstacles: BTreeMap<ObstacleId, Obstacle>,
    blocked: BTreeSet<PolyId>,
    generation: u64,
}

/// A plan and the world generation it was computed against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    pub result: PathResult,
    pub generation: u64,
}

impl WorldState {
    pub fn new(navmesh: NavMesh) -> Self {
        let graph = build_graph(&navmesh);
        Self {
            navmesh: Arc::new(navmesh),
            graph: Arc::new(graph),
            obstacles: BTreeMap::new(),
            blocked: BTreeSet::new(),
            generation: 0,
        }
    }

    pub fn navmesh(&self) -> &NavMesh {
        &self.navmesh
    }

    pub fn graph(&self) -> &NavGraph {
        &self.graph
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn blocked(&self) -> &BTreeSet<PolyId> {
        &self.blocked
    }

    pub fn is_blocked(&self, poly: PolyId) -> bool {
        self.blocked.contains(&poly)
    }

    pub fn obstacles(&self) -> impl Iterator<Item = &Obstacle> {
        self.obstacles.values()
    }

    /// Polygons one obstacle blocks.
    pub fn polygons_hit(&self, obstacle: &Obstacle) -> BTreeSet<PolyId> {
        let tol = self.navmesh.bake_params.cell_height;
        self.navmesh
            .polygons
            .iter()
            .filter(|p| obstacle.intersects(p, tol))
            .map(|p| p.id)
            .collect()
    }

    fn recompute_blocked(&mut self) {
        let hit: BTreeSet<PolyId> =
            self.obstacles.values().flat_map(|o| self.polygons_hit(o)).collect();
        self.blocked = hit;
    }

    pub fn add_obstacle(&mut self, obstacle: Obstacle) -> Result<u64, WorldError> {
        obstacle.validate()?;
        if self.obstacles.contains_key(&obstacle.id) {
            return Err(WorldError::DuplicateObstacleId(obstacle.id));
        }
        let hit = self.polygons_hit(&obstacle);
        self.blocked.extend(hit);
        self.obstacles.insert(obstacle.id, obstacle);
        self.generation += 1;
        Ok(self.generation)
    }

    pub fn remove_obstacle(&mut self, id: ObstacleId) -> Result<u64, WorldError> {
        self.obstacles.remove(&id).ok_or(WorldError::UnknownObstacleId(id))?;
        self.recompute_blocked();
        self.generation += 1;
        Ok(self.generation)
    }

    /// Searches the graph with blocked polygons removed.
    pub fn plan(&self, start: DVec3, goal: DVec3, algorithm: Algorithm) -> Result<PlannedPath, PathError> {
        self.plan_scaled(start, goal, algorithm, HEURISTIC_SCALE)
    }

    /// [`Self::plan`] with an explicit A* heuristic multiplier.
    pub fn plan_scaled(
        &self,
        start: DVec3,
        goal: DVec3,
        algorithm: Algorithm,
        heuristic_scale: f64,
    ) -> Result<PlannedPath, PathError> {
        let blocked = |p: PolyId| self.blocked.contains(&p);
        let options = SearchOptions { algorithm, heuristic_scale, blocked: Some(&blocked) };
        let result = find_path(&self.graph, &self.navmesh, start, goal, options)?;
        Ok(PlannedPath { result, generation: self.generation })
    }

    /// Whether any polygon of `corridor` is blocked now.
    pub fn corridor_blocked(&self, corridor: &[PolyId]) -> bool {
        corridor.iter().any(|p| self.blocked.contains(p))
    }
}

/// Single-writer, many-reader handle over [`WorldState`] snapshots.
#[derive(Debug)]
pub struct SharedWorld {
    current: RwLock<Arc<WorldState>>,
    writer: Mutex<()>,
}

impl SharedWorld {
    pub fn new(world: WorldState) -> Self {
        Self { current: RwLock::new(Arc::new(world)), writer: Mutex::new(()) }
    }

    pub fn snapshot(&self) -> Arc<WorldState> {
        self.current.read().expect("world lock poisoned").clone()
    }

    /// Applies `f` to a private copy and publishes it atomically on success.
    pub fn mutate<T>(
        &self,
        f: impl FnOnce(&mut WorldState) -> Result<T, WorldError>,
    ) -> Result<T, WorldError> {
        let _guard = self.writer.lock().expect("writer lock poisoned");
        let mut next = (*self.snapshot()).clone();
        let out = f(&mut next)?;
        *self.current.write().expect("world lock poisoned") = Arc::new(next);
        Ok(out)
    }

    pub fn add_obstacle(&self, obstacle: Obstacle) -> Result<u64, WorldError> {
        self.mutate(|w| w.add_obstacle(obstacle))
    }

    pub fn remove_obstacle(&self, id: ObstacleId) -> Result<u64, WorldError> {
        self.mutate(|w| w.remove_obstacle(id))
    }

    pub fn plan(&self, start: DVec3, goal: DVec3, algorithm: Algorithm) -> Result<PlannedPath, PathError> {
        self.snapshot().plan(start, goal, algorithm)
    }
}
