//! The navigation agent that stands in for the user, and point-of-interest
//! triggers.
//!
//! The agent follows the camera horizontally but takes its height from the
//! navmesh surface, so camera bobbing never moves it vertically. All
//! transitions are pure: they take a state and return the next one.

use glam::DVec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bake::{AgentProfile, NavMesh, PolyId};
use crate::geom;
use crate::navgraph::{closest_point, locate_polygon};
use crate::pathfind::PathResult;

/// Largest horizontal distance an off-mesh camera position is snapped back
/// onto the navmesh.
pub const MAX_SNAP: f64 = 2.0;

/// Distance to the final corner at which the path counts as completed.
pub const ARRIVAL_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("unknown point of interest '{0}'")]
    UnknownPoi(String),
    #[error("invalid point of interest '{id}': {reason}")]
    InvalidPoi { id: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AgentStatus {
    OnMesh,
    OffMeshHeld,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: DVec3,
    /// Heading in radians about +y.
    #[serde(default)]
    pub yaw: f64,
}

impl CameraPose {
    pub fn new(position: DVec3, yaw: f64) -> Self {
        Self { position, yaw }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub profile: AgentProfile,
    pub position: DVec3,
    pub yaw: f64,
    pub current_polygon: Option<PolyId>,
    pub visible: bool,
    pub path: Option<PathResult>,
    /// Index of the next corner to reach.
    pub path_cursor: usize,
    pub status: AgentStatus,
}

impl AgentState {
    /// Places an agent at the navmesh point nearest `position`.
    pub fn spawn(navmesh: &NavMesh, profile: AgentProfile, position: DVec3) -> Self {
        let mut agent = Self {
            profile,
            position,
            yaw: 0.0,
            current_polygon: None,
            visible: true,
            path: None,
            path_cursor: 0,
            status: AgentStatus::OffMeshHeld,
        };
        if let Some(id) = locate_polygon(navmesh, position) {
            agent.settle(navmesh, id, position);
        } else if let Some((id, q, _)) = closest_point(navmesh, position) {
            agent.settle(navmesh, id, q);
        }
        agent
    }

    fn settle(&mut self, navmesh: &NavMesh, id: PolyId, p: DVec3) {
        let poly = &navmesh.polygons[id as usize];
        let y = poly.surface_height(geom::xz(p), 1e-9).unwrap_or(p.y);
        self.position = DVec3::new(p.x, y, p.z);
        self.current_polygon = Some(id);
        self.status = AgentStatus::OnMesh;
    }

    /// Moves the agent under the camera. Height comes from the surface
    /// nearest the agent's current height; the camera's own y is ignored.
    pub fn sync_to_camera(mut self, navmesh: &NavMesh, pose: CameraPose) -> Self {
        self.yaw = pose.yaw;
        let probe = DVec3::new(pose.position.x, self.position.y, pose.position.z);
        if let Some(id) = locate_polygon(navmesh, probe) {
            self.settle(navmesh, id, probe);
        } else {
            match closest_point(navmesh, probe) {
                Some((id, q, d)) if d <= MAX_SNAP => self.settle(navmesh, id, q),
                _ => self.status = AgentStatus::OffMeshHeld,
            }
        }
        self
    }

    pub fn set_visibility(mut self, visible: bool) -> Self {
        self.visible = visible;
        self
    }

    pub fn set_path(mut self, path: PathResult) -> Self {
        self.path_cursor = 1.min(path.corners.len());
        self.path = Some(path);
        self
    }

    pub fn clear_path(mut self) -> Self {
        self.path = None;
        self.path_cursor = 0;
        self
    }

    /// Remaining distance along the active path.
    pub fn remaining_distance(&self) -> Option<f64> {
        let path = self.path.as_ref()?;
        let mut d = 0.0;
        let mut from = self.position;
        for &c in &path.corners[self.path_cursor.min(path.corners.len())..] {
            d += from.distance(c);
            from = c;
        }
        Some(d)
    }

    /// Horizontal distance from the agent to the unconsumed part of its path.
    pub fn deviation_from_path(&self) -> Option<f64> {
        let path = self.path.as_ref()?;
        let p = geom::xz(self.position);
        let from = self.path_cursor.saturating_sub(1);
        let pts: Vec<_> = path.corners[from..].iter().map(|&c| geom::xz(c)).collect();
        if pts.len() == 1 {
            return Some(pts[0].distance(p));
        }
        Some(
            pts.windows(2)
                .map(|w| geom::closest_point_on_segment(w[0], w[1], p).0.distance(p))
                .fold(f64::INFINITY, f64::min),
        )
    }

    /// Advances along the path by `max_speed * dt` and reports the distance
    /// covered.
    pub fn advance(&mut self, navmesh: &NavMesh, dt: f64) -> f64 {
        let Some(path) = self.path.as_ref() else { return 0.0 };
        let mut budget = self.profile.max_speed * dt.max(0.0);
        let mut moved = 0.0;
        while budget > 0.0 && self.path_cursor < path.corners.len() {
            let target = path.corners[self.path_cursor];
            let d = self.position.distance(target);
            if d <= budget {
                self.position = target;
                budget -= d;
                moved += d;
                self.path_cursor += 1;
            } else {
                self.position += (target - self.position) * (budget / d);
                moved += budget;
                budget = 0.0;
            }
        }
        let last = *path.corners.last().expect("path has corners");
        if self.path_cursor >= path.corners.len() || self.position.distance(last) <= ARRIVAL_THRESHOLD {
            self.path = None;
            self.path_cursor = 0;
        }
        if let Some(id) = locate_polygon(navmesh, self.position) {
            self.settle(navmesh, id, self.position);
        }
        moved
    }

    pub fn step(mut self, navmesh: &NavMesh, dt: f64) -> Self {
        self.advance(navmesh, dt);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    /// e.g. "image", "link", "text"
    pub kind: String,
    pub uri: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poi {
    pub id: String,
    pub title: String,
    pub position: DVec3,
    pub trigger_radius: f64,
    #[serde(default)]
    pub attachments: Vec<Attachment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPayload {
    pub title: String,
    pub attachments: Vec<Attachment>,
}

impl Poi {
    pub fn new(id: impl Into<String>, title: impl Into<String>, position: DVec3, trigger_radius: f64) -> Self {
        Self { id: id.into(), title: title.into(), position, trigger_radius, attachments: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if !(self.trigger_radius > 0.0 && self.trigger_radius.is_finite()) || !self.position.is_finite() {
            return Err(AgentError::InvalidPoi {
                id: self.id.clone(),
                reason: "trigger radius must be positive and the position finite".into(),
            });
        }
        Ok(())
    }

    /// Boundary counts as inside.
    pub fn contains(&self, p: DVec3) -> bool {
        geom::xz(p).distance(geom::xz(self.position)) <= self.trigger_radius
    }

    pub fn sign(&self) -> SignPayload {
        SignPayload { title: self.title.clone(), attachments: self.attachments.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PoiEventKind {
    Enter,
    Exit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiEvent {
    pub poi: String,
    pub kind: PoiEventKind,
    /// Simulation time in seconds.
    pub timestamp: f64,
}

/// Compares the agent position against each POI disc and emits an event for
/// every POI whose inside flag flipped. `prev_inside` is indexed like `pois`
/// (missing entries count as outside).
pub fn check_poi_triggers(
    agent: &AgentState,
    pois: &[Poi],
    prev_inside: &[bool],
    timestamp: f64,
) -> (Vec<PoiEvent>, Vec<bool>) {
    let mut events = Vec::new();
    let inside: Vec<bool> = pois.iter().map(|poi| poi.contains(agent.position)).collect();
    for (i, poi) in pois.iter().enumerate() {
        let was = prev_inside.get(i).copied().unwrap_or(false);
        if inside[i] != was {
            let kind = if inside[i] { PoiEventKind::Enter } else { PoiEventKind::Exit };
            events.push(PoiEvent { poi: poi.id.clone(), kind, timestamp });
        }
    }
    (events, inside)
}

pub fn poi_sign_info(pois: &[Poi], id: &str) -> Result<SignPayload, AgentError> {
    pois.iter()
        .find(|p| p.id == id)
        .map(Poi::sign)
        .ok_or_else(|| AgentError::UnknownPoi(id.to_string()))
}
