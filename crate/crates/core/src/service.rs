//! Navigation service: one live session behind HTTP endpoints and a
//! WebSocket event stream.
//!
//! [`Session`] is the synchronous core. Every mutation returns the events it
//! produced, stamped with a sequence number and the world generation. The
//! HTTP layer holds the session behind one async mutex and broadcasts each
//! event while still holding it, so subscribers see events in mutation
//! order.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | GET | `/health` | | `{"status":"ok"}` |
//! | GET | `/navmesh` | | archive payload |
//! | GET | `/pois` | | list of POIs |
//! | GET | `/agent` | | agent state |
//! | POST | `/pose` | [`PoseRequest`] | `{"events":[...]}` |
//! | POST | `/visibility` | `{"visible":bool}` | `{"events":[...]}` |
//! | POST | `/destination` | [`DestinationRequest`] | `{"path":..,"events":[...]}` |
//! | GET | `/path` | | [`PathView`] or `null` |
//! | GET | `/tracking` | | [`TrackingView`] |
//! | GET | `/world` | | [`WorldView`] |
//! | POST | `/obstacles` | [`ObstacleRequest`] | `{"id":..,"generation":..,"events":[...]}` |
//! | DELETE | `/obstacles/{id}` | | `{"generation":..,"events":[...]}` |
//! | GET | `/events` | WebSocket | stream of [`Event`] |
//!
//! Errors reply with `{"error":{"kind":"NoPath","message":"..."}}`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use glam::DVec3;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tokio::sync::{broadcast, oneshot, Mutex};

use crate::agent::{check_poi_triggers, AgentState, AgentStatus, CameraPose, Poi, PoiEventKind, ARRIVAL_THRESHOLD};
use crate::bake::{NavMesh, PolyId};
use crate::dynworld::{Obstacle, ObstacleId, ObstacleShape, WorldError, WorldState};
use crate::geom;
use crate::localize::{feedback, simulate_estimate, update_state, NoiseModel, TrackingState};
use crate::navgraph::{closest_point, locate_polygon};
use crate::pathfind::{Algorithm, PathError, PathResult};
use crate::store::{self, NavMeshArchive, StoreError};

/// Horizontal distance from the active path that triggers a replan.
pub const REPLAN_DEVIATION: f64 = 1.0;
const EVENT_BUFFER: usize = 4096;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("failed to load: {0}")]
    Load(#[from] StoreError),
    #[error("failed to bind: {0}")]
    BindFailure(std::io::Error),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("unknown point of interest '{0}'")]
    UnknownPoi(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Path(#[from] PathError),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Load(_) => "LoadError",
            Self::BindFailure(_) => "BindFailure",
            Self::InvalidRequest(_) => "InvalidRequest",
            Self::UnknownPoi(_) => "UnknownPoi",
            Self::World(WorldError::DuplicateObstacleId(_)) => "DuplicateObstacleId",
            Self::World(WorldError::UnknownObstacleId(_)) => "UnknownObstacleId",
            Self::World(WorldError::InvalidObstacle(_)) => "InvalidObstacle",
            Self::Path(PathError::OffMesh(_)) => "OffMesh",
            Self::Path(PathError::NoPath) => "NoPath",
            Self::Path(PathError::InvalidCorridor(..)) => "InvalidCorridor",
        }
    }

    fn status(&self) -> StatusCode {
        match self {
            Self::InvalidRequest(_) | Self::World(WorldError::InvalidObstacle(_)) => StatusCode::BAD_REQUEST,
            Self::UnknownPoi(_) | Self::World(WorldError::UnknownObstacleId(_)) => StatusCode::NOT_FOUND,
            Self::World(WorldError::DuplicateObstacleId(_)) => StatusCode::CONFLICT,
            Self::Path(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::Load(_) | Self::BindFailure(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn body(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplanReason {
    Destination,
    WorldChanged,
    Deviation,
}

/// The active path as sent to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathView {
    pub destination: DVec3,
    /// World generation the path was planned against.
    pub generation: u64,
    pub corridor: Vec<PolyId>,
    pub corners: Vec<DVec3>,
    pub cost_m: f64,
    pub nodes_expanded: usize,
    pub peak_set_size: usize,
    pub elapsed_us: u64,
}

impl PathView {
    fn new(destination: DVec3, generation: u64, r: &PathResult) -> Self {
        Self {
            destination,
            generation,
            corridor: r.corridor.clone(),
            corners: r.corners.clone(),
            cost_m: r.cost,
            nodes_expanded: r.nodes_expanded,
            peak_set_size: r.peak_set_size,
            elapsed_us: r.elapsed.as_micros() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EventBody {
    Hello,
    AgentMoved { position: DVec3, yaw: f64, polygon: Option<PolyId>, status: AgentStatus, visible: bool },
    PathUpdated { reason: ReplanReason, path: PathView },
    PathFailed { reason: ReplanReason, destination: DVec3, error: String, kind: String },
    PathCleared,
    PoiEnter { poi: String, timestamp: f64 },
    PoiExit { poi: String, timestamp: f64 },
    TrackingStateChanged { state: TrackingState, quality: f64, guidance: Vec<String>, message: String },
    WorldGenerationChanged { blocked: Vec<PolyId>, obstacles: Vec<Obstacle> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Position in the session's event sequence, starting at 1.
    pub seq: u64,
    /// World generation when the event was emitted.
    pub generation: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRequest {
    pub position: DVec3,
    #[serde(default)]
    pub yaw: f64,
    /// Simulation time in seconds; POI events carry it.
    pub timestamp: Option<f64>,
}

/// Exactly one of `poi` or `point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DestinationRequest {
    pub poi: Option<String>,
    pub point: Option<DVec3>,
}

impl DestinationRequest {
    pub fn poi(id: impl Into<String>) -> Self {
        Self { poi: Some(id.into()), point: None }
    }

    pub fn point(p: DVec3) -> Self {
        Self { poi: None, point: Some(p) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleRequest {
    /// Assigned by the session when absent.
    pub id: Option<ObstacleId>,
    pub shape: ObstacleShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingView {
    pub state: TrackingState,
    pub quality: f64,
    pub simulated: bool,
    pub noise: NoiseModel,
    pub guidance: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldView {
    pub generation: u64,
    pub blocked: Vec<PolyId>,
    pub obstacles: Vec<Obstacle>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    /// Run camera poses through the noise model before syncing the agent.
    pub simulate_tracking: bool,
    pub noise: NoiseModel,
    pub replan_deviation: f64,
    /// Defaults to the first polygon's center.
    pub spawn: Option<DVec3>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { simulate_tracking: false, noise: NoiseModel::default(), replan_deviation: REPLAN_DEVIATION, spawn: None }
    }
}

/// World, agent, POIs and tracking for one user.
#[derive(Debug, Clone)]
pub struct Session {
    world: WorldState,
    agent: AgentState,
    pois: Vec<Poi>,
    inside: Vec<bool>,
    tracking: TrackingState,
    quality: f64,
    config: SessionConfig,
    sample_index: u64,
    clock: f64,
    seq: u64,
    destination: Option<DVec3>,
    active: Option<PathView>,
}

fn check_finite(v: DVec3, what: &str) -> Result<(), ServiceError> {
    if v.is_finite() { Ok(()) } else { Err(ServiceError::InvalidRequest(format!("{what} must be finite"))) }
}

impl Session {
    pub fn new(navmesh: NavMesh, pois: Vec<Poi>, config: SessionConfig) -> Result<Self, ServiceError> {
        if navmesh.polygons.is_empty() {
            return Err(ServiceError::InvalidRequest("navmesh has no polygons".into()));
        }
        for p in &pois {
            p.validate().map_err(|e| ServiceError::InvalidRequest(e.to_string()))?;
        }
        config.noise.validate().map_err(|e| ServiceError::InvalidRequest(e.to_string()))?;
        let spawn = config.spawn.unwrap_or(navmesh.polygons[0].center);
        let agent = AgentState::spawn(&navmesh, navmesh.agent, spawn);
        let (_, inside) = check_poi_triggers(&agent, &pois, &[], 0.0);
        Ok(Self {
            world: WorldState::new(navmesh),
            agent,
            pois,
            inside,
            tracking: TrackingState::Tracked,
            quality: 1.0,
            config,
            sample_index: 0,
            clock: 0.0,
            seq: 0,
            destination: None,
            active: None,
        })
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn agent(&self) -> &AgentState {
        &self.agent
    }

    pub fn pois(&self) -> &[Poi] {
        &self.pois
    }

    pub fn path(&self) -> Option<&PathView> {
        self.active.as_ref()
    }

    /// Sequence number of the last emitted event.
    pub fn last_seq(&self) -> u64 {
        self.seq
    }

    pub fn tracking(&self) -> TrackingView {
        let fb = feedback(self.tracking);
        TrackingView {
            state: self.tracking,
            quality: self.quality,
            simulated: self.config.simulate_tracking,
            noise: self.config.noise,
            guidance: fb.map(|f| f.keys.iter().map(|k| k.to_string()).collect()).unwrap_or_default(),
            message: fb.map_or(String::new(), |f| f.text.to_string()),
        }
    }

    pub fn world_view(&self) -> WorldView {
        WorldView {
            generation: self.world.generation(),
            blocked: self.world.blocked().iter().copied().collect(),
            obstacles: self.world.obstacles().cloned().collect(),
        }
    }

    fn emit(&mut self, out: &mut Vec<Event>, body: EventBody) {
        self.seq += 1;
        out.push(Event { seq: self.seq, generation: self.world.generation(), body });
    }

    fn agent_moved(&self) -> EventBody {
        EventBody::AgentMoved {
            position: self.agent.position,
            yaw: self.agent.yaw,
            polygon: self.agent.current_polygon,
            status: self.agent.status,
            visible: self.agent.visible,
        }
    }

    /// Plans from the agent to the current destination. A failure clears the
    /// active path; the destination is kept unless the failure answers a new
    /// destination request.
    fn replan(&mut self, reason: ReplanReason, out: &mut Vec<Event>) -> Result<(), PathError> {
        let Some(goal) = self.destination else { return Ok(()) };
        match self.world.plan(self.agent.position, goal, Algorithm::Astar) {
            Ok(planned) => {
                let view = PathView::new(goal, planned.generation, &planned.result);
                self.agent = self.agent.clone().set_path(planned.result);
                self.active = Some(view.clone());
                self.emit(out, EventBody::PathUpdated { reason, path: view });
                Ok(())
            }
            Err(e) => {
                self.agent = self.agent.clone().clear_path();
                self.active = None;
                if reason == ReplanReason::Destination {
                    self.destination = None;
                }
                let kind = ServiceError::Path(e.clone()).kind().to_string();
                self.emit(out, EventBody::PathFailed { reason, destination: goal, error: e.to_string(), kind });
                Err(e)
            }
        }
    }

    /// Feeds one camera pose: tracking update, agent sync, POI triggers, then
    /// arrival or deviation handling for the active path.
    pub fn handle_pose(&mut self, req: PoseRequest) -> Result<Vec<Event>, ServiceError> {
        check_finite(req.position, "position")?;
        if !req.yaw.is_finite() || req.timestamp.is_some_and(|t| !t.is_finite()) {
            return Err(ServiceError::InvalidRequest("yaw and timestamp must be finite".into()));
        }
        let mut out = Vec::new();
        if let Some(t) = req.timestamp {
            self.clock = t;
        }
        let (observed, quality) = if self.config.simulate_tracking {
            let s = simulate_estimate(req.position, &self.config.noise, self.sample_index);
            self.sample_index += 1;
            (s.estimated_pose, s.quality)
        } else {
            (Some(req.position), 1.0)
        };
        self.quality = quality;
        let state = update_state(self.tracking, quality);
        if state != self.tracking {
            self.tracking = state;
            let t = self.tracking();
            self.emit(&mut out, EventBody::TrackingStateChanged { state, quality, guidance: t.guidance, message: t.message });
        }
        let Some(position) = observed else { return Ok(out) };

        let nav = self.world.navmesh();
        self.agent = self.agent.clone().sync_to_camera(nav, CameraPose::new(position, req.yaw));
        let moved = self.agent_moved();
        self.emit(&mut out, moved);

        let (poi_events, inside) = check_poi_triggers(&self.agent, &self.pois, &self.inside, self.clock);
        self.inside = inside;
        for e in poi_events {
            let body = match e.kind {
                PoiEventKind::Enter => EventBody::PoiEnter { poi: e.poi, timestamp: e.timestamp },
                PoiEventKind::Exit => EventBody::PoiExit { poi: e.poi, timestamp: e.timestamp },
            };
            self.emit(&mut out, body);
        }

        if let Some(goal) = self.destination {
            if geom::xz(self.agent.position).distance(geom::xz(goal)) <= ARRIVAL_THRESHOLD {
                self.destination = None;
                self.active = None;
                self.agent = self.agent.clone().clear_path();
                self.emit(&mut out, EventBody::PathCleared);
            } else if self.active.is_none()
                || self.agent.deviation_from_path().is_some_and(|d| d > self.config.replan_deviation)
            {
                let _ = self.replan(ReplanReason::Deviation, &mut out);
            }
        }
        Ok(out)
    }

    pub fn set_visibility(&mut self, visible: bool) -> Vec<Event> {
        let mut out = Vec::new();
        self.agent = self.agent.clone().set_visibility(visible);
        let moved = self.agent_moved();
        self.emit(&mut out, moved);
        out
    }

    fn resolve(&self, req: &DestinationRequest) -> Result<DVec3, ServiceError> {
        match (&req.poi, req.point) {
            (Some(id), None) => {
                let poi = self.pois.iter().find(|p| &p.id == id).ok_or_else(|| ServiceError::UnknownPoi(id.clone()))?;
                let nav = self.world.navmesh();
                if locate_polygon(nav, poi.position).is_some() {
                    return Ok(poi.position);
                }
                // a POI placed just off the walkable area is reached at its nearest surface point
                Ok(match closest_point(nav, poi.position) {
                    Some((_, q, d)) if d <= poi.trigger_radius => q,
                    _ => poi.position,
                })
            }
            (None, Some(p)) => {
                check_finite(p, "point")?;
                Ok(p)
            }
            _ => Err(ServiceError::InvalidRequest("give exactly one of `poi` or `point`".into())),
        }
    }

    /// Sets a new destination and plans to it. A planning failure is
    /// reported both as a `path-failed` event and as the error value.
    pub fn set_destination(&mut self, req: &DestinationRequest) -> Result<Vec<Event>, (ServiceError, Vec<Event>)> {
        let goal = self.resolve(req).map_err(|e| (e, Vec::new()))?;
        let mut out = Vec::new();
        self.destination = Some(goal);
        match self.replan(ReplanReason::Destination, &mut out) {
            Ok(()) => Ok(out),
            Err(e) => Err((e.into(), out)),
        }
    }

    pub fn add_obstacle(&mut self, req: ObstacleRequest) -> Result<(ObstacleId, Vec<Event>), ServiceError> {
        let id = req.id.unwrap_or_else(|| self.world.obstacles().map(|o| o.id + 1).max().unwrap_or(1));
        self.world.add_obstacle(Obstacle { id, shape: req.shape })?;
        let mut out = Vec::new();
        self.world_changed(&mut out);
        if self.active.as_ref().is_some_and(|p| self.world.corridor_blocked(&p.corridor)) {
            let _ = self.replan(ReplanReason::WorldChanged, &mut out);
        }
        Ok((id, out))
    }

    /// Removing an obstacle can only shorten routes, so a session with a
    /// destination always replans.
    pub fn remove_obstacle(&mut self, id: ObstacleId) -> Result<Vec<Event>, ServiceError> {
        self.world.remove_obstacle(id)?;
        let mut out = Vec::new();
        self.world_changed(&mut out);
        let _ = self.replan(ReplanReason::WorldChanged, &mut out);
        Ok(out)
    }

    fn world_changed(&mut self, out: &mut Vec<Event>) {
        let view = self.world_view();
        self.emit(out, EventBody::WorldGenerationChanged { blocked: view.blocked, obstacles: view.obstacles });
    }
}

/// One timed step of a replay script. Each step sets `t` and carries any of
/// the actions below, applied in field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptStep {
    #[serde(default)]
    pub t: f64,
    pub visible: Option<bool>,
    pub add_obstacle: Option<ObstacleRequest>,
    pub remove_obstacle: Option<ObstacleId>,
    pub destination: Option<String>,
    pub destination_point: Option<DVec3>,
    pub pose: Option<DVec3>,
    #[serde(default)]
    pub yaw: f64,
}

/// Replay script (TOML):
///
/// ```toml
/// [[step]]
/// t = 0.0
/// pose = [2.0, 1.6, 2.0]
///
/// [[step]]
/// t = 0.5
/// destination = "desk"
///
/// [[step]]
/// t = 1.0
/// add_obstacle = { id = 1, shape = { kind = "box", min = [4.0, 0.0, 4.0], max = [5.0, 1.0, 5.0] } }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(rename = "step", default)]
    pub steps: Vec<ScriptStep>,
}

impl Script {
    pub fn parse(text: &str) -> Result<Self, ServiceError> {
        toml::from_str(text).map_err(|e| ServiceError::InvalidRequest(e.to_string()))
    }
}

/// Replays a script and returns every event. Planning failures show up as
/// `path-failed` events; any other error stops the replay.
pub fn run_script(session: &mut Session, script: &Script) -> Result<Vec<Event>, ServiceError> {
    let mut log = Vec::new();
    for step in &script.steps {
        if !step.t.is_finite() {
            return Err(ServiceError::InvalidRequest("step time must be finite".into()));
        }
        session.clock = step.t;
        if let Some(v) = step.visible {
            log.extend(session.set_visibility(v));
        }
        if let Some(req) = &step.add_obstacle {
            log.extend(session.add_obstacle(req.clone())?.1);
        }
        if let Some(id) = step.remove_obstacle {
            log.extend(session.remove_obstacle(id)?);
        }
        let dest = match (&step.destination, step.destination_point) {
            (None, None) => None,
            (poi, point) => Some(DestinationRequest { poi: poi.clone(), point }),
        };
        if let Some(req) = dest {
            match session.set_destination(&req) {
                Ok(events) => log.extend(events),
                Err((ServiceError::Path(_), events)) => log.extend(events),
                Err((e, _)) => return Err(e),
            }
        }
        if let Some(p) = step.pose {
            log.extend(session.handle_pose(PoseRequest { position: p, yaw: step.yaw, timestamp: Some(step.t) })?);
        }
    }
    Ok(log)
}

/// Shared state behind the HTTP handlers.
pub struct AppState {
    session: Mutex<Session>,
    events: broadcast::Sender<Event>,
    navmesh_payload: String,
    pois: Vec<Poi>,
}

impl AppState {
    pub fn new(session: Session) -> Arc<Self> {
        let navmesh_payload = NavMeshArchive::new(session.world.navmesh(), 0).payload();
        let pois = session.pois.clone();
        let (events, _) = broadcast::channel(EVENT_BUFFER);
        Arc::new(Self { session: Mutex::new(session), events, navmesh_payload, pois })
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Event> {
        self.events.subscribe()
    }

    /// Runs one mutation under the session lock and broadcasts its events
    /// before releasing it.
    pub async fn mutate<T>(&self, f: impl FnOnce(&mut Session) -> (T, Vec<Event>)) -> (T, Vec<Event>) {
        let mut session = self.session.lock().await;
        let (value, events) = f(&mut session);
        for e in &events {
            // no subscribers is fine
            let _ = self.events.send(e.clone());
        }
        (value, events)
    }

    pub async fn read<T>(&self, f: impl FnOnce(&Session) -> T) -> T {
        f(&*self.session.lock().await)
    }
}

type Shared = State<Arc<AppState>>;

/// JSON body whose rejections use the service error shape.
struct Body<T>(T);

impl<T: serde::de::DeserializeOwned, S: Send + Sync> axum::extract::FromRequest<S> for Body<T> {
    type Rejection = ServiceError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(e) => Err(ServiceError::InvalidRequest(e.body_text())),
        }
    }
}

fn split<T>(r: Result<(T, Vec<Event>), ServiceError>) -> (Result<T, ServiceError>, Vec<Event>) {
    match r {
        Ok((v, e)) => (Ok(v), e),
        Err(err) => (Err(err), Vec::new()),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn get_navmesh(State(app): Shared) -> Response {
    ([(axum::http::header::CONTENT_TYPE, "application/json")], app.navmesh_payload.clone()).into_response()
}

async fn get_pois(State(app): Shared) -> Json<Vec<Poi>> {
    Json(app.pois.clone())
}

async fn get_agent(State(app): Shared) -> Json<AgentState> {
    Json(app.read(|s| s.agent.clone()).await)
}

async fn get_path(State(app): Shared) -> Json<Option<PathView>> {
    Json(app.read(|s| s.active.clone()).await)
}

async fn get_tracking(State(app): Shared) -> Json<TrackingView> {
    Json(app.read(Session::tracking).await)
}

async fn get_world(State(app): Shared) -> Json<WorldView> {
    Json(app.read(Session::world_view).await)
}

async fn post_pose(State(app): Shared, Body(req): Body<PoseRequest>) -> Result<Json<serde_json::Value>, ServiceError> {
    let (result, events) = app.mutate(|s| split(s.handle_pose(req).map(|e| ((), e)))).await;
    result.map(|()| Json(json!({ "events": events })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VisibilityRequest {
    visible: bool,
}

async fn post_visibility(State(app): Shared, Body(req): Body<VisibilityRequest>) -> Result<Json<serde_json::Value>, ServiceError> {
    let ((), events) = app.mutate(|s| ((), s.set_visibility(req.visible))).await;
    Ok(Json(json!({ "events": events })))
}

async fn post_destination(State(app): Shared, Body(req): Body<DestinationRequest>) -> Response {
    let (result, events) = app
        .mutate(|s| match s.set_destination(&req) {
            Ok(events) => (Ok(s.active.clone()), events),
            Err((e, events)) => (Err(e), events),
        })
        .await;
    match result {
        Ok(path) => Json(json!({ "path": path, "events": events })).into_response(),
        Err(e) => {
            let mut body = e.body();
            body["events"] = json!(events);
            (e.status(), Json(body)).into_response()
        }
    }
}

async fn post_obstacle(State(app): Shared, Body(req): Body<ObstacleRequest>) -> Result<Json<serde_json::Value>, ServiceError> {
    let (result, events) = app.mutate(|s| split(s.add_obstacle(req))).await;
    let id = result?;
    let generation = events.first().map(|e| e.generation);
    Ok(Json(json!({ "id": id, "generation": generation, "events": events })))
}

async fn delete_obstacle(State(app): Shared, UrlPath(id): UrlPath<ObstacleId>) -> Result<Json<serde_json::Value>, ServiceError> {
    let (result, events) = app.mutate(|s| split(s.remove_obstacle(id).map(|e| ((), e)))).await;
    result?;
    let generation = events.first().map(|e| e.generation);
    Ok(Json(json!({ "generation": generation, "events": events })))
}

/// Messages a WebSocket client may send. Resulting events arrive through the
/// broadcast like any other; errors go back to the sender only.
#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
enum ClientMessage {
    Pose(PoseRequest),
    Destination(DestinationRequest),
    Ping,
}

async fn events_ws(State(app): Shared, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| stream_events(app, socket))
}

async fn stream_events(app: Arc<AppState>, socket: WebSocket) {
    let (mut tx, mut rx) = socket.split();
    // subscribe under the lock so the hello seq is exactly the last event not delivered
    let (mut events, hello) = app
        .read(|s| {
            let hello = Event { seq: s.seq, generation: s.world.generation(), body: EventBody::Hello };
            (app.subscribe(), hello)
        })
        .await;
    let send = |e: &Event| Message::Text(serde_json::to_string(e).expect("events serialize").into());
    if tx.send(send(&hello)).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            event = events.recv() => match event {
                Ok(e) => {
                    if tx.send(send(&e)).await.is_err() {
                        return;
                    }
                }
                // a lagging client must re-fetch state; closing beats a gap in the sequence
                Err(_) => {
                    let _ = tx.send(Message::Close(None)).await;
                    return;
                }
            },
            incoming = rx.next() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => continue,
                };
                let error = match serde_json::from_str::<ClientMessage>(&text) {
                    Ok(ClientMessage::Ping) => None,
                    Ok(ClientMessage::Pose(req)) => {
                        app.mutate(|s| split(s.handle_pose(req).map(|e| ((), e)))).await.0.err()
                    }
                    Ok(ClientMessage::Destination(req)) => {
                        app.mutate(|s| match s.set_destination(&req) {
                            Ok(events) => (None, events),
                            Err((e, events)) => (Some(e), events),
                        })
                        .await
                        .0
                    }
                    Err(e) => Some(ServiceError::InvalidRequest(e.to_string())),
                };
                if let Some(e) = error {
                    let mut body = e.body();
                    body["type"] = json!("error");
                    if tx.send(Message::Text(body.to_string().into())).await.is_err() {
                        return;
                    }
                }
            }
        }
    }
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/navmesh", get(get_navmesh))
        .route("/pois", get(get_pois))
        .route("/agent", get(get_agent))
        .route("/pose", post(post_pose))
        .route("/visibility", post(post_visibility))
        .route("/destination", post(post_destination))
        .route("/path", get(get_path))
        .route("/tracking", get(get_tracking))
        .route("/world", get(get_world))
        .route("/obstacles", post(post_obstacle))
        .route("/obstacles/{id}", delete(delete_obstacle))
        .route("/events", get(events_ws))
        .with_state(app)
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub navmesh: PathBuf,
    pub pois: Option<PathBuf>,
    pub bind: SocketAddr,
    pub session: SessionConfig,
}

/// A service listening in the background.
pub struct RunningService {
    pub addr: SocketAddr,
    pub state: Arc<AppState>,
    shutdown: Option<oneshot::Sender<()>>,
    handle: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl RunningService {
    pub async fn stop(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.handle.await.unwrap_or_else(|e| Err(std::io::Error::other(e)))
    }
}

/// Loads the archive and POI file, binds, and serves in a background task.
pub async fn start(config: ServeConfig) -> Result<RunningService, ServiceError> {
    let navmesh = store::load_navmesh(&config.navmesh)?;
    let pois = match &config.pois {
        Some(path) => store::load_pois(path)?,
        None => Vec::new(),
    };
    start_with(Session::new(navmesh, pois, config.session)?, config.bind).await
}

pub async fn start_with(session: Session, bind: SocketAddr) -> Result<RunningService, ServiceError> {
    let listener = tokio::net::TcpListener::bind(bind).await.map_err(ServiceError::BindFailure)?;
    let addr = listener.local_addr().map_err(ServiceError::BindFailure)?;
    let state = AppState::new(session);
    let (tx, rx) = oneshot::channel::<()>();
    let app = router(state.clone());
    let handle = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(RunningService { addr, state, shutdown: Some(tx), handle })
}

/// Serves until Ctrl-C.
pub async fn serve(config: ServeConfig) -> Result<(), ServiceError> {
    let running = start(config).await?;
    eprintln!("listening on http://{}", running.addr);
    let _ = tokio::signal::ctrl_c().await;
    running.stop().await.map_err(ServiceError::BindFailure)
}
