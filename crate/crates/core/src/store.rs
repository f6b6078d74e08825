//! On-disk formats: navmesh archives, POI configuration and obstacle
//! snapshots.
//!
//! A navmesh archive is a small text header followed by one line of
//! canonical JSON (keys sorted, floats in shortest round-trip form):
//!
//! ```text
//! indoor-nav-navmesh
//! schema_version 1
//! polygons 784
//! sha256 <64 hex digits>
//! {"agent_profile":{...},"bake_params":{...},"build_timestamp":0,"polygons":[...],"schema_version":1,"source_hash":"..."}
//! ```
//!
//! The digest covers every byte of the file except the `sha256` line, so a
//! change anywhere, header included, is caught on load.

use std::path::Path;

use glam::DVec3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agent::{Attachment, Poi};
use crate::bake::{AgentProfile, BakeParams, NavMesh, NavPolygon};
use crate::dynworld::Obstacle;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARCHIVE_MAGIC: &str = "indoor-nav-navmesh";
const DIGEST_LINE: usize = 3;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error: {0}")]
    IoError(#[from] std::io::Error),
    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("archive digest does not match its contents")]
    DigestMismatch,
    #[error("validation failed: {0}")]
    ValidationFailure(String),
}

fn invalid(msg: impl std::fmt::Display) -> StoreError {
    StoreError::ValidationFailure(msg.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavMeshArchive {
    pub schema_version: u32,
    pub source_hash: String,
    pub bake_params: BakeParams,
    pub agent_profile: AgentProfile,
    pub polygons: Vec<NavPolygon>,
    /// Seconds since the Unix epoch; 0 keeps saves reproducible.
    pub build_timestamp: u64,
}

impl NavMeshArchive {
    pub fn new(navmesh: &NavMesh, build_timestamp: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            source_hash: navmesh.source_hash.clone(),
            bake_params: navmesh.bake_params,
            agent_profile: navmesh.agent,
            polygons: navmesh.polygons.clone(),
            build_timestamp,
        }
    }

    pub fn into_navmesh(self) -> NavMesh {
        NavMesh {
            polygons: self.polygons,
            bake_params: self.bake_params,
            agent: self.agent_profile,
            source_hash: self.source_hash,
        }
    }

    /// Canonical JSON payload.
    pub fn payload(&self) -> String {
        canonical_json(self)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = format!("{ARCHIVE_MAGIC}\nschema_version {}\npolygons {}\n", self.schema_version, self.polygons.len());
        let body = format!("{}\n", self.payload());
        let digest = hex::encode(Sha256::new().chain_update(&header).chain_update(&body).finalize());
        format!("{header}sha256 {digest}\n{body}").into_bytes()
    }

    /// Parses and verifies an archive: digest first, then schema version,
    /// header consistency and navmesh validity.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StoreError> {
        let lines: Vec<&[u8]> = bytes.split_inclusive(|&b| b == b'\n').collect();
        let stored = lines
            .get(DIGEST_LINE)
            .and_then(|l| l.strip_prefix(b"sha256 "))
            .and_then(|l| l.strip_suffix(b"\n"))
            .ok_or(StoreError::DigestMismatch)?;
        let mut hasher = Sha256::new();
        for (i, line) in lines.iter().enumerate() {
            if i != DIGEST_LINE {
                hasher.update(line);
            }
        }
        if hex::encode(hasher.finalize()).as_bytes() != stored {
            return Err(StoreError::DigestMismatch);
        }

        let text = std::str::from_utf8(bytes).map_err(invalid)?;
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != 5 || lines[0] != ARCHIVE_MAGIC {
            return Err(invalid("not a navmesh archive"));
        }
        let header_field = |line: &str, key: &str| -> Result<u64, StoreError> {
            line.strip_prefix(key)
                .and_then(|v| v.strip_prefix(' '))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| invalid(format!("bad header line `{line}`")))
        };
        let version = header_field(lines[1], "schema_version")?;
        let version = u32::try_from(version).map_err(invalid)?;
        if version != SCHEMA_VERSION {
            return Err(StoreError::SchemaVersionMismatch { found: version, expected: SCHEMA_VERSION });
        }
        let count = header_field(lines[2], "polygons")?;
        let archive: NavMeshArchive = serde_json::from_str(lines[4]).map_err(invalid)?;
        if archive.schema_version != version {
            return Err(invalid("header and payload schema versions differ"));
        }
        if archive.polygons.len() as u64 != count {
            return Err(invalid(format!("header lists {count} polygons, payload has {}", archive.polygons.len())));
        }
        archive.validate()?;
        Ok(archive)
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        self.bake_params.validate().map_err(invalid)?;
        self.agent_profile.validate().map_err(invalid)?;
        let navmesh = self.clone().into_navmesh();
        let defects = navmesh.check();
        if !defects.is_empty() {
            return Err(invalid(format!("{} defect(s), first: {:?}", defects.len(), defects[0])));
        }
        for p in &self.polygons {
            if !p.vertices.iter().chain([&p.center]).all(|v| v.is_finite()) {
                return Err(invalid(format!("polygon {} has non-finite coordinates", p.id)));
            }
        }
        Ok(())
    }
}

/// Serializes with object keys sorted at every level.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("archive types serialize to JSON");
    v.sort_all_objects();
    v.to_string()
}

pub fn navmesh_to_bytes(navmesh: &NavMesh) -> Vec<u8> {
    NavMeshArchive::new(navmesh, 0).to_bytes()
}

pub fn navmesh_from_bytes(bytes: &[u8]) -> Result<NavMesh, StoreError> {
    NavMeshArchive::from_bytes(bytes).map(NavMeshArchive::into_navmesh)
}

pub fn save_navmesh(navmesh: &NavMesh, path: impl AsRef<Path>) -> Result<(), StoreError> {
    std::fs::write(path, navmesh_to_bytes(navmesh))?;
    Ok(())
}

pub fn load_navmesh(path: impl AsRef<Path>) -> Result<NavMesh, StoreError> {
    navmesh_from_bytes(&std::fs::read(path)?)
}

pub fn load_archive(path: impl AsRef<Path>) -> Result<NavMeshArchive, StoreError> {
    NavMeshArchive::from_bytes(&std::fs::read(path)?)
}

/// POI configuration file (TOML):
///
/// ```toml
/// schema_version = 1
///
/// [[poi]]
/// id = "lobby"
/// title = "Main lobby"
/// x = 4.0
/// y = 0.0
/// z = 2.5
/// trigger_radius = 1.5
/// attachments = [{ kind = "image", uri = "lobby.png" }]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiConfig {
    pub schema_version: u32,
    #[serde(rename = "poi", default)]
    pub pois: Vec<PoiEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiEntry {
    pub id: String,
    pub title: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub trigger_radius: f64,
    #[serde(default)]
    pub attachments: Vec<Attachment>,
}

impl From<&Poi> for PoiEntry {
    fn from(p: &Poi) -> Self {
        Self {
            id: p.id.clone(),
            title: p.title.clone(),
            x: p.position.x,
            y: p.position.y,
            z: p.position.z,
            trigger_radius: p.trigger_radius,
            attachments: p.attachments.clone(),
        }
    }
}

impl From<PoiEntry> for Poi {
    fn from(e: PoiEntry) -> Self {
        Poi {
            id: e.id,
            title: e.title,
            position: DVec3::new(e.x, e.y, e.z),
            trigger_radius: e.trigger_radius,
            attachments: e.attachments,
        }
    }
}

pub fn pois_to_toml(pois: &[Poi]) -> String {
    let config = PoiConfig { schema_version: SCHEMA_VERSION, pois: pois.iter().map(PoiEntry::from).collect() };
    toml::to_string(&config).expect("POI config serializes to TOML")
}

pub fn pois_from_toml(text: &str) -> Result<Vec<Poi>, StoreError> {
    let config: PoiConfig = toml::from_str(text).map_err(invalid)?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(StoreError::SchemaVersionMismatch { found: config.schema_version, expected: SCHEMA_VERSION });
    }
    let pois: Vec<Poi> = config.pois.into_iter().map(Poi::from).collect();
    let mut ids = std::collections::BTreeSet::new();
    for p in &pois {
        p.validate().map_err(invalid)?;
        if !ids.insert(p.id.as_str()) {
            return Err(invalid(format!("duplicate POI id `{}`", p.id)));
        }
    }
    Ok(pois)
}

pub fn save_pois(pois: &[Poi], path: impl AsRef<Path>) -> Result<(), StoreError> {
    std::fs::write(path, pois_to_toml(pois))?;
    Ok(())
}

pub fn load_pois(path: impl AsRef<Path>) -> Result<Vec<Poi>, StoreError> {
    pois_from_toml(&std::fs::read_to_string(path)?)
}

/// Active obstacles at one world generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub schema_version: u32,
    pub generation: u64,
    pub obstacles: Vec<Obstacle>,
}

impl WorldSnapshot {
    pub fn new(world: &crate::dynworld::WorldState) -> Self {
        Self { schema_version: SCHEMA_VERSION, generation: world.generation(), obstacles: world.obstacles().cloned().collect() }
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self, StoreError> {
        let snap: WorldSnapshot = serde_json::from_str(text).map_err(invalid)?;
        if snap.schema_version != SCHEMA_VERSION {
            return Err(StoreError::SchemaVersionMismatch { found: snap.schema_version, expected: SCHEMA_VERSION });
        }
        for o in &snap.obstacles {
            o.validate().map_err(invalid)?;
        }
        Ok(snap)
    }
}
