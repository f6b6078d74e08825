//! Indoor navigation engine.
//!
//! Bakes a walkable navigation mesh from a triangle-mesh scan of a building
//! interior, searches it with A* (and a Dijkstra baseline), carves dynamic
//! obstacles at runtime, and simulates the camera-synced runtime: an agent
//! that follows the camera, point-of-interest triggers, and tracking-quality
//! feedback. A benchmark harness compares the two searches and reports
//! tracking error statistics.
//!
//! ```no_run
//! use indoor_nav::{bake, fixtures, navgraph, pathfind};
//! use glam::DVec3;
//!
//! let mesh = fixtures::office_floor();
//! let navmesh = bake::bake(&mesh, &Default::default(), &Default::default()).unwrap();
//! let graph = navgraph::build_graph(&navmesh);
//! let path = pathfind::astar(&graph, &navmesh, DVec3::new(3.0, 0.0, 18.0), DVec3::new(55.0, 0.0, 30.0)).unwrap();
//! println!("{} corners, {:.2} m", path.corners.len(), pathfind::path_length(&path.corners));
//! ```

pub mod agent;
pub mod bake;
pub mod bench;
pub mod cli;
pub mod dynworld;
pub mod fixtures;
pub mod geom;
pub mod ingest;
pub mod localize;
pub mod navgraph;
pub mod pathfind;
pub mod service;
pub mod store;

pub use bake::{AgentProfile, BakeParams, NavMesh, NavPolygon, PolyId};
pub use ingest::TriangleMesh;
pub use pathfind::PathResult;
