#![allow(dead_code)]

use glam::DVec3;
use indoor_nav::bake::{bake, AgentProfile, BakeParams, NavMesh};
use indoor_nav::bench::random_point_in;
use indoor_nav::fixtures;
use indoor_nav::geom;
use indoor_nav::ingest::{load_mesh, TriangleMesh};
use rand::Rng;

pub const OFFICE_OBJ: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/office.obj");

pub fn office_mesh() -> TriangleMesh {
    load_mesh(OFFICE_OBJ).expect("bundled office scan loads")
}

pub fn office() -> NavMesh {
    bake(&office_mesh(), &AgentProfile::default(), &BakeParams::default()).expect("office bakes")
}

/// Every bundled scene, by name.
pub fn all_fixtures() -> Vec<(&'static str, TriangleMesh)> {
    vec![
        ("flat_floor", fixtures::flat_floor(10.0)),
        ("low_ceiling", fixtures::floor_with_ceiling(10.0, 2.5)),
        ("ramp", fixtures::ramp(20.0, 8.0, 4.0)),
        ("corridor", fixtures::corridor(20.0, 2.0)),
        ("ledge", fixtures::ledge(0.3)),
        ("split_floors", fixtures::split_floors(1.0)),
        ("l_floor", fixtures::l_floor()),
        ("ramp_deck", fixtures::ramp_deck()),
        ("office", office_mesh()),
    ]
}

/// Start and goal drawn uniformly from two random polygons.
pub fn random_query(nav: &NavMesh, rng: &mut impl Rng) -> (DVec3, DVec3) {
    let a = &nav.polygons[rng.random_range(0..nav.polygons.len())];
    let b = &nav.polygons[rng.random_range(0..nav.polygons.len())];
    (random_point_in(a, rng), random_point_in(b, rng))
}

/// Horizontal distance from `p` to a convex CCW footprint (0 inside).
pub fn distance_to_footprint(fp: &[glam::DVec2], p: glam::DVec2) -> f64 {
    let inside = (0..fp.len()).all(|i| geom::cross(fp[i], fp[(i + 1) % fp.len()], p) >= 0.0);
    if inside {
        return 0.0;
    }
    (0..fp.len())
        .map(|i| geom::closest_point_on_segment(fp[i], fp[(i + 1) % fp.len()], p).0.distance(p))
        .fold(f64::INFINITY, f64::min)
}

/// Points every `step` meters along a polyline, both ends included.
pub fn sample_polyline(corners: &[DVec3], step: f64) -> Vec<DVec3> {
    let mut out = vec![corners[0]];
    for w in corners.windows(2) {
        let d = w[0].distance(w[1]);
        let n = (d / step).ceil().max(1.0) as usize;
        out.extend((1..=n).map(|k| w[0].lerp(w[1], k as f64 / n as f64)));
    }
    out
}
