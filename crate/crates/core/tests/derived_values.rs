//! Values checked against independent oracles: an external mesh inspector,
//! brute-force geometry, hand arithmetic and closed-form statistics.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use approx::assert_relative_eq;
use glam::DVec3;
use indoor_nav::agent::{check_poi_triggers, AgentState, CameraPose, Poi};
use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::bench::{compare_summary, run_path_bench, BenchConfig, PathBenchRecord};
use indoor_nav::dynworld::{Obstacle, WorldState};
use indoor_nav::fixtures;
use indoor_nav::geom;
use indoor_nav::ingest::{mesh_bounds, validate_mesh};
use indoor_nav::localize::{error_report, sample_series, NoiseModel};

use common::{distance_to_footprint, office, office_mesh};

// Counted from the bundled OBJ with a separate script (vertex and face
// records tallied, faces fan-triangulated, coordinate extremes taken).
const OFFICE_TRIANGLES: usize = 4230;
const OFFICE_VERTICES: usize = 2873;
const OFFICE_MIN: [f64; 3] = [0.0, 0.0, 0.0];
const OFFICE_MAX: [f64; 3] = [60.0, 3.0, 36.0];

#[test]
fn office_scan_matches_external_inspection() {
    let mesh = office_mesh();
    assert_eq!(mesh.triangles.len(), OFFICE_TRIANGLES);
    assert_eq!(mesh.vertices.len(), OFFICE_VERTICES);
    let b = mesh_bounds(&mesh).unwrap();
    for i in 0..3 {
        assert!((b.min[i] - OFFICE_MIN[i]).abs() <= 1e-6);
        assert!((b.max[i] - OFFICE_MAX[i]).abs() <= 1e-6);
    }
    assert!(validate_mesh(&mesh).is_clean());
}

#[test]
fn office_navmesh_is_large_connected_and_valid() {
    let nav = office();
    assert!(nav.polygons.len() >= 500, "{}", nav.polygons.len());
    assert!(nav.check().is_empty());
    assert_eq!(nav.component_count(), 1);
}

#[test]
fn cylinder_at_junction_matches_brute_force() {
    let nav = office();
    // a vertex shared by at least four polygons
    let mut owners: BTreeMap<(i64, i64), BTreeSet<u32>> = BTreeMap::new();
    for p in &nav.polygons {
        for v in &p.vertices {
            owners.entry(((v.x * 1e6).round() as i64, (v.z * 1e6).round() as i64)).or_default().insert(p.id);
        }
    }
    let (&(x, z), _) = owners.iter().find(|(_, ids)| ids.len() >= 4).expect("office has a 4-way junction");
    let center = DVec3::new(x as f64 * 1e-6, 0.0, z as f64 * 1e-6);
    let obstacle = Obstacle::new_cylinder(1, center, 0.5, 1.0);

    let oracle: BTreeSet<u32> = nav
        .polygons
        .iter()
        .filter(|p| distance_to_footprint(&p.footprint(), geom::xz(center)) < 0.5 - 1e-9)
        .map(|p| p.id)
        .collect();
    let world = WorldState::new(nav);
    let hit = world.polygons_hit(&obstacle);
    assert!(hit.len() >= 4);
    assert_eq!(hit, oracle);
}

#[test]
fn hidden_agent_logs_the_same_poi_events() {
    let nav = bake(&fixtures::flat_floor(10.0), &AgentProfile::default(), &BakeParams::default()).unwrap();
    let pois = vec![Poi::new("a", "A", DVec3::new(5.0, 0.0, 5.0), 1.0)];
    let walk = |visible: bool| {
        let mut agent = AgentState::spawn(&nav, nav.agent, DVec3::new(1.0, 0.0, 5.0)).set_visibility(visible);
        let mut inside = Vec::new();
        let mut log = Vec::new();
        for i in 0..=80 {
            let x = 1.0 + i as f64 * 0.1;
            agent = agent.sync_to_camera(&nav, CameraPose::new(DVec3::new(x, 1.5, 5.0), 0.0));
            let (events, now) = check_poi_triggers(&agent, &pois, &inside, i as f64);
            inside = now;
            log.extend(events);
        }
        log
    };
    let shown = walk(true);
    assert_eq!(shown.len(), 2);
    assert_eq!(walk(false), shown);
}

#[test]
fn reference_rows_give_expected_ratios() {
    // nodes and milliseconds per bin for A* and Dijkstra
    let rows = [(10.0, 48.0, 1.3, 180.0, 3.8), (25.0, 120.0, 3.1, 420.0, 8.6), (50.0, 260.0, 6.2, 860.0, 17.4)];
    let records: Vec<PathBenchRecord> = rows
        .iter()
        .map(|&(len, na, ta, nd, td)| PathBenchRecord {
            path_length_m: len,
            nodes_expanded_astar: na,
            time_astar_us: ta * 1000.0,
            peak_set_astar: na,
            nodes_expanded_dijkstra: nd,
            time_dijkstra_us: td * 1000.0,
            peak_set_dijkstra: nd,
        })
        .collect();
    let s = compare_summary(&records);
    let nodes: Vec<f64> = s.per_bin.iter().map(|b| (b.nodes_ratio * 100.0).round() / 100.0).collect();
    let time: Vec<f64> = s.per_bin.iter().map(|b| (b.time_ratio * 100.0).round() / 100.0).collect();
    assert_eq!(nodes, [3.75, 3.5, 3.31]);
    assert_eq!(time, [2.92, 2.77, 2.81]);
}

#[test]
fn every_bench_record_expands_fewer_nodes_with_astar() {
    let world = WorldState::new(office());
    let config = BenchConfig { queries_per_bin: 20, seed: 19, timing_repeats: 1 };
    let result = run_path_bench(&world, &[10.0, 25.0, 50.0], config).unwrap();
    assert_eq!(result.per_bin.len(), 3);
    for r in result.raw_records() {
        assert!(r.nodes_expanded_dijkstra >= r.nodes_expanded_astar, "{r:?}");
    }
    for (q, bin) in result.queries.iter().zip([10.0; 20].into_iter().chain([25.0; 20]).chain([50.0; 20])) {
        let len = indoor_nav::pathfind::path_length(&q.astar.corners);
        assert!((len - bin).abs() <= 0.15 * bin);
        assert_eq!(q.astar.cost, q.dijkstra.cost);
    }
}

#[test]
fn radial_error_matches_rayleigh_mean() {
    let sigma = 0.0478;
    let report = error_report(&sample_series(DVec3::ZERO, &NoiseModel::new(sigma, 0.0, 0.0, 42).unwrap(), 10_000)).unwrap();
    let mean = sigma * (std::f64::consts::PI / 2.0).sqrt();
    assert_relative_eq!(mean, 0.0599, epsilon = 1e-4);
    assert!((report.mean_error - mean).abs() <= 0.1 * mean);
    assert!((report.rms_error - sigma * 2f64.sqrt()).abs() <= 0.1 * sigma * 2f64.sqrt());
}

#[test]
fn hand_geometry_values() {
    use indoor_nav::pathfind::path_length;
    let pts = [DVec3::ZERO, DVec3::X, DVec3::new(1.0, 0.0, 2.0)];
    assert_eq!(path_length(&pts), 3.0);
    assert_eq!(DVec3::new(1.0, 2.0, 2.0).distance(DVec3::new(4.0, 2.0, 6.0)), 5.0);
}
