mod common;

use std::collections::BTreeSet;

use glam::DVec3;
use indoor_nav::agent::{check_poi_triggers, AgentState, CameraPose, Poi, PoiEventKind};
use indoor_nav::bake::{bake, AgentProfile, BakeParams, NavMesh};
use indoor_nav::dynworld::{Obstacle, WorldState};
use indoor_nav::fixtures;
use indoor_nav::localize::{error_report, quality_from_error, sample_series, NoiseModel};
use indoor_nav::navgraph::locate_polygon;
use indoor_nav::pathfind::{funnel, path_length, portal_midpoint_path, Algorithm};
use indoor_nav::store::{navmesh_from_bytes, navmesh_to_bytes, pois_from_toml, pois_to_toml, StoreError};
use proptest::prelude::*;
use std::sync::OnceLock;

fn l_nav() -> &'static NavMesh {
    static NAV: OnceLock<NavMesh> = OnceLock::new();
    NAV.get_or_init(|| bake(&fixtures::l_floor(), &AgentProfile::default(), &BakeParams::default()).unwrap())
}

fn flat_nav() -> &'static NavMesh {
    static NAV: OnceLock<NavMesh> = OnceLock::new();
    NAV.get_or_init(|| bake(&fixtures::flat_floor(10.0), &AgentProfile::default(), &BakeParams::default()).unwrap())
}

fn rect_floor() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((0.0..8.0f64, 0.0..8.0f64, 1.5..5.0f64, 1.5..5.0f64), 1..4)
}

fn floor_mesh(rects: &[(f64, f64, f64, f64)]) -> indoor_nav::ingest::TriangleMesh {
    let mut mesh = fixtures::rect(rects[0].0, rects[0].1, rects[0].0 + rects[0].2, rects[0].1 + rects[0].3, 0.0);
    for &(x, z, w, d) in &rects[1..] {
        mesh.append(&fixtures::rect(x, z, x + w, z + d, 0.0));
    }
    mesh
}

fn point_on(nav: &NavMesh, (i, a, b): (usize, f64, f64)) -> DVec3 {
    let p = &nav.polygons[i % nav.polygons.len()];
    let v = &p.vertices;
    let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
    v[0] + (v[1] - v[0]) * a + (v[2] - v[0]) * b
}

fn poly_point() -> impl Strategy<Value = (usize, f64, f64)> {
    (0usize..10_000, 0.0..1.0f64, 0.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn baked_floors_pass_structural_checks(rects in rect_floor()) {
        let mesh = floor_mesh(&rects);
        let nav = bake(&mesh, &AgentProfile::default(), &BakeParams::default()).unwrap();
        prop_assert!(nav.check().is_empty(), "{:?}", nav.check());
        let again = bake(&mesh, &AgentProfile::default(), &BakeParams::default()).unwrap();
        prop_assert_eq!(navmesh_to_bytes(&nav), navmesh_to_bytes(&again));
    }

    #[test]
    fn archives_reject_any_flipped_bit(rects in rect_floor(), at in 0usize..1_000_000, bit in 0u8..8) {
        let nav = bake(&floor_mesh(&rects), &AgentProfile::default(), &BakeParams::default()).unwrap();
        let mut bytes = navmesh_to_bytes(&nav);
        prop_assert_eq!(&navmesh_from_bytes(&bytes).unwrap(), &nav);
        let i = at % bytes.len();
        bytes[i] ^= 1 << bit;
        prop_assert!(matches!(navmesh_from_bytes(&bytes), Err(StoreError::DigestMismatch)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn funnel_is_bounded_by_straight_line_and_midpoints(a in poly_point(), b in poly_point()) {
        let nav = l_nav();
        let world = WorldState::new(nav.clone());
        let (start, goal) = (point_on(nav, a), point_on(nav, b));
        let astar = world.plan(start, goal, Algorithm::Astar).unwrap();
        let dijkstra = world.plan(start, goal, Algorithm::Dijkstra).unwrap();
        prop_assert!((astar.result.cost - dijkstra.result.cost).abs() <= 1e-9);

        let corridor = &astar.result.corridor;
        let corners = funnel(nav, corridor, start, goal).unwrap();
        prop_assert_eq!(corners[0], start);
        prop_assert_eq!(*corners.last().unwrap(), goal);
        let len = path_length(&corners);
        prop_assert!(len >= start.distance(goal) - 1e-9);
        let mid = path_length(&portal_midpoint_path(nav, corridor, start, goal).unwrap());
        prop_assert!(len <= mid + 1e-9, "{len} > {mid}");
    }

    #[test]
    fn blocked_set_is_union_of_live_obstacles(
        ops in prop::collection::vec((any::<bool>(), 0u64..6, 0.0..9.0f64, 0.0..9.0f64, 0.2..2.0f64), 1..20)
    ) {
        let nav = flat_nav();
        let mut world = WorldState::new(nav.clone());
        let mut live: Vec<Obstacle> = Vec::new();
        for (add, id, x, z, size) in ops {
            let before = world.generation();
            let known = live.iter().any(|o| o.id == id);
            let changed = if add {
                let o = Obstacle::new_box(id, DVec3::new(x, 0.0, z), DVec3::new(x + size, 1.0, z + size));
                let r = world.add_obstacle(o.clone());
                prop_assert_eq!(r.is_ok(), !known);
                if r.is_ok() { live.push(o); }
                !known
            } else {
                let r = world.remove_obstacle(id);
                prop_assert_eq!(r.is_ok(), known);
                live.retain(|o| o.id != id);
                known
            };
            prop_assert_eq!(world.generation(), before + changed as u64);
            let expected: BTreeSet<_> = live.iter().flat_map(|o| world.polygons_hit(o)).collect();
            prop_assert_eq!(world.blocked(), &expected);
        }
        for o in live {
            world.remove_obstacle(o.id).unwrap();
        }
        prop_assert!(world.blocked().is_empty());
    }

    #[test]
    fn agent_holds_floor_height_and_stays_on_mesh(
        poses in prop::collection::vec((-1.0..11.0f64, 0.5..2.5f64, -1.0..11.0f64, -3.2..3.2f64), 1..40)
    ) {
        let nav = flat_nav();
        let mut agent = AgentState::spawn(nav, nav.agent, DVec3::new(5.0, 0.0, 5.0));
        let y = agent.position.y;
        for (x, cy, z, yaw) in poses {
            agent = agent.sync_to_camera(nav, CameraPose::new(DVec3::new(x, cy, z), yaw));
            prop_assert_eq!(agent.position.y, y);
            prop_assert!(locate_polygon(nav, agent.position).is_some());
        }
    }

    #[test]
    fn poi_events_alternate(
        walk in prop::collection::vec((0.0..10.0f64, 0.0..10.0f64), 1..60),
        radius in 0.3..3.0f64,
        visible in any::<bool>(),
    ) {
        let nav = flat_nav();
        let pois = vec![
            Poi::new("a", "A", DVec3::new(3.0, 0.0, 3.0), radius),
            Poi::new("b", "B", DVec3::new(7.0, 0.0, 6.0), radius),
        ];
        let mut agent = AgentState::spawn(nav, nav.agent, DVec3::new(0.5, 0.0, 0.5)).set_visibility(visible);
        let mut inside = Vec::new();
        let mut log = Vec::new();
        for (t, (x, z)) in walk.into_iter().enumerate() {
            agent = agent.sync_to_camera(nav, CameraPose::new(DVec3::new(x, 1.5, z), 0.0));
            let (events, now) = check_poi_triggers(&agent, &pois, &inside, t as f64);
            inside = now;
            log.extend(events);
        }
        for id in ["a", "b"] {
            let kinds: Vec<_> = log.iter().filter(|e| e.poi == id).map(|e| e.kind).collect();
            for (i, k) in kinds.iter().enumerate() {
                let want = if i % 2 == 0 { PoiEventKind::Enter } else { PoiEventKind::Exit };
                prop_assert_eq!(*k, want);
            }
        }
    }

    #[test]
    fn error_report_is_ordered(sigma in 0.0..0.5f64, dropout in 0.0..0.9f64, seed in any::<u64>()) {
        let model = NoiseModel::new(sigma, 0.0, dropout, seed).unwrap();
        let samples = sample_series(DVec3::new(1.0, 0.0, 2.0), &model, 200);
        if let Ok(r) = error_report(&samples) {
            prop_assert!(r.mean_error <= r.rms_error + 1e-12);
            prop_assert!(r.rms_error <= r.max_error + 1e-12);
            prop_assert_eq!(r.sample_count + r.dropouts, 200);
        }
        for s in &samples {
            prop_assert!((0.0..=1.0).contains(&s.quality));
        }
    }

    #[test]
    fn quality_stays_in_unit_range(error in -1.0..100.0f64) {
        let q = quality_from_error(error);
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn poi_config_round_trips(
        entries in prop::collection::vec(("[a-z][a-z0-9_]{0,8}", -50.0..50.0f64, -5.0..5.0f64, -50.0..50.0f64, 0.01..10.0f64), 0..6)
    ) {
        let mut seen = BTreeSet::new();
        let pois: Vec<Poi> = entries
            .into_iter()
            .filter(|(id, ..)| seen.insert(id.clone()))
            .map(|(id, x, y, z, r)| Poi::new(id.clone(), format!("{id} title"), DVec3::new(x, y, z), r))
            .collect();
        prop_assert_eq!(pois_from_toml(&pois_to_toml(&pois)).unwrap(), pois);
    }
}
