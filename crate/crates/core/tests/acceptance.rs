//! Acceptance suite. Runs every primary criterion at its stated tolerance,
//! prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use glam::{DVec2, DVec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use indoor_nav::agent::{check_poi_triggers, AgentState, CameraPose, Poi, PoiEventKind};
use indoor_nav::bake::{bake, AgentProfile, BakeParams, NavMesh};
use indoor_nav::bench::{compare_summary, run_path_bench, BenchConfig};
use indoor_nav::dynworld::{Obstacle, WorldState};
use indoor_nav::fixtures;
use indoor_nav::geom;
use indoor_nav::localize::{error_report, sample_series, NoiseModel, TrackingSample};
use indoor_nav::navgraph::{closest_point, locate_polygon, NavGraph};
use indoor_nav::pathfind::{path_length, portal_midpoint_path, search_graph, Algorithm};
use indoor_nav::service::{self, DestinationRequest, Event, EventBody, ObstacleRequest, PathView, PoseRequest, Session, SessionConfig};
use indoor_nav::dynworld::ObstacleShape;
use indoor_nav::store::{navmesh_from_bytes, navmesh_to_bytes, StoreError};

use common::{all_fixtures, distance_to_footprint, office, random_query, sample_polyline};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Verdict {
    Pass,
    Warn,
    Fail,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn pass_if(ok: bool, detail: String) -> Outcome {
    Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

/// Shortest simple-path cost by exhaustive enumeration.
fn brute_force(n: usize, adj: &[Vec<(usize, f64)>], start: usize, goal: usize) -> Option<f64> {
    fn dfs(node: usize, goal: usize, cost: f64, adj: &[Vec<(usize, f64)>], seen: &mut Vec<bool>, best: &mut Option<f64>) {
        if node == goal {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
        for &(next, w) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                dfs(next, goal, cost + w, adj, seen, best);
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut best = None;
    dfs(start, goal, 0.0, adj, &mut seen, &mut best);
    best
}

fn optimality_oracle(office: &NavMesh) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut graph_failures = 0;
    let mut reachable = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=12usize);
        let pts: Vec<DVec2> = (0..n).map(|_| DVec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect();
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.4) {
                    // never shorter than the straight line, so the Euclidean heuristic stays admissible
                    let w = pts[a].distance(pts[b]) * rng.random_range(1.0..2.0) + 1e-3;
                    edges.push((a as u32, b as u32, w));
                    adj[a].push((b, w));
                    adj[b].push((a, w));
                }
            }
        }
        let graph = NavGraph::from_edges(n, &edges);
        let (s, g) = (rng.random_range(0..n), rng.random_range(0..n));
        let h = |id: u32| 0.999 * pts[id as usize].distance(pts[g]);
        let astar = search_graph(&graph, s as u32, g as u32, h, |_| false, None).ok().map(|p| p.cost);
        let oracle = brute_force(n, &adj, s, g);
        reachable += oracle.is_some() as usize;
        let agree = match (astar, oracle) {
            (Some(a), Some(o)) => (a - o).abs() <= 1e-9,
            (None, None) => true,
            _ => false,
        };
        graph_failures += !agree as usize;
    }

    let world = WorldState::new(office.clone());
    let mut query_failures = 0;
    let mut worst: f64 = 0.0;
    let mut solved = 0;
    while solved < 500 {
        let (s, g) = random_query(office, &mut rng);
        let a = world.plan(s, g, Algorithm::Astar).map(|p| p.result.cost);
        let d = world.plan(s, g, Algorithm::Dijkstra).map(|p| p.result.cost);
        match (a, d) {
            (Ok(a), Ok(d)) => {
                solved += 1;
                worst = worst.max((a - d).abs());
                query_failures += ((a - d).abs() > 1e-9) as usize;
            }
            (Err(_), Err(_)) => {}
            _ => query_failures += 1,
        }
    }
    pass_if(
        graph_failures == 0 && query_failures == 0,
        format!(
            "500 random graphs ({reachable} reachable): {graph_failures} mismatches vs enumeration; \
             500 office queries: {query_failures} A*/Dijkstra mismatches, worst |diff| {worst:.1e} m"
        ),
    )
}

struct BenchOutcome {
    table: Outcome,
    memory: Outcome,
}

fn benchmark(office: &NavMesh) -> BenchOutcome {
    let world = WorldState::new(office.clone());
    let config = BenchConfig { queries_per_bin: 50, seed: 7, timing_repeats: 7 };
    let bins = [10.0, 25.0, 50.0];
    let result = match run_path_bench(&world, &bins, config) {
        Ok(r) => r,
        Err(e) => {
            let fail = || Outcome { verdict: Verdict::Fail, detail: format!("benchmark failed: {e}") };
            return BenchOutcome { table: fail(), memory: fail() };
        }
    };
    let summary = compare_summary(&result.per_bin);
    let reference_nodes = [3.75, 3.5, 3.31];
    let mut ok = office.polygons.len() >= 500;
    let mut parts = vec![format!("{} polygons", office.polygons.len())];
    for ((bin, row), (ratio, reference)) in bins.iter().zip(&result.per_bin).zip(summary.per_bin.iter().zip(reference_nodes)) {
        let faster = row.time_astar_us < row.time_dijkstra_us;
        ok &= ratio.nodes_ratio >= 2.0 && faster;
        parts.push(format!(
            "{bin} m: nodes {:.1}/{:.1} = {:.2}x (reference {reference}x), time {:.1}/{:.1} us = {:.2}x",
            row.nodes_expanded_dijkstra,
            row.nodes_expanded_astar,
            ratio.nodes_ratio,
            row.time_dijkstra_us,
            row.time_astar_us,
            ratio.time_ratio
        ));
    }
    parts.push(format!("heuristic scale {}", result.heuristic_scale));
    let table = pass_if(ok, parts.join("; "));

    let last = result.per_bin[2];
    let share = last.peak_set_astar / last.peak_set_dijkstra;
    let verdict = if share <= 0.8 {
        Verdict::Pass
    } else if share <= 0.9 {
        Verdict::Warn
    } else {
        Verdict::Fail
    };
    let memory = Outcome {
        verdict,
        detail: format!(
            "50 m bin peak set A* {:.1} vs Dijkstra {:.1} = {share:.3} (limit 0.8, warn to 0.9)",
            last.peak_set_astar, last.peak_set_dijkstra
        ),
    };
    BenchOutcome { table, memory }
}

fn tracking_magnitudes() -> Outcome {
    let sigma = 0.0478;
    let model = NoiseModel::new(sigma, 0.0, 0.0, 42).unwrap();
    let report = error_report(&sample_series(DVec3::ZERO, &model, 10_000)).unwrap();
    let analytic_mean = sigma * (std::f64::consts::PI / 2.0).sqrt();
    let analytic_rms = sigma * 2f64.sqrt();
    pass_if(
        (0.054..=0.066).contains(&report.mean_error) && (0.061..=0.075).contains(&report.rms_error),
        format!(
            "sigma {sigma}, 10000 samples: mean {:.4} m (analytic {analytic_mean:.4}), rms {:.4} m (analytic {analytic_rms:.4}), max {:.4} m",
            report.mean_error, report.rms_error, report.max_error
        ),
    )
}

fn error_arithmetic() -> Outcome {
    let samples = |errors: &[f64]| -> Vec<TrackingSample> {
        errors
            .iter()
            .map(|&e| TrackingSample { true_pose: DVec3::ZERO, estimated_pose: Some(DVec3::X * e), quality: 1.0, error: Some(e) })
            .collect()
    };
    let r = error_report(&samples(&[0.03, 0.04, 0.12])).unwrap();
    let exact = (r.mean_error - 0.063333).abs() <= 1e-6 && (r.rms_error - 0.075056).abs() <= 1e-6 && (r.max_error - 0.12).abs() <= 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..50);
        let errors: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let r = error_report(&samples(&errors)).unwrap();
        violations += !(r.mean_error <= r.rms_error && r.rms_error <= r.max_error) as usize;
    }
    pass_if(
        exact && violations == 0,
        format!(
            "{{0.03, 0.04, 0.12}} -> ({:.6}, {:.6}, {:.6}); ordering violated in {violations}/1000 random sets",
            r.mean_error, r.rms_error, r.max_error
        ),
    )
}

fn funnel_properties(office: &NavMesh) -> Outcome {
    let world = WorldState::new(office.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut outside, mut longer, mut samples, mut done) = (0, 0, 0usize, 0);
    let mut worst_gap: f64 = 0.0;
    while done < 1000 {
        let (s, g) = random_query(office, &mut rng);
        let Ok(plan) = world.plan(s, g, Algorithm::Astar) else { continue };
        done += 1;
        let path = plan.result;
        let footprints: Vec<Vec<DVec2>> = path.corridor.iter().map(|&id| office.polygons[id as usize].footprint()).collect();
        for p in sample_polyline(&path.corners, 0.05) {
            samples += 1;
            let d = footprints.iter().map(|fp| distance_to_footprint(fp, geom::xz(p))).fold(f64::INFINITY, f64::min);
            worst_gap = worst_gap.max(d);
            outside += (d > 1e-6) as usize;
        }
        let mid = portal_midpoint_path(office, &path.corridor, s, g).unwrap();
        longer += (path_length(&path.corners) > path_length(&mid) + 1e-9) as usize;
    }
    pass_if(
        outside == 0 && longer == 0,
        format!(
            "1000 queries, {samples} samples at 0.05 m: {outside} outside corridor (worst {worst_gap:.1e} m); \
             {longer} polylines longer than the portal-midpoint path"
        ),
    )
}

fn archive_digest(nav: &NavMesh) -> String {
    hex::encode(Sha256::digest(navmesh_to_bytes(nav)))
}

fn bake_monotonicity() -> Outcome {
    let base = AgentProfile::default();
    let params = BakeParams::default();
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for (name, mesh) in all_fixtures() {
        let area = |agent: &AgentProfile| bake(&mesh, agent, &params).map(|n| n.total_area()).unwrap_or(0.0);
        let Ok(nav) = bake(&mesh, &base, &params) else {
            problems.push(format!("{name} fails to bake"));
            continue;
        };
        let a0 = nav.total_area();
        let wide = area(&AgentProfile { radius: base.radius * 2.0, ..base });
        let tall = area(&AgentProfile { height: base.height * 2.0, ..base });
        if wide > a0 + 1e-9 || tall > a0 + 1e-9 {
            problems.push(format!("{name}: {a0:.2} -> radius x2 {wide:.2}, height x2 {tall:.2}"));
        }
        let again = bake(&mesh, &base, &params).unwrap();
        if archive_digest(&nav) != archive_digest(&again) {
            problems.push(format!("{name}: digest differs between runs"));
        }
        summary.push(format!("{name} {a0:.1}/{wide:.1}/{tall:.1}"));
    }
    pass_if(
        problems.is_empty(),
        if problems.is_empty() {
            format!("area m2 base/radius x2/height x2: {}; digests stable", summary.join(", "))
        } else {
            problems.join("; ")
        },
    )
}

fn carve_round_trip(office: &NavMesh) -> Outcome {
    let mut world = WorldState::new(office.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut checked, mut rerouted, mut cut_off) = (0, 0, 0);
    let mut problems = Vec::new();
    let mut next_id = 1;
    while checked < 25 {
        let (s, g) = random_query(office, &mut rng);
        let Ok(before) = world.plan(s, g, Algorithm::Astar) else { continue };
        let corridor = &before.result.corridor;
        if corridor.len() < 5 {
            continue;
        }
        checked += 1;
        let target = &office.polygons[corridor[corridor.len() / 2] as usize];
        let c = target.center;
        let id = next_id;
        next_id += 1;
        world.add_obstacle(Obstacle::new_box(id, c - DVec3::new(0.1, 0.0, 0.1), c + DVec3::new(0.1, 1.0, 0.1))).unwrap();
        match world.plan(s, g, Algorithm::Astar) {
            Ok(after) => {
                rerouted += 1;
                if after.result.corridor.iter().any(|p| world.is_blocked(*p)) {
                    problems.push(format!("query {checked}: replanned corridor enters a blocked polygon"));
                }
                if after.result.cost < before.result.cost - 1e-9 {
                    problems.push(format!("query {checked}: cost fell from {} to {}", before.result.cost, after.result.cost));
                }
            }
            Err(_) => cut_off += 1,
        }
        world.remove_obstacle(id).unwrap();
        let restored = world.plan(s, g, Algorithm::Astar).unwrap();
        let same = restored.result.corridor == before.result.corridor
            && restored.result.cost.to_bits() == before.result.cost.to_bits()
            && restored.result.corners == before.result.corners;
        if !same {
            problems.push(format!("query {checked}: removal did not restore the original path"));
        }
    }
    pass_if(
        problems.is_empty(),
        if problems.is_empty() {
            format!("25 queries: {rerouted} rerouted around the obstacle, {cut_off} cut off; all restored bit-for-bit after removal")
        } else {
            problems.join("; ")
        },
    )
}

fn agent_contracts() -> Outcome {
    let nav = bake(&fixtures::flat_floor(10.0), &AgentProfile::default(), &BakeParams::default()).unwrap();
    let mut agent = AgentState::spawn(&nav, nav.agent, DVec3::new(5.0, 0.0, 5.0));
    let y0 = agent.position.y;
    let mut y_drift: f64 = 0.0;
    for i in 0..400 {
        let t = i as f64 * 0.05;
        let pose = DVec3::new(5.0 + 3.0 * (t * 0.7).sin(), 1.6 + 0.5 * (t * 3.0).sin(), 5.0 + 3.0 * (t * 0.4).cos());
        agent = agent.sync_to_camera(&nav, CameraPose::new(pose, 0.0));
        y_drift = y_drift.max((agent.position.y - y0).abs());
    }

    let pois = vec![
        Poi::new("a", "A", DVec3::new(3.0, 0.0, 3.0), 1.0),
        Poi::new("b", "B", DVec3::new(7.0, 0.0, 6.0), 1.5),
        Poi::new("c", "C", DVec3::new(5.0, 0.0, 8.0), 0.5),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut broken, mut events) = (0, 0);
    for _ in 0..100 {
        let mut agent = AgentState::spawn(&nav, nav.agent, DVec3::new(rng.random_range(1.0..9.0), 0.0, rng.random_range(1.0..9.0)));
        let mut inside = Vec::new();
        let mut log: BTreeMap<String, Vec<PoiEventKind>> = BTreeMap::new();
        for step in 0..200 {
            let target = agent.position + DVec3::new(rng.random_range(-0.4..0.4), 0.0, rng.random_range(-0.4..0.4));
            agent = agent.sync_to_camera(&nav, CameraPose::new(target, 0.0));
            let (evs, now) = check_poi_triggers(&agent, &pois, &inside, step as f64);
            inside = now;
            for e in evs {
                log.entry(e.poi).or_default().push(e.kind);
            }
        }
        for kinds in log.values() {
            events += kinds.len();
            let alternates = kinds.iter().enumerate().all(|(i, k)| {
                *k == if i % 2 == 0 { PoiEventKind::Enter } else { PoiEventKind::Exit }
            });
            broken += !alternates as usize;
        }
    }
    pass_if(
        y_drift == 0.0 && broken == 0,
        format!("400 poses with +-0.5 m camera bob: agent y drift {y_drift}; 100 trajectories, {events} POI events, {broken} non-alternating logs"),
    )
}

fn persistence() -> Outcome {
    let mut problems = Vec::new();
    let mut office_bytes = Vec::new();
    for (name, mesh) in all_fixtures() {
        let nav = bake(&mesh, &AgentProfile::default(), &BakeParams::default()).unwrap();
        let bytes = navmesh_to_bytes(&nav);
        match navmesh_from_bytes(&bytes) {
            Ok(back) if back == nav => {}
            Ok(_) => problems.push(format!("{name}: round trip changed the navmesh")),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
        if name == "office" {
            office_bytes = bytes;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let header_len = office_bytes.iter().enumerate().filter(|(_, b)| **b == b'\n').nth(3).unwrap().0 + 1;
    let mut positions: Vec<usize> = (0..header_len).collect();
    positions.extend((0..500).map(|_| rng.random_range(0..office_bytes.len())));
    let mut missed = 0;
    for &i in &positions {
        let mut corrupt = office_bytes.clone();
        corrupt[i] ^= 1 << rng.random_range(0..8);
        if !matches!(navmesh_from_bytes(&corrupt), Err(StoreError::DigestMismatch)) {
            missed += 1;
        }
    }
    if missed > 0 {
        problems.push(format!("{missed} single-byte corruptions not reported as DigestMismatch"));
    }
    pass_if(
        problems.is_empty(),
        if problems.is_empty() {
            format!("9 fixtures round-trip equal; {} single-bit corruptions all DigestMismatch", positions.len())
        } else {
            problems.join("; ")
        },
    )
}

fn snap(nav: &NavMesh, p: DVec3) -> DVec3 {
    if locate_polygon(nav, p).is_some() {
        p
    } else {
        closest_point(nav, p).unwrap().1
    }
}

async fn service_causality(office: &NavMesh) -> Result<String, String> {
    use futures::StreamExt;
    use tokio_tungstenite::tungstenite::Message;

    let pois = vec![
        Poi::new("east-room", "East room", snap(office, DVec3::new(52.0, 0.0, 31.0)), 1.0),
        Poi::new("west-room", "West room", snap(office, DVec3::new(8.0, 0.0, 5.0)), 1.0),
    ];
    let spawn = snap(office, DVec3::new(3.0, 0.0, 18.0));
    let session = Session::new(office.clone(), pois, SessionConfig { spawn: Some(spawn), ..Default::default() })
        .map_err(|e| e.to_string())?;
    let running = service::start_with(session, "127.0.0.1:0".parse().unwrap()).await.map_err(|e| e.to_string())?;
    let base = format!("http://{}", running.addr);
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{}/events", running.addr)).await.map_err(|e| e.to_string())?;
    let http = reqwest::Client::new();

    let post = |path: &str, body: serde_json::Value| {
        let req = http.post(format!("{base}{path}")).json(&body);
        async move {
            let resp = req.send().await.map_err(|e| e.to_string())?;
            resp.json::<serde_json::Value>().await.map_err(|e| e.to_string())
        }
    };
    let mut sent: Vec<Event> = Vec::new();
    let mut record = |reply: &serde_json::Value| {
        let events: Vec<Event> = serde_json::from_value(reply["events"].clone()).unwrap_or_default();
        sent.extend(events);
    };

    let mut current: Option<PathView> = None;
    let mut position = spawn;
    let mut poses = 0;
    let mut obstacles = 0;
    let mut destinations = 0;
    let walk_target = |current: &Option<PathView>, position: DVec3| -> DVec3 {
        let Some(path) = current else { return position };
        let next = path.corners.iter().copied().find(|c| geom::xz(*c).distance(geom::xz(position)) > 0.3).unwrap_or(position);
        let d = next - position;
        if d.length() <= 0.8 { next } else { position + d.normalize() * 0.8 }
    };
    let track = |events: &[Event], current: &mut Option<PathView>| {
        for e in events {
            match &e.body {
                EventBody::PathUpdated { path, .. } => *current = Some(path.clone()),
                EventBody::PathFailed { .. } | EventBody::PathCleared => *current = None,
                _ => {}
            }
        }
    };

    for step in 0..55 {
        let reply = match step {
            0 => {
                destinations += 1;
                post("/destination", serde_json::to_value(DestinationRequest::poi("east-room")).unwrap()).await?
            }
            30 => {
                destinations += 1;
                post("/destination", serde_json::to_value(DestinationRequest::poi("west-room")).unwrap()).await?
            }
            10 | 20 | 40 => {
                obstacles += 1;
                // drop the obstacle a few polygons ahead on the active corridor
                let at = current
                    .as_ref()
                    .and_then(|p| p.corridor.get(p.corridor.len().min(6) - 1).map(|id| office.polygons[*id as usize].center))
                    .unwrap_or(DVec3::new(30.0, 0.0, 18.0));
                let shape = ObstacleShape::Box { min: at - DVec3::new(0.2, 0.0, 0.2), max: at + DVec3::new(0.2, 1.2, 0.2) };
                post("/obstacles", serde_json::to_value(ObstacleRequest { id: None, shape }).unwrap()).await?
            }
            _ => {
                poses += 1;
                position = walk_target(&current, position);
                let pose = PoseRequest { position: position + DVec3::Y * 1.5, yaw: 0.0, timestamp: Some(step as f64 * 0.5) };
                post("/pose", serde_json::to_value(pose).unwrap()).await?
            }
        };
        let events: Vec<Event> = serde_json::from_value(reply["events"].clone()).unwrap_or_default();
        track(&events, &mut current);
        record(&reply);
    }
    let server_path: Option<PathView> = http
        .get(format!("{base}/path"))
        .send()
        .await
        .map_err(|e| e.to_string())?
        .json()
        .await
        .map_err(|e| e.to_string())?;

    let last_seq = sent.last().map_or(0, |e| e.seq);
    let mut received: Vec<Event> = Vec::new();
    let mut hello_seq = None;
    let deadline = tokio::time::Instant::now() + std::time::Duration::from_secs(10);
    while received.last().is_none_or(|e| e.seq < last_seq) {
        let msg = tokio::time::timeout_at(deadline, ws.next()).await.map_err(|_| "timed out waiting for events")?;
        let Some(Ok(Message::Text(text))) = msg else { return Err("event stream closed".into()) };
        let event: Event = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if event.body == EventBody::Hello {
            hello_seq = Some(event.seq);
        } else {
            received.push(event);
        }
    }
    running.stop().await.map_err(|e| e.to_string())?;

    if hello_seq != Some(0) {
        return Err(format!("hello seq {hello_seq:?}, expected 0"));
    }
    if received != sent {
        return Err(format!("stream delivered {} events, replies carried {}; sequences differ", received.len(), sent.len()));
    }
    let contiguous = received.iter().enumerate().all(|(i, e)| e.seq == i as u64 + 1);
    let monotone = received.windows(2).all(|w| w[0].generation <= w[1].generation);
    let generations: Vec<u64> = received
        .iter()
        .filter(|e| matches!(e.body, EventBody::WorldGenerationChanged { .. }))
        .map(|e| e.generation)
        .collect();
    if !contiguous || !monotone || generations != [1, 2, 3] {
        return Err(format!("contiguous {contiguous}, generation order {monotone}, world generations {generations:?}"));
    }
    let paths_stamped = received.iter().all(|e| match &e.body {
        EventBody::PathUpdated { path, .. } => path.generation == e.generation,
        _ => true,
    });
    let mut replayed: Option<PathView> = None;
    track(&received, &mut replayed);
    let replay_corridor = replayed.as_ref().map(|p| p.corridor.clone());
    let server_corridor = server_path.as_ref().map(|p| p.corridor.clone());
    if !paths_stamped || replay_corridor != server_corridor {
        return Err(format!("replayed corridor {replay_corridor:?} differs from server {server_corridor:?}"));
    }
    let path_events = received.iter().filter(|e| matches!(e.body, EventBody::PathUpdated { .. })).count();
    Ok(format!(
        "{poses} poses, {obstacles} obstacles, {destinations} destinations: {} events in seq and generation order, \
         {path_events} path updates; replayed corridor matches server ({} polygons)",
        received.len(),
        server_corridor.map_or(0, |c| c.len())
    ))
}

fn timed(name: &'static str, f: impl FnOnce() -> Outcome) -> (&'static str, Outcome, f64) {
    let t = Instant::now();
    let outcome = f();
    (name, outcome, t.elapsed().as_secs_f64())
}

fn main() {
    let office = office();
    let mut results = vec![timed("optimality-oracle", || optimality_oracle(&office))];
    let t = Instant::now();
    let bench = benchmark(&office);
    let secs = t.elapsed().as_secs_f64();
    results.push(("search-ratio-trend", bench.table, secs));
    results.push(("memory-proxy", bench.memory, secs));
    results.push(timed("tracking-error-magnitudes", tracking_magnitudes));
    results.push(timed("error-report-arithmetic", error_arithmetic));
    results.push(timed("funnel-properties", || funnel_properties(&office)));
    results.push(timed("bake-monotonicity", bake_monotonicity));
    results.push(timed("carve-round-trip", || carve_round_trip(&office)));
    results.push(timed("agent-contracts", agent_contracts));
    results.push(timed("persistence", persistence));
    results.push(timed("service-causality", || {
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
        match runtime.block_on(service_causality(&office)) {
            Ok(detail) => Outcome { verdict: Verdict::Pass, detail },
            Err(detail) => Outcome { verdict: Verdict::Fail, detail },
        }
    }));

    let mut failed = 0;
    for (name, outcome, secs) in &results {
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Warn => "PASS (warning)",
            Verdict::Fail => "FAIL",
        };
        failed += (outcome.verdict == Verdict::Fail) as usize;
        println!("{tag} {name} [{secs:.2}s]: {}", outcome.detail);
    }
    println!("{} criteria, {} failed", results.len(), failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
