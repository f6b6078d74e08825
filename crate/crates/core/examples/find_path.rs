//! Plan across the office with A* and Dijkstra and compare the searches.

use glam::DVec3;
use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::fixtures;
use indoor_nav::navgraph::build_graph;
use indoor_nav::pathfind::{astar, dijkstra, path_length, portal_midpoint_path};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nav = bake(&fixtures::office_floor(), &AgentProfile::default(), &BakeParams::default())?;
    let graph = build_graph(&nav);
    let start = DVec3::new(1.5, 0.0, 17.0);
    let goal = DVec3::new(57.0, 0.0, 34.0);

    let a = astar(&graph, &nav, start, goal)?;
    let d = dijkstra(&graph, &nav, start, goal)?;
    println!("          cost_m  nodes  peak  elapsed");
    for (name, r) in [("A*", &a), ("Dijkstra", &d)] {
        println!("{name:<9} {:>6.2} {:>6} {:>5}  {:?}", r.cost, r.nodes_expanded, r.peak_set_size, r.elapsed);
    }

    let midpoints = portal_midpoint_path(&nav, &a.corridor, start, goal)?;
    println!(
        "corridor of {} polygons; funnel {:.2} m vs portal midpoints {:.2} m vs straight line {:.2} m",
        a.corridor.len(),
        path_length(&a.corners),
        path_length(&midpoints),
        start.distance(goal)
    );
    for c in &a.corners {
        println!("  corner {:.2} {:.2} {:.2}", c.x, c.y, c.z);
    }
    Ok(())
}
