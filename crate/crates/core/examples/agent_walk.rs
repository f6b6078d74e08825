//! An agent follows a path past two POIs, firing enter/exit triggers.

use glam::DVec3;
use indoor_nav::agent::{check_poi_triggers, poi_sign_info, AgentState, Poi};
use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::fixtures;
use indoor_nav::navgraph::build_graph;
use indoor_nav::pathfind::astar;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nav = bake(&fixtures::l_floor(), &AgentProfile::default(), &BakeParams::default())?;
    let graph = build_graph(&nav);
    let pois = vec![
        Poi::new("printer", "Printer", DVec3::new(6.0, 0.0, 3.0), 1.0),
        Poi::new("kitchen", "Kitchen", DVec3::new(2.0, 0.0, 8.0), 1.5),
    ];
    let start = DVec3::new(9.0, 0.0, 2.0);
    let goal = DVec3::new(2.0, 0.0, 9.0);

    let mut agent = AgentState::spawn(&nav, nav.agent, start).set_path(astar(&graph, &nav, start, goal)?);
    let mut inside = Vec::new();
    let dt = 0.1;
    let mut t = 0.0;
    while agent.path.is_some() && t < 60.0 {
        agent = agent.step(&nav, dt);
        t += dt;
        let (events, now) = check_poi_triggers(&agent, &pois, &inside, t);
        inside = now;
        for e in events {
            let sign = poi_sign_info(&pois, &e.poi)?;
            println!("{t:5.1}s {:?} {} ({})", e.kind, sign.title, e.poi);
        }
    }
    println!("{t:5.1}s arrived at {:.2} {:.2} {:.2}", agent.position.x, agent.position.y, agent.position.z);
    Ok(())
}
