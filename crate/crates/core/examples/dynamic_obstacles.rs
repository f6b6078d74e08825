//! Close a stretch of the office corridor, replan through the rooms, then
//! reopen it.

use glam::DVec3;
use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::dynworld::{Obstacle, SharedWorld, WorldState};
use indoor_nav::fixtures;
use indoor_nav::pathfind::{path_length, Algorithm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nav = bake(&fixtures::office_floor(), &AgentProfile::default(), &BakeParams::default())?;
    let world = SharedWorld::new(WorldState::new(nav));
    let (start, goal) = (DVec3::new(13.5, 0.0, 18.5), DVec3::new(46.5, 0.0, 18.5));

    let before = world.plan(start, goal, Algorithm::Astar)?;
    println!("gen {}: {:.2} m through {} polygons", before.generation, path_length(&before.result.corners), before.result.corridor.len());

    let barrier = Obstacle::new_box(1, DVec3::new(29.0, 0.0, 15.5), DVec3::new(31.0, 1.2, 20.5));
    let generation = world.add_obstacle(barrier)?;
    let snapshot = world.snapshot();
    println!("gen {generation}: {} polygons blocked, old corridor blocked: {}", snapshot.blocked().len(), snapshot.corridor_blocked(&before.result.corridor));
    let detour = world.plan(start, goal, Algorithm::Astar)?;
    println!("detour through the rooms: {:.2} m through {} polygons", path_length(&detour.result.corners), detour.result.corridor.len());

    // an obstacle under the goal leaves nowhere to go
    world.add_obstacle(Obstacle::new_cylinder(2, goal, 0.3, 1.0))?;
    if let Err(e) = world.plan(start, goal, Algorithm::Astar) {
        println!("gen {}: {e}", world.snapshot().generation());
    }

    world.remove_obstacle(2)?;
    world.remove_obstacle(1)?;
    let after = world.plan(start, goal, Algorithm::Astar)?;
    println!("gen {}: reopened, same corridor as before: {}", after.generation, after.result.corridor == before.result.corridor);
    Ok(())
}
