//! Save and reload a navmesh archive, a POI config and a world snapshot.

use glam::DVec3;
use indoor_nav::agent::Poi;
use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::dynworld::{Obstacle, WorldState};
use indoor_nav::store::{self, StoreError, WorldSnapshot};
use indoor_nav::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("indoor-nav-persistence");
    std::fs::create_dir_all(&dir)?;

    let nav = bake(&fixtures::ramp_deck(), &AgentProfile::default(), &BakeParams::default())?;
    let path = dir.join("deck.navmesh");
    store::save_navmesh(&nav, &path)?;
    let archive = store::load_archive(&path)?;
    println!("archive schema {} with {} polygons, source {}", archive.schema_version, archive.polygons.len(), archive.source_hash);
    assert_eq!(archive.into_navmesh(), nav);

    let mut bytes = std::fs::read(&path)?;
    let last = bytes.len() - 2;
    bytes[last] ^= 0x20;
    match store::navmesh_from_bytes(&bytes) {
        Err(StoreError::DigestMismatch) => println!("one flipped bit: digest mismatch"),
        other => println!("unexpected: {other:?}"),
    }

    let pois = vec![Poi::new("top", "Deck", DVec3::new(13.0, 1.46, 3.0), 1.0)];
    let poi_path = dir.join("pois.toml");
    store::save_pois(&pois, &poi_path)?;
    print!("{}", std::fs::read_to_string(&poi_path)?);
    assert_eq!(store::load_pois(&poi_path)?, pois);

    let mut world = WorldState::new(nav);
    world.add_obstacle(Obstacle::new_box(7, DVec3::new(2.0, 0.0, 2.0), DVec3::new(3.0, 1.0, 3.0)))?;
    let json = WorldSnapshot::new(&world).to_json();
    println!("{json}");
    let restored = WorldSnapshot::from_json(&json)?;
    println!("snapshot generation {}, {} obstacle(s)", restored.generation, restored.obstacles.len());
    Ok(())
}
