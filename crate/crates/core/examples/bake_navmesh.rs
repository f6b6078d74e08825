//! Bake the bundled office scan into a navmesh and save it.
//!
//! cargo run --example bake_navmesh [-- path/to/mesh.obj]

use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::ingest::{load_mesh, mesh_bounds, validate_mesh};
use indoor_nav::{fixtures, store};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = match std::env::args().nth(1) {
        Some(path) => load_mesh(path)?,
        None => fixtures::office_floor(),
    };
    let report = validate_mesh(&mesh);
    let bounds = mesh_bounds(&mesh)?;
    println!("mesh: {} triangles, bounds {} .. {}", report.triangle_count, bounds.min, bounds.max);

    let agent = AgentProfile::default();
    let params = BakeParams::default();
    let nav = bake(&mesh, &agent, &params)?;
    println!(
        "navmesh: {} polygons, {} portals, {} component(s), {:.1} m2 walkable",
        nav.polygons.len(),
        nav.portal_count() / 2,
        nav.component_count(),
        nav.total_area()
    );

    // a wider agent loses the narrow gaps
    let wide = AgentProfile { radius: 0.6, ..agent };
    let narrow = bake(&mesh, &wide, &params)?;
    println!("radius 0.6 m: {:.1} m2 walkable", narrow.total_area());

    let out = std::env::temp_dir().join("office.navmesh");
    store::save_navmesh(&nav, &out)?;
    println!("saved {}", out.display());
    Ok(())
}
