//! Paired A*/Dijkstra benchmark on the office, binned by path length.
//!
//! cargo run --release --example bench_table

use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::bench::{compare_summary, path_csv, run_path_bench, BenchConfig, DEFAULT_BINS};
use indoor_nav::dynworld::WorldState;
use indoor_nav::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nav = bake(&fixtures::office_floor(), &AgentProfile::default(), &BakeParams::default())?;
    let world = WorldState::new(nav);
    let result = run_path_bench(&world, &DEFAULT_BINS, BenchConfig::default())?;
    print!("{}", path_csv(&result.per_bin));

    let summary = compare_summary(&result.per_bin);
    for b in &summary.per_bin {
        println!(
            "{:>4.0} m: Dijkstra expands {:.2}x the nodes, takes {:.2}x the time, peaks at {:.2}x the set size",
            b.path_length_m, b.nodes_ratio, b.time_ratio, b.peak_ratio
        );
    }
    println!("heuristic scale {}", result.heuristic_scale);
    Ok(())
}
