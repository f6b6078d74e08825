//! Simulated tracking error along benchmark paths.

use indoor_nav::bake::{bake, AgentProfile, BakeParams};
use indoor_nav::bench::{default_trials, run_tracking_trials, trials_csv};
use indoor_nav::dynworld::WorldState;
use indoor_nav::fixtures;
use indoor_nav::localize::{error_report, feedback_message, sample_series, update_state, NoiseModel, TrackingState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let world = WorldState::new(bake(&fixtures::office_floor(), &AgentProfile::default(), &BakeParams::default())?);
    let records = run_tracking_trials(&world, &default_trials(), 1000)?;
    print!("{}", trials_csv(&records));

    // a noisier model with dropouts, and what the user would be told
    let model = NoiseModel::new(0.12, 0.0, 0.05, 5)?;
    let samples = sample_series(glam::DVec3::new(10.0, 0.0, 18.0), &model, 200);
    let report = error_report(&samples)?;
    println!("noisy: mean {:.3} rms {:.3} max {:.3}, {} dropouts", report.mean_error, report.rms_error, report.max_error, report.dropouts);
    let mut state = TrackingState::Tracked;
    let mut tally = std::collections::BTreeMap::new();
    let mut shown = 0;
    for (i, s) in samples.iter().enumerate() {
        let next = update_state(state, s.quality);
        if next != state && shown < 4 {
            println!("  sample {i:>3}: {} -> {} {}", state.as_str(), next.as_str(), feedback_message(next));
            shown += 1;
        }
        state = next;
        *tally.entry(state.as_str()).or_insert(0) += 1;
    }
    println!("  samples per state: {tally:?}");
    Ok(())
}
