//! Benchmark harness: A* against Dijkstra on paired queries binned by path
//! length, and tracking-error trials paired with one path query each.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bake::NavPolygon;
use crate::dynworld::WorldState;
use crate::localize::{error_report, simulate_estimate, NoiseModel};
use crate::pathfind::{path_length, Algorithm, PathResult, HEURISTIC_SCALE};

/// Accepted relative deviation of a query's path length from its bin target.
pub const BIN_TOLERANCE: f64 = 0.15;
pub const DEFAULT_BINS: [f64; 3] = [10.0, 25.0, 50.0];
/// Sampling attempts allowed per requested query before a bin is declared
/// unsatisfiable.
const ATTEMPTS_PER_QUERY: usize = 4000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no bins requested")]
    NoBins,
    #[error("found only {found} of {wanted} queries near {bin} m")]
    BinUnsatisfiable { bin: f64, found: usize, wanted: usize },
    #[error("invalid trial configuration: {0}")]
    InvalidTrial(String),
    #[error("i/o error: {0}")]
    IoError(#[from] std::io::Error),
}

/// One paired query, or the per-bin mean of several.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathBenchRecord {
    pub path_length_m: f64,
    pub nodes_expanded_astar: f64,
    pub time_astar_us: f64,
    pub peak_set_astar: f64,
    pub nodes_expanded_dijkstra: f64,
    pub time_dijkstra_us: f64,
    pub peak_set_dijkstra: f64,
}

impl PathBenchRecord {
    fn mean(records: &[PathBenchRecord]) -> Self {
        let n = records.len() as f64;
        let avg = |f: fn(&PathBenchRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
        Self {
            path_length_m: avg(|r| r.path_length_m),
            nodes_expanded_astar: avg(|r| r.nodes_expanded_astar),
            time_astar_us: avg(|r| r.time_astar_us),
            peak_set_astar: avg(|r| r.peak_set_astar),
            nodes_expanded_dijkstra: avg(|r| r.nodes_expanded_dijkstra),
            time_dijkstra_us: avg(|r| r.time_dijkstra_us),
            peak_set_dijkstra: avg(|r| r.peak_set_dijkstra),
        }
    }
}

/// A sampled query and both search results.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedQuery {
    pub bin: f64,
    pub start: DVec3,
    pub goal: DVec3,
    pub generation: u64,
    pub astar: PathResult,
    pub dijkstra: PathResult,
}

impl PairedQuery {
    pub fn record(&self) -> PathBenchRecord {
        PathBenchRecord {
            path_length_m: path_length(&self.astar.corners),
            nodes_expanded_astar: self.astar.nodes_expanded as f64,
            time_astar_us: micros(self.astar.elapsed),
            peak_set_astar: self.astar.peak_set_size as f64,
            nodes_expanded_dijkstra: self.dijkstra.nodes_expanded as f64,
            time_dijkstra_us: micros(self.dijkstra.elapsed),
            peak_set_dijkstra: self.dijkstra.peak_set_size as f64,
        }
    }
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub queries_per_bin: usize,
    pub seed: u64,
    /// Each search is timed this many times; the median is kept.
    pub timing_repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { queries_per_bin: 50, seed: 7, timing_repeats: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBench {
    pub queries: Vec<PairedQuery>,
    /// One mean row per bin, in bin order.
    pub per_bin: Vec<PathBenchRecord>,
    /// A* heuristic multiplier in effect at the end of the run.
    pub heuristic_scale: f64,
}

impl PathBench {
    pub fn raw_records(&self) -> Vec<PathBenchRecord> {
        self.queries.iter().map(PairedQuery::record).collect()
    }
}

/// Uniform random point inside a convex polygon, on its surface.
pub fn random_point_in(poly: &NavPolygon, rng: &mut impl Rng) -> DVec3 {
    let v = &poly.vertices;
    let areas: Vec<f64> = (1..v.len() - 1)
        .map(|i| crate::geom::cross(crate::geom::xz(v[0]), crate::geom::xz(v[i]), crate::geom::xz(v[i + 1])).abs())
        .collect();
    let total: f64 = areas.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut tri = areas.len() - 1;
    for (i, a) in areas.iter().enumerate() {
        if pick < *a {
            tri = i;
            break;
        }
        pick -= a;
    }
    let (mut r1, mut r2): (f64, f64) = (rng.random(), rng.random());
    if r1 + r2 > 1.0 {
        r1 = 1.0 - r1;
        r2 = 1.0 - r2;
    }
    v[0] + (v[tri + 1] - v[0]) * r1 + (v[tri + 2] - v[0]) * r2
}

fn median_elapsed(world: &WorldState, start: DVec3, goal: DVec3, algorithm: Algorithm, scale: f64, repeats: usize) -> PathResult {
    let mut runs: Vec<PathResult> = (0..repeats.max(1))
        .map(|_| world.plan_scaled(start, goal, algorithm, scale).expect("query already solved once").result)
        .collect();
    runs.sort_by_key(|r| r.elapsed);
    runs.swap_remove(runs.len() / 2)
}

/// Runs both searches on one query, lowering the A* heuristic scale until
/// the costs agree.
fn paired(
    world: &WorldState,
    bin: f64,
    start: DVec3,
    goal: DVec3,
    scale: &mut f64,
    repeats: usize,
) -> PairedQuery {
    let dijkstra = median_elapsed(world, start, goal, Algorithm::Dijkstra, 0.0, repeats);
    let mut astar = median_elapsed(world, start, goal, Algorithm::Astar, *scale, repeats);
    while (astar.cost - dijkstra.cost).abs() > 1e-9 && *scale > 0.0 {
        *scale = if *scale < 1e-3 { 0.0 } else { *scale * 0.9 };
        astar = median_elapsed(world, start, goal, Algorithm::Astar, *scale, repeats);
    }
    PairedQuery { bin, start, goal, generation: world.generation(), astar, dijkstra }
}

/// Samples random start/goal pairs whose funnel path length lies within
/// [`BIN_TOLERANCE`] of each bin target and times both searches on each.
pub fn run_path_bench(world: &WorldState, bins: &[f64], config: BenchConfig) -> Result<PathBench, BenchError> {
    if bins.is_empty() {
        return Err(BenchError::NoBins);
    }
    let polys = &world.navmesh().polygons;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scale = HEURISTIC_SCALE;
    let mut queries = Vec::new();
    let mut per_bin = Vec::new();
    for &bin in bins {
        let mut found = Vec::new();
        let mut attempts = 0;
        while found.len() < config.queries_per_bin && attempts < ATTEMPTS_PER_QUERY * config.queries_per_bin {
            attempts += 1;
            let Some((start, goal)) = sample_pair(world, polys, bin, &mut rng) else { continue };
            found.push(paired(world, bin, start, goal, &mut scale, config.timing_repeats));
        }
        if found.len() < config.queries_per_bin {
            return Err(BenchError::BinUnsatisfiable { bin, found: found.len(), wanted: config.queries_per_bin });
        }
        let records: Vec<PathBenchRecord> = found.iter().map(PairedQuery::record).collect();
        if !records.is_empty() {
            per_bin.push(PathBenchRecord::mean(&records));
        }
        queries.extend(found);
    }
    Ok(PathBench { queries, per_bin, heuristic_scale: scale })
}

fn sample_pair(world: &WorldState, polys: &[NavPolygon], bin: f64, rng: &mut ChaCha8Rng) -> Option<(DVec3, DVec3)> {
    if polys.is_empty() {
        return None;
    }
    let a = &polys[rng.random_range(0..polys.len())];
    let b = &polys[rng.random_range(0..polys.len())];
    let start = random_point_in(a, rng);
    let goal = random_point_in(b, rng);
    // the funnel path is never shorter than the straight line
    if start.distance(goal) > bin * (1.0 + BIN_TOLERANCE) {
        return None;
    }
    let plan = world.plan(start, goal, Algorithm::Astar).ok()?;
    let len = path_length(&plan.result.corners);
    ((len - bin).abs() <= bin * BIN_TOLERANCE).then_some((start, goal))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinRatios {
    pub path_length_m: f64,
    pub time_ratio: f64,
    pub nodes_ratio: f64,
    pub peak_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub per_bin: Vec<BinRatios>,
    pub geomean_time_ratio: f64,
    pub geomean_nodes_ratio: f64,
    pub geomean_peak_ratio: f64,
}

fn ratio(dijkstra: f64, astar: f64) -> f64 {
    if dijkstra == astar { 1.0 } else { dijkstra / astar }
}

fn geomean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v.ln(), n + 1));
    if n == 0 { f64::NAN } else { (sum / n as f64).exp() }
}

/// Dijkstra-over-A* ratios for each row (one row per bin) and their
/// geometric means.
pub fn compare_summary(records: &[PathBenchRecord]) -> BenchSummary {
    let per_bin: Vec<BinRatios> = records
        .iter()
        .map(|r| BinRatios {
            path_length_m: r.path_length_m,
            time_ratio: ratio(r.time_dijkstra_us, r.time_astar_us),
            nodes_ratio: ratio(r.nodes_expanded_dijkstra, r.nodes_expanded_astar),
            peak_ratio: ratio(r.peak_set_dijkstra, r.peak_set_astar),
        })
        .collect();
    BenchSummary {
        geomean_time_ratio: geomean(per_bin.iter().map(|b| b.time_ratio)),
        geomean_nodes_ratio: geomean(per_bin.iter().map(|b| b.nodes_ratio)),
        geomean_peak_ratio: geomean(per_bin.iter().map(|b| b.peak_ratio)),
        per_bin,
    }
}

pub const PATH_CSV_HEADER: &str = "path_length_m,nodes_expanded_astar,time_astar_ms,peak_set_astar,nodes_expanded_dijkstra,time_dijkstra_ms,peak_set_dijkstra";

pub fn path_csv(records: &[PathBenchRecord]) -> String {
    let mut out = String::from(PATH_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{:.3},{:.2},{:.3},{:.2},{:.2},{:.3},{:.2}",
            r.path_length_m,
            r.nodes_expanded_astar,
            r.time_astar_us / 1000.0,
            r.peak_set_astar,
            r.nodes_expanded_dijkstra,
            r.time_dijkstra_us / 1000.0,
            r.peak_set_dijkstra
        );
    }
    out
}

pub fn export_csv(records: &[PathBenchRecord], path: impl AsRef<Path>) -> Result<(), BenchError> {
    std::fs::write(path, path_csv(records))?;
    Ok(())
}

/// One tracking trial: a noise model plus the path length of its paired
/// search query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub model: NoiseModel,
    pub path_length_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub mean_error_m: f64,
    pub rms_error_m: f64,
    pub max_error_m: f64,
    pub time_us: f64,
    pub nodes_expanded: usize,
}

/// Five trials whose expected mean errors are 5.0, 6.0, 7.0, 5.5 and 6.5 cm,
/// paired with 10, 25, 50, 10 and 25 m queries.
pub fn default_trials() -> Vec<TrialConfig> {
    [(0.050, 10.0), (0.060, 25.0), (0.070, 50.0), (0.055, 10.0), (0.065, 25.0)]
        .iter()
        .enumerate()
        .map(|(i, &(mean, len))| TrialConfig {
            model: NoiseModel {
                sigma_xy: NoiseModel::sigma_for_mean_error(mean),
                sigma_y: 0.0,
                dropout_prob: 0.0,
                seed: 100 + i as u64,
            },
            path_length_m: len,
        })
        .collect()
}

/// Runs each trial's samples along its paired path and reports error
/// statistics with that query's A* time and expansions.
pub fn run_tracking_trials(
    world: &WorldState,
    trials: &[TrialConfig],
    samples_per_trial: u64,
) -> Result<Vec<TrialRecord>, BenchError> {
    let mut out = Vec::with_capacity(trials.len());
    for (i, trial) in trials.iter().enumerate() {
        trial.model.validate().map_err(|e| BenchError::InvalidTrial(e.to_string()))?;
        let config = BenchConfig { queries_per_bin: 1, seed: trial.model.seed, timing_repeats: 5 };
        let bench = run_path_bench(world, &[trial.path_length_m], config)?;
        let query = &bench.queries[0];
        let corners = &query.astar.corners;
        let total = path_length(corners);
        let samples: Vec<_> = (0..samples_per_trial)
            .map(|k| {
                let t = if samples_per_trial > 1 { k as f64 / (samples_per_trial - 1) as f64 } else { 0.0 };
                simulate_estimate(point_along(corners, t * total), &trial.model, k)
            })
            .collect();
        let report = error_report(&samples).map_err(|e| BenchError::InvalidTrial(e.to_string()))?;
        out.push(TrialRecord {
            trial: i + 1,
            mean_error_m: report.mean_error,
            rms_error_m: report.rms_error,
            max_error_m: report.max_error,
            time_us: micros(query.astar.elapsed),
            nodes_expanded: query.astar.nodes_expanded,
        });
    }
    Ok(out)
}

/// Point at arc length `s` along a polyline.
pub fn point_along(corners: &[DVec3], s: f64) -> DVec3 {
    let mut left = s.max(0.0);
    for w in corners.windows(2) {
        let d = w[0].distance(w[1]);
        if left <= d {
            return if d == 0.0 { w[0] } else { w[0].lerp(w[1], left / d) };
        }
        left -= d;
    }
    *corners.last().expect("non-empty polyline")
}

pub const TRIAL_CSV_HEADER: &str = "trial,mean_error_m,rms_error_m,max_error_m,time_ms,nodes_expanded";

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.3},{}",
            r.trial,
            r.mean_error_m,
            r.rms_error_m,
            r.max_error_m,
            r.time_us / 1000.0,
            r.nodes_expanded
        );
    }
    out
}

pub fn export_trials_csv(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<(), BenchError> {
    std::fs::write(path, trials_csv(records))?;
    Ok(())
}

/// Trial list as read from a TOML file:
///
/// ```toml
/// samples = 1000
///
/// [[trial]]
/// sigma_xy = 0.0479   # or: mean_error = 0.06
/// dropout = 0.0
/// seed = 1
/// path_length = 25.0
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TrialsFile {
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(rename = "trial", default)]
    pub trials: Vec<TrialEntry>,
}

fn default_samples() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TrialEntry {
    pub sigma_xy: Option<f64>,
    pub mean_error: Option<f64>,
    #[serde(default)]
    pub sigma_y: f64,
    #[serde(default)]
    pub dropout: f64,
    #[serde(default)]
    pub seed: u64,
    pub path_length: f64,
}

impl TrialsFile {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::InvalidTrial(e.to_string()))
    }

    pub fn configs(&self) -> Result<Vec<TrialConfig>, BenchError> {
        self.trials
            .iter()
            .map(|t| {
                let sigma_xy = match (t.sigma_xy, t.mean_error) {
                    (Some(s), None) => s,
                    (None, Some(m)) => NoiseModel::sigma_for_mean_error(m),
                    _ => return Err(BenchError::InvalidTrial("give exactly one of sigma_xy or mean_error".into())),
                };
                let model = NoiseModel::new(sigma_xy, t.sigma_y, t.dropout, t.seed)
                    .map_err(|e| BenchError::InvalidTrial(e.to_string()))?;
                Ok(TrialConfig { model, path_length_m: t.path_length })
            })
            .collect()
    }
}
