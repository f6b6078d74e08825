//! Command-line front end. Every subcommand is a thin adapter over library
//! calls; `--format kv` switches output to `key=value` lines.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glam::DVec3;
use thiserror::Error;

use crate::bake::{bake, AgentProfile, BakeError, BakeParams, NavMesh};
use crate::bench::{self, BenchConfig, BenchError, TrialConfig, TrialsFile};
use crate::dynworld::WorldState;
use crate::ingest::{load_mesh, validate_mesh, IngestError};
use crate::localize::NoiseModel;
use crate::navgraph::build_graph;
use crate::pathfind::{find_path, path_length, Algorithm, PathError, SearchOptions};
use crate::service::{self, Script, ServeConfig, Session, SessionConfig, ServiceError};
use crate::store::{self, StoreError};
use crate::fixtures;

#[derive(Debug, Parser)]
#[command(name = "indoor-nav", version, about = "Indoor navigation engine")]
pub struct Cli {
    /// Output style.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Kv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bake a navmesh archive from an OBJ scan.
    Bake(BakeArgs),
    /// Find a path between two points.
    Path(PathArgs),
    /// Compare A* and Dijkstra, or run tracking trials.
    Bench(BenchArgs),
    /// Run tracking-error trials or replay a session script.
    Simulate(SimulateArgs),
    /// Serve a navigation session over HTTP and WebSocket.
    Serve(ServeArgs),
    /// Check an OBJ scan or a navmesh archive.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct BakeArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// e.g. radius=0.3,height=1.7,slope=45,step=0.4,speed=1.4
    #[arg(long, value_parser = parse_agent, default_value = "radius=0.3,height=1.7,slope=45,step=0.4")]
    pub agent: AgentProfile,
    /// Horizontal cell size in meters.
    #[arg(long, default_value_t = BakeParams::default().cell_size)]
    pub cell: f64,
    #[arg(long, default_value_t = BakeParams::default().cell_height)]
    pub cell_height: f64,
    #[arg(long, default_value_t = BakeParams::default().region_min_cells)]
    pub region_min_cells: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Corners,
    Corridor,
    Stats,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub navmesh: PathBuf,
    /// x,y,z
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub from: DVec3,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub to: DVec3,
    #[arg(long, default_value = "astar", value_parser = parse_algorithm)]
    pub algo: Algorithm,
    #[arg(long, value_enum, default_value_t = Emit::Stats)]
    pub emit: Emit,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct BenchArgs {
    #[command(subcommand)]
    pub trials: Option<BenchCommand>,
    /// Navmesh archive; the built-in office floor when absent.
    #[arg(long)]
    pub navmesh: Option<PathBuf>,
    #[arg(long, value_parser = parse_bins, value_delimiter = ',', default_value = "10,25,50")]
    pub bins: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub queries: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Timed runs per search; the median is kept.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Write per-bin rows here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one row per query here.
    #[arg(long)]
    pub raw_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Tracking trials from a TOML trial list.
    Trials(TrialsArgs),
}

#[derive(Debug, Args)]
pub struct TrialsArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub navmesh: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Session script to replay instead of running trials.
    #[arg(long, conflicts_with_all = ["trials", "samples", "sigma", "out"])]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub navmesh: Option<PathBuf>,
    /// POI file for script replay.
    #[arg(long, requires = "script")]
    pub pois: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Per-axis noise sigma in meters; when absent each trial uses its own
    /// calibrated default.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub navmesh: PathBuf,
    #[arg(long)]
    pub pois: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    /// Pass camera poses through the tracking noise model.
    #[arg(long)]
    pub simulate_tracking: bool,
    #[arg(long, default_value_t = NoiseModel::default().sigma_xy)]
    pub sigma: f64,
    #[arg(long, default_value_t = NoiseModel::default().seed)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ValidateArgs {
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub navmesh: Option<PathBuf>,
}

fn parse_vec3(s: &str) -> Result<DVec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => Ok(DVec3::new(x, y, z)),
        _ => Err("expected three finite numbers x,y,z".into()),
    }
}

fn parse_bins(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive length")),
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_agent(s: &str) -> Result<AgentProfile, String> {
    let mut agent = AgentProfile::default();
    for item in s.split(',').filter(|i| !i.trim().is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| format!("`{item}` is not key=value"))?;
        let value: f64 = value.trim().parse().map_err(|e| format!("`{item}`: {e}"))?;
        match key.trim() {
            "radius" => agent.radius = value,
            "height" => agent.height = value,
            "slope" => agent.max_slope_deg = value,
            "step" => agent.max_step_height = value,
            "speed" => agent.max_speed = value,
            other => return Err(format!("unknown agent key `{other}`")),
        }
    }
    agent.validate().map_err(|e| e.to_string())?;
    Ok(agent)
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Bake(#[from] BakeError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            Self::Ingest(IngestError::FileNotFound(_)) => "FileNotFound",
            Self::Ingest(IngestError::Io { .. }) => "IoError",
            Self::Ingest(IngestError::ParseError { .. }) => "ParseError",
            Self::Ingest(IngestError::EmptyMesh) => "EmptyMesh",
            Self::Bake(_) => "BakeError",
            Self::Path(PathError::OffMesh(_)) => "OffMesh",
            Self::Path(PathError::NoPath) => "NoPath",
            Self::Path(PathError::InvalidCorridor(..)) => "InvalidCorridor",
            Self::Store(StoreError::IoError(_)) => "IoError",
            Self::Store(StoreError::SchemaVersionMismatch { .. }) => "SchemaVersionMismatch",
            Self::Store(StoreError::DigestMismatch) => "DigestMismatch",
            Self::Store(StoreError::ValidationFailure(_)) => "ValidationFailure",
            Self::Bench(BenchError::BinUnsatisfiable { .. }) => "BinUnsatisfiable",
            Self::Bench(_) => "BenchError",
            Self::Service(e) => e.kind(),
            Self::Io(_) => "IoError",
            Self::Usage(_) => "UsageError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        if matches!(self, Self::Usage(_)) { 2 } else { 1 }
    }
}

struct Report {
    format: Format,
    lines: Vec<(String, String)>,
}

impl Report {
    fn new(format: Format) -> Self {
        Self { format, lines: Vec::new() }
    }

    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for (k, v) in &self.lines {
            match self.format {
                Format::Kv => writeln!(out, "{k}={v}")?,
                Format::Text => writeln!(out, "{k}: {v}")?,
            }
        }
        Ok(())
    }
}

fn vec3(p: DVec3) -> String {
    format!("{},{},{}", p.x, p.y, p.z)
}

fn load_or_office(path: &Option<PathBuf>) -> Result<NavMesh, CliError> {
    Ok(match path {
        Some(p) => store::load_navmesh(p)?,
        None => bake(&fixtures::office_floor(), &AgentProfile::default(), &BakeParams::default())?,
    })
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out`. Usage errors carry clap's message.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::error::ErrorKind;
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(out, "{}", e.render())?;
            Ok(())
        }
        Err(e) => Err(CliError::Usage(e.render().to_string())),
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut r = Report::new(cli.format);
    match cli.command {
        Command::Bake(a) => {
            let mesh = load_mesh(&a.mesh)?;
            let params = BakeParams { cell_size: a.cell, cell_height: a.cell_height, region_min_cells: a.region_min_cells };
            params.validate()?;
            let nav = bake(&mesh, &a.agent, &params)?;
            store::save_navmesh(&nav, &a.out)?;
            r.put("polygons", nav.polygons.len());
            r.put("portals", nav.portal_count() / 2);
            r.put("components", nav.component_count());
            r.put("area_m2", format!("{:.3}", nav.total_area()));
            r.put("source_hash", &nav.source_hash);
            r.put("out", a.out.display());
        }
        Command::Path(a) => {
            let nav = store::load_navmesh(&a.navmesh)?;
            let graph = build_graph(&nav);
            let options = SearchOptions { algorithm: a.algo, ..Default::default() };
            let path = find_path(&graph, &nav, a.from, a.to, options)?;
            match a.emit {
                Emit::Stats => {
                    r.put("cost_m", format!("{:.6}", path.cost));
                    r.put("length_m", format!("{:.6}", path_length(&path.corners)));
                    r.put("nodes_expanded", path.nodes_expanded);
                    r.put("peak_set_size", path.peak_set_size);
                    r.put("elapsed_us", path.elapsed.as_micros());
                }
                Emit::Corners => {
                    for c in &path.corners {
                        r.put("corner", vec3(*c));
                    }
                }
                Emit::Corridor => {
                    for p in &path.corridor {
                        r.put("polygon", p);
                    }
                }
            }
        }
        Command::Bench(a) => match a.trials {
            Some(BenchCommand::Trials(t)) => {
                let file = TrialsFile::parse(&std::fs::read_to_string(&t.config)?)?;
                let world = WorldState::new(load_or_office(&t.navmesh)?);
                let records = bench::run_tracking_trials(&world, &file.configs()?, file.samples)?;
                trial_report(&mut r, &records);
                if let Some(path) = &t.out {
                    bench::export_trials_csv(&records, path)?;
                }
            }
            None => {
                let world = WorldState::new(load_or_office(&a.navmesh)?);
                let config = BenchConfig { queries_per_bin: a.queries, seed: a.seed, timing_repeats: a.repeats };
                let result = bench::run_path_bench(&world, &a.bins, config)?;
                let summary = bench::compare_summary(&result.per_bin);
                r.put("polygons", world.navmesh().polygons.len());
                r.put("queries", result.queries.len());
                r.put("heuristic_scale", result.heuristic_scale);
                for (bin, (row, ratio)) in a.bins.iter().zip(result.per_bin.iter().zip(&summary.per_bin)) {
                    let key = |k: &str| format!("bin.{bin}.{k}");
                    r.put(key("path_length_m"), format!("{:.3}", row.path_length_m));
                    r.put(key("nodes_astar"), format!("{:.2}", row.nodes_expanded_astar));
                    r.put(key("nodes_dijkstra"), format!("{:.2}", row.nodes_expanded_dijkstra));
                    r.put(key("time_astar_ms"), format!("{:.3}", row.time_astar_us / 1000.0));
                    r.put(key("time_dijkstra_ms"), format!("{:.3}", row.time_dijkstra_us / 1000.0));
                    r.put(key("nodes_ratio"), format!("{:.3}", ratio.nodes_ratio));
                    r.put(key("time_ratio"), format!("{:.3}", ratio.time_ratio));
                    r.put(key("peak_ratio"), format!("{:.3}", ratio.peak_ratio));
                }
                r.put("geomean_nodes_ratio", format!("{:.3}", summary.geomean_nodes_ratio));
                r.put("geomean_time_ratio", format!("{:.3}", summary.geomean_time_ratio));
                r.put("geomean_peak_ratio", format!("{:.3}", summary.geomean_peak_ratio));
                if let Some(path) = &a.out {
                    bench::export_csv(&result.per_bin, path)?;
                }
                if let Some(path) = &a.raw_out {
                    bench::export_csv(&result.raw_records(), path)?;
                }
            }
        },
        Command::Simulate(a) => match &a.script {
            Some(script_path) => {
                let script = Script::parse(&std::fs::read_to_string(script_path)?)?;
                let pois = match &a.pois {
                    Some(p) => store::load_pois(p)?,
                    None => Vec::new(),
                };
                let mut session = Session::new(load_or_office(&a.navmesh)?, pois, SessionConfig::default())?;
                let log = service::run_script(&mut session, &script)?;
                for e in &log {
                    r.put("event", serde_json::to_string(e).expect("events serialize"));
                }
                r.put("events", log.len());
                if let Some(p) = session.path() {
                    r.put("final_corridor", p.corridor.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(","));
                }
            }
            None => {
                let trials = simulate_trials(&a)?;
                let world = WorldState::new(load_or_office(&a.navmesh)?);
                let records = bench::run_tracking_trials(&world, &trials, a.samples)?;
                trial_report(&mut r, &records);
                if let Some(path) = &a.out {
                    bench::export_trials_csv(&records, path)?;
                }
            }
        },
        Command::Serve(a) => {
            let noise = NoiseModel::new(a.sigma, 0.0, 0.0, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            let config = ServeConfig {
                navmesh: a.navmesh,
                pois: a.pois,
                bind: a.bind,
                session: SessionConfig { simulate_tracking: a.simulate_tracking, noise, ..Default::default() },
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(config))?;
        }
        Command::Validate(a) => {
            if let Some(path) = &a.mesh {
                let mesh = load_mesh(path)?;
                let report = validate_mesh(&mesh);
                for line in report.to_kv().lines() {
                    let (k, v) = line.split_once('=').expect("kv line");
                    r.put(k, v);
                }
                r.put("clean", report.is_clean());
            }
            if let Some(path) = &a.navmesh {
                let archive = store::load_archive(path)?;
                r.put("schema_version", archive.schema_version);
                r.put("polygons", archive.polygons.len());
                r.put("source_hash", &archive.source_hash);
                r.put("valid", true);
            }
        }
    }
    r.write(out)?;
    Ok(())
}

fn simulate_trials(a: &SimulateArgs) -> Result<Vec<TrialConfig>, CliError> {
    let defaults = bench::default_trials();
    (0..a.trials)
        .map(|i| {
            let base = defaults[i % defaults.len()];
            let sigma = a.sigma.unwrap_or(base.model.sigma_xy);
            let model = NoiseModel::new(sigma, 0.0, 0.0, a.seed.wrapping_add(i as u64))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(TrialConfig { model, path_length_m: base.path_length_m })
        })
        .collect()
}

fn trial_report(r: &mut Report, records: &[bench::TrialRecord]) {
    for t in records {
        let key = |k: &str| format!("trial.{}.{k}", t.trial);
        r.put(key("mean_error_m"), format!("{:.4}", t.mean_error_m));
        r.put(key("rms_error_m"), format!("{:.4}", t.rms_error_m));
        r.put(key("max_error_m"), format!("{:.4}", t.max_error_m));
        r.put(key("time_ms"), format!("{:.3}", t.time_us / 1000.0));
        r.put(key("nodes_expanded"), t.nodes_expanded);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String, CliError> {
        let mut out = Vec::new();
        run_from(std::iter::once("indoor-nav").chain(args.iter().copied()), &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn agent_flag() {
        let a = parse_agent("radius=0.5,height=2,slope=30,step=0.2").unwrap();
        assert_eq!((a.radius, a.height, a.max_slope_deg, a.max_step_height), (0.5, 2.0, 30.0, 0.2));
        assert!(parse_agent("radius=0").is_err());
        assert!(parse_agent("wings=2").is_err());
    }

    #[test]
    fn vec3_flag() {
        assert_eq!(parse_vec3("1,-2.5,3").unwrap(), DVec3::new(1.0, -2.5, 3.0));
        assert!(parse_vec3("1,2").is_err());
        assert!(parse_vec3("1,2,nan").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let err = run_args(&["fly"]).unwrap_err();
        assert_eq!((err.exit_code(), err.category()), (2, "UsageError"));
        let err = run_args(&["path", "--navmesh", "x", "--from", "1,2", "--to", "1,2,3"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(run_args(&["--help"]).unwrap().contains("bake"));
    }

    #[test]
    fn missing_file_is_domain_error() {
        let err = run_args(&["validate", "--navmesh", "/nonexistent/file.nav"]).unwrap_err();
        assert_eq!((err.exit_code(), err.category()), (1, "IoError"));
    }
}
