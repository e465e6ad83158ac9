use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wildtwin::bench::{run_orbit, OrbitConfig};
use wildtwin::export::{forest_table, to_json, ForestSummary};
use wildtwin::parallel::{build_emitters_par, generate_forest_par};
use wildtwin::render::{encode, render, ImageFormat, RenderKind, RenderOptions};
use wildtwin::scenario::{ingest, Scenario};
use wildtwin::service::{serve, spawn_ticker, AppState};
use wildtwin::session::{SessionConfig, SystemTime};
use wildtwin::stations_io::{bundled_stations, load_stations};
use wildtwin::synth::{flux_georef, generate_synthetic, SynthParams};
use wildtwin_core::emitter::{build_emitters, EmitterConfig};
use wildtwin_core::forest::{generate_forest, ForestConfig};
use wildtwin_core::geo::LocalPoint;
use wildtwin_core::grid::{GridKind, ScalarGrid};
use wildtwin_core::lod::{CameraPose, SchedulerConfig};
use wildtwin_core::raster::ThermalConfig;
use wildtwin_core::rng::{hash4, unit_f64};

#[derive(Parser)]
#[command(name = "wildtwin", version, about = "Headless wildfire scene engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic scenario.
    Gen(GenArgs),
    /// Validate a scenario and cache its flux extrema.
    Ingest { scenario: PathBuf },
    /// Time the scheduler over an orbiting camera; one JSON line per frame.
    Bench(BenchArgs),
    /// Render a sensor raster to a file.
    Render(RenderArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Place trees and grass; print counts and digest.
    Forest(ForestArgs),
    /// Dump the emitters of one frame as JSON.
    Emitters(EmitterArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 144)]
    width: usize,
    #[arg(long, default_value_t = 144)]
    height: usize,
    #[arg(long, default_value_t = 12)]
    frames: usize,
    /// Direction the wind blows toward, degrees clockwise from north.
    #[arg(long, default_value_t = 45.0)]
    wind_dir: f64,
    /// m/s.
    #[arg(long, default_value_t = 4.0)]
    wind_speed: f64,
    #[arg(long, default_value_t = 5)]
    fuel_factor: usize,
    /// Flux cell size, meters.
    #[arg(long, default_value_t = 100.0)]
    cell_size: f64,
}

#[derive(Args)]
struct SchedArgs {
    #[arg(long, default_value_t = 4096)]
    max_active: usize,
    #[arg(long, default_value_t = 4096)]
    pool_capacity: usize,
}

impl SchedArgs {
    fn config(&self) -> SchedulerConfig {
        SchedulerConfig {
            max_active: self.max_active,
            pool_capacity: self.pool_capacity,
            ..SchedulerConfig::default()
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Scenario to bench; without it an all-burning synthetic grid is used.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    frame: usize,
    /// Side of the synthetic all-burning grid.
    #[arg(long, default_value_t = 144)]
    grid: usize,
    #[arg(long, default_value_t = 1000)]
    frames: usize,
    #[arg(long, default_value_t = 4000.0)]
    radius: f64,
    #[arg(long, default_value_t = 800.0)]
    altitude: f64,
    #[command(flatten)]
    sched: SchedArgs,
    /// Write per-frame records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    scenario: PathBuf,
    #[arg(long)]
    kind: RenderKind,
    #[arg(long, default_value_t = 0)]
    frame: usize,
    #[arg(long)]
    out: PathBuf,
    /// Output format; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<ImageFormat>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 300.0)]
    ambient: f64,
    /// Depth camera as x,y,z,yaw,pitch,fov (local meters, degrees).
    #[arg(long, value_parser = parse_camera)]
    camera: Option<CameraPose>,
}

#[derive(Args)]
struct ServeArgs {
    /// Scenario loaded at startup.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Station fixture; the bundled example is used otherwise.
    #[arg(long)]
    stations: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Playback tick period.
    #[arg(long, default_value_t = 50)]
    tick_ms: u64,
    #[command(flatten)]
    sched: SchedArgs,
}

#[derive(Args)]
struct ForestArgs {
    scenario: PathBuf,
    /// Write the instance table (CSV) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_grass: bool,
    /// Build row-parallel (same result).
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct EmitterArgs {
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    frame: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
}

fn parse_camera(s: &str) -> Result<CameraPose, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [x, y, z, yaw, pitch, fov] = v[..] else {
        return Err("expected x,y,z,yaw,pitch,fov".into());
    };
    let pose = CameraPose::new(LocalPoint::new(x, y, z), yaw, pitch, fov);
    pose.validate().map_err(|e| e.to_string())?;
    Ok(pose)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let mut p = SynthParams::new(a.seed, (a.width, a.height), a.frames, (a.wind_dir, a.wind_speed));
    p.fuel_factor = a.fuel_factor;
    p.cell_size = a.cell_size;
    let m = generate_synthetic(&a.out, &p)?;
    println!("wrote {} ({} frames) to {}", m.name, m.frame_count, a.out.display());
    Ok(())
}

fn cmd_ingest(path: &Path) -> Result<()> {
    let (m, ex) = ingest(path)?;
    eprintln!("{}: {} frames, flux {}x{}, fuel {}x{}", m.name, m.frame_count, m.grid_flux_w, m.grid_flux_h, m.grid_fuel_w, m.grid_fuel_h);
    println!("{}", to_json(&ex));
    Ok(())
}

/// Every cell burning, flux keyed by seed.
fn dense_emitters(side: usize) -> Result<wildtwin_core::EmitterSet> {
    let p = SynthParams::new(7, (side, side), 1, (0.0, 0.0));
    let georef = flux_georef(&p)?;
    let flux = ScalarGrid::from_fn(side, side, GridKind::Flux, |x, y| {
        1.0 + 149.0 * unit_f64(hash4(7, x as u64, y as u64, 0)) as f32
    })?;
    Ok(build_emitters(&flux, &georef, &EmitterConfig::with_extrema(1.0, 150.0))?)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let set = match &a.scenario {
        Some(path) => Scenario::open(path)?.emitters(a.frame)?,
        None => dense_emitters(a.grid)?,
    };
    let orbit = OrbitConfig {
        frames: a.frames,
        radius: a.radius,
        altitude: a.altitude,
        ..OrbitConfig::default()
    };
    let (records, summary) = run_orbit(&set, a.sched.config(), &orbit)?;
    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    write_or_print(a.out.as_deref(), &lines)?;
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let scenario = Scenario::open(&a.scenario)?;
    let size = match (a.width, a.height) {
        (Some(w), Some(h)) => Some((w, h)),
        (None, None) => None,
        _ => bail!("--width and --height go together"),
    };
    let opts = RenderOptions {
        size,
        thermal: ThermalConfig {
            ambient: a.ambient,
            alpha: a.alpha,
            ..ThermalConfig::default()
        },
        camera: a.camera,
        max_distance: None,
    };
    let format = match a.format.or_else(|| ImageFormat::from_extension(&a.out)) {
        Some(f) => f,
        None if a.kind == RenderKind::Depth => ImageFormat::Pfm,
        None => ImageFormat::Png,
    };
    let bytes = encode(&render(&scenario, a.kind, a.frame, &opts)?, format)?;
    std::fs::write(&a.out, bytes).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("wrote {} {} frame {}", a.out.display(), a.kind, a.frame);
    Ok(())
}

fn cmd_forest(a: ForestArgs) -> Result<()> {
    let scenario = Scenario::open(&a.scenario)?;
    let canopy = scenario.grid(GridKind::CanopyFuel, 0)?;
    let surface = scenario.grid(GridKind::SurfaceFuel, 0)?;
    let cfg = ForestConfig {
        seed: a.seed.unwrap_or(scenario.manifest.seed),
        spawn_grass: !a.no_grass,
        ..ForestConfig::default()
    };
    let forest = if a.parallel {
        generate_forest_par(&canopy, &surface, &scenario.fuel_georef, &cfg)?
    } else {
        generate_forest(&canopy, &surface, &scenario.fuel_georef, &cfg)?
    };
    if let Some(out) = &a.out {
        write_or_print(Some(out), &forest_table(&forest))?;
    }
    println!("{}", to_json(&ForestSummary::of(&forest)));
    Ok(())
}

fn cmd_emitters(a: EmitterArgs) -> Result<()> {
    let scenario = Scenario::open(&a.scenario)?;
    let set = if a.parallel {
        let flux = scenario.flux(a.frame)?;
        build_emitters_par(&flux, &scenario.georef, &scenario.emitter_config())?
    } else {
        scenario.emitters(a.frame)?
    };
    write_or_print(a.out.as_deref(), &to_json(&set))
}

async fn cmd_serve(a: ServeArgs) -> Result<()> {
    let stations = match &a.stations {
        Some(p) => load_stations(p)?,
        None => bundled_stations(),
    };
    let config = SessionConfig {
        scheduler: a.sched.config(),
        ..SessionConfig::default()
    };
    let app = Arc::new(AppState::new(stations, Arc::new(SystemTime::new()), config));
    if let Some(path) = &a.scenario {
        let info = app.load(path)?;
        eprintln!("loaded {} ({} frames)", info.name, info.frame_count);
    }
    let listener = tokio::net::TcpListener::bind(a.addr)
        .await
        .with_context(|| format!("binding {}", a.addr))?;
    let addr = listener.local_addr()?;
    println!("listening on http://{addr}");
    std::io::stdout().flush()?;
    spawn_ticker(Arc::clone(&app), Duration::from_millis(a.tick_ms.max(1)));
    tokio::select! {
        r = serve(listener, app) => r?,
        _ = tokio::signal::ctrl_c() => {}
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Ingest { scenario } => cmd_ingest(&scenario),
        Command::Bench(a) => cmd_bench(a),
        Command::Render(a) => cmd_render(a),
        Command::Forest(a) => cmd_forest(a),
        Command::Emitters(a) => cmd_emitters(a),
        Command::Serve(a) => tokio::runtime::Runtime::new()?.block_on(cmd_serve(a)),
    }
}
