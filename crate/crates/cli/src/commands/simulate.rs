//! `simulate-survey` and `simulate-walk`.

use std::path::PathBuf;

use clap::Args;
use roomloc_core::geometry::FloorPlan;
use roomloc_core::sim::{
    build_inventory, collect_survey, emit_scan_events, events_to_jsonl,
    generate_walk_with_pause, AssetPlacement, RadioModel, DEFAULT_PAUSE_RANGE_S,
};

use super::{record_path_loss, resolve_path_loss};
use crate::config::ConfigMap;
use crate::errors::CliResult;
use crate::manifest::ManifestBuilder;

#[allow(clippy::too_many_arguments)]
fn resolve_radio(
    cfg: &ConfigMap,
    sigma: Option<f64>,
    floor: Option<i16>,
    rssi_at_1m: Option<f64>,
    exponent: Option<f64>,
    wall_attenuation: Option<f64>,
    seed: u64,
) -> CliResult<RadioModel> {
    let defaults = RadioModel::default();
    Ok(RadioModel {
        path_loss: resolve_path_loss(cfg, rssi_at_1m, exponent, None)?,
        shadowing_sigma: cfg.resolve(sigma, "sigma", defaults.shadowing_sigma)?,
        sensitivity_floor: cfg.resolve(floor, "floor", defaults.sensitivity_floor)?,
        wall_attenuation_db: cfg.resolve(
            wall_attenuation,
            "wall-attenuation",
            defaults.wall_attenuation_db,
        )?,
        seed,
    })
}

#[derive(Args)]
pub struct SimulateSurveyArgs {
    /// Floor-plan file.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Fingerprint samples collected per room.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shadowing standard deviation, dB.
    #[arg(long)]
    sigma: Option<f64>,
    /// Sensitivity floor, dBm.
    #[arg(long, allow_negative_numbers = true)]
    floor: Option<i16>,
    #[arg(long, allow_negative_numbers = true)]
    rssi_at_1m: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    /// Extra loss per crossed wall, dB (0 = distance-only model).
    #[arg(long)]
    wall_attenuation: Option<f64>,
    /// Output dataset CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn simulate_survey(args: SimulateSurveyArgs, cfg: &ConfigMap) -> CliResult<()> {
    let plan_path: PathBuf = cfg.resolve_required(args.plan, "plan")?;
    let out: PathBuf = cfg.resolve_required(args.out, "out")?;
    let samples = cfg.resolve(args.samples, "samples", 1000)?;
    let seed = cfg.resolve(args.seed, "seed", 0)?;
    let model = resolve_radio(
        cfg,
        args.sigma,
        args.floor,
        args.rssi_at_1m,
        args.exponent,
        args.wall_attenuation,
        seed,
    )?;

    let mut manifest = ManifestBuilder::new("simulate-survey");
    manifest.input("plan", &plan_path)?;
    manifest.param("samples", samples);
    manifest.param("sigma", model.shadowing_sigma);
    manifest.param("floor", model.sensitivity_floor);
    manifest.param("wall-attenuation", model.wall_attenuation_db);
    record_path_loss(&mut manifest, &model.path_loss);
    manifest.seed(seed);

    let plan = FloorPlan::load(&plan_path)?;
    let survey = collect_survey(&plan, samples, &model)?;
    manifest.write_output(&out, &survey.to_csv())?;
    manifest.finish()?;
    println!(
        "survey: {} rows x {} beacons -> {}",
        survey.rows.len(),
        survey.beacon_columns.len(),
        out.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct SimulateWalkArgs {
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Walk duration, seconds.
    #[arg(long)]
    duration: Option<u64>,
    /// Gateway speed, meters per second.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Gateway client id.
    #[arg(long)]
    gateway: Option<String>,
    /// Scan publish interval, seconds.
    #[arg(long)]
    interval: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    floor: Option<i16>,
    #[arg(long, allow_negative_numbers = true)]
    rssi_at_1m: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    /// Extra loss per crossed wall, dB (0 = distance-only model).
    #[arg(long)]
    wall_attenuation: Option<f64>,
    /// Shortest dwell at a waypoint, seconds.
    #[arg(long)]
    pause_min: Option<u64>,
    /// Longest dwell at a waypoint, seconds (0 disables pauses).
    #[arg(long)]
    pause_max: Option<u64>,
    /// Optional asset placements CSV (`label,x,y`).
    #[arg(long)]
    assets: Option<PathBuf>,
    /// Output scan-event stream (JSON lines).
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Optional ground-truth trajectory CSV.
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
    /// Optional inventory CSV for the simulated deployment.
    #[arg(long)]
    inventory_out: Option<PathBuf>,
}

pub fn simulate_walk(args: SimulateWalkArgs, cfg: &ConfigMap) -> CliResult<()> {
    let plan_path: PathBuf = cfg.resolve_required(args.plan, "plan")?;
    let events_out: PathBuf = cfg.resolve_required(args.events_out, "events-out")?;
    let duration = cfg.resolve(args.duration, "duration", 600)?;
    let step = cfg.resolve(args.step, "step", 1.2)?;
    let seed = cfg.resolve(args.seed, "seed", 0)?;
    let gateway = cfg.resolve(args.gateway, "gateway", "gw-1".to_string())?;
    let interval = cfg.resolve(args.interval, "interval", 60)?;
    let assets_path = cfg.lookup::<PathBuf>(args.assets, "assets")?;
    let trajectory_out = cfg.lookup::<PathBuf>(args.trajectory_out, "trajectory-out")?;
    let inventory_out = cfg.lookup::<PathBuf>(args.inventory_out, "inventory-out")?;
    let model = resolve_radio(
        cfg,
        args.sigma,
        args.floor,
        args.rssi_at_1m,
        args.exponent,
        args.wall_attenuation,
        seed,
    )?;
    let pause = (
        cfg.resolve(args.pause_min, "pause-min", DEFAULT_PAUSE_RANGE_S.0)?,
        cfg.resolve(args.pause_max, "pause-max", DEFAULT_PAUSE_RANGE_S.1)?,
    );

    let mut manifest = ManifestBuilder::new("simulate-walk");
    manifest.input("plan", &plan_path)?;
    manifest.param("duration", duration);
    manifest.param("step", step);
    manifest.param("gateway", &gateway);
    manifest.param("interval", interval);
    manifest.param("sigma", model.shadowing_sigma);
    manifest.param("floor", model.sensitivity_floor);
    manifest.param("wall-attenuation", model.wall_attenuation_db);
    manifest.param("pause-min", pause.0);
    manifest.param("pause-max", pause.1);
    record_path_loss(&mut manifest, &model.path_loss);
    manifest.seed(seed);

    let plan = FloorPlan::load(&plan_path)?;
    let assets = match &assets_path {
        Some(path) => {
            manifest.input("assets", path)?;
            AssetPlacement::from_csv(&std::fs::read_to_string(path)?, &plan)?
        }
        None => AssetPlacement::new(),
    };
    let walk = generate_walk_with_pause(&plan, duration, step, pause, seed, &gateway)?;
    let events = emit_scan_events(&walk, &plan, &assets, &model, interval)?;
    manifest.write_output(&events_out, &events_to_jsonl(&events))?;
    if let Some(path) = trajectory_out {
        manifest.write_output(&path, &walk.to_csv())?;
    }
    if let Some(path) = inventory_out {
        manifest.write_output(&path, &build_inventory(&plan, &assets).to_csv())?;
    }
    manifest.finish()?;
    println!(
        "walk: {} s, {} events -> {}",
        duration,
        events.len(),
        events_out.display()
    );
    Ok(())
}
