//! `replay-stream` and `query`.

use std::path::PathBuf;

use clap::Args;
use roomloc_core::dataset::DenseDataset;
use roomloc_core::geometry::FloorPlan;
use roomloc_core::knn::{self, Metric, DEFAULT_K};
use roomloc_core::stream::{
    query_location, replay, AssetStatus, Inventory, Localizer, DEFAULT_ASSIGN_THRESHOLD_DBM,
    DEFAULT_WINDOW_S,
};

use super::{record_path_loss, resolve_path_loss};
use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct ReplayStreamArgs {
    /// Scan-event stream (JSON lines).
    #[arg(long)]
    events: Option<PathBuf>,
    /// Inventory CSV (`mac_address,type,label,room`).
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// Floor-plan file (room list; geometry for multilat).
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Gateway localizer: `knn` or `multilat`.
    #[arg(long)]
    localizer: Option<String>,
    /// Dense training CSV (knn localizer).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Neighbor count (knn localizer).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    rssi_at_1m: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    proximity: Option<f64>,
    /// Raster cell size for multilat, meters.
    #[arg(long)]
    resolution: Option<f64>,
    /// Tumbling window, seconds.
    #[arg(long)]
    window: Option<u64>,
    /// Median RSSI needed to assign an asset to the gateway's room, dBm.
    #[arg(long, allow_negative_numbers = true)]
    assign_threshold: Option<f64>,
    /// Final asset-location store CSV.
    #[arg(long)]
    store_out: Option<PathBuf>,
    /// Optional per-window gateway fixes CSV.
    #[arg(long)]
    fixes_out: Option<PathBuf>,
    /// Optional pipeline counters CSV.
    #[arg(long)]
    counters_out: Option<PathBuf>,
}

pub fn replay_stream(args: ReplayStreamArgs, cfg: &ConfigMap) -> CliResult<()> {
    let events_path: PathBuf = cfg.resolve_required(args.events, "events")?;
    let inventory_path: PathBuf = cfg.resolve_required(args.inventory, "inventory")?;
    let plan_path: PathBuf = cfg.resolve_required(args.plan, "plan")?;
    let store_out: PathBuf = cfg.resolve_required(args.store_out, "store-out")?;
    let localizer_name = cfg.resolve(args.localizer, "localizer", "knn".to_string())?;
    let window = cfg.resolve(args.window, "window", DEFAULT_WINDOW_S)?;
    let assign_threshold = cfg.resolve(
        args.assign_threshold,
        "assign-threshold",
        DEFAULT_ASSIGN_THRESHOLD_DBM,
    )?;
    let fixes_out = cfg.lookup::<PathBuf>(args.fixes_out, "fixes-out")?;
    let counters_out = cfg.lookup::<PathBuf>(args.counters_out, "counters-out")?;

    let mut manifest = ManifestBuilder::new("replay-stream");
    manifest.input("events", &events_path)?;
    manifest.input("inventory", &inventory_path)?;
    manifest.input("plan", &plan_path)?;
    manifest.param("localizer", &localizer_name);
    manifest.param("window", window);
    manifest.param("assign-threshold", assign_threshold);

    let plan = FloorPlan::load(&plan_path)?;
    let inventory = Inventory::from_csv(
        &std::fs::read_to_string(&inventory_path)?,
        plan.room_labels().into_iter().collect(),
    )?;
    let event_lines = std::fs::read_to_string(&events_path)?;

    // The localizer borrows the model/plan, so both arms run the replay.
    let outcome = match localizer_name.as_str() {
        "knn" => {
            let train_path: PathBuf = cfg.resolve_required(args.train, "train")?;
            let k = cfg.resolve(args.k, "k", DEFAULT_K)?;
            manifest.input("train", &train_path)?;
            manifest.param("k", k);
            let train = DenseDataset::load(&train_path)?;
            let model = knn::fit(&train, k, Metric::Euclidean)?;
            replay(
                &event_lines,
                &inventory,
                &Localizer::Knn(&model),
                window,
                assign_threshold,
            )?
        }
        "multilat" => {
            let params = resolve_path_loss(cfg, args.rssi_at_1m, args.exponent, args.proximity)?;
            let resolution = cfg.resolve(args.resolution, "resolution", 0.1)?;
            record_path_loss(&mut manifest, &params);
            manifest.param("resolution", resolution);
            replay(
                &event_lines,
                &inventory,
                &Localizer::Multilat {
                    plan: &plan,
                    params,
                    resolution,
                },
                window,
                assign_threshold,
            )?
        }
        other => {
            return Err(CliError::Usage(format!(
                "--localizer must be knn or multilat, got `{other}`"
            )))
        }
    };

    manifest.write_output(&store_out, &outcome.store.to_csv())?;
    if let Some(path) = fixes_out {
        let mut csv = String::from("client_id,window_end,room\n");
        for fix in &outcome.fixes {
            csv.push_str(&format!("{},{},{}\n", fix.client_id, fix.window_end, fix.room));
        }
        manifest.write_output(&path, &csv)?;
    }
    let c = outcome.counters;
    if let Some(path) = counters_out {
        let csv = format!(
            "key,value\nparsed,{}\nmalformed,{}\nenriched,{}\nfiltered,{}\nlate_dropped,{}\nwindows,{}\nno_fix_windows,{}\n",
            c.parsed, c.malformed, c.enriched, c.filtered, c.late_dropped, c.windows, c.no_fix_windows
        );
        manifest.write_output(&path, &csv)?;
    }
    manifest.finish()?;
    println!(
        "replay: {} records ({} enriched, {} filtered, {} malformed), {} windows, {} assets located",
        c.parsed,
        c.enriched,
        c.filtered,
        c.malformed,
        c.windows,
        outcome.store.len()
    );
    Ok(())
}

#[derive(Args)]
pub struct QueryArgs {
    /// Asset-location store CSV.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Inventory CSV.
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// Floor-plan file (room list).
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Asset label to look up.
    #[arg(long)]
    asset: Option<String>,
    /// Query time, epoch ms (explicit for reproducibility).
    #[arg(long, allow_negative_numbers = true)]
    now: Option<i64>,
    /// Optional text output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn query(args: QueryArgs, cfg: &ConfigMap) -> CliResult<()> {
    let store_path: PathBuf = cfg.resolve_required(args.store, "store")?;
    let inventory_path: PathBuf = cfg.resolve_required(args.inventory, "inventory")?;
    let plan_path: PathBuf = cfg.resolve_required(args.plan, "plan")?;
    let asset: String = cfg.resolve_required(args.asset, "asset")?;
    let now: i64 = cfg.resolve_required(args.now, "now")?;
    let out = cfg.lookup::<PathBuf>(args.out, "out")?;

    let mut manifest = ManifestBuilder::new("query");
    manifest.input("store", &store_path)?;
    manifest.input("inventory", &inventory_path)?;
    manifest.input("plan", &plan_path)?;
    manifest.param("asset", &asset);
    manifest.param("now", now);

    let plan = FloorPlan::load(&plan_path)?;
    let inventory = Inventory::from_csv(
        &std::fs::read_to_string(&inventory_path)?,
        plan.room_labels().into_iter().collect(),
    )?;
    let store = roomloc_core::stream::LocationStore::from_csv(&std::fs::read_to_string(
        &store_path,
    )?)?;

    let line = match query_location(&store, &inventory, &asset, now)? {
        AssetStatus::Located {
            location,
            staleness_s,
        } => format!(
            "asset {}: room {} (staleness {:.1} s, last seen {}, observed by {}, rssi {})\n",
            location.asset,
            location.room,
            staleness_s,
            location.last_seen,
            location.observed_by,
            location.rssi_at_observation
        ),
        AssetStatus::NeverSeen => format!("asset {asset}: never seen\n"),
    };
    print!("{line}");
    if let Some(path) = out {
        manifest.write_output(&path, &line)?;
    }
    manifest.finish()?;
    Ok(())
}
