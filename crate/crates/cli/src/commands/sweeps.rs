//! `sweep-subsets`, `beacon-frequency` and `sweep-training`.

use std::path::PathBuf;

use clap::Args;
use roomloc_core::dataset::DenseDataset;
use roomloc_core::evalkit::{
    beacon_frequency, group_stats, subset_results_from_csv, subset_results_to_csv, sweep_subsets,
    training_size_sweep, CvConfig, Method, SweepLimits,
};
use roomloc_core::geometry::FloorPlan;
use roomloc_core::knn::DEFAULT_K;
use roomloc_core::multilat::PathLossParams;

use super::{parse_usize_list, record_path_loss, resolve_path_loss};
use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};
use crate::manifest::ManifestBuilder;

/// Method flags shared by the sweep commands.
#[derive(Args)]
pub struct MethodArgs {
    /// Localizer under evaluation: `knn` or `multilat`.
    #[arg(long)]
    method: Option<String>,
    /// Neighbor count (knn).
    #[arg(long)]
    k: Option<usize>,
    /// Floor-plan file (multilat).
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    rssi_at_1m: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    proximity: Option<f64>,
    /// Raster cell size for multilat evaluation, meters.
    #[arg(long)]
    resolution: Option<f64>,
}

pub(crate) enum ResolvedMethod {
    Knn { k: usize },
    Multilat {
        plan: FloorPlan,
        plan_path: PathBuf,
        params: PathLossParams,
        resolution: f64,
    },
}

impl ResolvedMethod {
    pub(crate) fn as_method(&self) -> Method<'_> {
        match self {
            ResolvedMethod::Knn { k } => Method::Knn { k: *k },
            ResolvedMethod::Multilat {
                plan,
                params,
                resolution,
                ..
            } => Method::Multilat {
                plan,
                params: *params,
                resolution: *resolution,
            },
        }
    }

    fn record(&self, manifest: &mut ManifestBuilder) -> CliResult<()> {
        match self {
            ResolvedMethod::Knn { k } => {
                manifest.param("method", "knn");
                manifest.param("k", k);
            }
            ResolvedMethod::Multilat {
                plan_path,
                params,
                resolution,
                ..
            } => {
                manifest.param("method", "multilat");
                manifest.input("plan", plan_path)?;
                record_path_loss(manifest, params);
                manifest.param("resolution", resolution);
            }
        }
        Ok(())
    }
}

fn resolve_method(args: MethodArgs, cfg: &ConfigMap) -> CliResult<ResolvedMethod> {
    let method = cfg.resolve(args.method, "method", "knn".to_string())?;
    match method.as_str() {
        "knn" => Ok(ResolvedMethod::Knn {
            k: cfg.resolve(args.k, "k", DEFAULT_K)?,
        }),
        "multilat" => {
            let plan_path: PathBuf = cfg.resolve_required(args.plan, "plan")?;
            Ok(ResolvedMethod::Multilat {
                plan: FloorPlan::load(&plan_path)?,
                plan_path,
                params: resolve_path_loss(cfg, args.rssi_at_1m, args.exponent, args.proximity)?,
                resolution: cfg.resolve(args.resolution, "resolution", 0.2)?,
            })
        }
        other => Err(CliError::Usage(format!(
            "--method must be knn or multilat, got `{other}`"
        ))),
    }
}

/// Cross-validation flags shared by the sweep commands.
#[derive(Args)]
pub struct CvArgs {
    /// Holdout repeats (folds = 1) or reshuffles (folds >= 2).
    #[arg(long)]
    repeats: Option<usize>,
    /// 1 for repeated holdout, k for k-fold.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn resolve_cv(args: CvArgs, cfg: &ConfigMap, manifest: &mut ManifestBuilder) -> CliResult<CvConfig> {
    let cv = CvConfig {
        folds: cfg.resolve(args.folds, "folds", 1)?,
        repeats: cfg.resolve(args.repeats, "repeats", 5)?,
        test_fraction: cfg.resolve(args.test_fraction, "test-fraction", 0.2)?,
        seed: cfg.resolve(args.seed, "seed", 0)?,
    };
    manifest.param("folds", cv.folds);
    manifest.param("repeats", cv.repeats);
    manifest.param("test-fraction", cv.test_fraction);
    manifest.seed(cv.seed);
    Ok(cv)
}

#[derive(Args)]
pub struct SweepSubsetsArgs {
    /// Dense dataset CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    cv: CvArgs,
    /// Subsets sampled per size; ignored with --exhaustive.
    #[arg(long)]
    per_size: Option<usize>,
    /// Largest subset size to evaluate.
    #[arg(long)]
    max_size: Option<usize>,
    /// Enumerate every subset of every size.
    #[arg(long)]
    exhaustive: bool,
    /// Per-subset results CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional per-size five-number summary CSV.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

pub fn sweep_subsets_cmd(args: SweepSubsetsArgs, cfg: &ConfigMap) -> CliResult<()> {
    let data_path: PathBuf = cfg.resolve_required(args.data, "data")?;
    let out: PathBuf = cfg.resolve_required(args.out, "out")?;
    let stats_out = cfg.lookup::<PathBuf>(args.stats_out, "stats-out")?;
    let exhaustive = args.exhaustive || cfg.flag_present("exhaustive");

    let mut manifest = ManifestBuilder::new("sweep-subsets");
    manifest.input("data", &data_path)?;
    let method = resolve_method(args.method, cfg)?;
    method.record(&mut manifest)?;
    let cv = resolve_cv(args.cv, cfg, &mut manifest)?;
    let limits = SweepLimits {
        per_size: if exhaustive {
            None
        } else {
            Some(cfg.resolve(args.per_size, "per-size", 200)?)
        },
        max_size: cfg.lookup(args.max_size, "max-size")?,
    };
    manifest.param("exhaustive", exhaustive);
    if let Some(per_size) = limits.per_size {
        manifest.param("per-size", per_size);
    }
    if let Some(max_size) = limits.max_size {
        manifest.param("max-size", max_size);
    }

    let dense = DenseDataset::load(&data_path)?;
    let output = sweep_subsets(&dense, &method.as_method(), &cv, &limits)?;
    manifest.write_output(&out, &subset_results_to_csv(&output))?;
    if let Some(path) = stats_out {
        let mut csv = String::from("size,count,min,q1,median,q3,max,mean\n");
        for s in group_stats(&output.results) {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.size, s.count, s.min, s.q1, s.median, s.q3, s.max, s.mean
            ));
        }
        manifest.write_output(&path, &csv)?;
    }
    manifest.finish()?;
    println!(
        "swept {} subsets{} -> {}",
        output.results.len(),
        if output.sampled { " (sampled)" } else { "" },
        out.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct BeaconFrequencyArgs {
    /// Subset-sweep results CSV.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Floor-plan file, for beacon coordinates in the output.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Frequency CSV (`beacon,count,x,y`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional winners CSV (`size,subset,mean_accuracy`).
    #[arg(long)]
    winners_out: Option<PathBuf>,
}

pub fn beacon_frequency_cmd(args: BeaconFrequencyArgs, cfg: &ConfigMap) -> CliResult<()> {
    let results_path: PathBuf = cfg.resolve_required(args.results, "results")?;
    let plan_path: PathBuf = cfg.resolve_required(args.plan, "plan")?;
    let out: PathBuf = cfg.resolve_required(args.out, "out")?;
    let winners_out = cfg.lookup::<PathBuf>(args.winners_out, "winners-out")?;

    let mut manifest = ManifestBuilder::new("beacon-frequency");
    manifest.input("results", &results_path)?;
    manifest.input("plan", &plan_path)?;

    let results = subset_results_from_csv(&std::fs::read_to_string(&results_path)?)?;
    let plan = FloorPlan::load(&plan_path)?;
    let report = beacon_frequency(&results.results);

    let mut csv = String::from("beacon,count,x,y\n");
    for label in plan.beacon_labels() {
        let count = report.counts.get(&label).copied().unwrap_or(0);
        let position = plan.beacon_position(&label).expect("label from plan");
        csv.push_str(&format!("{label},{count},{},{}\n", position.x, position.y));
    }
    manifest.write_output(&out, &csv)?;

    if let Some(path) = winners_out {
        let mut csv = String::from("size,subset,mean_accuracy\n");
        for (size, subset, accuracy) in &report.winners {
            csv.push_str(&format!("{size},{},{accuracy}\n", subset.join("+")));
        }
        manifest.write_output(&path, &csv)?;
    }
    manifest.finish()?;
    println!("beacon frequencies -> {}", out.display());
    Ok(())
}

#[derive(Args)]
pub struct SweepTrainingArgs {
    /// Dense dataset CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated samples-per-room grid (e.g. `20,60,120,200`).
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated beacon counts (e.g. `3,16`).
    #[arg(long)]
    beacon_counts: Option<String>,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    cv: CvArgs,
    /// Heatmap CSV (`beacon_count,samples_per_room,mean_accuracy`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional first-difference CSV along the size axis.
    #[arg(long)]
    deltas_out: Option<PathBuf>,
}

pub fn sweep_training_cmd(args: SweepTrainingArgs, cfg: &ConfigMap) -> CliResult<()> {
    let data_path: PathBuf = cfg.resolve_required(args.data, "data")?;
    let out: PathBuf = cfg.resolve_required(args.out, "out")?;
    let sizes_text = cfg.resolve(args.sizes, "sizes", "20,60,120,200".to_string())?;
    let counts_text = cfg.resolve(args.beacon_counts, "beacon-counts", "3,16".to_string())?;
    let deltas_out = cfg.lookup::<PathBuf>(args.deltas_out, "deltas-out")?;
    let sizes = parse_usize_list(&sizes_text, "sizes")?;
    let beacon_counts = parse_usize_list(&counts_text, "beacon-counts")?;

    let mut manifest = ManifestBuilder::new("sweep-training");
    manifest.input("data", &data_path)?;
    manifest.param("sizes", &sizes_text);
    manifest.param("beacon-counts", &counts_text);
    let method = resolve_method(args.method, cfg)?;
    method.record(&mut manifest)?;
    let cv = resolve_cv(args.cv, cfg, &mut manifest)?;

    let dense = DenseDataset::load(&data_path)?;
    let (cells, deltas) =
        training_size_sweep(&dense, &sizes, &beacon_counts, &method.as_method(), &cv)?;

    let mut csv = String::from("beacon_count,samples_per_room,mean_accuracy\n");
    for cell in &cells {
        csv.push_str(&format!(
            "{},{},{}\n",
            cell.beacon_count, cell.samples_per_room, cell.mean_accuracy
        ));
    }
    manifest.write_output(&out, &csv)?;
    if let Some(path) = deltas_out {
        let mut csv = String::from("beacon_count,from_size,to_size,accuracy_delta\n");
        for d in &deltas {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                d.beacon_count, d.from_size, d.to_size, d.accuracy_delta
            ));
        }
        manifest.write_output(&path, &csv)?;
    }
    manifest.finish()?;
    println!("training-size heatmap ({} cells) -> {}", cells.len(), out.display());
    Ok(())
}
