//! `eval-knn` and `eval-multilat`.

use std::path::PathBuf;

use clap::Args;
use roomloc_core::dataset::DenseDataset;
use roomloc_core::geometry::FloorPlan;
use roomloc_core::knn::{self, Metric, DEFAULT_K};
use roomloc_core::multilat;

use super::{record_path_loss, resolve_path_loss};
use crate::config::ConfigMap;
use crate::errors::CliResult;
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct EvalKnnArgs {
    /// Training-set CSV.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test-set CSV.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Neighbor count.
    #[arg(long)]
    k: Option<usize>,
    /// Metrics report CSV (`key,value`).
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Optional confusion counts CSV (`actual,predicted,count`).
    #[arg(long)]
    confusion_out: Option<PathBuf>,
    /// Optional model export prefix (writes `<prefix>.json` + `<prefix>.csv`).
    #[arg(long)]
    model_out: Option<PathBuf>,
}

pub fn eval_knn(args: EvalKnnArgs, cfg: &ConfigMap) -> CliResult<()> {
    let train_path: PathBuf = cfg.resolve_required(args.train, "train")?;
    let test_path: PathBuf = cfg.resolve_required(args.test, "test")?;
    let report_out: PathBuf = cfg.resolve_required(args.report_out, "report-out")?;
    let k = cfg.resolve(args.k, "k", DEFAULT_K)?;
    let confusion_out = cfg.lookup::<PathBuf>(args.confusion_out, "confusion-out")?;
    let model_out = cfg.lookup::<PathBuf>(args.model_out, "model-out")?;

    let mut manifest = ManifestBuilder::new("eval-knn");
    manifest.input("train", &train_path)?;
    manifest.input("test", &test_path)?;
    manifest.param("k", k);
    manifest.param("metric", "euclidean");

    let train = DenseDataset::load(&train_path)?;
    let test = DenseDataset::load(&test_path)?;
    let model = knn::fit(&train, k, Metric::Euclidean)?;
    let accuracy = model.accuracy(&test)?;

    let mut report = String::from("key,value\n");
    report.push_str(&format!("accuracy,{}\n", accuracy.fraction()));
    report.push_str(&format!("correct,{}\n", accuracy.correct));
    report.push_str(&format!("total,{}\n", accuracy.total));
    report.push_str(&format!("k,{k}\n"));
    report.push_str("metric,euclidean\n");
    manifest.write_output(&report_out, &report)?;

    if let Some(path) = confusion_out {
        let mut csv = String::from("actual,predicted,count\n");
        for ((actual, predicted), count) in &accuracy.confusion {
            csv.push_str(&format!("{actual},{predicted},{count}\n"));
        }
        manifest.write_output(&path, &csv)?;
    }
    if let Some(prefix) = model_out {
        let header = prefix.with_extension("json");
        let matrix = prefix.with_extension("csv");
        model.save(&header, &matrix)?;
    }
    manifest.finish()?;
    println!(
        "knn k={k}: accuracy {:.4} ({}/{})",
        accuracy.fraction(),
        accuracy.correct,
        accuracy.total
    );
    Ok(())
}

#[derive(Args)]
pub struct EvalMultilatArgs {
    /// Test-set CSV.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Floor-plan file.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    rssi_at_1m: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    /// Case-1 threshold, dBm.
    #[arg(long, allow_negative_numbers = true)]
    proximity: Option<f64>,
    /// Raster cell size, meters.
    #[arg(long)]
    resolution: Option<f64>,
    /// Metrics report CSV (`key,value`).
    #[arg(long)]
    report_out: Option<PathBuf>,
}

pub fn eval_multilat(args: EvalMultilatArgs, cfg: &ConfigMap) -> CliResult<()> {
    let test_path: PathBuf = cfg.resolve_required(args.test, "test")?;
    let plan_path: PathBuf = cfg.resolve_required(args.plan, "plan")?;
    let report_out: PathBuf = cfg.resolve_required(args.report_out, "report-out")?;
    let params = resolve_path_loss(cfg, args.rssi_at_1m, args.exponent, args.proximity)?;
    let resolution = cfg.resolve(args.resolution, "resolution", 0.1)?;

    let mut manifest = ManifestBuilder::new("eval-multilat");
    manifest.input("test", &test_path)?;
    manifest.input("plan", &plan_path)?;
    record_path_loss(&mut manifest, &params);
    manifest.param("resolution", resolution);

    let test = DenseDataset::load(&test_path)?;
    let plan = FloorPlan::load(&plan_path)?;
    let result = multilat::accuracy(&test, &plan, &params, resolution)?;

    let mut report = String::from("key,value\n");
    report.push_str(&format!("accuracy,{}\n", result.fraction()));
    report.push_str(&format!("correct,{}\n", result.correct));
    report.push_str(&format!("total,{}\n", result.total));
    report.push_str(&format!("empty_scans,{}\n", result.empty_scans));
    for (case, count) in &result.case_counts {
        report.push_str(&format!("case_{},{count}\n", case.name()));
    }
    manifest.write_output(&report_out, &report)?;
    manifest.finish()?;
    println!(
        "multilat: accuracy {:.4} ({}/{})",
        result.fraction(),
        result.correct,
        result.total
    );
    Ok(())
}
