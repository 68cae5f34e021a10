//! `impute` and `split`.

use std::path::PathBuf;

use clap::Args;
use roomloc_core::dataset::{self, DenseDataset, RawDataset, SplitConfig};

use crate::config::ConfigMap;
use crate::errors::CliResult;
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct ImputeArgs {
    /// Sparse survey CSV.
    #[arg(long, value_name = "PATH")]
    r#in: Option<PathBuf>,
    /// Dense output CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional per-cell provenance sidecar CSV.
    #[arg(long)]
    provenance_out: Option<PathBuf>,
}

pub fn impute(args: ImputeArgs, cfg: &ConfigMap) -> CliResult<()> {
    let input: PathBuf = cfg.resolve_required(args.r#in, "in")?;
    let out: PathBuf = cfg.resolve_required(args.out, "out")?;
    let provenance_out = cfg.lookup::<PathBuf>(args.provenance_out, "provenance-out")?;

    let mut manifest = ManifestBuilder::new("impute");
    manifest.input("in", &input)?;

    let raw = RawDataset::load(&input)?;
    let dense = dataset::impute(&raw);
    manifest.write_output(&out, &dense.to_csv())?;
    if let Some(path) = provenance_out {
        manifest.write_output(&path, &dense.provenance_csv())?;
    }
    manifest.finish()?;
    println!(
        "imputed {} rows x {} beacons -> {}",
        dense.rows.len(),
        dense.beacon_columns.len(),
        out.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct SplitArgs {
    /// Dense dataset CSV.
    #[arg(long, value_name = "PATH")]
    r#in: Option<PathBuf>,
    /// Fraction of each room's rows held out for testing.
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_out: Option<PathBuf>,
    #[arg(long)]
    test_out: Option<PathBuf>,
}

pub fn split(args: SplitArgs, cfg: &ConfigMap) -> CliResult<()> {
    let input: PathBuf = cfg.resolve_required(args.r#in, "in")?;
    let train_out: PathBuf = cfg.resolve_required(args.train_out, "train-out")?;
    let test_out: PathBuf = cfg.resolve_required(args.test_out, "test-out")?;
    let test_fraction = cfg.resolve(args.test_fraction, "test-fraction", 0.2)?;
    let seed = cfg.resolve(args.seed, "seed", 0)?;

    let mut manifest = ManifestBuilder::new("split");
    manifest.input("in", &input)?;
    manifest.param("test-fraction", test_fraction);
    manifest.seed(seed);

    let dense = DenseDataset::load(&input)?;
    let (train, test) = dataset::split(
        &dense,
        SplitConfig {
            test_fraction,
            seed,
        },
    )?;
    manifest.write_output(&train_out, &train.to_csv())?;
    manifest.write_output(&test_out, &test.to_csv())?;
    manifest.finish()?;
    println!(
        "split {} rows into {} train / {} test",
        dense.rows.len(),
        train.rows.len(),
        test.rows.len()
    );
    Ok(())
}
