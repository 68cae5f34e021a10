//! `econ`: cost-of-ownership breakdowns and the head-to-head comparison.

use std::path::PathBuf;

use clap::Args;
use roomloc_core::econ::{
    accumulate, compare, cost_model, render_breakdown, render_comparison, EconTable,
};

use crate::config::ConfigMap;
use crate::errors::CliResult;
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct EconArgs {
    /// Parameter file (`key = value`); built-in defaults when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Comparison horizon in years.
    #[arg(long)]
    years: Option<u32>,
    /// Human-readable report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional machine-readable CSV (cents as integers).
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

pub fn econ(args: EconArgs, cfg: &ConfigMap) -> CliResult<()> {
    let params_path = cfg.lookup::<PathBuf>(args.params, "params")?;
    let years = cfg.resolve(args.years, "years", 5)?;
    let out = cfg.lookup::<PathBuf>(args.out, "out")?;
    let csv_out = cfg.lookup::<PathBuf>(args.csv_out, "csv-out")?;

    let mut manifest = ManifestBuilder::new("econ");
    manifest.param("years", years);
    let table = match &params_path {
        Some(path) => {
            manifest.input("params", path)?;
            EconTable::load(path)?
        }
        None => EconTable::default(),
    };

    let fingerprinting = cost_model(&table.fingerprinting_params())?;
    let multilateration = cost_model(&table.multilateration_params())?;
    let report = compare(&fingerprinting, &multilateration, years);

    let mut text = String::new();
    text.push_str(&render_breakdown(&fingerprinting));
    text.push('\n');
    text.push_str(&render_breakdown(&multilateration));
    text.push('\n');
    text.push_str(&render_comparison(&report));
    print!("{text}");

    if let Some(path) = &out {
        manifest.write_output(path, &text)?;
    }
    if let Some(path) = &csv_out {
        let mut csv = String::from("approach,section,item,units,price_per_unit_cents,total_cents\n");
        for breakdown in [&fingerprinting, &multilateration] {
            for item in &breakdown.setup_items {
                csv.push_str(&format!(
                    "{},setup,{},{},{},{}\n",
                    breakdown.approach, item.description, item.units, item.price_per_unit, item.total
                ));
            }
            for item in &breakdown.recurring_items {
                csv.push_str(&format!(
                    "{},recurring,{},{},{},{}\n",
                    breakdown.approach, item.description, item.units, item.price_per_unit, item.total
                ));
            }
            csv.push_str(&format!(
                "{},setup,total,,,{}\n",
                breakdown.approach, breakdown.setup_total
            ));
            csv.push_str(&format!(
                "{},recurring,total,,,{}\n",
                breakdown.approach, breakdown.recurring_yearly_total
            ));
        }
        for (i, cumulative) in accumulate(&fingerprinting, years).iter().enumerate() {
            csv.push_str(&format!(
                "fingerprinting,cumulative,year {},,,{cumulative}\n",
                i + 1
            ));
        }
        for (i, cumulative) in accumulate(&multilateration, years).iter().enumerate() {
            csv.push_str(&format!(
                "multilateration,cumulative,year {},,,{cumulative}\n",
                i + 1
            ));
        }
        manifest.write_output(path, &csv)?;
    }
    manifest.finish()?;
    Ok(())
}
