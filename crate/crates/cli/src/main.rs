//! Command-line front end: every pipeline stage is a subcommand with
//! file-based inputs and outputs, a fully resolved parameter set, and a
//! reproducibility manifest written next to the primary output.

mod commands;
mod config;
mod errors;
mod manifest;

use clap::{Parser, Subcommand};

use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "roomloc",
    version,
    about = "Room-level BLE localization: simulation, localizers, stream replay, evaluation studies, cost model"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key = value` file supplying any long option; explicit flags win.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic fingerprint survey for a floor plan.
    SimulateSurvey(commands::simulate::SimulateSurveyArgs),
    /// Generate a gateway walk and its scan-event stream.
    SimulateWalk(commands::simulate::SimulateWalkArgs),
    /// Fill dataset gaps with the sentinel / room-mean strategies.
    Impute(commands::dataset_cmd::ImputeArgs),
    /// Stratified train/test split of a dense dataset.
    Split(commands::dataset_cmd::SplitArgs),
    /// Score the kNN localizer on a train/test pair.
    EvalKnn(commands::evaluate::EvalKnnArgs),
    /// Score the adapted multilateration localizer on a test set.
    EvalMultilat(commands::evaluate::EvalMultilatArgs),
    /// Accuracy across beacon subsets of every size.
    SweepSubsets(commands::sweeps::SweepSubsetsArgs),
    /// Beacon occurrence counts in the per-size winning subsets.
    BeaconFrequency(commands::sweeps::BeaconFrequencyArgs),
    /// Accuracy as a function of training size and beacon count.
    SweepTraining(commands::sweeps::SweepTrainingArgs),
    /// Replay a scan-event file through the full pipeline.
    ReplayStream(commands::replay::ReplayStreamArgs),
    /// Look up an asset's freshest known location.
    Query(commands::replay::QueryArgs),
    /// Cost-of-ownership breakdowns and comparison.
    Econ(commands::econ_cmd::EconArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    match cli.command {
        Command::SimulateSurvey(args) => commands::simulate::simulate_survey(args, &cfg),
        Command::SimulateWalk(args) => commands::simulate::simulate_walk(args, &cfg),
        Command::Impute(args) => commands::dataset_cmd::impute(args, &cfg),
        Command::Split(args) => commands::dataset_cmd::split(args, &cfg),
        Command::EvalKnn(args) => commands::evaluate::eval_knn(args, &cfg),
        Command::EvalMultilat(args) => commands::evaluate::eval_multilat(args, &cfg),
        Command::SweepSubsets(args) => commands::sweeps::sweep_subsets_cmd(args, &cfg),
        Command::BeaconFrequency(args) => commands::sweeps::beacon_frequency_cmd(args, &cfg),
        Command::SweepTraining(args) => commands::sweeps::sweep_training_cmd(args, &cfg),
        Command::ReplayStream(args) => commands::replay::replay_stream(args, &cfg),
        Command::Query(args) => commands::replay::query(args, &cfg),
        Command::Econ(args) => commands::econ_cmd::econ(args, &cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
