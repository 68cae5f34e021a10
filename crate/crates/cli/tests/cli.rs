//! End-to-end checks of the binary: exit codes, manifests, config
//! precedence, and byte-identical reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roomloc"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().unwrap();
    assert!(
        output.status.success(),
        "command failed: {}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let output = bin().args(["econ", "--no-such-flag"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("Usage") || stderr.contains("unexpected"), "{stderr}");
}

#[test]
fn missing_required_option_exits_with_usage_code() {
    let output = bin().args(["simulate-survey"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn invalid_plan_exits_with_validation_code() {
    let dir = tmp("bad-plan");
    let plan = dir.join("bad.plan");
    std::fs::write(
        &plan,
        "plan bad\nbounds 0 0 4 4\nroom A\nvertices 0,0 4,1 4,4 0,4\n",
    )
    .unwrap();
    let output = bin()
        .args(["simulate-survey", "--plan"])
        .arg(&plan)
        .args(["--out"])
        .arg(dir.join("out.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn econ_default_tables_are_exact() {
    let dir = tmp("econ");
    let out = dir.join("report.txt");
    let output = run_ok(bin().args(["econ", "--years", "5", "--out"]).arg(&out));
    let stdout = String::from_utf8_lossy(&output.stdout);
    for needle in [
        "$6,250.00",
        "$1,900.00",
        "$5,000.00",
        "$3,800.00",
        "7.4%",
        "34.4%",
        "52.4%",
        "breakeven: a recovers setup within year 1",
    ] {
        assert!(stdout.contains(needle), "missing {needle} in:\n{stdout}");
    }
    let report = std::fs::read_to_string(&out).unwrap();
    assert_eq!(report, stdout.to_string());
    // Manifest written next to the primary output.
    let manifest = std::fs::read_to_string(dir.join("report.txt.manifest.json")).unwrap();
    assert!(manifest.contains("\"subcommand\": \"econ\""));
    assert!(manifest.contains("\"years\": \"5\""));
}

#[test]
fn econ_accepts_a_parameter_file() {
    let params = fixtures().join("deployment.econ");
    let output = run_ok(bin().args(["econ", "--params"]).arg(&params).args(["--years", "1"]));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("$6,250.00"));
    assert!(stdout.contains("$8,800.00"));
}

#[test]
fn survey_pipeline_runs_and_is_deterministic() {
    let dir = tmp("pipeline");
    let plan = fixtures().join("apartment.plan");
    let survey = dir.join("apt.csv");
    let survey2 = dir.join("apt2.csv");
    for out in [&survey, &survey2] {
        run_ok(
            bin()
                .args(["simulate-survey", "--plan"])
                .arg(&plan)
                .args(["--samples", "50", "--seed", "7", "--out"])
                .arg(out),
        );
    }
    // Byte-identical outputs for identical parameters.
    assert_eq!(
        std::fs::read(&survey).unwrap(),
        std::fs::read(&survey2).unwrap()
    );
    // Manifest records the input digest and the resolved parameters.
    let manifest = std::fs::read_to_string(dir.join("apt.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"sha256\""));
    assert!(manifest.contains("\"samples\": \"50\""));
    assert!(manifest.contains("\"sigma\": \"4\""));

    let dense = dir.join("dense.csv");
    run_ok(
        bin()
            .args(["impute", "--in"])
            .arg(&survey)
            .args(["--out"])
            .arg(&dense)
            .args(["--provenance-out"])
            .arg(dir.join("prov.csv")),
    );
    let train = dir.join("train.csv");
    let test = dir.join("test.csv");
    run_ok(
        bin()
            .args(["split", "--in"])
            .arg(&dense)
            .args(["--test-fraction", "0.2", "--seed", "1", "--train-out"])
            .arg(&train)
            .args(["--test-out"])
            .arg(&test),
    );
    let report = dir.join("knn.csv");
    let output = run_ok(
        bin()
            .args(["eval-knn", "--train"])
            .arg(&train)
            .args(["--test"])
            .arg(&test)
            .args(["--k", "7", "--report-out"])
            .arg(&report)
            .args(["--confusion-out"])
            .arg(dir.join("confusion.csv"))
            .args(["--model-out"])
            .arg(dir.join("model")),
    );
    assert!(String::from_utf8_lossy(&output.stdout).contains("accuracy"));
    let report_text = std::fs::read_to_string(&report).unwrap();
    assert!(report_text.starts_with("key,value\naccuracy,"));
    // Exported model reloads to the identical classifier.
    let header = dir.join("model.json");
    let matrix = dir.join("model.csv");
    assert!(std::fs::read_to_string(&header).unwrap().contains("\"k\": 7"));
    assert!(std::fs::read_to_string(&matrix).unwrap().starts_with("BEACON_"));

    let ml_report = dir.join("ml.csv");
    run_ok(
        bin()
            .args(["eval-multilat", "--test"])
            .arg(&test)
            .args(["--plan"])
            .arg(&plan)
            .args(["--resolution", "0.2", "--report-out"])
            .arg(&ml_report),
    );
    assert!(std::fs::read_to_string(&ml_report)
        .unwrap()
        .contains("case_"));
}

#[test]
fn config_file_supplies_flags_and_explicit_flags_win() {
    let dir = tmp("config");
    let plan = fixtures().join("apartment.plan");
    let config = dir.join("run.conf");
    std::fs::write(
        &config,
        format!(
            "plan = {}\nsamples = 40\nseed = 3\nsigma = 0\n",
            plan.display()
        ),
    )
    .unwrap();

    let from_config = dir.join("a.csv");
    run_ok(
        bin()
            .args(["simulate-survey", "--config"])
            .arg(&config)
            .args(["--wall-attenuation", "5", "--out"])
            .arg(&from_config),
    );
    // Explicit --samples overrides the config's 40.
    let overridden = dir.join("b.csv");
    run_ok(
        bin()
            .args(["simulate-survey", "--config"])
            .arg(&config)
            .args(["--samples", "10", "--out"])
            .arg(&overridden),
    );
    let count = |p: &Path| std::fs::read_to_string(p).unwrap().lines().count() - 1;
    assert_eq!(count(&from_config), 5 * 40);
    assert_eq!(count(&overridden), 5 * 10);
}

#[test]
fn walk_replay_query_round_trip() {
    let dir = tmp("replay");
    let plan = fixtures().join("office.plan");

    // Assets parked in two rooms of the office.
    let assets = dir.join("assets.csv");
    std::fs::write(&assets, "label,x,y\npump-1,3,10.5\nmonitor-2,9,2.5\n").unwrap();

    let events = dir.join("events.jsonl");
    let inventory = dir.join("inventory.csv");
    run_ok(
        bin()
            .args(["simulate-walk", "--plan"])
            .arg(&plan)
            .args(["--duration", "300", "--seed", "21", "--sigma", "0", "--floor", "-120"])
            .args(["--interval", "2", "--assets"])
            .arg(&assets)
            .args(["--events-out"])
            .arg(&events)
            .args(["--inventory-out"])
            .arg(&inventory)
            .args(["--trajectory-out"])
            .arg(dir.join("trajectory.csv")),
    );

    // Train a model for the localizer from a noise-free survey.
    let survey = dir.join("survey.csv");
    run_ok(
        bin()
            .args(["simulate-survey", "--plan"])
            .arg(&plan)
            .args(["--samples", "60", "--seed", "3", "--sigma", "0", "--floor", "-120", "--out"])
            .arg(&survey),
    );
    let dense = dir.join("dense.csv");
    run_ok(bin().args(["impute", "--in"]).arg(&survey).args(["--out"]).arg(&dense));

    let store = dir.join("store.csv");
    let store2 = dir.join("store2.csv");
    for out in [&store, &store2] {
        run_ok(
            bin()
                .args(["replay-stream", "--events"])
                .arg(&events)
                .args(["--inventory"])
                .arg(&inventory)
                .args(["--plan"])
                .arg(&plan)
                .args(["--localizer", "knn", "--train"])
                .arg(&dense)
                .args(["--window", "10", "--assign-threshold", "-72", "--store-out"])
                .arg(out)
                .args(["--counters-out"])
                .arg(dir.join("counters.csv")),
        );
    }
    // Identical inputs give byte-identical store exports.
    assert_eq!(std::fs::read(&store).unwrap(), std::fs::read(&store2).unwrap());

    let counters = std::fs::read_to_string(dir.join("counters.csv")).unwrap();
    assert!(counters.contains("parsed,"));

    // Query an asset the replay located.
    let store_text = std::fs::read_to_string(&store).unwrap();
    if store_text.lines().count() > 1 {
        let asset = store_text.lines().nth(1).unwrap().split(',').next().unwrap();
        let output = run_ok(
            bin()
                .args(["query", "--store"])
                .arg(&store)
                .args(["--inventory"])
                .arg(&inventory)
                .args(["--plan"])
                .arg(&plan)
                .args(["--asset", asset, "--now", "600000"]),
        );
        assert!(String::from_utf8_lossy(&output.stdout).contains("room"));
    }

    // Never-seen asset reports distinctly; unknown asset is an error.
    let output = run_ok(
        bin()
            .args(["query", "--store"])
            .arg(&store)
            .args(["--inventory"])
            .arg(&inventory)
            .args(["--plan"])
            .arg(&plan)
            .args(["--asset", "pump-1", "--now", "600000"]),
    );
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("pump-1"));
    let output = bin()
        .args(["query", "--store"])
        .arg(&store)
        .args(["--inventory"])
        .arg(&inventory)
        .args(["--plan"])
        .arg(&plan)
        .args(["--asset", "ghost", "--now", "600000"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn sweep_and_frequency_chain() {
    let dir = tmp("sweep");
    let plan = fixtures().join("apartment.plan");
    let survey = dir.join("survey.csv");
    run_ok(
        bin()
            .args(["simulate-survey", "--plan"])
            .arg(&plan)
            .args(["--samples", "40", "--seed", "5", "--out"])
            .arg(&survey),
    );
    let dense = dir.join("dense.csv");
    run_ok(bin().args(["impute", "--in"]).arg(&survey).args(["--out"]).arg(&dense));

    let results = dir.join("results.csv");
    run_ok(
        bin()
            .args(["sweep-subsets", "--threads", "1", "--data"])
            .arg(&dense)
            .args(["--method", "knn", "--k", "3", "--repeats", "2", "--seed", "4"])
            .args(["--exhaustive", "--out"])
            .arg(&results)
            .args(["--stats-out"])
            .arg(dir.join("stats.csv")),
    );
    let text = std::fs::read_to_string(&results).unwrap();
    assert_eq!(text.lines().count() - 1, 31);

    let freq = dir.join("freq.csv");
    run_ok(
        bin()
            .args(["beacon-frequency", "--results"])
            .arg(&results)
            .args(["--plan"])
            .arg(&plan)
            .args(["--out"])
            .arg(&freq)
            .args(["--winners-out"])
            .arg(dir.join("winners.csv")),
    );
    let freq_text = std::fs::read_to_string(&freq).unwrap();
    assert_eq!(freq_text.lines().count() - 1, 5);
    assert!(freq_text.starts_with("beacon,count,x,y\n"));

    let heatmap = dir.join("heatmap.csv");
    run_ok(
        bin()
            .args(["sweep-training", "--data"])
            .arg(&dense)
            .args(["--sizes", "10,30", "--beacon-counts", "2,5"])
            .args(["--method", "knn", "--k", "3", "--repeats", "2", "--seed", "4", "--out"])
            .arg(&heatmap)
            .args(["--deltas-out"])
            .arg(dir.join("deltas.csv")),
    );
    assert_eq!(std::fs::read_to_string(&heatmap).unwrap().lines().count() - 1, 4);
}
