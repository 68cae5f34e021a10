pub mod dataset_cmd;
pub mod econ_cmd;
pub mod evaluate;
pub mod replay;
pub mod simulate;
pub mod sweeps;

use roomloc_core::multilat::PathLossParams;

use crate::config::ConfigMap;
use crate::errors::CliResult;
use crate::manifest::ManifestBuilder;

/// Shared path-loss flags with their calibrated defaults.
pub(crate) fn resolve_path_loss(
    cfg: &ConfigMap,
    rssi_at_1m: Option<f64>,
    exponent: Option<f64>,
    proximity: Option<f64>,
) -> CliResult<PathLossParams> {
    let defaults = PathLossParams::default();
    Ok(PathLossParams {
        rssi_at_1m: cfg.resolve(rssi_at_1m, "rssi-at-1m", defaults.rssi_at_1m)?,
        exponent: cfg.resolve(exponent, "exponent", defaults.exponent)?,
        proximity_rssi: cfg.resolve(proximity, "proximity", defaults.proximity_rssi)?,
    })
}

pub(crate) fn record_path_loss(manifest: &mut ManifestBuilder, params: &PathLossParams) {
    manifest.param("rssi-at-1m", params.rssi_at_1m);
    manifest.param("exponent", params.exponent);
    manifest.param("proximity", params.proximity_rssi);
}

/// Parse a comma-separated list of integers (`20,60,200`).
pub(crate) fn parse_usize_list(text: &str, what: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|e| {
                crate::errors::CliError::Validation(format!("bad {what} entry `{t}`: {e}"))
            })
        })
        .collect()
}
