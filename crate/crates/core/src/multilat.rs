//! Adapted multilateration localizer.
//!
//! RSSI readings become range circles through a log-distance path-loss
//! model, and a room label is resolved by a four-case dispatch:
//!
//! 1. any beacon above the proximity threshold → that beacon's room;
//! 2. overlapping ranges → the intersection region of highest cardinality,
//!    overlaid on the plan, largest room coverage wins;
//! 3. several regions tie at the highest cardinality → the one with the
//!    smallest radii sum is the most trustworthy (strong signals are short
//!    radii), then as in 2;
//! 4. no overlaps at all → the room of the strongest beacon.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::dataset::{DenseDataset, SENTINEL_RSSI};
use crate::geometry::{
    find_intersection_regions, region_room_coverage, Circle, FloorPlan, DEFAULT_RESOLUTION,
};

#[derive(Debug, thiserror::Error)]
pub enum MultilatError {
    #[error("scan is empty")]
    EmptyScan,
    #[error("beacon {0} is not a fixed beacon of the plan")]
    UnknownBeacon(String),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("test columns contain {0}, which is not a fixed beacon of the plan")]
    UnknownColumn(String),
}

/// Log-distance path-loss parameters plus the case-1 proximity threshold.
///
/// Distance is recovered as `d = 10^((rssi_at_1m − rssi) / (10·exponent))`,
/// with the defaults calibrated so −70 dBm sits at roughly two meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PathLossParams {
    /// Reference power at 1 m, dBm.
    pub rssi_at_1m: f64,
    /// Path-loss exponent, dimensionless.
    pub exponent: f64,
    /// Case-1 threshold, dBm: a reading strictly above it puts the gateway
    /// in the beacon's room.
    pub proximity_rssi: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        PathLossParams {
            rssi_at_1m: -61.0,
            exponent: 3.0,
            proximity_rssi: -70.0,
        }
    }
}

/// Which dispatch case produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Proximity,
    MaxCardinality,
    MinRadiiSum,
    NearestBeacon,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Proximity => "proximity",
            Case::MaxCardinality => "max_cardinality",
            Case::MinRadiiSum => "min_radii_sum",
            Case::NearestBeacon => "nearest_beacon",
        }
    }
}

/// A resolved room label plus how it was resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomPrediction {
    pub room: String,
    pub case_used: Case,
    /// Room label → covered area in m², for the coverage cases.
    pub coverage: Option<BTreeMap<String, f64>>,
    /// The winning intersection set (cases 2–3) or the single winning
    /// beacon (cases 1 and 4).
    pub winning_set: Option<BTreeSet<String>>,
}

/// Distance in meters estimated from an RSSI reading.
pub fn rssi_to_distance(rssi: f64, p: &PathLossParams) -> f64 {
    10f64.powf((p.rssi_at_1m - rssi) / (10.0 * p.exponent))
}

/// Resolve a room from a scan (fixed-beacon label → dBm) at the default
/// raster resolution.
pub fn predict_room(
    scan: &BTreeMap<String, f64>,
    plan: &FloorPlan,
    params: &PathLossParams,
) -> Result<RoomPrediction, MultilatError> {
    predict_room_at(scan, plan, params, DEFAULT_RESOLUTION)
}

/// [`predict_room`] with an explicit raster resolution; coarser grids trade
/// coverage precision for speed in batch evaluations.
pub fn predict_room_at(
    scan: &BTreeMap<String, f64>,
    plan: &FloorPlan,
    params: &PathLossParams,
    resolution: f64,
) -> Result<RoomPrediction, MultilatError> {
    if scan.is_empty() {
        return Err(MultilatError::EmptyScan);
    }
    for label in scan.keys() {
        if plan.beacon_position(label).is_none() {
            return Err(MultilatError::UnknownBeacon(label.clone()));
        }
    }

    // Strongest beacon; BTreeMap iteration makes the equal-RSSI tie fall to
    // the smaller label.
    let (strongest_label, strongest_rssi) = scan
        .iter()
        .map(|(l, &r)| (l.as_str(), r))
        .fold(None::<(&str, f64)>, |best, (l, r)| match best {
            Some((_, br)) if br >= r => best,
            _ => Some((l, r)),
        })
        .expect("scan non-empty");

    // Case 1: proximity.
    if strongest_rssi > params.proximity_rssi {
        let room = plan.beacon_room(strongest_label).expect("checked above");
        return Ok(RoomPrediction {
            room: room.to_string(),
            case_used: Case::Proximity,
            coverage: None,
            winning_set: Some([strongest_label.to_string()].into()),
        });
    }

    // Degenerate whole-floor circles from very weak readings are useless;
    // clamp ranges to the plan diagonal.
    let max_radius = plan.bounds.diagonal();
    let circles: Vec<Circle> = scan
        .iter()
        .map(|(label, &rssi)| {
            let d = rssi_to_distance(rssi, params).min(max_radius);
            Circle::new(label.clone(), plan.beacon_position(label).unwrap(), d)
        })
        .collect();

    let regions = find_intersection_regions(&circles, resolution);
    if !regions.is_empty() {
        let max_card = regions.iter().map(|r| r.cardinality).max().unwrap();
        let top: Vec<_> = regions.iter().filter(|r| r.cardinality == max_card).collect();
        let (winner, case) = if top.len() == 1 {
            (top[0], Case::MaxCardinality)
        } else {
            let winner = top
                .iter()
                .copied()
                .min_by(|a, b| a.radii_sum.total_cmp(&b.radii_sum).then_with(|| a.members.cmp(&b.members)))
                .unwrap();
            (winner, Case::MinRadiiSum)
        };
        let coverage = region_room_coverage(winner, plan);
        if let Some(room) = coverage.argmax_room() {
            return Ok(RoomPrediction {
                room: room.to_string(),
                case_used: case,
                coverage: Some(coverage.areas()),
                winning_set: Some(winner.members.iter().cloned().collect()),
            });
        }
        // The winning region lies entirely outside every room; fall through
        // to the nearest-beacon rule.
    }

    // Case 4: no usable overlap.
    let room = plan.beacon_room(strongest_label).expect("checked above");
    Ok(RoomPrediction {
        room: room.to_string(),
        case_used: Case::NearestBeacon,
        coverage: None,
        winning_set: Some([strongest_label.to_string()].into()),
    })
}

/// Batch evaluation over a dense test set.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilatAccuracy {
    pub correct: usize,
    pub total: usize,
    /// How often each dispatch case fired.
    pub case_counts: BTreeMap<Case, usize>,
    /// Rows whose cells were all sentinel: no scan to work with, counted
    /// incorrect.
    pub empty_scans: usize,
}

impl MultilatAccuracy {
    pub fn fraction(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// Scores each row by dropping sentinel cells, predicting a room from the
/// remaining scan, and comparing to the row label.
pub fn accuracy(
    test: &DenseDataset,
    plan: &FloorPlan,
    params: &PathLossParams,
    resolution: f64,
) -> Result<MultilatAccuracy, MultilatError> {
    if test.rows.is_empty() {
        return Err(MultilatError::EmptyTestSet);
    }
    for column in &test.beacon_columns {
        if plan.beacon_position(column).is_none() {
            return Err(MultilatError::UnknownColumn(column.clone()));
        }
    }
    let outcomes: Vec<Option<(bool, Case)>> = test
        .rows
        .par_iter()
        .map(|row| {
            let scan: BTreeMap<String, f64> = test
                .beacon_columns
                .iter()
                .zip(&row.values)
                .filter(|(_, &v)| v != SENTINEL_RSSI)
                .map(|(l, &v)| (l.clone(), v))
                .collect();
            if scan.is_empty() {
                return None;
            }
            let prediction =
                predict_room_at(&scan, plan, params, resolution).expect("columns checked");
            Some((prediction.room == row.room, prediction.case_used))
        })
        .collect();

    let mut result = MultilatAccuracy {
        correct: 0,
        total: test.rows.len(),
        case_counts: BTreeMap::new(),
        empty_scans: 0,
    };
    for outcome in outcomes {
        match outcome {
            Some((correct, case)) => {
                if correct {
                    result.correct += 1;
                }
                *result.case_counts.entry(case).or_insert(0) += 1;
            }
            None => result.empty_scans += 1,
        }
    }
    Ok(result)
}
