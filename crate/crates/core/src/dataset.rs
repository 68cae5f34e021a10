//! Fingerprint survey datasets: sparse per-beacon RSSI rows labeled with a
//! room, the two imputation strategies that densify them, and deterministic
//! stratified train/test splitting.
//!
//! CSV format: header `BEACON_<label>,...,ROOM`, one row per sample, missing
//! observation = empty field, UTF-8, LF line endings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Imputation constant marking a beacon never observed for a room.
pub const SENTINEL_RSSI: f64 = -200.0;

/// Valid RSSI range for observed values, dBm.
pub const RSSI_MIN: i16 = -120;
pub const RSSI_MAX: i16 = 0;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("failed to read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown beacon column {0}")]
    UnknownColumn(String),
    #[error("beacon subset must be non-empty")]
    EmptySubset,
    #[error("room {room} has {rows} rows; splitting needs at least 2")]
    RoomTooSmall { room: String, rows: usize },
    #[error("test fraction must be in (0, 1), got {0}")]
    BadTestFraction(f64),
    #[error("dataset is empty")]
    Empty,
}

/// Where a dense cell's value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Measured in the survey.
    Observed,
    /// Beacon never seen for this room; filled with [`SENTINEL_RSSI`].
    Sentinel,
    /// Filled with the room-conditioned column mean.
    MeanImputed,
}

impl Provenance {
    pub fn code(self) -> &'static str {
        match self {
            Provenance::Observed => "o",
            Provenance::Sentinel => "s",
            Provenance::MeanImputed => "m",
        }
    }
}

/// A sparse survey dataset as collected: integer dBm values with gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    /// Feature columns, in file order.
    pub beacon_columns: Vec<String>,
    pub rows: Vec<RawRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub values: Vec<Option<i16>>,
    pub room: String,
}

/// A gap-free dataset: every cell holds a value plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDataset {
    pub beacon_columns: Vec<String>,
    pub rows: Vec<DenseRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseRow {
    pub values: Vec<f64>,
    pub provenance: Vec<Provenance>,
    pub room: String,
}

/// Train/test split parameters: fraction of each room's rows sent to the
/// test side, and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl RawDataset {
    pub fn load(path: impl AsRef<Path>) -> Result<RawDataset, DatasetError> {
        Self::parse(&std::fs::read_to_string(path)?, None)
    }

    /// Parse CSV text. When `room_whitelist` is given, rows with labels
    /// outside it are rejected.
    pub fn parse(
        text: &str,
        room_whitelist: Option<&BTreeSet<String>>,
    ) -> Result<RawDataset, DatasetError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(DatasetError::Empty)?;
        let beacon_columns = parse_header(header)?;

        let mut rows = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != beacon_columns.len() + 1 {
                return Err(DatasetError::Parse {
                    line: lineno,
                    msg: format!(
                        "expected {} fields, got {}",
                        beacon_columns.len() + 1,
                        cells.len()
                    ),
                });
            }
            let mut values = Vec::with_capacity(beacon_columns.len());
            for cell in &cells[..cells.len() - 1] {
                if cell.is_empty() {
                    values.push(None);
                    continue;
                }
                let v: i16 = cell.parse().map_err(|e| DatasetError::Parse {
                    line: lineno,
                    msg: format!("bad RSSI `{cell}`: {e}"),
                })?;
                if !(RSSI_MIN..=RSSI_MAX).contains(&v) {
                    return Err(DatasetError::Parse {
                        line: lineno,
                        msg: format!("RSSI {v} outside [{RSSI_MIN}, {RSSI_MAX}] dBm"),
                    });
                }
                values.push(Some(v));
            }
            let room = cells[cells.len() - 1].to_string();
            if room.is_empty() {
                return Err(DatasetError::Parse {
                    line: lineno,
                    msg: "empty room label".into(),
                });
            }
            if let Some(whitelist) = room_whitelist {
                if !whitelist.contains(&room) {
                    return Err(DatasetError::Parse {
                        line: lineno,
                        msg: format!("unknown room label {room}"),
                    });
                }
            }
            rows.push(RawRow { values, room });
        }
        Ok(RawDataset {
            beacon_columns,
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = header_line(&self.beacon_columns);
        for row in &self.rows {
            let mut fields: Vec<String> = row
                .values
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                .collect();
            fields.push(row.room.clone());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Projection to a beacon subset, preserving row order, the dataset's
    /// column order, and room labels.
    pub fn subset_columns(&self, subset: &BTreeSet<String>) -> Result<RawDataset, DatasetError> {
        let keep = column_selection(&self.beacon_columns, subset)?;
        Ok(RawDataset {
            beacon_columns: keep
                .iter()
                .map(|&i| self.beacon_columns[i].clone())
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|r| RawRow {
                    values: keep.iter().map(|&i| r.values[i]).collect(),
                    room: r.room.clone(),
                })
                .collect(),
        })
    }

    pub fn rooms(&self) -> BTreeSet<String> {
        self.rows.iter().map(|r| r.room.clone()).collect()
    }
}

fn parse_header(header: &str) -> Result<Vec<String>, DatasetError> {
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 2 || fields[fields.len() - 1] != "ROOM" {
        return Err(DatasetError::Parse {
            line: 1,
            msg: "header must be BEACON_<label>,...,ROOM".into(),
        });
    }
    fields[..fields.len() - 1]
        .iter()
        .map(|f| {
            f.strip_prefix("BEACON_")
                .map(str::to_string)
                .ok_or(DatasetError::Parse {
                    line: 1,
                    msg: format!("column `{f}` is not BEACON_<label>"),
                })
        })
        .collect()
}

fn header_line(columns: &[String]) -> String {
    let mut fields: Vec<String> = columns.iter().map(|c| format!("BEACON_{c}")).collect();
    fields.push("ROOM".to_string());
    let mut line = fields.join(",");
    line.push('\n');
    line
}

fn column_selection(
    columns: &[String],
    subset: &BTreeSet<String>,
) -> Result<Vec<usize>, DatasetError> {
    if subset.is_empty() {
        return Err(DatasetError::EmptySubset);
    }
    for label in subset {
        if !columns.contains(label) {
            return Err(DatasetError::UnknownColumn(label.clone()));
        }
    }
    Ok(columns
        .iter()
        .enumerate()
        .filter(|(_, c)| subset.contains(*c))
        .map(|(i, _)| i)
        .collect())
}

/// Fills every gap in `raw`, per (room, column) group:
///
/// - group entirely missing → the [`SENTINEL_RSSI`] constant;
/// - group partially missing → the arithmetic mean of the group's observed
///   values, stored at full precision;
/// - observed cells pass through unchanged.
pub fn impute(raw: &RawDataset) -> DenseDataset {
    let cols = raw.beacon_columns.len();
    // (room, column) -> (integer sum, count); integer sums keep the mean
    // independent of row order.
    let mut sums: BTreeMap<(&str, usize), (i64, i64)> = BTreeMap::new();
    for row in &raw.rows {
        for (j, v) in row.values.iter().enumerate() {
            if let Some(x) = v {
                let entry = sums.entry((row.room.as_str(), j)).or_insert((0, 0));
                entry.0 += i64::from(*x);
                entry.1 += 1;
            }
        }
    }
    let rows = raw
        .rows
        .iter()
        .map(|row| {
            let mut values = Vec::with_capacity(cols);
            let mut provenance = Vec::with_capacity(cols);
            for (j, v) in row.values.iter().enumerate() {
                match v {
                    Some(x) => {
                        values.push(f64::from(*x));
                        provenance.push(Provenance::Observed);
                    }
                    None => match sums.get(&(row.room.as_str(), j)) {
                        Some(&(sum, count)) => {
                            values.push(sum as f64 / count as f64);
                            provenance.push(Provenance::MeanImputed);
                        }
                        None => {
                            values.push(SENTINEL_RSSI);
                            provenance.push(Provenance::Sentinel);
                        }
                    },
                }
            }
            DenseRow {
                values,
                provenance,
                room: row.room.clone(),
            }
        })
        .collect();
    DenseDataset {
        beacon_columns: raw.beacon_columns.clone(),
        rows,
    }
}

impl DenseDataset {
    pub fn load(path: impl AsRef<Path>) -> Result<DenseDataset, DatasetError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parse a dense CSV. Cells equal to −200 are classified as sentinel,
    /// everything else as observed (the provenance sidecar is informational
    /// and not required to reload a dense dataset).
    pub fn parse(text: &str) -> Result<DenseDataset, DatasetError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(DatasetError::Empty)?;
        let beacon_columns = parse_header(header)?;
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != beacon_columns.len() + 1 {
                return Err(DatasetError::Parse {
                    line: lineno,
                    msg: format!(
                        "expected {} fields, got {}",
                        beacon_columns.len() + 1,
                        cells.len()
                    ),
                });
            }
            let mut values = Vec::with_capacity(beacon_columns.len());
            let mut provenance = Vec::with_capacity(beacon_columns.len());
            for cell in &cells[..cells.len() - 1] {
                let v: f64 = cell.parse().map_err(|e| DatasetError::Parse {
                    line: lineno,
                    msg: format!("bad value `{cell}`: {e}"),
                })?;
                let in_range = (f64::from(RSSI_MIN)..=f64::from(RSSI_MAX)).contains(&v);
                if v != SENTINEL_RSSI && !in_range {
                    return Err(DatasetError::Parse {
                        line: lineno,
                        msg: format!("dense value {v} is neither sentinel nor valid RSSI"),
                    });
                }
                provenance.push(if v == SENTINEL_RSSI {
                    Provenance::Sentinel
                } else {
                    Provenance::Observed
                });
                values.push(v);
            }
            rows.push(DenseRow {
                values,
                provenance,
                room: cells[cells.len() - 1].to_string(),
            });
        }
        Ok(DenseDataset {
            beacon_columns,
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = header_line(&self.beacon_columns);
        for row in &self.rows {
            let mut fields: Vec<String> = row.values.iter().map(|v| format!("{v}")).collect();
            fields.push(row.room.clone());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Provenance sidecar, same shape as the data CSV with o/s/m codes.
    pub fn provenance_csv(&self) -> String {
        let mut out = header_line(&self.beacon_columns);
        for row in &self.rows {
            let mut fields: Vec<String> = row
                .provenance
                .iter()
                .map(|p| p.code().to_string())
                .collect();
            fields.push(row.room.clone());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn subset_columns(&self, subset: &BTreeSet<String>) -> Result<DenseDataset, DatasetError> {
        let keep = column_selection(&self.beacon_columns, subset)?;
        Ok(DenseDataset {
            beacon_columns: keep
                .iter()
                .map(|&i| self.beacon_columns[i].clone())
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|r| DenseRow {
                    values: keep.iter().map(|&i| r.values[i]).collect(),
                    provenance: keep.iter().map(|&i| r.provenance[i]).collect(),
                    room: r.room.clone(),
                })
                .collect(),
        })
    }

    pub fn rooms(&self) -> BTreeSet<String> {
        self.rows.iter().map(|r| r.room.clone()).collect()
    }

    /// Rows per room.
    pub fn room_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for row in &self.rows {
            *counts.entry(row.room.clone()).or_insert(0) += 1;
        }
        counts
    }
}

/// Stratified split: per room, `⌈test_fraction · n_room⌉` rows go to the
/// test side, chosen by a seeded shuffle; the original row order is kept
/// within each side.
pub fn split(
    dense: &DenseDataset,
    cfg: SplitConfig,
) -> Result<(DenseDataset, DenseDataset), DatasetError> {
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err(DatasetError::BadTestFraction(cfg.test_fraction));
    }
    if dense.rows.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut per_room: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, row) in dense.rows.iter().enumerate() {
        per_room.entry(row.room.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut is_test = vec![false; dense.rows.len()];
    for (room, mut indices) in per_room {
        if indices.len() < 2 {
            return Err(DatasetError::RoomTooSmall {
                room: room.to_string(),
                rows: indices.len(),
            });
        }
        let n_test = (cfg.test_fraction * indices.len() as f64).ceil() as usize;
        indices.shuffle(&mut rng);
        for &i in indices.iter().take(n_test) {
            is_test[i] = true;
        }
    }
    let pick = |test_side: bool| DenseDataset {
        beacon_columns: dense.beacon_columns.clone(),
        rows: dense
            .rows
            .iter()
            .zip(&is_test)
            .filter(|(_, &t)| t == test_side)
            .map(|(r, _)| r.clone())
            .collect(),
    };
    Ok((pick(false), pick(true)))
}
