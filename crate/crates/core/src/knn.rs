//! Fingerprinting localizer: k-nearest-neighbors classification of a room
//! label from an RSSI vector.
//!
//! Training is storage (lazy learner). Prediction is fully deterministic and
//! independent of training-row order: neighbors are ranked by
//! `(distance, feature vector, label)` and vote ties resolve to the class of
//! the nearest tied neighbor, then to the smaller room label.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::DenseDataset;

pub const DEFAULT_K: usize = 7;

#[derive(Debug, thiserror::Error)]
pub enum KnnError {
    #[error("k must be between 1 and the number of training rows ({rows}), got {k}")]
    KOutOfRange { k: usize, rows: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("query has {got} values, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("test columns {got:?} do not match model columns {expected:?}")]
    ColumnMismatch {
        expected: Vec<String>,
        got: Vec<String>,
    },
    #[error("failed to read model: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad model header: {0}")]
    Header(#[from] serde_json::Error),
    #[error(transparent)]
    Matrix(#[from] crate::dataset::DatasetError),
}

/// Distance metric identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// l2 norm.
    Euclidean,
}

/// A fitted model: the training matrix stored verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    k: usize,
    metric: Metric,
}

/// Batch evaluation result: overall fraction correct plus the confusion
/// counts keyed `(actual, predicted)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
    pub confusion: BTreeMap<(String, String), usize>,
}

impl Accuracy {
    pub fn fraction(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// Store the training data and validate `k`; no further computation.
pub fn fit(train: &DenseDataset, k: usize, metric: Metric) -> Result<KnnModel, KnnError> {
    if train.rows.is_empty() {
        return Err(KnnError::EmptyTrainingSet);
    }
    if k == 0 || k > train.rows.len() {
        return Err(KnnError::KOutOfRange {
            k,
            rows: train.rows.len(),
        });
    }
    Ok(KnnModel {
        columns: train.beacon_columns.clone(),
        rows: train.rows.iter().map(|r| r.values.clone()).collect(),
        labels: train.rows.iter().map(|r| r.room.clone()).collect(),
        k,
        metric,
    })
}

/// Total order on neighbors; squared distance keeps the same ranking as the
/// Euclidean distance.
fn neighbor_cmp(a: (f64, &[f64], &str), b: (f64, &[f64], &str)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| {
            for (x, y) in a.1.iter().zip(b.1) {
                match x.total_cmp(y) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
            Ordering::Equal
        })
        .then_with(|| a.2.cmp(b.2))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Majority label among the k nearest training rows.
    pub fn predict(&self, query: &[f64]) -> Result<&str, KnnError> {
        if query.len() != self.columns.len() {
            return Err(KnnError::DimensionMismatch {
                expected: self.columns.len(),
                got: query.len(),
            });
        }
        let Metric::Euclidean = self.metric;
        let mut ranked: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| (squared_distance(query, row), i))
            .collect();
        let key = |&(d2, i): &(f64, usize)| (d2, self.rows[i].as_slice(), self.labels[i].as_str());
        if self.k < ranked.len() {
            ranked.select_nth_unstable_by(self.k - 1, |a, b| neighbor_cmp(key(a), key(b)));
            ranked.truncate(self.k);
        }

        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        for &(_, i) in &ranked {
            *votes.entry(self.labels[i].as_str()).or_insert(0) += 1;
        }
        let top = *votes.values().max().expect("k >= 1");
        // Tie break: nearest neighbor among the tied classes, then smaller
        // label if those distances tie too.
        let mut best: Option<(f64, &str)> = None;
        for (&label, &count) in &votes {
            if count != top {
                continue;
            }
            let nearest = ranked
                .iter()
                .filter(|&&(_, i)| self.labels[i] == label)
                .map(|&(d2, _)| d2)
                .min_by(f64::total_cmp)
                .expect("class has at least one neighbor");
            best = match best {
                None => Some((nearest, label)),
                Some((bd, bl)) => {
                    if nearest.total_cmp(&bd).then_with(|| label.cmp(bl)) == Ordering::Less {
                        Some((nearest, label))
                    } else {
                        Some((bd, bl))
                    }
                }
            };
        }
        Ok(best.expect("at least one class").1)
    }

    /// Fraction of correctly classified test rows plus confusion counts.
    /// Rows are scored independently, so parallel evaluation is identical to
    /// sequential.
    pub fn accuracy(&self, test: &DenseDataset) -> Result<Accuracy, KnnError> {
        if test.rows.is_empty() {
            return Err(KnnError::EmptyTestSet);
        }
        if test.beacon_columns != self.columns {
            return Err(KnnError::ColumnMismatch {
                expected: self.columns.clone(),
                got: test.beacon_columns.clone(),
            });
        }
        let predictions: Vec<&str> = test
            .rows
            .par_iter()
            .map(|row| self.predict(&row.values).expect("columns checked"))
            .collect();
        let mut confusion = BTreeMap::new();
        let mut correct = 0usize;
        for (row, predicted) in test.rows.iter().zip(&predictions) {
            if row.room == *predicted {
                correct += 1;
            }
            *confusion
                .entry((row.room.clone(), predicted.to_string()))
                .or_insert(0) += 1;
        }
        Ok(Accuracy {
            correct,
            total: test.rows.len(),
            confusion,
        })
    }

    /// Write the model as a JSON header plus the training matrix in the
    /// dataset CSV format, for cross-run reuse.
    pub fn save(&self, header_path: &Path, matrix_path: &Path) -> Result<(), KnnError> {
        #[derive(serde::Serialize)]
        struct Header<'a> {
            k: usize,
            metric: Metric,
            columns: &'a [String],
        }
        let header = serde_json::to_string_pretty(&Header {
            k: self.k,
            metric: self.metric,
            columns: &self.columns,
        })?;
        std::fs::write(header_path, header + "\n")?;
        std::fs::write(matrix_path, self.matrix_csv())?;
        Ok(())
    }

    fn matrix_csv(&self) -> String {
        let dense = DenseDataset {
            beacon_columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .zip(&self.labels)
                .map(|(values, room)| crate::dataset::DenseRow {
                    values: values.clone(),
                    provenance: vec![crate::dataset::Provenance::Observed; values.len()],
                    room: room.clone(),
                })
                .collect(),
        };
        dense.to_csv()
    }

    pub fn load(header_path: &Path, matrix_path: &Path) -> Result<KnnModel, KnnError> {
        #[derive(serde::Deserialize)]
        struct Header {
            k: usize,
            metric: Metric,
            columns: Vec<String>,
        }
        let header: Header = serde_json::from_str(&std::fs::read_to_string(header_path)?)?;
        let matrix = DenseDataset::load(matrix_path)?;
        if matrix.beacon_columns != header.columns {
            return Err(KnnError::ColumnMismatch {
                expected: header.columns,
                got: matrix.beacon_columns,
            });
        }
        fit(&matrix, header.k, header.metric)
    }
}
