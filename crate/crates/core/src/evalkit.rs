//! Evaluation studies over a survey dataset: accuracy vs. beacon-subset
//! size, beacon-placement frequency, and accuracy vs. training size.
//!
//! Every study is reproducible from `(dataset, config, seed)`: per-round
//! split seeds derive from the base seed, and subset sampling is seeded, so
//! parallel execution returns exactly the sequential results.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::dataset::{split, DatasetError, DenseDataset, SplitConfig};
use crate::geometry::FloorPlan;
use crate::knn::{self, Metric};
use crate::multilat::{self, PathLossParams};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("feature count {0} exceeds the 63-feature cap for subset enumeration")]
    TooManyFeatures(usize),
    #[error("feature count must be at least 1")]
    NoFeatures,
    #[error("invalid cross-validation config: {0}")]
    BadCv(String),
    #[error("requested {requested} samples per room but only {available} are available")]
    TrainingSizeTooLarge { requested: usize, available: usize },
    #[error("beacon count {requested} exceeds the {available} available columns")]
    BeaconCountTooLarge { requested: usize, available: usize },
    #[error("results parse error at line {line}: {msg}")]
    ResultsParse { line: usize, msg: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Knn(#[from] crate::knn::KnnError),
    #[error(transparent)]
    Multilat(#[from] crate::multilat::MultilatError),
}

/// Repeated-holdout / k-fold configuration.
///
/// `folds == 1` runs `repeats` stratified holdouts at `test_fraction`;
/// `folds >= 2` runs stratified k-fold, `repeats` times with reshuffles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl CvConfig {
    /// The default protocol: 5 repeated stratified holdouts at c = 0.2.
    pub fn repeated_holdout(repeats: usize, seed: u64) -> Self {
        CvConfig {
            folds: 1,
            repeats,
            test_fraction: 0.2,
            seed,
        }
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.folds == 0 {
            return Err(EvalError::BadCv("folds must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(EvalError::BadCv("repeats must be at least 1".into()));
        }
        if self.folds == 1 && !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(EvalError::BadCv(format!(
                "test fraction must be in (0,1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }
}

fn derive_seed(base: u64, idx: u64) -> u64 {
    // SplitMix-style mixing keeps per-round streams well separated.
    let mut z = base ^ idx.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// All train/test rounds for a config, in a fixed order.
fn evaluation_rounds(
    dense: &DenseDataset,
    cv: &CvConfig,
) -> Result<Vec<(DenseDataset, DenseDataset)>, EvalError> {
    cv.validate()?;
    let mut rounds = Vec::new();
    for r in 0..cv.repeats {
        let seed = derive_seed(cv.seed, r as u64);
        if cv.folds == 1 {
            rounds.push(split(
                dense,
                SplitConfig {
                    test_fraction: cv.test_fraction,
                    seed,
                },
            )?);
        } else {
            rounds.extend(k_fold(dense, cv.folds, seed)?);
        }
    }
    Ok(rounds)
}

/// Stratified k-fold: each room's rows are shuffled once and dealt into
/// `folds` chunks round-robin.
fn k_fold(
    dense: &DenseDataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<(DenseDataset, DenseDataset)>, EvalError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut per_room: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, row) in dense.rows.iter().enumerate() {
        per_room.entry(row.room.as_str()).or_default().push(i);
    }
    let mut fold_of_row = vec![0usize; dense.rows.len()];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for (room, mut indices) in per_room {
        if indices.len() < folds {
            return Err(EvalError::BadCv(format!(
                "room {room} has {} rows, fewer than {folds} folds",
                indices.len()
            )));
        }
        indices.shuffle(&mut rng);
        for (pos, &i) in indices.iter().enumerate() {
            fold_of_row[i] = pos % folds;
        }
    }
    let make = |test_fold: usize| {
        let pick = |is_test: bool| DenseDataset {
            beacon_columns: dense.beacon_columns.clone(),
            rows: dense
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| (fold_of_row[*i] == test_fold) == is_test)
                .map(|(_, r)| r.clone())
                .collect(),
        };
        (pick(false), pick(true))
    };
    Ok((0..folds).map(make).collect())
}

/// The localizer under evaluation.
pub enum Method<'a> {
    Knn {
        k: usize,
    },
    Multilat {
        plan: &'a FloorPlan,
        params: PathLossParams,
        resolution: f64,
    },
}

fn score_round(
    method: &Method<'_>,
    train: &DenseDataset,
    test: &DenseDataset,
) -> Result<f64, EvalError> {
    match method {
        Method::Knn { k } => {
            let model = knn::fit(train, (*k).min(train.rows.len()), Metric::Euclidean)?;
            Ok(model.accuracy(test)?.fraction())
        }
        Method::Multilat {
            plan,
            params,
            resolution,
        } => Ok(multilat::accuracy(test, plan, params, *resolution)?.fraction()),
    }
}

/// Accuracy of one beacon subset across all cv rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetResult {
    /// Sorted member labels.
    pub subset: Vec<String>,
    pub size: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
}

impl SubsetResult {
    fn from_folds(subset: Vec<String>, fold_accuracies: Vec<f64>) -> SubsetResult {
        let n = fold_accuracies.len() as f64;
        let mean = fold_accuracies.iter().sum::<f64>() / n;
        let var = fold_accuracies
            .iter()
            .map(|a| (a - mean) * (a - mean))
            .sum::<f64>()
            / n;
        SubsetResult {
            size: subset.len(),
            subset,
            mean_accuracy: mean,
            std_accuracy: var.sqrt(),
            fold_accuracies,
        }
    }
}

/// Number of non-empty feature combinations: `2^d − 1`.
pub fn count_combinations(d: usize) -> Result<u64, EvalError> {
    if d == 0 {
        return Err(EvalError::NoFeatures);
    }
    if d > 63 {
        return Err(EvalError::TooManyFeatures(d));
    }
    Ok((1u64 << d) - 1)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Enumeration limits for the subset sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepLimits {
    /// Evaluate at most this many subsets per size (seeded uniform sample);
    /// `None` means exhaustive.
    pub per_size: Option<usize>,
    /// Skip sizes above this.
    pub max_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub results: Vec<SubsetResult>,
    /// True when any size was sampled rather than enumerated.
    pub sampled: bool,
}

/// All subsets of each admitted size, either exhaustively enumerated or
/// sampled without replacement, in deterministic order.
fn admitted_subsets(
    columns: &[String],
    limits: &SweepLimits,
    seed: u64,
) -> Result<(Vec<Vec<String>>, bool), EvalError> {
    use rand::Rng;
    use rand::SeedableRng;
    let d = columns.len();
    count_combinations(d)?;
    let max_size = limits.max_size.unwrap_or(d).min(d);
    let mut subsets = Vec::new();
    let mut sampled = false;
    for size in 1..=max_size {
        let total = binomial(d, size);
        let take_all = match limits.per_size {
            None => true,
            Some(cap) => total <= cap as u128,
        };
        if take_all {
            let mut indices: Vec<usize> = (0..size).collect();
            loop {
                subsets.push(indices.iter().map(|&i| columns[i].clone()).collect());
                // Next combination in lexicographic index order.
                let mut i = size;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if indices[i] != i + d - size {
                        indices[i] += 1;
                        for j in (i + 1)..size {
                            indices[j] = indices[j - 1] + 1;
                        }
                        break;
                    }
                    if i == 0 {
                        indices.clear();
                        break;
                    }
                }
                if indices.is_empty() {
                    break;
                }
            }
        } else {
            sampled = true;
            let cap = limits.per_size.unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, size as u64));
            let mut chosen: BTreeSet<Vec<usize>> = BTreeSet::new();
            while chosen.len() < cap {
                let mut pick: BTreeSet<usize> = BTreeSet::new();
                while pick.len() < size {
                    pick.insert(rng.random_range(0..d));
                }
                chosen.insert(pick.into_iter().collect());
            }
            for indices in chosen {
                subsets.push(indices.iter().map(|&i| columns[i].clone()).collect());
            }
        }
    }
    Ok((subsets, sampled))
}

/// Evaluate the localizer over beacon subsets of every admitted size.
///
/// Subsets are independent tasks evaluated in parallel; per-round seeds
/// derive from the config alone, so results do not depend on scheduling.
pub fn sweep_subsets(
    dense: &DenseDataset,
    method: &Method<'_>,
    cv: &CvConfig,
    limits: &SweepLimits,
) -> Result<SweepOutput, EvalError> {
    cv.validate()?;
    let mut columns = dense.beacon_columns.clone();
    columns.sort();
    let (subsets, sampled) = admitted_subsets(&columns, limits, cv.seed)?;
    let results: Result<Vec<SubsetResult>, EvalError> = subsets
        .into_par_iter()
        .map(|subset| {
            let selection: BTreeSet<String> = subset.iter().cloned().collect();
            let projected = dense.subset_columns(&selection)?;
            let rounds = evaluation_rounds(&projected, cv)?;
            let mut fold_accuracies = Vec::with_capacity(rounds.len());
            for (train, test) in &rounds {
                fold_accuracies.push(score_round(method, train, test)?);
            }
            Ok(SubsetResult::from_folds(subset, fold_accuracies))
        })
        .collect();
    let mut results = results?;
    results.sort_by(|a, b| a.size.cmp(&b.size).then_with(|| a.subset.cmp(&b.subset)));
    Ok(SweepOutput { results, sampled })
}

/// Five-number summary plus mean of the per-subset mean accuracies of one
/// size group.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeStats {
    pub size: usize,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl SizeStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Linear-interpolation (type-7) quantile of sorted values.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Group results by subset size and summarize each group.
pub fn group_stats(results: &[SubsetResult]) -> Vec<SizeStats> {
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for result in results {
        by_size
            .entry(result.size)
            .or_default()
            .push(result.mean_accuracy);
    }
    by_size
        .into_iter()
        .map(|(size, mut values)| {
            values.sort_by(f64::total_cmp);
            SizeStats {
                size,
                count: values.len(),
                min: values[0],
                q1: quantile(&values, 0.25),
                median: quantile(&values, 0.5),
                q3: quantile(&values, 0.75),
                max: values[values.len() - 1],
                mean: values.iter().sum::<f64>() / values.len() as f64,
            }
        })
        .collect()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |values: &[f64]| -> Vec<f64> {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut ranks = vec![0.0; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && values[order[j + 1]] == values[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &idx in &order[i..=j] {
                ranks[idx] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

/// Per-size winners and how often each beacon shows up in them.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyReport {
    /// `(size, winning subset, its mean accuracy)` per size.
    pub winners: Vec<(usize, Vec<String>, f64)>,
    /// Beacon label → number of winning subsets containing it.
    pub counts: BTreeMap<String, usize>,
}

/// For each subset size pick the best-scoring subset (ties go to the
/// lexicographically smallest) and count each member beacon across sizes.
pub fn beacon_frequency(results: &[SubsetResult]) -> FrequencyReport {
    let mut best: BTreeMap<usize, &SubsetResult> = BTreeMap::new();
    for result in results {
        best.entry(result.size)
            .and_modify(|current| {
                let better = result
                    .mean_accuracy
                    .total_cmp(&current.mean_accuracy)
                    .then_with(|| current.subset.cmp(&result.subset));
                if better == std::cmp::Ordering::Greater {
                    *current = result;
                }
            })
            .or_insert(result);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut winners = Vec::new();
    for (size, result) in best {
        for label in &result.subset {
            *counts.entry(label.clone()).or_insert(0) += 1;
        }
        winners.push((size, result.subset.clone(), result.mean_accuracy));
    }
    FrequencyReport { winners, counts }
}

/// One heatmap cell of the training-size study.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapCell {
    pub beacon_count: usize,
    pub samples_per_room: usize,
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Discrete derivative along the size axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeDelta {
    pub beacon_count: usize,
    pub from_size: usize,
    pub to_size: usize,
    pub accuracy_delta: f64,
}

/// Evenly spread `m` beacons over the sorted column order.
pub fn spread_subset(columns_sorted: &[String], m: usize) -> Vec<String> {
    let d = columns_sorted.len();
    assert!(m >= 1 && m <= d);
    if m == 1 {
        return vec![columns_sorted[0].clone()];
    }
    (0..m)
        .map(|i| {
            let idx = ((i as f64) * (d - 1) as f64 / (m - 1) as f64).round() as usize;
            columns_sorted[idx].clone()
        })
        .collect()
}

/// Accuracy as a function of training-set size and beacon count.
///
/// Per repeat, the dataset is split once and the held-out side stays fixed;
/// each cell subsamples `samples_per_room` training rows per room (seeded),
/// fits, and scores against the fixed held-out set. The beacon subset for a
/// count is the evenly spread selection over the sorted column order.
pub fn training_size_sweep(
    dense: &DenseDataset,
    sizes: &[usize],
    beacon_counts: &[usize],
    method: &Method<'_>,
    cv: &CvConfig,
) -> Result<(Vec<HeatmapCell>, Vec<SizeDelta>), EvalError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    cv.validate()?;
    let mut columns = dense.beacon_columns.clone();
    columns.sort();
    for &count in beacon_counts {
        if count == 0 || count > columns.len() {
            return Err(EvalError::BeaconCountTooLarge {
                requested: count,
                available: columns.len(),
            });
        }
    }

    let mut cells: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for repeat in 0..cv.repeats {
        let seed = derive_seed(cv.seed, repeat as u64);
        let (train_pool, held_out) = split(
            dense,
            SplitConfig {
                test_fraction: cv.test_fraction,
                seed,
            },
        )?;
        let available = train_pool
            .room_counts()
            .values()
            .min()
            .copied()
            .unwrap_or(0);
        for &count in beacon_counts {
            let subset: BTreeSet<String> = spread_subset(&columns, count).into_iter().collect();
            let train_projected = train_pool.subset_columns(&subset)?;
            let test_projected = held_out.subset_columns(&subset)?;
            for &size in sizes {
                if size > available {
                    return Err(EvalError::TrainingSizeTooLarge {
                        requested: size,
                        available,
                    });
                }
                let sub_seed = derive_seed(seed, (count * 1_000_003 + size) as u64);
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sub_seed);
                let mut per_room: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
                for (i, row) in train_projected.rows.iter().enumerate() {
                    per_room.entry(row.room.as_str()).or_default().push(i);
                }
                let mut keep = vec![false; train_projected.rows.len()];
                for (_, mut indices) in per_room {
                    indices.shuffle(&mut rng);
                    for &i in indices.iter().take(size) {
                        keep[i] = true;
                    }
                }
                let train_sub = DenseDataset {
                    beacon_columns: train_projected.beacon_columns.clone(),
                    rows: train_projected
                        .rows
                        .iter()
                        .zip(&keep)
                        .filter(|(_, &k)| k)
                        .map(|(r, _)| r.clone())
                        .collect(),
                };
                let accuracy = score_round(method, &train_sub, &test_projected)?;
                cells.entry((count, size)).or_default().push(accuracy);
            }
        }
    }

    let heatmap: Vec<HeatmapCell> = cells
        .into_iter()
        .map(|((beacon_count, samples_per_room), fold_accuracies)| {
            let mean =
                fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
            HeatmapCell {
                beacon_count,
                samples_per_room,
                mean_accuracy: mean,
                fold_accuracies,
            }
        })
        .collect();

    let mut sorted_sizes: Vec<usize> = sizes.to_vec();
    sorted_sizes.sort_unstable();
    sorted_sizes.dedup();
    let mut deltas = Vec::new();
    for &count in beacon_counts {
        for pair in sorted_sizes.windows(2) {
            let get = |s: usize| {
                heatmap
                    .iter()
                    .find(|c| c.beacon_count == count && c.samples_per_room == s)
                    .map(|c| c.mean_accuracy)
                    .expect("cell exists")
            };
            deltas.push(SizeDelta {
                beacon_count: count,
                from_size: pair[0],
                to_size: pair[1],
                accuracy_delta: get(pair[1]) - get(pair[0]),
            });
        }
    }
    Ok((heatmap, deltas))
}

/// CSV for subset-sweep results: one row per subset, members joined by `+`,
/// per-fold accuracies joined by `|`.
pub fn subset_results_to_csv(output: &SweepOutput) -> String {
    let mut out = String::from("size,subset,mean_accuracy,std_accuracy,fold_accuracies,sampled\n");
    for r in &output.results {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.size,
            r.subset.join("+"),
            r.mean_accuracy,
            r.std_accuracy,
            r.fold_accuracies
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join("|"),
            output.sampled,
        ));
    }
    out
}

pub fn subset_results_from_csv(text: &str) -> Result<SweepOutput, EvalError> {
    let mut results = Vec::new();
    let mut sampled = false;
    for (idx, line) in text.lines().enumerate().skip(1) {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(EvalError::ResultsParse {
                line: lineno,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let err = |msg: String| EvalError::ResultsParse { line: lineno, msg };
        let subset: Vec<String> = fields[1].split('+').map(str::to_string).collect();
        let fold_accuracies: Vec<f64> = fields[4]
            .split('|')
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(format!("bad fold accuracy: {e}")))?;
        results.push(SubsetResult {
            size: fields[0]
                .parse()
                .map_err(|e| err(format!("bad size: {e}")))?,
            subset,
            mean_accuracy: fields[2]
                .parse()
                .map_err(|e| err(format!("bad mean: {e}")))?,
            std_accuracy: fields[3]
                .parse()
                .map_err(|e| err(format!("bad std: {e}")))?,
            fold_accuracies,
        });
        sampled |= fields[5] == "true";
    }
    Ok(SweepOutput { results, sampled })
}
