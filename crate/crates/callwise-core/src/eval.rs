//! Cross-validated evaluation and the raw-versus-filtered training
//! comparison.
//!
//! Two pipeline variants share one fold partition: `Base` trains a tree on
//! each raw training fold, `Robust` first runs the mislabel filter on the
//! training fold (never on test data) and trains on what survives. Metrics
//! are per-class precision, recall, and f-measure plus support-weighted
//! averages; aggregates are plain means over folds.
//!
//! Determinism contract: (dataset, variant, params, seed) fixes every
//! number in the report. Fold shuffling uses a seeded ChaCha stream, fold
//! contents are kept in ascending instance order, and aggregation runs in
//! fold order.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ClassId, Dataset};
use crate::noise::{self, NoiseError, ScoreKind};
use crate::tree::{build_tree, TreeError, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Base,
    Robust,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Robust => "robust",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineParams {
    pub folds: usize,
    pub tree: TreeParams,
    pub score: ScoreKind,
    /// When set, folds balance class proportions instead of sampling
    /// uniformly.
    pub stratified: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            folds: 10,
            tree: TreeParams::default(),
            score: ScoreKind::default(),
            stratified: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cross-validation needs at least 2 folds, got {0}")]
    InvalidFoldCount(usize),
    #[error("dataset has {len} instances, fewer than {folds} folds")]
    DatasetTooSmall { len: usize, folds: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Row-major confusion matrix: `count(actual, predicted)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    matrix: Vec<Vec<usize>>,
    total: usize,
}

impl ConfusionCounts {
    pub fn new(num_classes: usize) -> Self {
        Self {
            matrix: vec![vec![0; num_classes]; num_classes],
            total: 0,
        }
    }

    pub fn record(&mut self, actual: ClassId, predicted: ClassId) {
        self.matrix[actual.index()][predicted.index()] += 1;
        self.total += 1;
    }

    pub fn num_classes(&self) -> usize {
        self.matrix.len()
    }

    pub fn count(&self, actual: ClassId, predicted: ClassId) -> usize {
        self.matrix[actual.index()][predicted.index()]
    }

    pub fn true_positives(&self, class: ClassId) -> usize {
        self.matrix[class.index()][class.index()]
    }

    pub fn false_positives(&self, class: ClassId) -> usize {
        let c = class.index();
        self.matrix
            .iter()
            .enumerate()
            .filter(|&(actual, _)| actual != c)
            .map(|(_, row)| row[c])
            .sum()
    }

    pub fn false_negatives(&self, class: ClassId) -> usize {
        let c = class.index();
        self.matrix[c]
            .iter()
            .enumerate()
            .filter(|&(predicted, _)| predicted != c)
            .map(|(_, &n)| n)
            .sum()
    }

    /// True occurrences of the class among recorded instances.
    pub fn support(&self, class: ClassId) -> usize {
        self.matrix[class.index()].iter().sum()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn correct(&self) -> usize {
        (0..self.matrix.len()).map(|c| self.matrix[c][c]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct() as f64 / self.total as f64
        }
    }
}

/// TP / (TP + FP); 0 when the class was never predicted.
pub fn precision(counts: &ConfusionCounts, class: ClassId) -> f64 {
    let tp = counts.true_positives(class);
    let denom = tp + counts.false_positives(class);
    if denom == 0 {
        0.0
    } else {
        tp as f64 / denom as f64
    }
}

/// TP / (TP + FN); 0 when the class never occurs.
pub fn recall(counts: &ConfusionCounts, class: ClassId) -> f64 {
    let tp = counts.true_positives(class);
    let denom = tp + counts.false_negatives(class);
    if denom == 0 {
        0.0
    } else {
        tp as f64 / denom as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0. The result is
/// clamped into [min(p, r), max(p, r)] so the harmonic-mean bound holds
/// bit-for-bit, not just up to rounding.
pub fn fmeasure(counts: &ConfusionCounts, class: ClassId) -> f64 {
    let p = precision(counts, class);
    let r = recall(counts, class);
    if p + r == 0.0 {
        return 0.0;
    }
    let h = 2.0 * p * r / (p + r);
    h.max(p.min(r)).min(p.max(r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub class: ClassId,
    /// True occurrences in the scored set (summed across folds in
    /// aggregates).
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
}

/// Support-weighted averages across classes. The weighted recall is
/// written as correct/total directly, which makes it identical to
/// accuracy rather than merely close to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub fold: usize,
    /// Instance ids (in the parent dataset) held out for testing,
    /// ascending.
    pub test_ids: Vec<usize>,
    pub counts: ConfusionCounts,
    pub per_class: Vec<ClassMetrics>,
    pub weighted: WeightedMetrics,
    pub accuracy: f64,
    /// Fraction of the training fold flagged as mislabeled; `None` for the
    /// base variant.
    pub noise_fraction: Option<f64>,
    /// Set when elimination would have emptied the training fold and the
    /// raw fold was used instead.
    pub used_raw_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// Per-class fold means; support is the class's total test occurrences.
    pub per_class: Vec<ClassMetrics>,
    pub weighted: WeightedMetrics,
    pub accuracy: f64,
    pub noise_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub variant: Variant,
    pub seed: u64,
    pub folds: Vec<FoldReport>,
    pub aggregate: Aggregate,
}

/// Paired runs over identical fold partitions; deltas are robust minus
/// base on the fold-mean weighted metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub base: EvalReport,
    pub robust: EvalReport,
}

impl Comparison {
    pub fn delta_precision(&self) -> f64 {
        self.robust.aggregate.weighted.precision - self.base.aggregate.weighted.precision
    }

    pub fn delta_recall(&self) -> f64 {
        self.robust.aggregate.weighted.recall - self.base.aggregate.weighted.recall
    }

    pub fn delta_fmeasure(&self) -> f64 {
        self.robust.aggregate.weighted.fmeasure - self.base.aggregate.weighted.fmeasure
    }

    pub fn delta_accuracy(&self) -> f64 {
        self.robust.aggregate.accuracy - self.base.aggregate.accuracy
    }
}

fn check_fold_request(len: usize, folds: usize) -> Result<(), EvalError> {
    if folds < 2 {
        return Err(EvalError::InvalidFoldCount(folds));
    }
    if len < folds {
        return Err(EvalError::DatasetTooSmall { len, folds });
    }
    Ok(())
}

/// Seeded shuffle of 0..n cut into `folds` test sets whose sizes differ by
/// at most one (earlier folds take the remainder). Each set is returned in
/// ascending order.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    check_fold_request(n, folds)?;
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / folds;
    let remainder = n % folds;
    let mut sets = Vec::with_capacity(folds);
    let mut cursor = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < remainder);
        let mut set: Vec<usize> = ids[cursor..cursor + size].to_vec();
        set.sort_unstable();
        sets.push(set);
        cursor += size;
    }
    Ok(sets)
}

/// Class-balanced variant: each class's ids are shuffled and dealt
/// round-robin across folds, the deal cursor carrying over between classes
/// so overall sizes still differ by at most one.
pub fn stratified_kfold_indices(
    dataset: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    check_fold_request(dataset.len(), folds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.schema().num_classes()];
    for (id, inst) in dataset.instances().iter().enumerate() {
        by_class[inst.label.index()].push(id);
    }
    let mut sets = vec![Vec::new(); folds];
    let mut cursor = 0;
    for group in &mut by_class {
        group.shuffle(&mut rng);
        for &id in group.iter() {
            sets[cursor].push(id);
            cursor = (cursor + 1) % folds;
        }
    }
    for set in &mut sets {
        set.sort_unstable();
    }
    Ok(sets)
}

/// (train, test) dataset pairs from an unstratified split; every instance
/// tests exactly once.
pub fn kfold_split(
    dataset: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<(Dataset, Dataset)>, EvalError> {
    let sets = kfold_indices(dataset.len(), folds, seed)?;
    Ok(sets
        .iter()
        .map(|test_ids| {
            let train_ids = complement(dataset.len(), test_ids);
            (dataset.subset(&train_ids), dataset.subset(test_ids))
        })
        .collect())
}

/// Ascending ids in 0..n absent from the (ascending) exclusion list.
fn complement(n: usize, excluded: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - excluded.len());
    let mut skip = excluded.iter().peekable();
    for id in 0..n {
        if skip.peek() == Some(&&id) {
            skip.next();
        } else {
            out.push(id);
        }
    }
    out
}

fn class_metrics(counts: &ConfusionCounts) -> Vec<ClassMetrics> {
    (0..counts.num_classes())
        .map(|c| {
            let class = ClassId(c as u16);
            ClassMetrics {
                class,
                support: counts.support(class),
                precision: precision(counts, class),
                recall: recall(counts, class),
                fmeasure: fmeasure(counts, class),
            }
        })
        .collect()
}

fn weighted_metrics(counts: &ConfusionCounts, per_class: &[ClassMetrics]) -> WeightedMetrics {
    let total = counts.total();
    if total == 0 {
        return WeightedMetrics {
            precision: 0.0,
            recall: 0.0,
            fmeasure: 0.0,
        };
    }
    let mut p = 0.0;
    let mut f = 0.0;
    for m in per_class {
        let w = m.support as f64 / total as f64;
        p += w * m.precision;
        f += w * m.fmeasure;
    }
    WeightedMetrics {
        precision: p,
        recall: counts.accuracy(),
        fmeasure: f,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for value in values {
        sum += value;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn aggregate(folds: &[FoldReport], num_classes: usize) -> Aggregate {
    let per_class = (0..num_classes)
        .map(|c| ClassMetrics {
            class: ClassId(c as u16),
            support: folds.iter().map(|f| f.per_class[c].support).sum(),
            precision: mean(folds.iter().map(|f| f.per_class[c].precision)),
            recall: mean(folds.iter().map(|f| f.per_class[c].recall)),
            fmeasure: mean(folds.iter().map(|f| f.per_class[c].fmeasure)),
        })
        .collect();
    let weighted = WeightedMetrics {
        precision: mean(folds.iter().map(|f| f.weighted.precision)),
        recall: mean(folds.iter().map(|f| f.weighted.recall)),
        fmeasure: mean(folds.iter().map(|f| f.weighted.fmeasure)),
    };
    let noise_fraction = if folds.iter().all(|f| f.noise_fraction.is_some()) {
        Some(mean(folds.iter().filter_map(|f| f.noise_fraction)))
    } else {
        None
    };
    Aggregate {
        per_class,
        weighted,
        accuracy: mean(folds.iter().map(|f| f.accuracy)),
        noise_fraction,
    }
}

/// Cross-validates one pipeline variant. The robust variant filters each
/// training fold before growing its tree; test folds are never filtered.
pub fn run_pipeline(
    dataset: &Dataset,
    variant: Variant,
    params: &PipelineParams,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let test_sets = if params.stratified {
        stratified_kfold_indices(dataset, params.folds, seed)?
    } else {
        kfold_indices(dataset.len(), params.folds, seed)?
    };
    let num_classes = dataset.schema().num_classes();
    let mut folds = Vec::with_capacity(test_sets.len());
    for (fold, test_ids) in test_sets.into_iter().enumerate() {
        let train_ids = complement(dataset.len(), &test_ids);
        let train = dataset.subset(&train_ids);

        let mut noise_fraction = None;
        let mut used_raw_fallback = false;
        let model_train = match variant {
            Variant::Base => train,
            Variant::Robust => {
                let report = noise::detect_noise_with(&train, params.score)?;
                noise_fraction = Some(report.noise_fraction);
                let quality = noise::eliminate(&train, &report)?;
                if quality.is_empty() {
                    used_raw_fallback = true;
                    train
                } else {
                    quality
                }
            }
        };

        let tree = build_tree(&model_train, params.tree)?;
        let mut counts = ConfusionCounts::new(num_classes);
        for &id in &test_ids {
            let inst = dataset.instance(id);
            counts.record(inst.label, tree.predict(&inst.values));
        }
        let per_class = class_metrics(&counts);
        let weighted = weighted_metrics(&counts, &per_class);
        let accuracy = counts.accuracy();
        folds.push(FoldReport {
            fold,
            test_ids,
            counts,
            per_class,
            weighted,
            accuracy,
            noise_fraction,
            used_raw_fallback,
        });
    }
    let aggregate = aggregate(&folds, num_classes);
    Ok(EvalReport {
        variant,
        seed,
        folds,
        aggregate,
    })
}

/// Runs both variants over the identical fold partition.
pub fn compare(
    dataset: &Dataset,
    params: &PipelineParams,
    seed: u64,
) -> Result<Comparison, EvalError> {
    let base = run_pipeline(dataset, Variant::Base, params, seed)?;
    let robust = run_pipeline(dataset, Variant::Robust, params, seed)?;
    Ok(Comparison { base, robust })
}
