//! Mislabel detection by resubstitution scoring.
//!
//! A naive Bayes model is fitted on the full training set, then every
//! instance is scored under its own recorded label. Instances the model
//! reproduces (prediction equals label) are "pure"; the smallest pure score
//! becomes a dynamic threshold, and every misclassified instance scoring
//! strictly below it is flagged as label noise. The threshold adapts to the
//! data instead of being a tuning constant: anything less plausible under
//! its own label than the least plausible correctly-classified instance is
//! deemed noise.
//!
//! Reported scores are log-space floats, but flagging decisions compare the
//! underlying exact count-ratio products, so an instance sitting exactly on
//! the threshold is never flagged or spared by a rounding artifact.

use alloc::vec::Vec;

use num_bigint::BigUint;
use thiserror::Error;

use crate::bayes::{BayesError, BayesModel};
use crate::model::{ClassId, Dataset};

/// What a resubstitution score measures: the likelihood of the instance
/// under its own label, or that likelihood times the label's prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreKind {
    #[default]
    Likelihood,
    Posterior,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Likelihood => "likelihood",
            ScoreKind::Posterior => "posterior",
        }
    }
}

/// Agreement between an instance's recorded label and the model's
/// resubstitution prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pure,
    Misclassified,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pure => "pure",
            Status::Misclassified => "misclassified",
        }
    }
}

/// One instance's resubstitution record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceScore {
    pub instance_id: usize,
    pub true_label: ClassId,
    pub predicted: ClassId,
    /// Natural-log score under the true label, per the chosen [`ScoreKind`].
    pub score: f64,
    /// Whether the score came from the add-one branch.
    pub smoothed: bool,
    pub status: Status,
}

/// Instances whose scores agree within the grouping tolerance; `score` is
/// the smallest member's value and stands for the group.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGroup {
    pub score: f64,
    pub members: Vec<usize>,
}

/// Relative tolerance for [`group_by_probability`]: two log scores a and b
/// belong together when |a - b| <= 1e-9 * max(1, |a|, |b|).
pub const GROUPING_TOLERANCE: f64 = 1e-9;

/// Everything the detector decided, plus the evidence it decided on.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub score_kind: ScoreKind,
    pub scores: Vec<InstanceScore>,
    /// Log-space threshold: the minimum pure score, or negative infinity
    /// when no instance is pure (then nothing can be flagged).
    pub threshold: f64,
    /// Flagged instance ids, ascending.
    pub noise_ids: Vec<usize>,
    /// Score clusters over all scored instances, ascending by score.
    pub groups: Vec<ProbabilityGroup>,
    /// Flagged count over dataset size.
    pub noise_fraction: f64,
}

impl NoiseReport {
    pub fn is_flagged(&self, instance_id: usize) -> bool {
        self.noise_ids.binary_search(&instance_id).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NoiseError {
    #[error("cannot score an empty dataset")]
    EmptyDataset,
    #[error("report does not match the dataset (instance ids out of range)")]
    ReportMismatch,
    #[error(transparent)]
    Bayes(BayesError),
}

impl From<BayesError> for NoiseError {
    fn from(err: BayesError) -> Self {
        match err {
            BayesError::EmptyDataset => NoiseError::EmptyDataset,
            other => NoiseError::Bayes(other),
        }
    }
}

/// Scores every instance under its own label and records the model's
/// resubstitution prediction. Output order is instance order.
pub fn score_instances(
    model: &BayesModel,
    dataset: &Dataset,
    kind: ScoreKind,
) -> Result<Vec<InstanceScore>, NoiseError> {
    let mut scores = Vec::with_capacity(dataset.len());
    for (id, inst) in dataset.instances().iter().enumerate() {
        let lik = match kind {
            ScoreKind::Likelihood => model.likelihood(&inst.values, inst.label)?,
            ScoreKind::Posterior => model.posterior_log_score(&inst.values, inst.label)?,
        };
        let predicted = model.predict(&inst.values)?.class;
        scores.push(InstanceScore {
            instance_id: id,
            true_label: inst.label,
            predicted,
            score: lik.log_prob,
            smoothed: lik.smoothed,
            status: if predicted == inst.label {
                Status::Pure
            } else {
                Status::Misclassified
            },
        });
    }
    Ok(scores)
}

/// Splits scores into (pure, misclassified), preserving input order.
pub fn partition(scores: &[InstanceScore]) -> (Vec<InstanceScore>, Vec<InstanceScore>) {
    scores
        .iter()
        .partition(|s| s.status == Status::Pure)
}

/// Minimum score among pure instances; negative infinity when none are
/// pure, below which no score can fall.
pub fn noise_threshold(pure: &[InstanceScore]) -> f64 {
    if pure.is_empty() {
        return f64::NEG_INFINITY;
    }
    pure.iter().map(|s| s.score).fold(f64::INFINITY, f64::min)
}

/// Clusters scores that agree within [`GROUPING_TOLERANCE`], ascending.
/// Each group's representative is its smallest score; members are listed by
/// (score, id). Groups partition the input: disjoint and covering.
pub fn group_by_probability(scores: &[InstanceScore]) -> Vec<ProbabilityGroup> {
    let mut order: Vec<&InstanceScore> = scores.iter().collect();
    order.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then(a.instance_id.cmp(&b.instance_id))
    });
    let mut groups: Vec<ProbabilityGroup> = Vec::new();
    for s in order {
        let fits = groups.last().is_some_and(|g| {
            let rep = g.score;
            let tol = GROUPING_TOLERANCE * max3(1.0, abs(rep), abs(s.score));
            abs(s.score - rep) <= tol
        });
        if fits {
            groups.last_mut().unwrap().members.push(s.instance_id);
        } else {
            groups.push(ProbabilityGroup {
                score: s.score,
                members: alloc::vec![s.instance_id],
            });
        }
    }
    groups
}

fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

fn max3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).max(c)
}

/// Runs the full detector with the default likelihood score.
pub fn detect_noise(dataset: &Dataset) -> Result<NoiseReport, NoiseError> {
    detect_noise_with(dataset, ScoreKind::default())
}

/// Runs the full detector: fit on everything, score by resubstitution,
/// threshold at the minimum pure score, flag misclassified instances
/// strictly below it. The strict comparison runs on exact count-ratio
/// products; the report carries their float projections.
pub fn detect_noise_with(dataset: &Dataset, kind: ScoreKind) -> Result<NoiseReport, NoiseError> {
    let model = BayesModel::fit(dataset)?;
    let include_prior = kind == ScoreKind::Posterior;
    let scores = score_instances(&model, dataset, kind)?;

    let mut exact: Vec<(BigUint, BigUint)> = Vec::with_capacity(dataset.len());
    for inst in dataset.instances() {
        exact.push(model.exact_score(&inst.values, inst.label, include_prior)?);
    }

    let mut threshold_exact: Option<&(BigUint, BigUint)> = None;
    for s in scores.iter().filter(|s| s.status == Status::Pure) {
        let candidate = &exact[s.instance_id];
        if threshold_exact.is_none_or(|best| ratio_lt(candidate, best)) {
            threshold_exact = Some(candidate);
        }
    }

    let noise_ids: Vec<usize> = match threshold_exact {
        Some(t) => scores
            .iter()
            .filter(|s| s.status == Status::Misclassified && ratio_lt(&exact[s.instance_id], t))
            .map(|s| s.instance_id)
            .collect(),
        None => Vec::new(),
    };

    let (pure, _) = partition(&scores);
    let threshold = noise_threshold(&pure);
    let groups = group_by_probability(&scores);
    let noise_fraction = noise_ids.len() as f64 / dataset.len() as f64;
    Ok(NoiseReport {
        score_kind: kind,
        scores,
        threshold,
        noise_ids,
        groups,
        noise_fraction,
    })
}

/// Exact a/b < c/d by cross-multiplication.
fn ratio_lt(a: &(BigUint, BigUint), b: &(BigUint, BigUint)) -> bool {
    &a.0 * &b.1 < &b.0 * &a.1
}

/// Copies the dataset without the flagged instances; survivors keep their
/// relative order and renumber to 0..len. The report must describe this
/// dataset (same size, ids in range).
pub fn eliminate(dataset: &Dataset, report: &NoiseReport) -> Result<Dataset, NoiseError> {
    if report.scores.len() != dataset.len()
        || report.noise_ids.iter().any(|&id| id >= dataset.len())
    {
        return Err(NoiseError::ReportMismatch);
    }
    let keep: Vec<usize> = (0..dataset.len())
        .filter(|&id| !report.is_flagged(id))
        .collect();
    Ok(dataset.subset(&keep))
}
