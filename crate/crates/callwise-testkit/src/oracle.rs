//! Brute-force reference implementations in exact rational arithmetic.
//!
//! These recompute classifier math straight from the defining formulas,
//! with `BigRational` scores instead of log-space floats, so the fast
//! implementations can be checked for bit-for-bit agreement on argmax and
//! flagging decisions. Keep this file free of calls into the modules it
//! verifies: it may share the data model, never the computation.

use std::collections::BTreeSet;

use callwise_core::{ClassId, Dataset, ValueCode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Count tables recomputed the obvious way, plus exact-rational scoring.
pub struct NbOracle {
    total: u64,
    num_classes: usize,
    class_counts: Vec<u64>,
    /// `value_counts[attr][class]` maps value code -> joint count.
    value_counts: Vec<Vec<std::collections::BTreeMap<u16, u64>>>,
    /// Distinct values observed per attribute.
    observed: Vec<BTreeSet<u16>>,
}

impl NbOracle {
    pub fn fit(ds: &Dataset) -> Self {
        assert!(!ds.is_empty(), "oracle needs a non-empty dataset");
        let attrs = ds.schema().attr_count();
        let num_classes = ds.schema().num_classes();
        let mut class_counts = vec![0u64; num_classes];
        let mut value_counts =
            vec![vec![std::collections::BTreeMap::new(); num_classes]; attrs];
        let mut observed = vec![BTreeSet::new(); attrs];
        for inst in ds.instances() {
            class_counts[inst.label.index()] += 1;
            for (attr, code) in inst.values.iter().enumerate() {
                observed[attr].insert(code.0);
                *value_counts[attr][inst.label.index()]
                    .entry(code.0)
                    .or_insert(0) += 1;
            }
        }
        Self {
            total: ds.len() as u64,
            num_classes,
            class_counts,
            value_counts,
            observed,
        }
    }

    fn joint_count(&self, attr: usize, value: ValueCode, class: ClassId) -> u64 {
        self.value_counts[attr][class.index()]
            .get(&value.0)
            .copied()
            .unwrap_or(0)
    }

    /// Product of per-attribute conditionals for one class. If the class is
    /// empty or any plain factor is zero, every factor is recomputed with
    /// the add-one estimate; the flag reports which branch was taken.
    pub fn likelihood(&self, values: &[ValueCode], class: ClassId) -> (BigRational, bool) {
        let cc = self.class_counts[class.index()];
        let needs_smoothing = cc == 0
            || values
                .iter()
                .enumerate()
                .any(|(attr, &v)| self.joint_count(attr, v, class) == 0);
        let mut product = BigRational::one();
        for (attr, &v) in values.iter().enumerate() {
            let count = self.joint_count(attr, v, class);
            let factor = if needs_smoothing {
                ratio(count + 1, cc + self.observed[attr].len() as u64)
            } else {
                ratio(count, cc)
            };
            product *= factor;
        }
        (product, needs_smoothing)
    }

    /// Relative class frequency; an empty class takes the add-one estimate
    /// with the number of classes as the value count.
    pub fn scoring_prior(&self, class: ClassId) -> BigRational {
        let cc = self.class_counts[class.index()];
        if cc == 0 {
            ratio(1, self.total + self.num_classes as u64)
        } else {
            ratio(cc, self.total)
        }
    }

    pub fn posterior_score(&self, values: &[ValueCode], class: ClassId) -> (BigRational, bool) {
        let (lik, smoothed) = self.likelihood(values, class);
        (lik * self.scoring_prior(class), smoothed)
    }

    /// Exact argmax of prior times likelihood; ties go to the earlier class.
    pub fn predict(&self, values: &[ValueCode]) -> ClassId {
        let mut best = ClassId(0);
        let mut best_score = self.posterior_score(values, best).0;
        for idx in 1..self.num_classes {
            let class = ClassId(idx as u16);
            let score = self.posterior_score(values, class).0;
            if score > best_score {
                best = class;
                best_score = score;
            }
        }
        best
    }
}

/// Outcome of the reference mislabel scan.
pub struct NoiseOracleReport {
    pub pure_ids: Vec<usize>,
    pub mis_ids: Vec<usize>,
    /// Exact minimum score among pure instances; `None` when none are pure
    /// (an unbounded-below threshold that can flag nothing).
    pub threshold: Option<BigRational>,
    pub flagged: Vec<usize>,
}

/// Re-derives the mislabel decision from scratch: score every instance
/// under its own label (optionally times the class prior), split into pure
/// and misclassified by resubstitution, take the exact minimum pure score,
/// and flag every misclassified instance scoring strictly below it.
pub fn noise_oracle(ds: &Dataset, include_prior: bool) -> NoiseOracleReport {
    let oracle = NbOracle::fit(ds);
    let mut scores = Vec::with_capacity(ds.len());
    let mut pure_ids = Vec::new();
    let mut mis_ids = Vec::new();
    for (id, inst) in ds.instances().iter().enumerate() {
        let score = if include_prior {
            oracle.posterior_score(&inst.values, inst.label).0
        } else {
            oracle.likelihood(&inst.values, inst.label).0
        };
        if oracle.predict(&inst.values) == inst.label {
            pure_ids.push(id);
        } else {
            mis_ids.push(id);
        }
        scores.push(score);
    }
    let threshold = pure_ids.iter().map(|&id| scores[id].clone()).min();
    let flagged = match &threshold {
        Some(t) => mis_ids
            .iter()
            .copied()
            .filter(|&id| scores[id] < *t)
            .collect(),
        None => Vec::new(),
    };
    NoiseOracleReport {
        pure_ids,
        mis_ids,
        threshold,
        flagged,
    }
}

/// Straightforward gain-ratio recomputation: entropy in bits, information
/// gain over the attribute's observed partition, divided by the split
/// information (zero when the split information vanishes).
pub fn gain_ratio_oracle(ds: &Dataset, attr: usize) -> f64 {
    fn entropy(counts: &[u64], total: u64) -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum()
    }

    let n = ds.len() as u64;
    if n == 0 {
        return 0.0;
    }
    let num_classes = ds.schema().num_classes();
    let mut class_counts = vec![0u64; num_classes];
    let mut by_value: std::collections::BTreeMap<u16, Vec<u64>> = Default::default();
    for inst in ds.instances() {
        class_counts[inst.label.index()] += 1;
        by_value
            .entry(inst.values[attr].0)
            .or_insert_with(|| vec![0u64; num_classes])[inst.label.index()] += 1;
    }
    let base = entropy(&class_counts, n);
    let mut remainder = 0.0;
    let mut split_info = 0.0;
    for counts in by_value.values() {
        let nv: u64 = counts.iter().sum();
        let w = nv as f64 / n as f64;
        remainder += w * entropy(counts, nv);
        split_info -= w * w.log2();
    }
    if split_info == 0.0 {
        return 0.0;
    }
    (base - remainder) / split_info
}
