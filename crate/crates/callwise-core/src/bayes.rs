//! Count-based naive Bayes over interned categorical data.
//!
//! The model is nothing but integer count tables, so class priors and
//! per-attribute conditionals are reported as exact count ratios. Scoring
//! multiplies one conditional per attribute; a zero anywhere in a class's
//! product (or an empty class) switches every factor of that product to the
//! add-one estimate
//!
//! ```text
//! P = (n_c + k) / (N + n * k),   k = 1
//! ```
//!
//! with `N` the class count and `n` the number of distinct values the
//! attribute shows in training. Log-space sums keep long products from
//! underflowing, but `predict` settles the argmax by cross-multiplying the
//! exact integer products, so equal posteriors always fall back to class-set
//! order instead of depending on rounding.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use thiserror::Error;

use crate::model::{AttrIndex, AttributeSchema, ClassId, Dataset, ValueCode};

/// Estimator for conditionals: plain relative frequency, or the add-one
/// (Laplace) correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    Laplace,
}

/// Exact ratio of two training counts. Field equality is deliberate: 0/5
/// and 0/4 are different observations even though both evaluate to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub fn new(num: u64, den: u64) -> Self {
        debug_assert!(den > 0, "count ratio needs a positive denominator");
        Self { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Natural log of the ratio; minus infinity for a zero numerator.
    pub fn ln(self) -> f64 {
        libm::log(self.value())
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }
}

impl core::fmt::Display for Frac {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BayesError {
    #[error("cannot fit a model on an empty dataset")]
    EmptyDataset,
    #[error("attribute index {0} is out of range")]
    UnknownAttribute(usize),
    #[error("class id {0} is not in the class set")]
    UnknownClass(u16),
    #[error("value code {code} is out of range for attribute {attr}")]
    UnknownValue { attr: usize, code: u16 },
    #[error("expected {expected} attribute values, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("conditional for empty class id {0} is undefined without smoothing")]
    UndefinedConditional(u16),
    #[error("count tables disagree with the class counts")]
    InconsistentCounts,
}

/// Product of per-attribute conditionals for one class, in natural-log
/// space, plus whether the add-one branch was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Likelihood {
    pub log_prob: f64,
    pub smoothed: bool,
}

/// Winning class of a posterior argmax and its unnormalized log score
/// (log prior plus log likelihood).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: ClassId,
    pub log_score: f64,
}

/// Fitted count tables: class counts plus one (value x class) joint count
/// table per attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BayesModel {
    schema: AttributeSchema,
    total: usize,
    class_counts: Vec<usize>,
    /// `cond[attr][value][class]`, sized by the schema's domains.
    cond: Vec<Vec<Vec<usize>>>,
    /// Distinct values each attribute shows in training (the `n` of the
    /// add-one denominator). Never zero on a fitted model.
    value_cardinality: Vec<usize>,
}

impl BayesModel {
    /// Counts the dataset in a single pass. Instances are assumed to
    /// conform to their schema (see [`Dataset::validate`]).
    pub fn fit(dataset: &Dataset) -> Result<Self, BayesError> {
        if dataset.is_empty() {
            return Err(BayesError::EmptyDataset);
        }
        let schema = dataset.schema().clone();
        let mut class_counts = vec![0usize; schema.num_classes()];
        let mut cond: Vec<Vec<Vec<usize>>> = (0..schema.attr_count())
            .map(|attr| vec![vec![0usize; schema.num_classes()]; schema.domain_size(attr)])
            .collect();
        for inst in dataset.instances() {
            class_counts[inst.label.index()] += 1;
            for (attr, &code) in inst.values.iter().enumerate() {
                cond[attr][code.index()][inst.label.index()] += 1;
            }
        }
        let value_cardinality = cond
            .iter()
            .map(|table| {
                table
                    .iter()
                    .filter(|row| row.iter().any(|&c| c > 0))
                    .count()
            })
            .collect();
        Ok(Self {
            schema,
            total: dataset.len(),
            class_counts,
            cond,
            value_cardinality,
        })
    }

    /// Rebuilds a model from dumped count tables, re-deriving the totals
    /// and value cardinalities and checking that every attribute's table
    /// sums back to the class counts.
    pub fn from_parts(
        schema: AttributeSchema,
        class_counts: Vec<usize>,
        cond: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self, BayesError> {
        if class_counts.len() != schema.num_classes() || cond.len() != schema.attr_count() {
            return Err(BayesError::InconsistentCounts);
        }
        for (attr, table) in cond.iter().enumerate() {
            if table.len() != schema.domain_size(attr)
                || table.iter().any(|row| row.len() != schema.num_classes())
            {
                return Err(BayesError::InconsistentCounts);
            }
            for class in 0..schema.num_classes() {
                let column: usize = table.iter().map(|row| row[class]).sum();
                if column != class_counts[class] {
                    return Err(BayesError::InconsistentCounts);
                }
            }
        }
        let total: usize = class_counts.iter().sum();
        if total == 0 {
            return Err(BayesError::EmptyDataset);
        }
        let value_cardinality = cond
            .iter()
            .map(|table| {
                table
                    .iter()
                    .filter(|row| row.iter().any(|&c| c > 0))
                    .count()
            })
            .collect();
        Ok(Self {
            schema,
            total,
            class_counts,
            cond,
            value_cardinality,
        })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn class_count(&self, class: ClassId) -> usize {
        self.class_counts[class.index()]
    }

    pub fn value_cardinality(&self, attr: AttrIndex) -> usize {
        self.value_cardinality[attr]
    }

    /// Joint training count of (attribute = value) within a class. The
    /// out-of-domain code counts as zero.
    pub fn joint_count(&self, attr: AttrIndex, value: ValueCode, class: ClassId) -> usize {
        if value.is_out_of_domain() {
            0
        } else {
            self.cond[attr][value.index()][class.index()]
        }
    }

    fn check_class(&self, class: ClassId) -> Result<(), BayesError> {
        if class.index() >= self.schema.num_classes() {
            Err(BayesError::UnknownClass(class.0))
        } else {
            Ok(())
        }
    }

    fn check_value(&self, attr: AttrIndex, value: ValueCode) -> Result<(), BayesError> {
        if attr >= self.schema.attr_count() {
            return Err(BayesError::UnknownAttribute(attr));
        }
        if !value.is_out_of_domain() && value.index() >= self.schema.domain_size(attr) {
            return Err(BayesError::UnknownValue {
                attr,
                code: value.0,
            });
        }
        Ok(())
    }

    /// Class prior as the exact ratio class count over total.
    pub fn prior(&self, class: ClassId) -> Result<Frac, BayesError> {
        self.check_class(class)?;
        Ok(Frac::new(
            self.class_counts[class.index()] as u64,
            self.total as u64,
        ))
    }

    /// Prior used inside scoring: the plain ratio, except that a class with
    /// zero training instances takes the add-one estimate with the number
    /// of classes as the value count.
    fn scoring_prior(&self, class: ClassId) -> Frac {
        let cc = self.class_counts[class.index()];
        if cc == 0 {
            Frac::new(1, (self.total + self.schema.num_classes()) as u64)
        } else {
            Frac::new(cc as u64, self.total as u64)
        }
    }

    /// Single conditional P(value | class) under the chosen estimator.
    ///
    /// Without smoothing the ratio is joint count over class count, which
    /// is undefined for an empty class. With add-one smoothing it is
    /// (joint + 1) / (class count + observed values of the attribute); an
    /// out-of-domain value contributes a zero joint count.
    pub fn conditional(
        &self,
        attr: AttrIndex,
        value: ValueCode,
        class: ClassId,
        smoothing: Smoothing,
    ) -> Result<Frac, BayesError> {
        self.check_value(attr, value)?;
        self.check_class(class)?;
        let cc = self.class_counts[class.index()];
        let joint = self.joint_count(attr, value, class);
        match smoothing {
            Smoothing::None => {
                if cc == 0 {
                    Err(BayesError::UndefinedConditional(class.0))
                } else {
                    Ok(Frac::new(joint as u64, cc as u64))
                }
            }
            Smoothing::Laplace => Ok(Frac::new(
                (joint + 1) as u64,
                (cc + self.value_cardinality[attr]) as u64,
            )),
        }
    }

    /// The per-attribute factors of one class's likelihood product, as
    /// exact ratios, plus the smoothed flag. All factors come from the same
    /// estimator: plain frequencies when every one of them is positive,
    /// add-one for the whole product otherwise (also when the class has no
    /// training instances, whose plain factors would be undefined).
    pub(crate) fn factor_fracs(
        &self,
        values: &[ValueCode],
        class: ClassId,
    ) -> Result<(Vec<Frac>, bool), BayesError> {
        self.check_class(class)?;
        if values.len() != self.schema.attr_count() {
            return Err(BayesError::WrongArity {
                expected: self.schema.attr_count(),
                found: values.len(),
            });
        }
        for (attr, &value) in values.iter().enumerate() {
            self.check_value(attr, value)?;
        }
        let cc = self.class_counts[class.index()];
        let smoothed = cc == 0
            || values
                .iter()
                .enumerate()
                .any(|(attr, &v)| self.joint_count(attr, v, class) == 0);
        let estimator = if smoothed {
            Smoothing::Laplace
        } else {
            Smoothing::None
        };
        let factors = values
            .iter()
            .enumerate()
            .map(|(attr, &v)| self.conditional(attr, v, class, estimator))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((factors, smoothed))
    }

    /// Log of the likelihood product for one class, with its smoothed flag.
    /// An empty attribute list (zero-attribute schema) yields the empty
    /// product, log 0.0.
    pub fn likelihood(&self, values: &[ValueCode], class: ClassId) -> Result<Likelihood, BayesError> {
        let (factors, smoothed) = self.factor_fracs(values, class)?;
        Ok(Likelihood {
            log_prob: factors.iter().map(|f| f.ln()).sum(),
            smoothed,
        })
    }

    /// Argmax over classes of prior times likelihood.
    ///
    /// The comparison cross-multiplies the exact integer numerators and
    /// denominators of each class's product, so the result is free of
    /// rounding and a tie keeps the earliest class in class-set order. The
    /// reported score is the float log of the winning product.
    pub fn predict(&self, values: &[ValueCode]) -> Result<Prediction, BayesError> {
        let mut best: Option<(ClassId, BigUint, BigUint, f64)> = None;
        for class in self.schema.class_ids() {
            let (factors, _) = self.factor_fracs(values, class)?;
            let prior = self.scoring_prior(class);
            let mut num = BigUint::from(prior.num);
            let mut den = BigUint::from(prior.den);
            for f in &factors {
                num *= f.num;
                den *= f.den;
            }
            let log_score = prior.ln() + factors.iter().map(|f| f.ln()).sum::<f64>();
            let wins = match &best {
                None => true,
                Some((_, bnum, bden, _)) => &num * bden > bnum * &den,
            };
            if wins {
                best = Some((class, num, den, log_score));
            }
        }
        let (class, _, _, log_score) = best.expect("class set is never empty");
        Ok(Prediction { class, log_score })
    }

    /// Log of prior times likelihood for one class, with the likelihood's
    /// smoothed flag.
    pub(crate) fn posterior_log_score(
        &self,
        values: &[ValueCode],
        class: ClassId,
    ) -> Result<Likelihood, BayesError> {
        let lik = self.likelihood(values, class)?;
        Ok(Likelihood {
            log_prob: lik.log_prob + self.scoring_prior(class).ln(),
            smoothed: lik.smoothed,
        })
    }

    /// Exact numerator/denominator products used by the mislabel filter so
    /// its strict threshold comparison cannot be blurred by rounding.
    pub(crate) fn exact_score(
        &self,
        values: &[ValueCode],
        class: ClassId,
        include_prior: bool,
    ) -> Result<(BigUint, BigUint), BayesError> {
        let (factors, _) = self.factor_fracs(values, class)?;
        let (mut num, mut den) = if include_prior {
            let prior = self.scoring_prior(class);
            (BigUint::from(prior.num), BigUint::from(prior.den))
        } else {
            (BigUint::from(1u8), BigUint::from(1u8))
        };
        for f in &factors {
            num *= f.num;
            den *= f.den;
        }
        Ok((num, den))
    }
}
