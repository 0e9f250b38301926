//! Property-based invariants: probability normalization, fold partitioning,
//! flip accounting, tree support accounting, metric identities, and
//! segmentation coverage. Inputs are random but seed-derived, so failures
//! shrink to a reproducible tuple.

use callwise_core::bayes::{BayesModel, Smoothing};
use callwise_core::eval::{
    fmeasure, kfold_indices, precision, recall, run_pipeline, stratified_kfold_indices,
    ConfusionCounts, PipelineParams, Variant,
};
use callwise_core::ingest::{segment_time, DayGranularity, SegmentationConfig};
use callwise_core::model::{AttributeSchema, ClassId, Dataset, Instance, ValueCode};
use callwise_core::noise::{detect_noise_with, eliminate, ScoreKind, Status};
use callwise_core::synth::{bundled_personas, generate};
use callwise_core::tree::{build_tree, Node, TreeParams};
use chrono::NaiveDateTime;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(seed: u64, max_n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attrs = rng.random_range(1..=4usize);
    let classes = rng.random_range(2..=4usize);
    let n = rng.random_range(1..=max_n);
    let domains: Vec<usize> = (0..attrs).map(|_| rng.random_range(2..=4)).collect();
    let schema = AttributeSchema::new(
        domains
            .iter()
            .enumerate()
            .map(|(a, &d)| {
                (
                    format!("a{a}"),
                    (0..d).map(|v| format!("v{v}")).collect::<Vec<_>>(),
                )
            })
            .collect(),
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
    .unwrap();
    let instances = (0..n)
        .map(|_| {
            Instance::new(
                domains
                    .iter()
                    .map(|&d| ValueCode(rng.random_range(0..d) as u16))
                    .collect(),
                ClassId(rng.random_range(0..classes) as u16),
            )
        })
        .collect();
    Dataset::new(schema, instances)
}

proptest! {
    /// Add-one conditionals over an attribute's observed values sum to
    /// exactly 1 for every class, empty or not; plain frequencies do the
    /// same over the whole domain whenever the class is non-empty. Checked
    /// in integer arithmetic on the count ratios.
    #[test]
    fn conditionals_normalize(seed in any::<u64>()) {
        let ds = random_dataset(seed, 20);
        let model = BayesModel::fit(&ds).unwrap();
        let schema = ds.schema();
        for attr in 0..schema.attr_count() {
            let observed: Vec<ValueCode> = (0..schema.domain_size(attr))
                .map(|v| ValueCode(v as u16))
                .filter(|&v| {
                    schema
                        .class_ids()
                        .any(|c| model.joint_count(attr, v, c) > 0)
                })
                .collect();
            prop_assert_eq!(observed.len(), model.value_cardinality(attr));
            for class in schema.class_ids() {
                let smoothed: Vec<_> = observed
                    .iter()
                    .map(|&v| model.conditional(attr, v, class, Smoothing::Laplace).unwrap())
                    .collect();
                let den = smoothed[0].den;
                prop_assert!(smoothed.iter().all(|f| f.den == den));
                prop_assert_eq!(smoothed.iter().map(|f| f.num).sum::<u64>(), den);

                if model.class_count(class) > 0 {
                    let plain: Vec<_> = (0..schema.domain_size(attr))
                        .map(|v| {
                            model
                                .conditional(attr, ValueCode(v as u16), class, Smoothing::None)
                                .unwrap()
                        })
                        .collect();
                    prop_assert_eq!(
                        plain.iter().map(|f| f.num).sum::<u64>(),
                        model.class_count(class) as u64
                    );
                }
            }
        }
    }

    /// Fold index sets partition 0..n with sizes differing by at most one,
    /// the first n % k folds taking the extra instance, deterministically
    /// per seed.
    #[test]
    fn kfold_partitions_evenly(n in 1usize..200, folds in 2usize..12, seed in any::<u64>()) {
        prop_assume!(folds <= n);
        let sets = kfold_indices(n, folds, seed).unwrap();
        prop_assert_eq!(sets.len(), folds);
        let mut seen = vec![false; n];
        for (i, set) in sets.iter().enumerate() {
            prop_assert!(set.windows(2).all(|w| w[0] < w[1]), "fold {} not ascending", i);
            for &id in set {
                prop_assert!(!seen[id], "id {} in two folds", id);
                seen[id] = true;
            }
            let want = n / folds + usize::from(i < n % folds);
            prop_assert_eq!(set.len(), want, "fold {} size", i);
        }
        prop_assert!(seen.iter().all(|&s| s));
        prop_assert_eq!(&kfold_indices(n, folds, seed).unwrap(), &sets);
    }

    /// Stratified folds additionally balance every class to within one
    /// instance across folds.
    #[test]
    fn stratified_folds_balance_classes(seed in any::<u64>(), folds in 2usize..6) {
        let ds = random_dataset(seed, 60);
        prop_assume!(ds.len() >= folds);
        let sets = stratified_kfold_indices(&ds, folds, seed).unwrap();
        let mut seen = vec![false; ds.len()];
        for set in &sets {
            for &id in set {
                prop_assert!(!seen[id]);
                seen[id] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        for class in ds.schema().class_ids() {
            let per_fold: Vec<usize> = sets
                .iter()
                .map(|set| {
                    set.iter()
                        .filter(|&&id| ds.instance(id).label == class)
                        .count()
                })
                .collect();
            let lo = per_fold.iter().min().unwrap();
            let hi = per_fold.iter().max().unwrap();
            prop_assert!(hi - lo <= 1, "class {:?} spread {:?}", class, per_fold);
        }
    }

    /// Flagged instances are exactly a low-scoring subset of the
    /// misclassified ones, never pure, and elimination drops just them.
    /// The flag decision itself is exact rational arithmetic, so the
    /// reported float scores only bound it up to rounding; the bit-exact
    /// check against the reference implementation lives in the oracle
    /// agreement suite.
    #[test]
    fn noise_flags_only_low_scoring_misclassified(seed in any::<u64>(), posterior in any::<bool>()) {
        let ds = random_dataset(seed, 25);
        let kind = if posterior { ScoreKind::Posterior } else { ScoreKind::Likelihood };
        let report = detect_noise_with(&ds, kind).unwrap();
        for score in &report.scores {
            let flagged = report.is_flagged(score.instance_id);
            let eps = 1e-9 * score.score.abs().max(report.threshold.abs()).max(1.0);
            match score.status {
                Status::Pure => {
                    prop_assert!(!flagged);
                    prop_assert!(score.score >= report.threshold);
                }
                Status::Misclassified => {
                    if score.score < report.threshold - eps {
                        prop_assert!(flagged);
                    }
                    if score.score > report.threshold + eps {
                        prop_assert!(!flagged);
                    }
                }
            }
        }
        let cleaned = eliminate(&ds, &report).unwrap();
        prop_assert_eq!(cleaned.len(), ds.len() - report.noise_ids.len());
        let survivors: Vec<usize> =
            (0..ds.len()).filter(|&id| !report.is_flagged(id)).collect();
        for (new_id, &old_id) in survivors.iter().enumerate() {
            prop_assert_eq!(cleaned.instance(new_id), ds.instance(old_id));
        }
    }

    /// The generator flips exactly floor(rate * n) labels, records each
    /// pre-flip label faithfully, and leaves every unflipped label equal to
    /// the persona's rule label. Same seed, same output.
    #[test]
    fn synthetic_flip_accounting_is_exact(
        which in 0usize..3,
        n in 1usize..300,
        rate in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let persona = bundled_personas().swap_remove(which);
        let (ds, mask) = generate(&persona, n, rate, seed).unwrap();
        prop_assert_eq!(ds.len(), n);
        prop_assert_eq!(mask.flips.len(), (rate * n as f64).floor() as usize);
        prop_assert_eq!(mask.requested_rate, rate);
        prop_assert_eq!(mask.realized_rate, mask.flips.len() as f64 / n as f64);
        prop_assert!(mask.flips.windows(2).all(|w| w[0].0 < w[1].0));

        let mut flipped = vec![None; n];
        for &(id, original) in &mask.flips {
            prop_assert!(id < n);
            flipped[id] = Some(original);
        }
        for (id, inst) in ds.instances().iter().enumerate() {
            let rule_label = persona.label(&inst.values);
            match flipped[id] {
                Some(original) => {
                    prop_assert_eq!(original, rule_label);
                    prop_assert_ne!(inst.label, original);
                }
                None => prop_assert_eq!(inst.label, rule_label),
            }
        }

        let again = generate(&persona, n, rate, seed).unwrap();
        prop_assert_eq!(again.0.instances(), ds.instances());
        prop_assert_eq!(again.1.flips, mask.flips);
    }

    /// Every split's support equals the sum of its children's supports and
    /// the root accounts for the whole dataset.
    #[test]
    fn tree_supports_are_conserved(seed in any::<u64>()) {
        let ds = random_dataset(seed, 40);
        let tree = build_tree(&ds, TreeParams::default()).unwrap();

        fn check(node: &Node) -> Result<usize, TestCaseError> {
            match node {
                Node::Leaf { support, .. } => Ok(*support),
                Node::Split { support, children, .. } => {
                    prop_assert!(!children.is_empty());
                    prop_assert!(children.windows(2).all(|w| w[0].0 < w[1].0));
                    let sum = children
                        .iter()
                        .map(|(_, child)| check(child))
                        .sum::<Result<usize, _>>()?;
                    prop_assert_eq!(sum, *support);
                    Ok(*support)
                }
            }
        }
        prop_assert_eq!(check(tree.root())?, ds.len());
        prop_assert_eq!(
            tree.extract_rules().iter().map(|r| r.support).sum::<usize>(),
            ds.len()
        );
        prop_assert_eq!(tree.extract_rules().len(), tree.leaf_count());
    }

    /// Per-class precision/recall stay in [0, 1], the harmonic mean stays
    /// between them, and correct predictions are the diagonal sum.
    #[test]
    fn confusion_metrics_stay_bounded(cells in proptest::collection::vec((0u16..4, 0u16..4), 1..120)) {
        let mut counts = ConfusionCounts::new(4);
        for &(actual, predicted) in &cells {
            counts.record(ClassId(actual), ClassId(predicted));
        }
        prop_assert_eq!(counts.total(), cells.len());
        let mut diagonal = 0;
        for c in 0..4u16 {
            let class = ClassId(c);
            let p = precision(&counts, class);
            let r = recall(&counts, class);
            let f = fmeasure(&counts, class);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!(f >= p.min(r) && f <= p.max(r), "f={} p={} r={}", f, p, r);
            diagonal += counts.true_positives(class);
        }
        prop_assert_eq!(counts.correct(), diagonal);
        prop_assert_eq!(counts.accuracy(), diagonal as f64 / cells.len() as f64);
    }

    /// Time segmentation is a partition: each timestamp maps to exactly one
    /// segment whose printed bounds really bracket it.
    #[test]
    fn segment_bounds_bracket_their_timestamps(
        mut raw_cuts in proptest::collection::btree_set(1u16..1440, 0..5),
        minute_of_week in 0u32..(7 * 1440),
        weekend_granularity in any::<bool>(),
    ) {
        raw_cuts.insert(1440);
        let granularity = if weekend_granularity {
            DayGranularity::WeekdayWeekend
        } else {
            DayGranularity::DayOfWeek
        };
        let config = SegmentationConfig::new(raw_cuts.into_iter().collect(), granularity).unwrap();
        let t = NaiveDateTime::parse_from_str("2004-03-01T00:00:00", "%Y-%m-%dT%H:%M:%S")
            .unwrap()
            + chrono::Duration::minutes(minute_of_week as i64);
        let label = segment_time(t, &config);

        let (day, rest) = label.split_once('[').unwrap();
        let bounds = rest.strip_suffix(']').unwrap();
        let (start, end) = bounds.split_once('-').unwrap();
        let to_minutes = |s: &str| -> u32 {
            let (h, m) = s.split_once(':').unwrap();
            h.parse::<u32>().unwrap() * 60 + m.parse::<u32>().unwrap()
        };
        let minute_of_day = minute_of_week % 1440;
        prop_assert!(to_minutes(start) <= minute_of_day);
        prop_assert!(minute_of_day < to_minutes(end));
        match granularity {
            DayGranularity::DayOfWeek => {
                let days = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
                prop_assert_eq!(day, days[(minute_of_week / 1440) as usize]);
            }
            DayGranularity::WeekdayWeekend => {
                let weekend = minute_of_week / 1440 >= 5;
                prop_assert_eq!(day, if weekend { "Weekend" } else { "Weekday" });
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The cross-validation report's weighted recall is bit-identical to
    /// accuracy in every fold and in the aggregate, and fold accuracies
    /// average to the aggregate accuracy.
    #[test]
    fn weighted_recall_equals_accuracy_everywhere(seed in any::<u64>(), robust in any::<bool>()) {
        let persona = bundled_personas().swap_remove(seed as usize % 3);
        let (ds, _) = generate(&persona, 120, 0.1, seed).unwrap();
        let params = PipelineParams { folds: 5, ..PipelineParams::default() };
        let variant = if robust { Variant::Robust } else { Variant::Base };
        let report = run_pipeline(&ds, variant, &params, seed).unwrap();

        prop_assert_eq!(report.folds.len(), 5);
        for fold in &report.folds {
            prop_assert_eq!(fold.weighted.recall.to_bits(), fold.accuracy.to_bits());
            prop_assert!(!fold.used_raw_fallback);
        }
        prop_assert_eq!(
            report.aggregate.weighted.recall.to_bits(),
            report.aggregate.accuracy.to_bits()
        );
        let mean = report.folds.iter().map(|f| f.accuracy).sum::<f64>() / 5.0;
        prop_assert!((report.aggregate.accuracy - mean).abs() < 1e-12);
    }
}
