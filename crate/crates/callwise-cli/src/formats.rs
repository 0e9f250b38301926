//! Text formats for every pipeline artifact. All of them are plain
//! comma-delimited UTF-8 with optional `#` metadata lines, written
//! deterministically: the same value in the same run order always produces
//! the same bytes. Floats are printed with Rust's shortest round-trip
//! formatting.
//!
//! Only the formats that later stages consume get parsers (datasets, model
//! dumps, masks); report exports are write-only.

use std::fmt::Write as _;

use callwise_core::bayes::BayesModel;
use callwise_core::eval::{Comparison, EvalReport};
use callwise_core::ingest::RelationshipRegistry;
use callwise_core::model::{AttributeSchema, ClassId, Dataset, Instance, ValueCode};
use callwise_core::noise::{NoiseReport, ScoreKind};
use callwise_core::synth::NoiseMask;
use callwise_core::tree::{DecisionTree, Node, PredictionRule};
use thiserror::Error;

/// Name of the label column closing every dataset header.
pub const BEHAVIOR_COLUMN: &str = "behavior";

const CLASSES_PREFIX: &str = "# classes: ";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: expected {expected} fields, found {found}")]
    WrongFieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: empty value")]
    EmptyValue { line: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing header row")]
    MissingHeader,
    #[error("dataset header must end with the `{BEHAVIOR_COLUMN}` column")]
    MissingBehaviorColumn,
    #[error("value {value:?} contains the field delimiter")]
    DelimiterInValue { value: String },
    #[error("count tables are inconsistent: {0}")]
    BadCounts(callwise_core::bayes::BayesError),
}

fn check_writable(value: &str) -> Result<(), FormatError> {
    if value.contains(',') || value.contains('\n') {
        return Err(FormatError::DelimiterInValue {
            value: value.to_owned(),
        });
    }
    Ok(())
}

/// Serializes a dataset: a class-set metadata line (order defines the
/// class ids on reload, observed or not), the header row, one instance per
/// row. Values containing the delimiter are rejected rather than escaped.
pub fn render_dataset(dataset: &Dataset) -> Result<String, FormatError> {
    let schema = dataset.schema();
    let mut out = String::new();
    for class in schema.classes() {
        check_writable(class)?;
    }
    out.push_str(CLASSES_PREFIX);
    out.push_str(&schema.classes().join(","));
    out.push('\n');

    for name in schema.attribute_names() {
        check_writable(name)?;
    }
    let mut header: Vec<&str> = schema.attribute_names().collect();
    header.push(BEHAVIOR_COLUMN);
    out.push_str(&header.join(","));
    out.push('\n');

    for inst in dataset.instances() {
        for (attr, &code) in inst.values.iter().enumerate() {
            let value = schema
                .value_name(attr, code)
                .expect("dataset values are in domain");
            check_writable(value)?;
            out.push_str(value);
            out.push(',');
        }
        out.push_str(schema.class_name(inst.label));
        out.push('\n');
    }
    Ok(out)
}

/// Parses [`render_dataset`] output. Attribute domains are minted from the
/// observed values in first-seen order; the class set comes from the
/// metadata line when present (falling back to observed labels), with any
/// unlisted observed label appended after.
pub fn parse_dataset(input: &str) -> Result<Dataset, FormatError> {
    let mut classes: Vec<String> = Vec::new();
    let mut attr_names: Option<Vec<String>> = None;
    let mut domains: Vec<Vec<String>> = Vec::new();
    let mut rows: Vec<(Vec<String>, String)> = Vec::new();

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix(CLASSES_PREFIX) {
            if attr_names.is_none() {
                classes = rest.split(',').map(str::to_owned).collect();
            }
            continue;
        }
        if text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        match &attr_names {
            None => {
                if fields.last().copied() != Some(BEHAVIOR_COLUMN) {
                    return Err(FormatError::MissingBehaviorColumn);
                }
                let names: Vec<String> =
                    fields[..fields.len() - 1].iter().map(|s| s.to_string()).collect();
                domains = vec![Vec::new(); names.len()];
                attr_names = Some(names);
            }
            Some(names) => {
                if fields.len() != names.len() + 1 {
                    return Err(FormatError::WrongFieldCount {
                        line,
                        expected: names.len() + 1,
                        found: fields.len(),
                    });
                }
                if fields.iter().any(|f| f.is_empty()) {
                    return Err(FormatError::EmptyValue { line });
                }
                let values: Vec<String> =
                    fields[..names.len()].iter().map(|s| s.to_string()).collect();
                let label = fields[names.len()].to_owned();
                for (attr, value) in values.iter().enumerate() {
                    if !domains[attr].iter().any(|v| v == value) {
                        domains[attr].push(value.clone());
                    }
                }
                if !classes.iter().any(|c| c == &label) {
                    classes.push(label.clone());
                }
                rows.push((values, label));
            }
        }
    }
    let attr_names = attr_names.ok_or(FormatError::MissingHeader)?;

    let schema = AttributeSchema::from_observed(
        attr_names.into_iter().zip(domains).collect(),
        classes,
    );
    let instances: Vec<Instance> = rows
        .iter()
        .map(|(values, label)| {
            let refs: Vec<&str> = values.iter().map(String::as_str).collect();
            schema
                .encode_instance(&refs, label)
                .expect("domains were minted from these rows")
        })
        .collect();
    Ok(Dataset::new(schema, instances))
}

/// Audit dump of the counterpart anonymization, in minted order.
pub fn render_registry(registry: &RelationshipRegistry) -> String {
    let mut out = String::from("counterpart,label\n");
    for (counterpart, label) in registry.entries() {
        out.push_str(counterpart);
        out.push(',');
        out.push_str(label);
        out.push('\n');
    }
    out
}

/// Dumps a fitted model's complete count tables: class names and counts,
/// then one block per attribute with a joint-count row per domain value.
/// The dump is lossless; [`parse_model`] rebuilds an identical model.
pub fn render_model(model: &BayesModel) -> Result<String, FormatError> {
    let schema = model.schema();
    for name in schema
        .classes()
        .iter()
        .map(String::as_str)
        .chain(schema.attribute_names())
    {
        check_writable(name)?;
    }
    let mut out = String::new();
    let _ = writeln!(out, "classes,{}", schema.classes().join(","));
    let counts: Vec<String> = schema
        .class_ids()
        .map(|c| model.class_count(c).to_string())
        .collect();
    let _ = writeln!(out, "class_counts,{}", counts.join(","));
    for attr in 0..schema.attr_count() {
        let _ = writeln!(out, "attribute,{}", schema.attribute_name(attr));
        for (v, value) in schema.domain(attr).iter().enumerate() {
            check_writable(value)?;
            let row: Vec<String> = schema
                .class_ids()
                .map(|c| model.joint_count(attr, ValueCode(v as u16), c).to_string())
                .collect();
            let _ = writeln!(out, "{value},{}", row.join(","));
        }
    }
    Ok(out)
}

/// Rebuilds a model from [`render_model`] output.
pub fn parse_model(input: &str) -> Result<BayesModel, FormatError> {
    let malformed = |line: usize, message: &str| FormatError::Malformed {
        line,
        message: message.to_owned(),
    };
    let mut lines = input.lines().enumerate();

    let (line, classes_row) = lines.next().ok_or(FormatError::MissingHeader)?;
    let classes: Vec<String> = classes_row
        .strip_prefix("classes,")
        .ok_or_else(|| malformed(line + 1, "expected a `classes` row"))?
        .split(',')
        .map(str::to_owned)
        .collect();

    let (line, counts_row) = lines.next().ok_or(FormatError::MissingHeader)?;
    let class_counts: Vec<usize> = counts_row
        .strip_prefix("class_counts,")
        .ok_or_else(|| malformed(line + 1, "expected a `class_counts` row"))?
        .split(',')
        .map(|c| c.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| malformed(line + 1, "class counts must be non-negative integers"))?;
    if class_counts.len() != classes.len() {
        return Err(malformed(line + 1, "one count per class required"));
    }

    let mut attributes: Vec<(String, Vec<String>)> = Vec::new();
    let mut cond: Vec<Vec<Vec<usize>>> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let text = raw.trim_end_matches('\r');
        if text.is_empty() {
            continue;
        }
        if let Some(name) = text.strip_prefix("attribute,") {
            attributes.push((name.to_owned(), Vec::new()));
            cond.push(Vec::new());
            continue;
        }
        let (value, rest) = text
            .split_once(',')
            .ok_or_else(|| malformed(line, "expected `value,count,...`"))?;
        let row: Vec<usize> = rest
            .split(',')
            .map(|c| c.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| malformed(line, "joint counts must be non-negative integers"))?;
        if row.len() != classes.len() {
            return Err(malformed(line, "one joint count per class required"));
        }
        let slot = attributes
            .last_mut()
            .ok_or_else(|| malformed(line, "value row before any `attribute` row"))?;
        slot.1.push(value.to_owned());
        cond.last_mut().unwrap().push(row);
    }

    let schema = AttributeSchema::from_observed(attributes, classes);
    BayesModel::from_parts(schema, class_counts, cond).map_err(FormatError::BadCounts)
}

/// Noise-scan export: a metadata line with the threshold (log and linear)
/// and flag tally, then one row per instance in id order.
pub fn render_noise_report(report: &NoiseReport, schema: &AttributeSchema) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# score_kind={} threshold_log={} threshold_prob={} noise_count={} noise_fraction={}",
        report.score_kind.as_str(),
        report.threshold,
        report.threshold.exp(),
        report.noise_ids.len(),
        report.noise_fraction,
    );
    out.push_str("instance_id,true_label,predicted,log_score,smoothed,status,flagged\n");
    for score in &report.scores {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            score.instance_id,
            schema.class_name(score.true_label),
            schema.class_name(score.predicted),
            score.score,
            score.smoothed,
            score.status.as_str(),
            report.is_flagged(score.instance_id),
        );
    }
    out
}

fn render_rule(rule: &PredictionRule, schema: &AttributeSchema) -> String {
    let antecedent = if rule.antecedent.is_empty() {
        "*".to_owned()
    } else {
        rule.antecedent
            .iter()
            .map(|&(attr, value)| {
                format!(
                    "{}={}",
                    schema.attribute_name(attr),
                    schema.value_name(attr, value).unwrap_or("?")
                )
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "{antecedent} => {} (support={})",
        schema.class_name(rule.class),
        rule.support
    )
}

/// One rule per line, root-first antecedents, depth-first leaf order.
pub fn render_rules(rules: &[PredictionRule], schema: &AttributeSchema) -> String {
    let mut out = String::new();
    for rule in rules {
        out.push_str(&render_rule(rule, schema));
        out.push('\n');
    }
    out
}

/// Indented rendering of the tree, one `attribute = value` test per line,
/// leaves inline after their test.
pub fn render_tree(tree: &DecisionTree) -> String {
    fn walk(node: &Node, schema: &AttributeSchema, depth: usize, out: &mut String) {
        match node {
            Node::Leaf { class, support } => {
                // Only reachable for a single-leaf tree; deeper leaves are
                // printed inline by their parent.
                let _ = writeln!(out, "{} (support={support})", schema.class_name(*class));
            }
            Node::Split {
                attribute,
                children,
                ..
            } => {
                for (value, child) in children {
                    for _ in 0..depth {
                        out.push_str("|   ");
                    }
                    let test = format!(
                        "{} = {}",
                        schema.attribute_name(*attribute),
                        schema.value_name(*attribute, *value).unwrap_or("?")
                    );
                    match child {
                        Node::Leaf { class, support } => {
                            let _ = writeln!(
                                out,
                                "{test}: {} (support={support})",
                                schema.class_name(*class)
                            );
                        }
                        Node::Split { .. } => {
                            out.push_str(&test);
                            out.push('\n');
                            walk(child, schema, depth + 1, out);
                        }
                    }
                }
            }
        }
    }
    let mut out = String::new();
    walk(tree.root(), tree.schema(), 0, &mut out);
    out
}

fn write_metric_row(
    out: &mut String,
    fold: &str,
    variant: &str,
    class: &str,
    support: usize,
    precision: f64,
    recall: f64,
    fmeasure: f64,
    accuracy: Option<f64>,
    noise_fraction: Option<f64>,
) {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let _ = writeln!(
        out,
        "{fold},{variant},{class},{support},{precision},{recall},{fmeasure},{},{}",
        opt(accuracy),
        opt(noise_fraction),
    );
}

fn write_fold_rows(out: &mut String, fold_name: &str, variant: &str, report_fold: &FoldRowData) {
    for metrics in report_fold.per_class {
        write_metric_row(
            out,
            fold_name,
            variant,
            report_fold.class_name(metrics.class),
            metrics.support,
            metrics.precision,
            metrics.recall,
            metrics.fmeasure,
            None,
            None,
        );
    }
    write_metric_row(
        out,
        fold_name,
        variant,
        "(weighted)",
        report_fold.total_support,
        report_fold.weighted.precision,
        report_fold.weighted.recall,
        report_fold.weighted.fmeasure,
        Some(report_fold.accuracy),
        report_fold.noise_fraction,
    );
}

struct FoldRowData<'a> {
    schema: &'a AttributeSchema,
    per_class: &'a [callwise_core::eval::ClassMetrics],
    weighted: &'a callwise_core::eval::WeightedMetrics,
    accuracy: f64,
    noise_fraction: Option<f64>,
    total_support: usize,
}

impl FoldRowData<'_> {
    fn class_name(&self, class: ClassId) -> &str {
        self.schema.class_name(class)
    }
}

/// Cross-validation export: one row per (fold, variant, class), a
/// `(weighted)` row per fold, the same for the fold means under the
/// pseudo-fold `mean`, and a final machine-readable `#summary` line.
pub fn render_eval_report(
    report: &EvalReport,
    schema: &AttributeSchema,
    score: ScoreKind,
) -> String {
    let variant = report.variant.as_str();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# evaluation variant={variant} seed={} folds={} score={}",
        report.seed,
        report.folds.len(),
        score.as_str(),
    );
    out.push_str(
        "fold,variant,class,support,precision,recall,fmeasure,accuracy,noise_fraction\n",
    );
    for fold in &report.folds {
        write_fold_rows(
            &mut out,
            &fold.fold.to_string(),
            variant,
            &FoldRowData {
                schema,
                per_class: &fold.per_class,
                weighted: &fold.weighted,
                accuracy: fold.accuracy,
                noise_fraction: fold.noise_fraction,
                total_support: fold.test_ids.len(),
            },
        );
    }
    let aggregate = &report.aggregate;
    write_fold_rows(
        &mut out,
        "mean",
        variant,
        &FoldRowData {
            schema,
            per_class: &aggregate.per_class,
            weighted: &aggregate.weighted,
            accuracy: aggregate.accuracy,
            noise_fraction: aggregate.noise_fraction,
            total_support: report.folds.iter().map(|f| f.test_ids.len()).sum(),
        },
    );
    let _ = writeln!(
        out,
        "#summary variant={variant} seed={} folds={} accuracy={} weighted_precision={} \
         weighted_recall={} weighted_fmeasure={} noise_fraction={}",
        report.seed,
        report.folds.len(),
        aggregate.accuracy,
        aggregate.weighted.precision,
        aggregate.weighted.recall,
        aggregate.weighted.fmeasure,
        aggregate
            .noise_fraction
            .map(|f| f.to_string())
            .unwrap_or_default(),
    );
    out
}

/// Paired-run export: robust-minus-base deltas on the aggregate weighted
/// metrics, after the two variants' summary lines.
pub fn render_comparison(comparison: &Comparison, score: ScoreKind) -> String {
    let base = &comparison.base.aggregate;
    let robust = &comparison.robust.aggregate;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# comparison seed={} folds={} score={}",
        comparison.base.seed,
        comparison.base.folds.len(),
        score.as_str(),
    );
    out.push_str("metric,base,robust,delta\n");
    let mut row = |metric: &str, b: f64, r: f64, d: f64| {
        let _ = writeln!(out, "{metric},{b},{r},{d}");
    };
    row(
        "weighted_precision",
        base.weighted.precision,
        robust.weighted.precision,
        comparison.delta_precision(),
    );
    row(
        "weighted_recall",
        base.weighted.recall,
        robust.weighted.recall,
        comparison.delta_recall(),
    );
    row(
        "weighted_fmeasure",
        base.weighted.fmeasure,
        robust.weighted.fmeasure,
        comparison.delta_fmeasure(),
    );
    row(
        "accuracy",
        base.accuracy,
        robust.accuracy,
        comparison.delta_accuracy(),
    );
    if let Some(fraction) = robust.noise_fraction {
        let _ = writeln!(out, "noise_fraction,,{fraction},");
    }
    out
}

/// Ground-truth flip mask: metadata line with the rates, then
/// (instance id, pre-flip label) rows ascending by id.
pub fn render_mask(mask: &NoiseMask, schema: &AttributeSchema) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# requested_rate={} realized_rate={} flips={}",
        mask.requested_rate,
        mask.realized_rate,
        mask.flips.len(),
    );
    out.push_str("instance_id,original_label\n");
    for &(id, original) in &mask.flips {
        let _ = writeln!(out, "{id},{}", schema.class_name(original));
    }
    out
}

/// Parses [`render_mask`] output against the schema that labeled it.
pub fn parse_mask(input: &str, schema: &AttributeSchema) -> Result<NoiseMask, FormatError> {
    let malformed = |line: usize, message: &str| FormatError::Malformed {
        line,
        message: message.to_owned(),
    };
    let mut requested_rate = 0.0f64;
    let mut realized_rate = 0.0f64;
    let mut flips: Vec<(usize, ClassId)> = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim_end_matches('\r');
        if text.is_empty() {
            continue;
        }
        if let Some(meta) = text.strip_prefix("# ") {
            for pair in meta.split_whitespace() {
                if let Some((key, value)) = pair.split_once('=') {
                    let parsed = value
                        .parse::<f64>()
                        .map_err(|_| malformed(line, "metadata rates must be numbers"));
                    match key {
                        "requested_rate" => requested_rate = parsed?,
                        "realized_rate" => realized_rate = parsed?,
                        _ => {}
                    }
                }
            }
            continue;
        }
        if !saw_header {
            if text != "instance_id,original_label" {
                return Err(malformed(line, "expected the mask header"));
            }
            saw_header = true;
            continue;
        }
        let (id, label) = text
            .split_once(',')
            .ok_or_else(|| malformed(line, "expected `instance_id,original_label`"))?;
        let id: usize = id
            .parse()
            .map_err(|_| malformed(line, "instance id must be an integer"))?;
        let class = schema
            .class_id(label)
            .ok_or_else(|| malformed(line, "unknown class label"))?;
        flips.push((id, class));
    }
    if !saw_header {
        return Err(FormatError::MissingHeader);
    }
    Ok(NoiseMask {
        flips,
        requested_rate,
        realized_rate,
    })
}
