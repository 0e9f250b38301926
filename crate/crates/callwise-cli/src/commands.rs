//! Implementations behind the subcommands. Each one reads its inputs,
//! runs the corresponding library stage, writes the artifact files, and
//! reports progress on stderr; stdout stays silent so output can be
//! scripted against files alone.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use callwise_core::bayes::BayesModel;
use callwise_core::eval::{compare, run_pipeline, PipelineParams, Variant};
use callwise_core::ingest::{build_dataset, parse_call_log, SegmentationConfig};
use callwise_core::model::Dataset;
use callwise_core::noise::{detect_noise_with, eliminate, NoiseReport, ScoreKind};
use callwise_core::synth::{bundled_persona, bundled_personas, generate};
use callwise_core::tree::{build_tree, TreeParams};

use crate::formats;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let ds = formats::parse_dataset(&read_to_string(path)?)
        .with_context(|| format!("parsing dataset {}", path.display()))?;
    let report = ds.validate();
    if !report.is_ok() {
        bail!(
            "dataset {} failed validation: {}",
            path.display(),
            report.violations[0]
        );
    }
    Ok(ds)
}

fn class_distribution(ds: &Dataset) -> String {
    ds.schema()
        .class_ids()
        .map(|c| format!("{}={}", ds.schema().class_name(c), ds.class_counts()[c.index()]))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_preprocess(
    input: &Path,
    output: &Path,
    registry_out: &Path,
    config: &SegmentationConfig,
) -> Result<()> {
    let events = parse_call_log(&read_to_string(input)?)
        .with_context(|| format!("parsing raw log {}", input.display()))?;
    if events.is_empty() {
        eprintln!("warning: {} contains no events", input.display());
    }
    let (ds, registry) = build_dataset(&events, config);
    write_file(output, &formats::render_dataset(&ds)?)?;
    write_file(registry_out, &formats::render_registry(&registry))?;
    eprintln!(
        "{} instances, {} relationships, classes: {}",
        ds.len(),
        registry.len(),
        class_distribution(&ds),
    );
    Ok(())
}

fn print_noise_summary(report: &NoiseReport) {
    eprintln!(
        "threshold: log={} prob={}; flagged {} of {} instances (fraction {})",
        report.threshold,
        report.threshold.exp(),
        report.noise_ids.len(),
        report.scores.len(),
        report.noise_fraction,
    );
}

pub fn cmd_detect_noise(
    input: &Path,
    output: &Path,
    score: ScoreKind,
    model_dump: Option<&Path>,
) -> Result<()> {
    let ds = load_dataset(input)?;
    let report = detect_noise_with(&ds, score)?;
    print_noise_summary(&report);
    write_file(output, &formats::render_noise_report(&report, ds.schema()))?;
    if let Some(path) = model_dump {
        let model = BayesModel::fit(&ds)?;
        write_file(path, &formats::render_model(&model)?)?;
    }
    Ok(())
}

pub fn cmd_train(
    input: &Path,
    rules_out: &Path,
    tree_out: &Path,
    variant: Variant,
    score: ScoreKind,
    params: TreeParams,
) -> Result<()> {
    let ds = load_dataset(input)?;
    let train = match variant {
        Variant::Base => ds,
        Variant::Robust => {
            let report = detect_noise_with(&ds, score)?;
            print_noise_summary(&report);
            let quality = eliminate(&ds, &report)?;
            if quality.is_empty() {
                eprintln!("warning: filter would empty the dataset; training on raw data");
                ds
            } else {
                quality
            }
        }
    };
    let tree = build_tree(&train, params)?;
    eprintln!(
        "tree: {} leaves, depth {}, trained on {} instances",
        tree.leaf_count(),
        tree.depth(),
        train.len(),
    );
    write_file(tree_out, &formats::render_tree(&tree))?;
    write_file(rules_out, &formats::render_rules(&tree.extract_rules(), tree.schema()))?;
    Ok(())
}

pub struct EvalFlags {
    pub folds: usize,
    pub seed: u64,
    pub score: ScoreKind,
    pub tree: TreeParams,
    pub stratified: bool,
}

impl EvalFlags {
    fn params(&self) -> PipelineParams {
        PipelineParams {
            folds: self.folds,
            tree: self.tree,
            score: self.score,
            stratified: self.stratified,
        }
    }
}

pub fn cmd_evaluate(input: &Path, output: &Path, variant: Variant, flags: &EvalFlags) -> Result<()> {
    let ds = load_dataset(input)?;
    let report = run_pipeline(&ds, variant, &flags.params(), flags.seed)?;
    eprintln!(
        "{}: accuracy={} weighted_fmeasure={}",
        variant.as_str(),
        report.aggregate.accuracy,
        report.aggregate.weighted.fmeasure,
    );
    write_file(
        output,
        &formats::render_eval_report(&report, ds.schema(), flags.score),
    )
}

pub fn cmd_compare(input: &Path, output: &Path, flags: &EvalFlags) -> Result<()> {
    let ds = load_dataset(input)?;
    let comparison = compare(&ds, &flags.params(), flags.seed)?;
    eprintln!(
        "base fmeasure={} robust fmeasure={} delta={}",
        comparison.base.aggregate.weighted.fmeasure,
        comparison.robust.aggregate.weighted.fmeasure,
        comparison.delta_fmeasure(),
    );
    write_file(output, &formats::render_comparison(&comparison, flags.score))
}

pub fn cmd_synth(
    persona_name: &str,
    size: usize,
    noise_rate: f64,
    seed: u64,
    output: &Path,
    mask_out: Option<&Path>,
) -> Result<()> {
    let persona = bundled_persona(persona_name).with_context(|| {
        let known: Vec<String> = bundled_personas()
            .iter()
            .map(|p| p.name().to_owned())
            .collect();
        format!(
            "unknown persona {persona_name:?} (bundled: {})",
            known.join(", ")
        )
    })?;
    let (ds, mask) = generate(&persona, size, noise_rate, seed)?;
    eprintln!(
        "generated {} instances from {}, flipped {} labels (rate {})",
        ds.len(),
        persona.name(),
        mask.flips.len(),
        mask.realized_rate,
    );
    write_file(output, &formats::render_dataset(&ds)?)?;
    if let Some(path) = mask_out {
        write_file(path, &formats::render_mask(&mask, ds.schema()))?;
    }
    Ok(())
}

/// Appends `suffix` to a path's file name: `out/data.csv` -> `out/data.csv.tree`.
pub fn derived_path(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}
