use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use callwise_cli::commands::{
    cmd_compare, cmd_detect_noise, cmd_evaluate, cmd_preprocess, cmd_synth, cmd_train,
    derived_path, EvalFlags,
};
use callwise_core::eval::Variant;
use callwise_core::ingest::{DayGranularity, SegmentationConfig};
use callwise_core::noise::ScoreKind;
use callwise_core::tree::TreeParams;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Noise-robust behavior modeling for phone call logs.
///
/// The pipeline stages are separate subcommands so every intermediate
/// artifact lands in a file: preprocess -> detect-noise -> train ->
/// evaluate/compare, plus synth for controlled experiments. All commands
/// are deterministic; the ones that shuffle or sample require --seed.
#[derive(Parser)]
#[command(name = "callwise", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Train on the data as-is.
    Base,
    /// Filter suspected mislabels out of the training data first.
    Robust,
}

impl From<VariantArg> for Variant {
    fn from(arg: VariantArg) -> Self {
        match arg {
            VariantArg::Base => Variant::Base,
            VariantArg::Robust => Variant::Robust,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    /// Score instances by the label-conditional likelihood alone.
    Likelihood,
    /// Multiply the class prior into the score.
    Posterior,
}

impl From<ScoreArg> for ScoreKind {
    fn from(arg: ScoreArg) -> Self {
        match arg {
            ScoreArg::Likelihood => ScoreKind::Likelihood,
            ScoreArg::Posterior => ScoreKind::Posterior,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DayArg {
    /// Seven day labels, Mon through Sun.
    DayOfWeek,
    /// Two labels, Weekday and Weekend.
    WeekdayWeekend,
}

#[derive(Args)]
struct TreeArgs {
    /// Minimum instances a node needs to be split further.
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    /// Maximum tree depth; unlimited when omitted.
    #[arg(long)]
    max_depth: Option<usize>,
}

impl TreeArgs {
    fn params(&self) -> TreeParams {
        TreeParams {
            min_leaf_support: self.min_leaf,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Args)]
struct CvArgs {
    /// Cross-validation fold count.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Shuffle seed for the fold assignment.
    #[arg(long)]
    seed: u64,
    /// Balance class proportions across folds.
    #[arg(long)]
    stratified: bool,
    #[arg(long, value_enum, default_value_t = ScoreArg::Likelihood)]
    score: ScoreArg,
    #[command(flatten)]
    tree: TreeArgs,
}

impl CvArgs {
    fn flags(&self) -> Result<EvalFlags> {
        if self.folds < 2 {
            bail!("--folds must be at least 2");
        }
        Ok(EvalFlags {
            folds: self.folds,
            seed: self.seed,
            score: self.score.into(),
            tree: self.tree.params(),
            stratified: self.stratified,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw call log into a categorical dataset file.
    Preprocess {
        /// Raw call-log file.
        #[arg(long)]
        input: PathBuf,
        /// Dataset file to write.
        #[arg(long)]
        output: PathBuf,
        /// Relationship registry dump; defaults to `<output>.registry`.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Comma-separated segment end times (HH:MM, ending 24:00).
        #[arg(long, value_delimiter = ',')]
        segments: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = DayArg::DayOfWeek)]
        day_granularity: DayArg,
    },
    /// Score every instance and flag suspected mislabels.
    DetectNoise {
        /// Dataset file.
        #[arg(long)]
        input: PathBuf,
        /// Noise report to write.
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = ScoreArg::Likelihood)]
        score: ScoreArg,
        /// Also dump the fitted count tables for audit.
        #[arg(long)]
        model_dump: Option<PathBuf>,
    },
    /// Build a decision tree and extract its rules.
    Train {
        /// Dataset file.
        #[arg(long)]
        input: PathBuf,
        /// Rules file to write.
        #[arg(long)]
        output: PathBuf,
        /// Tree rendering to write; defaults to `<output>.tree`.
        #[arg(long)]
        tree_output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = VariantArg::Base)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value_t = ScoreArg::Likelihood)]
        score: ScoreArg,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Cross-validate one pipeline variant.
    Evaluate {
        /// Dataset file.
        #[arg(long)]
        input: PathBuf,
        /// Evaluation report to write.
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = VariantArg::Base)]
        variant: VariantArg,
        #[command(flatten)]
        cv: CvArgs,
    },
    /// Cross-validate both variants on identical folds and report deltas.
    Compare {
        /// Dataset file.
        #[arg(long)]
        input: PathBuf,
        /// Comparison report to write.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        cv: CvArgs,
    },
    /// Generate a labeled dataset from a bundled persona.
    Synth {
        /// Persona name (office_worker, night_owl, screener).
        #[arg(long)]
        persona: String,
        /// Instances to generate.
        #[arg(long)]
        size: usize,
        /// Fraction of labels to flip, in [0, 1).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Sampling seed.
        #[arg(long)]
        seed: u64,
        /// Dataset file to write.
        #[arg(long)]
        output: PathBuf,
        /// Ground-truth flip mask to write.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
}

fn parse_segments(entries: &[String], granularity: DayArg) -> Result<SegmentationConfig> {
    let mut cuts = Vec::with_capacity(entries.len());
    for entry in entries {
        let Some((h, m)) = entry.split_once(':') else {
            bail!("segment boundary {entry:?} is not HH:MM");
        };
        let (h, m): (u16, u16) = match (h.parse(), m.parse()) {
            (Ok(h), Ok(m)) if h <= 24 && m < 60 => (h, m),
            _ => bail!("segment boundary {entry:?} is not HH:MM"),
        };
        cuts.push(h * 60 + m);
    }
    let granularity = match granularity {
        DayArg::DayOfWeek => DayGranularity::DayOfWeek,
        DayArg::WeekdayWeekend => DayGranularity::WeekdayWeekend,
    };
    SegmentationConfig::new(cuts, granularity)
        .map_err(|_| anyhow::anyhow!("segments must increase strictly and end at 24:00"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess {
            input,
            output,
            registry,
            segments,
            day_granularity,
        } => {
            let config = match &segments {
                Some(specs) => parse_segments(specs, day_granularity)?,
                None => {
                    let mut config = SegmentationConfig::default();
                    config.day_granularity = match day_granularity {
                        DayArg::DayOfWeek => DayGranularity::DayOfWeek,
                        DayArg::WeekdayWeekend => DayGranularity::WeekdayWeekend,
                    };
                    config
                }
            };
            let registry = registry.unwrap_or_else(|| derived_path(&output, ".registry"));
            cmd_preprocess(&input, &output, &registry, &config)
        }
        Command::DetectNoise {
            input,
            output,
            score,
            model_dump,
        } => cmd_detect_noise(&input, &output, score.into(), model_dump.as_deref()),
        Command::Train {
            input,
            output,
            tree_output,
            variant,
            score,
            tree,
        } => {
            let tree_output = tree_output.unwrap_or_else(|| derived_path(&output, ".tree"));
            cmd_train(
                &input,
                &output,
                &tree_output,
                variant.into(),
                score.into(),
                tree.params(),
            )
        }
        Command::Evaluate {
            input,
            output,
            variant,
            cv,
        } => cmd_evaluate(&input, &output, variant.into(), &cv.flags()?),
        Command::Compare { input, output, cv } => cmd_compare(&input, &output, &cv.flags()?),
        Command::Synth {
            persona,
            size,
            noise,
            seed,
            output,
            mask,
        } => cmd_synth(&persona, size, noise, seed, &output, mask.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
