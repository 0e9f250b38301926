//! Core learning library for phone-call behavior modeling.
//!
//! Everything in here is pure computation over categorical data: a compact
//! interned data model, a count-based naive Bayes classifier, a mislabel
//! detector built on top of it, a gain-ratio decision tree with rule
//! extraction, a cross-validation harness, and a synthetic data generator
//! for controlled experiments. File formats and the command-line interface
//! live in the companion `callwise-cli` crate.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature only exists so dependents and tests build the usual way.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bayes;
pub mod eval;
pub mod ingest;
pub mod model;
pub mod noise;
pub mod synth;
pub mod tree;

pub use bayes::{BayesModel, Frac, Likelihood, Prediction, Smoothing};
pub use eval::{
    Comparison, ConfusionCounts, EvalReport, FoldReport, PipelineParams, Variant,
};
pub use ingest::{
    Behavior, RawCallEvent, RelationshipRegistry, SegmentationConfig, UNSPECIFIED,
};
pub use model::{AttrIndex, AttributeSchema, ClassId, Dataset, Instance, ValueCode};
pub use noise::{InstanceScore, NoiseReport, ProbabilityGroup, ScoreKind};
pub use synth::{NoiseMask, Persona};
pub use tree::{DecisionTree, Node, PredictionRule, TreeParams};
