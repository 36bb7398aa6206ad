//! Weak-supervision data generation and evaluation for factual-consistency
//! checking of summaries.
//!
//! Source documents are segmented into sentences ("claims") which are then
//! rewritten by rule-based transformations. Meaning-preserving rewrites
//! (identity, backtranslation) are labeled `CONSISTENT`; meaning-altering
//! ones (entity, number and pronoun swaps, negation) are labeled
//! `INCONSISTENT`. Every example records where the claim came from in the
//! document and which claim characters were altered, so span-extraction
//! heads can be supervised alongside the classifier.
//!
//! The evaluation side covers class-balanced accuracy, F1, the pairwise
//! sentence-ranking protocol, span overlap against human highlights and
//! Fleiss' kappa over annotator judgments.

pub mod annotate;
pub mod datagen;
pub mod eval;
pub mod scoring;
pub mod service;
pub mod synth;
pub mod corpus;





pub mod transforms;

mod util;

pub use corpus::{CharSpan, Document, Sentence, Token};
pub use datagen::{Example, GenConfig};

pub use transforms::{Label, TransformKind};

/// Version string embedded in manifests and logs.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
