//! Dataset generation: sample claims from documents, run the transform mix,
//! attach labels and span metadata, then deduplicate, balance and write.

mod io;

use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{AnnotateError, EntityGroup, EntityProvider, ParaphraseError, ParaphraseProvider, Pivot};
use crate::corpus::{CharSpan, Document};
use crate::transforms::{
    apply_entity_swap, apply_identity, apply_negation, apply_paraphrase, apply_pronoun_swap, inject_noise,
    Claim, Label, NoiseModel, Polarity, SkipReason, SwapOptions, TaggedDocument, TransformKind,
    TransformOutcome,
};
use crate::util::{derived_rng, sha256_hex, stable_hash};

pub use io::{manifest_path, read_dataset, write_dataset, write_dataset_to, write_manifest, DatasetManifest};

#[derive(Debug, thiserror::Error)]
pub enum DatagenError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot balance: only {0} examples present")]
    Unbalanceable(Label),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Paraphrase(#[from] ParaphraseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One labeled training example. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub doc_id: String,
    /// Full source document.
    pub text: String,
    pub claim: String,
    pub label: Label,
    /// Document coordinates of the sentence the claim was sampled from.
    pub extraction_span: CharSpan,
    /// Claim coordinates of the transformed region.
    pub augmentation_span: Option<CharSpan>,
    pub transform: TransformKind,
    pub noise_positions: Vec<usize>,
    pub original_claim: String,
}

fn default_mix() -> BTreeMap<TransformKind, f64> {
    TransformKind::ALL.into_iter().map(|k| (k, 1.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub claims_per_doc: usize,
    pub min_claim_tokens: usize,
    /// Expected attempts per claim for each transform. A weight `w` runs
    /// `floor(w)` attempts plus one more with probability `w - floor(w)`.
    pub mix: BTreeMap<TransformKind, f64>,
    pub noise_p: f64,
    pub target_negative_ratio: Option<f64>,
    pub seed: u64,
    pub swap: SwapConfig,
    /// Pivot languages for paraphrasing; empty means all.
    pub pivots: Vec<Pivot>,
    /// Worker threads; `None` uses the rayon default. Never affects output.
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwapConfig {
    pub match_kind: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            claims_per_doc: 3,
            min_claim_tokens: 5,
            mix: default_mix(),
            noise_p: 0.05,
            target_negative_ratio: None,
            seed: 0,
            swap: SwapConfig::default(),
            pivots: Vec::new(),
            threads: None,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: String| Err(DatagenError::Config(m));
        if let Some((k, w)) = self.mix.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return bad(format!("weight for {k} must be finite and non-negative, got {w}"));
        }
        for polarity in [Polarity::Plus, Polarity::Minus] {
            if !self.mix.iter().any(|(k, w)| k.polarity() == polarity && *w > 0.0) {
                let which = if polarity == Polarity::Plus { "consistent" } else { "inconsistent" };
                return bad(format!("mix enables no {which} transform"));
            }
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return bad(format!("noise_p must be in [0, 1], got {}", self.noise_p));
        }
        if let Some(r) = self.target_negative_ratio {
            if !(r > 0.0 && r < 1.0) {
                return bad(format!("target negative ratio must be in (0, 1), got {r}"));
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    /// sha256 of the canonical JSON form (thread count excluded).
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

/// Entity source and paraphraser used during generation.
#[derive(Debug, Default)]
pub struct Resources {
    pub entities: EntityProvider,
    pub paraphrase: ParaphraseProvider,
}

/// Indices of up to `claims_per_doc` distinct sentences with at least
/// `min_claim_tokens` tokens, sampled uniformly without replacement and
/// returned in document order.
pub fn sample_sentences<R: Rng + ?Sized>(doc: &Document, config: &GenConfig, rng: &mut R) -> Vec<usize> {
    let eligible: Vec<usize> = doc
        .sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| s.tokens.len() >= config.min_claim_tokens)
        .map(|(i, _)| i)
        .collect();
    let k = config.claims_per_doc.min(eligible.len());
    let mut picked: Vec<usize> = sample(rng, eligible.len(), k).into_iter().map(|i| eligible[i]).collect();
    picked.sort_unstable();
    picked
}

pub fn extract_claims<R: Rng + ?Sized>(doc: &Document, config: &GenConfig, rng: &mut R) -> Vec<Claim> {
    sample_sentences(doc, config, rng)
        .into_iter()
        .map(|i| Claim::from_sentence(doc, i))
        .collect()
}

pub type SkipCounts = BTreeMap<TransformKind, BTreeMap<SkipReason, usize>>;

#[derive(Debug, Clone, Default)]
pub struct Generated {
    pub examples: Vec<Example>,
    pub claims: usize,
    pub skipped: SkipCounts,
}

fn example_id(seed: u64, doc_id: &str, sentence: usize, kind: TransformKind, attempt: usize) -> String {
    let h = stable_hash(&[
        &seed.to_le_bytes(),
        doc_id.as_bytes(),
        &(sentence as u64).to_le_bytes(),
        kind.as_str().as_bytes(),
        &(attempt as u64).to_le_bytes(),
    ]);
    format!("{doc_id}-{sentence}-{}-{attempt}-{:08x}", kind.as_str().to_ascii_lowercase(), h >> 32)
}

fn attempts<R: Rng + ?Sized>(weight: f64, rng: &mut R) -> usize {
    let whole = weight.floor();
    let frac = weight - whole;
    whole as usize + usize::from(frac > 0.0 && rng.gen_bool(frac))
}

fn run_transform<R: Rng + ?Sized>(
    kind: TransformKind,
    claim: &Claim,
    doc: &TaggedDocument,
    config: &GenConfig,
    resources: &Resources,
    rng: &mut R,
) -> Result<TransformOutcome, DatagenError> {
    let swap = SwapOptions {
        match_kind: config.swap.match_kind,
    };
    Ok(match kind {
        TransformKind::Identity => apply_identity(claim),
        TransformKind::Paraphrase => apply_paraphrase(claim, &resources.paraphrase, &config.pivots, rng)?,
        TransformKind::EntitySwap => apply_entity_swap(claim, doc, EntityGroup::Named, swap, rng),
        TransformKind::NumberSwap => apply_entity_swap(claim, doc, EntityGroup::Number, swap, rng),
        TransformKind::PronounSwap => apply_pronoun_swap(claim, rng),
        TransformKind::Negation => apply_negation(claim, rng),
    })
}

/// Examples for a single document. Every random choice draws from streams
/// derived from the seed and document id, so the result does not depend on
/// which thread runs it or in what order.
pub fn generate_document(
    doc: &Document,
    config: &GenConfig,
    resources: &Resources,
) -> Result<Generated, DatagenError> {
    let seed = config.seed;
    let id = doc.id.as_bytes();
    let tagged = TaggedDocument::new(doc.clone(), &resources.entities)?;
    let sentences = sample_sentences(doc, config, &mut derived_rng(seed, &[id, b"claims"]));
    let noise = NoiseModel::new(config.noise_p);
    let mut out = Generated {
        claims: sentences.len(),
        ..Generated::default()
    };

    for &s in &sentences {
        let claim = Claim::from_sentence(doc, s);
        let s_bytes = (s as u64).to_le_bytes();
        for (&kind, &weight) in &config.mix {
            let kind_bytes = kind.as_str().as_bytes();
            let n = attempts(weight, &mut derived_rng(seed, &[id, &s_bytes, kind_bytes, b"attempts"]));
            for attempt in 0..n {
                let a_bytes = (attempt as u64).to_le_bytes();
                let mut rng = derived_rng(seed, &[id, &s_bytes, kind_bytes, &a_bytes]);
                let t = match run_transform(kind, &claim, &tagged, config, resources, &mut rng)? {
                    TransformOutcome::Transformed(t) => t,
                    TransformOutcome::Skipped(reason) => {
                        *out.skipped.entry(kind).or_default().entry(reason).or_default() += 1;
                        continue;
                    }
                };
                let t = if config.noise_p > 0.0 {
                    inject_noise(t, &noise, &mut rng)
                } else {
                    t
                };
                out.examples.push(Example {
                    id: example_id(seed, &doc.id, s, kind, attempt),
                    doc_id: doc.id.clone(),
                    text: doc.text.clone(),
                    claim: t.claim.text,
                    label: t.label,
                    extraction_span: claim.origin_span,
                    augmentation_span: t.augmentation_span,
                    transform: kind,
                    noise_positions: t.noise_positions,
                    original_claim: claim.text.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Generate over all documents in parallel. Output follows input document
/// order regardless of thread count.
pub fn generate(documents: &[Document], config: &GenConfig, resources: &Resources) -> Result<Generated, DatagenError> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| DatagenError::Config(format!("thread pool: {e}")))?;
    let per_doc: Vec<Result<Generated, DatagenError>> = pool.install(|| {
        documents
            .par_iter()
            .map(|d| generate_document(d, config, resources))
            .collect()
    });

    let mut all = Generated::default();
    for g in per_doc {
        let g = g?;
        all.examples.extend(g.examples);
        all.claims += g.claims;
        for (kind, reasons) in g.skipped {
            for (reason, n) in reasons {
                *all.skipped.entry(kind).or_default().entry(reason).or_default() += n;
            }
        }
    }
    Ok(all)
}

/// Drop repeats of (doc_id, claim, label), keeping the first.
pub fn dedupe(examples: Vec<Example>) -> Vec<Example> {
    let mut seen = HashSet::new();
    examples
        .into_iter()
        .filter(|e| seen.insert((e.doc_id.clone(), e.claim.clone(), e.label)))
        .collect()
}

/// Downsample the majority class so the negative fraction is as close to
/// `target` as whole counts allow. Survivors keep their relative order.
pub fn balance<R: Rng + ?Sized>(examples: Vec<Example>, target: f64, rng: &mut R) -> Result<Vec<Example>, DatagenError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(DatagenError::Config(format!("target negative ratio must be in (0, 1), got {target}")));
    }
    let neg = examples.iter().filter(|e| e.label == Label::Inconsistent).count();
    let pos = examples.len() - neg;
    if neg == 0 {
        return Err(DatagenError::Unbalanceable(Label::Consistent));
    }
    if pos == 0 {
        return Err(DatagenError::Unbalanceable(Label::Inconsistent));
    }
    let (shrink, keep) = if (neg as f64) > target * (neg + pos) as f64 {
        let want = (target * pos as f64 / (1.0 - target)).round() as usize;
        (Label::Inconsistent, want.clamp(1, neg))
    } else {
        let want = ((1.0 - target) * neg as f64 / target).round() as usize;
        (Label::Consistent, want.clamp(1, pos))
    };
    let total = if shrink == Label::Inconsistent { neg } else { pos };
    if keep == total {
        return Ok(examples);
    }
    let mut kept = vec![false; total];
    for i in sample(rng, total, keep) {
        kept[i] = true;
    }
    let mut k = 0;
    Ok(examples
        .into_iter()
        .filter(|e| {
            if e.label != shrink {
                return true;
            }
            k += 1;
            kept[k - 1]
        })
        .collect())
}

/// Whether `doc_id` falls in the held-out part of a document-level split.
pub fn is_held_out(doc_id: &str, fraction: f64, seed: u64) -> bool {
    let h = stable_hash(&[&seed.to_le_bytes(), b"split", doc_id.as_bytes()]);
    (h as f64 / u64::MAX as f64) < fraction
}

/// Split by document so no source document contributes to both sides.
pub fn split_by_doc(examples: Vec<Example>, held_out_fraction: f64, seed: u64) -> (Vec<Example>, Vec<Example>) {
    examples
        .into_iter()
        .partition(|e| !is_held_out(&e.doc_id, held_out_fraction, seed))
}

/// Summary of a full run, as written next to the dataset.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub examples: Vec<Example>,
    pub manifest: DatasetManifest,
}

/// Generate, dedupe and (when configured) balance.
pub fn run_pipeline(documents: &[Document], config: &GenConfig, resources: &Resources) -> Result<PipelineOutput, DatagenError> {
    let generated = generate(documents, config, resources)?;
    let produced = generated.examples.len();
    let examples = dedupe(generated.examples);
    let deduped = examples.len();
    let examples = match config.target_negative_ratio {
        Some(r) => balance(examples, r, &mut derived_rng(config.seed, &[b"balance"]))?,
        None => examples,
    };
    let manifest = DatasetManifest::build(
        &examples,
        config,
        documents.len(),
        generated.claims,
        generated.skipped,
        produced - deduped,
        deduped - examples.len(),
    );
    Ok(PipelineOutput { examples, manifest })
}
