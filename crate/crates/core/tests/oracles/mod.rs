//! Independent reference implementations and property checkers shared by
//! the integration tests. Nothing here calls the code it checks to compute
//! an expected value.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use claimforge::annotate::paraphrase::{ParaphraseProvider, ParaphraseTable, Pivot, TableEntry};
use claimforge::annotate::{find_auxiliaries, EntityGroup};
use claimforge::corpus::{char_slice, tokenize, CharSpan, Document};
use claimforge::datagen::Example;
use claimforge::eval::{
    balanced_accuracy, binary_f1, fleiss_kappa, ranking_accuracy_from_scores, span_containment_accuracy,
    span_token_f1, SpanPair,
};
use claimforge::transforms::{
    apply_entity_swap, apply_identity, apply_negation, apply_noise, apply_paraphrase, apply_pronoun_swap,
    inject_noise, negate_at, normalize_negation, Claim, NoiseModel, Polarity, SwapOptions, TaggedDocument,
    TransformOutcome, Transformed,
};
use claimforge::{Label, TransformKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- diffs

/// Minimal region of `new` not shared with `old`, found by trying every
/// (prefix, suffix) split. Ties go to the latest start.
pub fn minimal_diff(old: &str, new: &str) -> Option<CharSpan> {
    let a: Vec<char> = old.chars().collect();
    let b: Vec<char> = new.chars().collect();
    let mut best: Option<(usize, usize)> = None;
    for s in 0..=b.len().min(a.len()) {
        if a[..s] != b[..s] {
            break;
        }
        for k in 0..=(b.len() - s).min(a.len() - s) {
            if a[a.len() - k..] != b[b.len() - k..] {
                break;
            }
            let e = b.len() - k;
            let better = match best {
                None => true,
                Some((bs, be)) => e - s < be - bs || (e - s == be - bs && s > bs),
            };
            if better {
                best = Some((s, e));
            }
        }
    }
    best.filter(|(s, e)| e > s).map(|(start, end)| CharSpan { start, end })
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

pub fn surfaces(text: &str) -> Vec<String> {
    tokenize(text, 0).into_iter().map(|t| t.surface).collect()
}

/// Alphanumeric runs and single punctuation chars.
pub fn pieces(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut run = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            run.push(c);
            continue;
        }
        if !run.is_empty() {
            out.push(std::mem::take(&mut run));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !run.is_empty() {
        out.push(run);
    }
    out
}

// ---------------------------------------------------------------- fuzzing

const NAMES: &[&str] = &[
    "Alice", "Bob Smith", "Zoë", "Åsa Lindqvist", "Paris", "Tromsø", "Acme Corp", "Harbor Institute",
    "Müller", "Chen Wei", "Lagos",
];
const NUMBERS: &[&str] = &["3", "42", "1,200", "$5 million", "2019", "7.5", "Monday", "March", "12 percent"];
const PRONOUNS: &[&str] = &["he", "she", "him", "her", "his", "hers", "himself", "herself"];
const AUX: &[&str] = &["was", "is", "were", "has", "had", "did", "could", "will", "would", "must"];
const NEGATED: &[&str] = &["didn't", "wasn't", "isn't", "couldn't", "hasn't", "not"];
const COMMON: &[&str] = &[
    "the", "report", "said", "met", "visited", "a", "new", "plan", "in", "on", "café", "naïve", "early", ",",
    "approved", "budget", "after", "talks", "with",
];

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => proptest::sample::select(NAMES),
        2 => proptest::sample::select(NUMBERS),
        2 => proptest::sample::select(PRONOUNS),
        2 => proptest::sample::select(AUX),
        1 => proptest::sample::select(NEGATED),
        5 => proptest::sample::select(COMMON),
    ]
    .prop_map(str::to_string)
}

fn render_sentence(words: &[String]) -> String {
    let mut s = String::new();
    for w in words {
        if !s.is_empty() && w != "," {
            s.push(' ');
        }
        s.push_str(w);
    }
    let mut chars = s.chars();
    let first = chars.next().map(|c| c.to_uppercase().collect::<String>()).unwrap_or_default();
    format!("{first}{}.", chars.as_str())
}

fn sentence_words() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(word(), 1..14).prop_map(|mut w| {
        if w[0] == "," {
            w[0] = "the".into();
        }
        w
    })
}

#[derive(Debug, Clone)]
pub struct FuzzCase {
    pub claim: String,
    pub document: String,
    pub seed: u64,
    pub noise_p: f64,
}

pub fn fuzz_case() -> impl Strategy<Value = FuzzCase> {
    (
        sentence_words(),
        proptest::collection::vec(sentence_words(), 0..4),
        any::<u64>(),
        proptest::sample::select(&[0.05, 0.3, 0.9][..]),
    )
        .prop_map(|(claim, context, seed, noise_p)| {
            let claim = render_sentence(&claim);
            let mut document = claim.clone();
            for c in &context {
                document.push(' ');
                document.push_str(&render_sentence(c));
            }
            FuzzCase {
                claim,
                document,
                seed,
                noise_p,
            }
        })
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub claims: usize,
    pub transformed: usize,
    pub swaps: usize,
    pub negations: usize,
    pub noisy: usize,
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// A span-preserving check on a transform outcome, before and after noise.
fn check_outcome(
    kind: TransformKind,
    claim: &Claim,
    doc: &Document,
    t: &Transformed,
    case: &FuzzCase,
    tally: &mut Tally,
) -> Result<(), String> {
    tally.transformed += 1;
    // label/polarity partition
    check(t.label == kind.label(), || format!("{kind}: label {}", t.label))?;
    check((kind.polarity() == Polarity::Plus) == (t.label == Label::Consistent), || {
        format!("{kind}: polarity mismatch")
    })?;
    check(t.kind == kind, || format!("{kind}: reported {}", t.kind))?;

    if kind.is_single_edit() {
        tally.swaps += 1;
        let oracle = minimal_diff(&claim.text, &t.claim.text);
        check(oracle.is_some() && oracle == t.augmentation_span, || {
            format!(
                "{kind}: {:?} -> {:?}: span {:?}, oracle {:?}",
                claim.text, t.claim.text, t.augmentation_span, oracle
            )
        })?;
    }
    if matches!(kind, TransformKind::EntitySwap | TransformKind::NumberSwap) {
        // new = old[..i] + S + old[old.len() - rest..] for a document surface S
        let old: Vec<char> = claim.text.chars().collect();
        let new: Vec<char> = t.claim.text.chars().collect();
        let group = if kind == TransformKind::EntitySwap { EntityGroup::Named } else { EntityGroup::Number };
        let tagged = TaggedDocument::builtin(doc.clone());
        let sourced = tagged.entities.iter().filter(|m| m.group == group).any(|m| {
            let s: Vec<char> = m.surface.chars().collect();
            doc.text.contains(&m.surface)
                && s.len() <= new.len()
                && (0..=new.len() - s.len()).any(|i| {
                    let rest = new.len() - i - s.len();
                    new[i..i + s.len()] == s[..]
                        && i + rest <= old.len()
                        && old[..i] == new[..i]
                        && old[old.len() - rest..] == new[i + s.len()..]
                })
        });
        check(sourced, || format!("{kind}: {:?} is not a one-region swap in a document surface", t.claim.text))?;
    }

    // noise: span text kept, token edit distance bounded by fired decisions
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed ^ 0x9e37);
    let noisy = inject_noise(t.clone(), &NoiseModel::new(case.noise_p), &mut rng);
    if !noisy.noise_positions.is_empty() {
        tally.noisy += 1;
    }
    // Compared over a context-free split so that retokenizing the noisy text
    // cannot merge tokens (e.g. "A" + "." read back as the initial "A.").
    // Each decision edits one token of `w` pieces, so it costs at most `w`.
    let budget: usize = noisy
        .noise_positions
        .iter()
        .map(|&i| pieces(&t.claim.tokens[i].surface).len())
        .sum();
    let dist = levenshtein(&pieces(&t.claim.text), &pieces(&noisy.claim.text));
    check(dist <= budget, || {
        format!(
            "noise: {:?} -> {:?}: distance {dist} > {budget} for {} decisions",
            t.claim.text,
            noisy.claim.text,
            noisy.noise_positions.len()
        )
    })?;
    match (t.augmentation_span, noisy.augmentation_span) {
        (Some(a), Some(b)) => check(char_slice(&t.claim.text, a) == char_slice(&noisy.claim.text, b), || {
            format!("noise moved span text: {:?} {a} -> {:?} {b}", t.claim.text, noisy.claim.text)
        })?,
        (None, None) => {}
        (a, b) => return Err(format!("noise changed span presence {a:?} -> {b:?}")),
    }
    Ok(())
}

/// Every transform property on one fuzzed claim.
pub fn check_transform_case(case: &FuzzCase, tally: &mut Tally) -> Result<(), String> {
    let doc = Document::new("fuzz", case.document.clone());
    if doc.sentences.is_empty() {
        return Ok(());
    }
    let claim = Claim::from_sentence(&doc, 0);
    let tagged = TaggedDocument::builtin(doc.clone());
    tally.claims += 1;

    let mut table = ParaphraseTable::default();
    for pivot in Pivot::ALL {
        table.insert(TableEntry {
            text: claim.text.clone(),
            pivot,
            paraphrase: format!("Reportedly, {}", claim.text),
        });
    }
    let provider = ParaphraseProvider::OfflineTable(table);

    for kind in TransformKind::ALL {
        let run = |rng: &mut ChaCha8Rng| -> TransformOutcome {
            match kind {
                TransformKind::Identity => apply_identity(&claim),
                TransformKind::Paraphrase => apply_paraphrase(&claim, &provider, &[], rng).unwrap(),
                TransformKind::EntitySwap => {
                    apply_entity_swap(&claim, &tagged, EntityGroup::Named, SwapOptions::default(), rng)
                }
                TransformKind::NumberSwap => {
                    apply_entity_swap(&claim, &tagged, EntityGroup::Number, SwapOptions::default(), rng)
                }
                TransformKind::PronounSwap => apply_pronoun_swap(&claim, rng),
                TransformKind::Negation => apply_negation(&claim, rng),
            }
        };
        let first = run(&mut ChaCha8Rng::seed_from_u64(case.seed));
        let again = run(&mut ChaCha8Rng::seed_from_u64(case.seed));
        check(first == again, || format!("{kind}: not deterministic"))?;
        if let TransformOutcome::Transformed(t) = &first {
            check_outcome(kind, &claim, &doc, t, case, tally)?;
        }
    }

    // negation involution at every auxiliary
    for (i, aux) in find_auxiliaries(&claim.tokens).iter().enumerate() {
        let stacked = aux.negated
            && claim.tokens.get(aux.token_index + 2).is_some_and(|t| {
                let w = t.surface.to_lowercase().replace('\u{2019}', "'");
                w == "not" || w == "n't"
            });
        let Some(once) = negate_at(&claim, i).transformed() else {
            check(stacked, || format!("negation {i} skipped on {:?}", claim.text))?;
            continue;
        };
        check(!stacked, || format!("stacked negation {i} edited in {:?}", claim.text))?;
        tally.negations += 1;
        let twice = negate_at(&once.claim, i)
            .transformed()
            .ok_or_else(|| format!("second negation skipped on {:?}", once.claim.text))?;
        check(normalize_negation(&twice.claim.text) == normalize_negation(&claim.text), || {
            format!("involution: {:?} -> {:?} -> {:?}", claim.text, once.claim.text, twice.claim.text)
        })?;
        if !claim.text.contains("n't") {
            check(twice.claim.text == claim.text, || {
                format!("exact involution: {:?} -> {:?}", claim.text, twice.claim.text)
            })?;
        }
    }

    // token-level noise on its own
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    let (out, positions) = apply_noise(&claim.tokens, case.noise_p, &mut rng);
    check(levenshtein(&surfaces(&claim.text), &out) <= positions.len(), || {
        format!("apply_noise bound on {:?}", claim.text)
    })?;
    Ok(())
}

// ---------------------------------------------------------------- datasets

/// Compare a noisy pipeline run with a noise-free run of the same seed.
/// Single-edit examples must carry the minimal char diff between original
/// and transformed claim; noise must leave the spanned text untouched.
/// Returns the number of single-edit examples checked.
pub fn check_span_metadata(noisy: &[Example], clean: &[Example]) -> Result<usize, String> {
    let by_id: BTreeMap<&str, &Example> = clean.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut checked = 0;
    for e in noisy.iter().filter(|e| e.transform.is_single_edit()) {
        let twin = by_id.get(e.id.as_str()).ok_or_else(|| format!("{} missing from clean run", e.id))?;
        let oracle = minimal_diff(&twin.original_claim, &twin.claim);
        check(oracle.is_some() && oracle == twin.augmentation_span, || {
            format!("{}: span {:?}, oracle {:?}", e.id, twin.augmentation_span, oracle)
        })?;
        if e.noise_positions.is_empty() {
            check(minimal_diff(&e.original_claim, &e.claim) == e.augmentation_span, || {
                format!("{}: noiseless span disagrees with oracle", e.id)
            })?;
        }
        let (a, b) = (twin.augmentation_span.unwrap(), e.augmentation_span.unwrap());
        check(char_slice(&twin.claim, a) == char_slice(&e.claim, b), || {
            format!("{}: noise altered the spanned text", e.id)
        })?;
        checked += 1;
    }
    Ok(checked)
}

// ---------------------------------------------------------------- metrics

pub fn bf_balanced_accuracy(preds: &[Label], golds: &[Label]) -> f64 {
    let mut recalls = Vec::new();
    for class in [Label::Consistent, Label::Inconsistent] {
        let mut n = 0;
        let mut hit = 0;
        for i in 0..golds.len() {
            if golds[i] == class {
                n += 1;
                if preds[i] == class {
                    hit += 1;
                }
            }
        }
        recalls.push(hit as f64 / n as f64);
    }
    recalls.iter().sum::<f64>() / recalls.len() as f64
}

/// `2 tp / (2 tp + fp + fn)`, 0 when tp is 0.
pub fn bf_f1(preds: &[Label], golds: &[Label], positive: Label) -> f64 {
    let tp = (0..golds.len()).filter(|&i| preds[i] == positive && golds[i] == positive).count() as f64;
    let fp = (0..golds.len()).filter(|&i| preds[i] == positive && golds[i] != positive).count() as f64;
    let fneg = (0..golds.len()).filter(|&i| preds[i] != positive && golds[i] == positive).count() as f64;
    if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fneg)
    }
}

pub fn bf_ranking(pairs: &[(f64, f64)]) -> f64 {
    let mut credit = 0.0;
    for (p, n) in pairs {
        credit += match p.partial_cmp(n).unwrap() {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Less => 0.0,
        };
    }
    credit / pairs.len() as f64
}

fn chars_of(s: CharSpan) -> BTreeSet<usize> {
    (s.start..s.end).collect()
}

pub fn bf_containment(pairs: &[(String, CharSpan, Vec<CharSpan>)]) -> f64 {
    let hits = pairs
        .iter()
        .filter(|(_, m, hs)| hs.iter().any(|h| chars_of(*m).is_subset(&chars_of(*h))))
        .count();
    hits as f64 / pairs.len() as f64
}

pub fn bf_token_f1(text: &str, model: CharSpan, human: &[CharSpan]) -> f64 {
    let toks = tokenize(text, 0);
    let m_chars = chars_of(model);
    let h_chars: BTreeSet<usize> = human.iter().flat_map(|h| chars_of(*h)).collect();
    let covered = |set: &BTreeSet<usize>| -> BTreeSet<usize> {
        toks.iter()
            .enumerate()
            .filter(|(_, t)| (t.span.start..t.span.end).any(|c| set.contains(&c)))
            .map(|(i, _)| i)
            .collect()
    };
    let (m, h) = (covered(&m_chars), covered(&h_chars));
    if m.is_empty() && h.is_empty() {
        return 1.0;
    }
    let shared = m.intersection(&h).count() as f64;
    if shared == 0.0 {
        0.0
    } else {
        2.0 * shared / (m.len() + h.len()) as f64
    }
}

/// Textbook Fleiss' kappa: `(P - Pe) / (1 - Pe)`.
pub fn bf_fleiss(items: &[Vec<u8>], categories: u8) -> Option<f64> {
    let n = items[0].len() as f64;
    let big_n = items.len() as f64;
    let mut p_bar = 0.0;
    let mut totals = vec![0.0; categories as usize];
    for it in items {
        let mut agree = 0.0;
        for c in 0..categories {
            let k = it.iter().filter(|x| **x == c).count() as f64;
            agree += k * (k - 1.0);
            totals[c as usize] += k;
        }
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= big_n;
    let pe: f64 = totals.iter().map(|t| (t / (big_n * n)).powi(2)).sum();
    if (1.0 - pe).abs() < 1e-15 {
        None
    } else {
        Some((p_bar - pe) / (1.0 - pe))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn random_span<R: Rng>(rng: &mut R, len: usize) -> CharSpan {
    let start = rng.gen_range(0..len);
    let end = rng.gen_range(start + 1..=len);
    CharSpan { start, end }
}

const TEXTS: &[&str] = &[
    "Zoë met Åsa in Tromsø on Monday.",
    "The council approved a $5 million budget after long talks.",
    "He didn't say whether the café would reopen.",
    "Mr. Chen, the new chair, visited Lagos, Paris and Berlin.",
];

/// All six metrics against their brute-force definitions on one random
/// instance drawn from `seed`.
pub fn check_metrics(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..60);
    let label = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Label::Consistent } else { Label::Inconsistent };
    let mut golds: Vec<Label> = (0..n).map(|_| label(&mut rng)).collect();
    golds[0] = Label::Consistent;
    golds[1] = Label::Inconsistent;
    let preds: Vec<Label> = (0..n).map(|_| label(&mut rng)).collect();

    let ba = balanced_accuracy(&preds, &golds).map_err(|e| e.to_string())?;
    check(close(ba, bf_balanced_accuracy(&preds, &golds)), || format!("balanced accuracy seed {seed}"))?;
    for positive in [Label::Consistent, Label::Inconsistent] {
        let f1 = binary_f1(&preds, &golds, positive).map_err(|e| e.to_string())?;
        check(close(f1, bf_f1(&preds, &golds, positive)), || format!("f1 seed {seed}"))?;
    }

    // coarse scores so ties occur
    let pairs: Vec<(f64, f64)> = (0..rng.gen_range(1..80))
        .map(|_| (rng.gen_range(0..5) as f64 / 4.0, rng.gen_range(0..5) as f64 / 4.0))
        .collect();
    let r = ranking_accuracy_from_scores(&pairs).map_err(|e| e.to_string())?;
    check(close(r, bf_ranking(&pairs)), || format!("ranking seed {seed}"))?;

    let spans: Vec<(String, CharSpan, Vec<CharSpan>)> = (0..rng.gen_range(1..20))
        .map(|_| {
            let text = TEXTS[rng.gen_range(0..TEXTS.len())];
            let len = text.chars().count();
            let model = random_span(&mut rng, len);
            let human = (0..rng.gen_range(1..3)).map(|_| random_span(&mut rng, len)).collect();
            (text.to_string(), model, human)
        })
        .collect();
    let span_pairs: Vec<SpanPair<'_>> = spans.iter().map(|(t, m, h)| SpanPair::new(t, *m, h.clone())).collect();
    let c = span_containment_accuracy(&span_pairs).map_err(|e| e.to_string())?;
    check(close(c, bf_containment(&spans)), || format!("containment seed {seed}"))?;
    for (t, m, h) in &spans {
        let f = span_token_f1(*m, h, t).map_err(|e| e.to_string())?;
        check(close(f, bf_token_f1(t, *m, h)), || format!("token f1 seed {seed}: {t:?} {m} {h:?}"))?;
    }

    let raters = rng.gen_range(2..7);
    let categories = rng.gen_range(2..5u8);
    let items: Vec<Vec<u8>> = (0..rng.gen_range(1..30))
        .map(|_| (0..raters).map(|_| rng.gen_range(0..categories)).collect())
        .collect();
    let expected = bf_fleiss(&items, categories);
    match (fleiss_kappa(&items), expected) {
        (Ok(k), Some(e)) => check(close(k.kappa, e), || format!("kappa seed {seed}: {} vs {e}", k.kappa))?,
        (Ok(k), None) => check(k.kappa == 1.0, || format!("kappa seed {seed}: degenerate gave {}", k.kappa))?,
        (Err(err), e) => return Err(format!("kappa seed {seed}: {err} (oracle {e:?})")),
    }
    Ok(())
}
