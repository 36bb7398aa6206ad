use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Helpfulness, HighlightPolicy, Judgment, SessionHeader, SessionItem};
use crate::eval::{
    fleiss_kappa, mean, span_containment_accuracy, span_token_f1, timing_summary, AgreementReport, Condition,
    SpanPair, TimingSummary,
};
use crate::transforms::Label;
use crate::CharSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportView {
    /// Every judgment.
    Raw,
    /// Judgments that agree with the gold label.
    GoldenAligned,
    /// Judgments that agree with the item's strict majority label.
    MajorityAligned,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpanAgreement {
    pub support_pairs: usize,
    pub support_containment: Option<f64>,
    pub support_token_f1: Option<f64>,
    pub error_pairs: usize,
    pub error_containment: Option<f64>,
    pub error_token_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewReport {
    pub judgment_count: usize,
    pub agreement: Vec<AgreementReport>,
    /// `(kappa_on - kappa_off) / |kappa_off|`.
    pub kappa_relative_change: Option<f64>,
    pub timing: TimingSummary,
    /// Model highlights against worker highlights.
    pub spans: BTreeMap<Condition, SpanAgreement>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HelpfulnessTally {
    /// Workers with at least one survey answer; the latest one counts.
    pub respondents: usize,
    pub article: BTreeMap<Helpfulness, usize>,
    pub claim: BTreeMap<Helpfulness, usize>,
    pub article_helpful_fraction: Option<f64>,
    pub claim_helpful_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session: String,
    pub policy: HighlightPolicy,
    pub n_judgments: usize,
    pub item_count: usize,
    pub judgment_count: usize,
    /// Item/condition pairs that ended up with more than `n_judgments`.
    pub overshoot: usize,
    pub views: BTreeMap<ReportView, ViewReport>,
    pub helpfulness: HelpfulnessTally,
    /// Strict majority over all judgments; `None` on ties or no judgments.
    pub majority_labels: BTreeMap<String, Option<Label>>,
}

fn majority(labels: &[Label]) -> Option<Label> {
    let c = labels.iter().filter(|l| **l == Label::Consistent).count();
    let i = labels.len() - c;
    match c.cmp(&i) {
        std::cmp::Ordering::Greater => Some(Label::Consistent),
        std::cmp::Ordering::Less => Some(Label::Inconsistent),
        std::cmp::Ordering::Equal => None,
    }
}

fn span_agreement(pairs: Vec<(&str, CharSpan, Vec<CharSpan>)>) -> (usize, Option<f64>, Option<f64>) {
    let f1s: Vec<f64> = pairs
        .iter()
        .filter_map(|(text, model, human)| span_token_f1(*model, human, text).ok())
        .collect();
    let pairs: Vec<SpanPair<'_>> = pairs
        .into_iter()
        .map(|(text, model, human)| SpanPair::new(text, model, human))
        .collect();
    (pairs.len(), span_containment_accuracy(&pairs).ok(), mean(&f1s))
}

fn view_report(items: &[SessionItem], index: &HashMap<&str, usize>, judgments: &[&Judgment]) -> ViewReport {
    let conditions = [Condition::HighlightsOn, Condition::HighlightsOff];
    let timing = timing_summary(
        &judgments
            .iter()
            .map(|j| (j.condition, j.elapsed_ms as f64 / 1000.0))
            .collect::<Vec<_>>(),
    );
    let mut agreement = Vec::new();
    let mut spans = BTreeMap::new();
    for c in conditions {
        let mine: Vec<&&Judgment> = judgments.iter().filter(|j| j.condition == c).collect();
        if mine.is_empty() {
            continue;
        }
        let mut per_item: Vec<Vec<Label>> = vec![Vec::new(); items.len()];
        for j in &mine {
            if let Some(&i) = index.get(j.example_id.as_str()) {
                per_item[i].push(j.label);
            }
        }
        per_item.retain(|v| !v.is_empty());
        let kappa = fleiss_kappa(&per_item).ok();
        agreement.push(AgreementReport {
            condition: c,
            fleiss_kappa: kappa.map(|k| k.kappa),
            raters_per_item: kappa.map_or(0, |k| k.raters_per_item),
            item_count: per_item.len(),
            items_dropped: kappa.map_or(per_item.len(), |k| k.items_dropped),
            mean_seconds_per_item: timing.per_condition.get(&c).map(|t| t.mean_seconds),
        });

        let mut support = Vec::new();
        let mut error = Vec::new();
        for j in &mine {
            let Some(&i) = index.get(j.example_id.as_str()) else { continue };
            let item = &items[i];
            if let (Some(model), Some(human)) = (item.support_span, &j.worker_highlights.document) {
                if !human.is_empty() {
                    support.push((item.document.as_str(), model, human.clone()));
                }
            }
            if let (Some(model), Some(human)) = (item.error_span, &j.worker_highlights.claim) {
                if !human.is_empty() {
                    error.push((item.claim.as_str(), model, human.clone()));
                }
            }
        }
        let (support_pairs, support_containment, support_token_f1) = span_agreement(support);
        let (error_pairs, error_containment, error_token_f1) = span_agreement(error);
        spans.insert(
            c,
            SpanAgreement {
                support_pairs,
                support_containment,
                support_token_f1,
                error_pairs,
                error_containment,
                error_token_f1,
            },
        );
    }
    let kappa_of = |c: Condition| agreement.iter().find(|a| a.condition == c).and_then(|a| a.fleiss_kappa);
    let kappa_relative_change = match (kappa_of(Condition::HighlightsOn), kappa_of(Condition::HighlightsOff)) {
        (Some(on), Some(off)) if off != 0.0 => Some((on - off) / off.abs()),
        _ => None,
    };
    ViewReport {
        judgment_count: judgments.len(),
        agreement,
        kappa_relative_change,
        timing,
        spans,
    }
}

fn helpfulness(judgments: &[Judgment]) -> HelpfulnessTally {
    let mut latest = BTreeMap::new();
    for j in judgments {
        if let Some(h) = j.helpfulness {
            latest.insert(j.worker_id.as_str(), h);
        }
    }
    let mut tally = HelpfulnessTally {
        respondents: latest.len(),
        ..Default::default()
    };
    for h in latest.values() {
        *tally.article.entry(h.article).or_insert(0) += 1;
        *tally.claim.entry(h.claim).or_insert(0) += 1;
    }
    let helpful = |m: &BTreeMap<Helpfulness, usize>| {
        (tally.respondents > 0).then(|| {
            let yes: usize = m.iter().filter(|(k, _)| **k != Helpfulness::Not).map(|(_, v)| v).sum();
            yes as f64 / tally.respondents as f64
        })
    };
    tally.article_helpful_fraction = helpful(&tally.article);
    tally.claim_helpful_fraction = helpful(&tally.claim);
    tally
}

/// Report over a session's judgments. Metrics come straight from the eval
/// module; this only groups judgments.
pub fn build_report(header: &SessionHeader, judgments: &[Judgment]) -> SessionReport {
    let items = &header.items;
    let index: HashMap<&str, usize> = items
        .iter()
        .enumerate()
        .map(|(i, it)| (it.example_id.as_str(), i))
        .collect();

    let mut by_item: Vec<Vec<Label>> = vec![Vec::new(); items.len()];
    let mut counts: HashMap<(usize, Condition), usize> = HashMap::new();
    for j in judgments {
        if let Some(&i) = index.get(j.example_id.as_str()) {
            by_item[i].push(j.label);
            *counts.entry((i, j.condition)).or_insert(0) += 1;
        }
    }
    let majorities: Vec<Option<Label>> = by_item.iter().map(|l| majority(l)).collect();

    let raw: Vec<&Judgment> = judgments.iter().collect();
    let golden: Vec<&Judgment> = judgments
        .iter()
        .filter(|j| index.get(j.example_id.as_str()).is_some_and(|&i| items[i].gold_label == Some(j.label)))
        .collect();
    let aligned: Vec<&Judgment> = judgments
        .iter()
        .filter(|j| index.get(j.example_id.as_str()).is_some_and(|&i| majorities[i] == Some(j.label)))
        .collect();

    let views = [
        (ReportView::Raw, raw),
        (ReportView::GoldenAligned, golden),
        (ReportView::MajorityAligned, aligned),
    ]
    .into_iter()
    .map(|(v, js)| (v, view_report(items, &index, &js)))
    .collect();

    SessionReport {
        session: header.session.clone(),
        policy: header.policy,
        n_judgments: header.n_judgments,
        item_count: items.len(),
        judgment_count: judgments.len(),
        overshoot: counts.values().filter(|c| **c > header.n_judgments).count(),
        views,
        helpfulness: helpfulness(judgments),
        majority_labels: items
            .iter()
            .zip(majorities)
            .map(|(it, m)| (it.example_id.clone(), m))
            .collect(),
    }
}
