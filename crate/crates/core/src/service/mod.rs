//! Annotation session logic behind the HTTP service: task assignment with
//! a highlights A/B policy, judgment validation, an append-only durable
//! log, and agreement/timing/span reports computed from that log.

mod log;
mod report;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{char_len, CharSpan};
use crate::datagen::Example;
use crate::eval::Condition;
use crate::scoring::{ExternalPrediction, Scorer};
use crate::transforms::Label;

pub use log::{parse_log, read_log, JudgmentLog, LogContents, LogRecord};
pub use report::{build_report, HelpfulnessTally, ReportView, SessionReport, SpanAgreement, ViewReport};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("worker {worker} already judged {example}")]
    Duplicate { worker: String, example: String },
    #[error("{0} already has all its judgments")]
    ItemFull(String),
    #[error("invalid judgment: {0}")]
    Validation(String),
    #[error("log belongs to a different session setup: {0}")]
    HeaderMismatch(String),
    #[error("log line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HighlightPolicy {
    On,
    Off,
    /// Workers alternate between conditions in order of first appearance.
    Ab,
}

impl FromStr for HighlightPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "on" => Ok(HighlightPolicy::On),
            "off" => Ok(HighlightPolicy::Off),
            "ab" => Ok(HighlightPolicy::Ab),
            other => Err(format!("expected on, off or ab, got {other:?}")),
        }
    }
}

impl fmt::Display for HighlightPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HighlightPolicy::On => "on",
            HighlightPolicy::Off => "off",
            HighlightPolicy::Ab => "ab",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionItem {
    pub example_id: String,
    pub document: String,
    pub claim: String,
    pub gold_label: Option<Label>,
    /// Model highlight over the document.
    pub support_span: Option<CharSpan>,
    /// Model highlight over the claim.
    pub error_span: Option<CharSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session: String,
    /// Judgments wanted per item and condition.
    pub n_judgments: usize,
    pub policy: HighlightPolicy,
    pub tool_version: String,
    pub items: Vec<SessionItem>,
}

impl SessionHeader {
    /// Items from a dataset. Model spans come from `predictions` when given,
    /// otherwise from `scorer`.
    pub fn from_examples(
        session: Option<String>,
        examples: &[Example],
        predictions: Option<&BTreeMap<String, ExternalPrediction>>,
        scorer: &dyn Scorer,
        n_judgments: usize,
        policy: HighlightPolicy,
    ) -> Self {
        let items: Vec<SessionItem> = examples
            .iter()
            .map(|e| {
                let (support, error) = match predictions {
                    Some(p) => p.get(&e.id).map_or((None, None), |p| (p.support_span, p.error_span)),
                    None => scorer
                        .spans(&e.text, &e.claim)
                        .map_or((None, None), |s| (s.support, s.error)),
                };
                SessionItem {
                    example_id: e.id.clone(),
                    document: e.text.clone(),
                    claim: e.claim.clone(),
                    gold_label: Some(e.label),
                    support_span: support,
                    error_span: error,
                }
            })
            .collect();
        let session = session.unwrap_or_else(|| {
            let mut key = format!("{n_judgments}\0{policy}");
            for it in &items {
                key.push('\0');
                key.push_str(&it.example_id);
            }
            crate::util::sha256_hex(key.as_bytes())[..12].to_string()
        });
        SessionHeader {
            session,
            n_judgments,
            policy,
            tool_version: crate::TOOL_VERSION.to_string(),
            items,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlights {
    pub support_span: Option<CharSpan>,
    pub error_span: Option<CharSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub session: String,
    pub example_id: String,
    pub document: String,
    pub claim: String,
    /// Present only under `HIGHLIGHTS_ON` for items with model spans.
    pub highlights: Option<Highlights>,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextTask {
    Task(AnnotationTask),
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Helpfulness {
    Not,
    Somewhat,
    Very,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelpfulnessSurvey {
    pub article: Helpfulness,
    pub claim: Helpfulness,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerHighlights {
    #[serde(default)]
    pub document: Option<Vec<CharSpan>>,
    #[serde(default)]
    pub claim: Option<Vec<CharSpan>>,
}

/// What a client posts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentSubmission {
    pub session: String,
    pub example_id: String,
    pub worker_id: String,
    pub label: Label,
    #[serde(default)]
    pub worker_highlights: WorkerHighlights,
    pub elapsed_ms: u64,
    /// Optional echo of the condition the task was served under.
    #[serde(default)]
    pub condition: Option<Condition>,
    #[serde(default)]
    pub helpfulness: Option<HelpfulnessSurvey>,
}

/// A judgment as stored in the log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub session: String,
    pub example_id: String,
    pub worker_id: String,
    pub label: Label,
    pub worker_highlights: WorkerHighlights,
    pub elapsed_ms: u64,
    pub condition: Condition,
    /// Milliseconds since the Unix epoch, server clock.
    pub timestamp_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helpfulness: Option<HelpfulnessSurvey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub session: String,
    pub example_id: String,
    pub worker_id: String,
    pub condition: Condition,
    /// Judgments now recorded for this item under this condition.
    pub item_judgments: usize,
    pub total_judgments: usize,
}

/// Example view without the gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleView {
    pub example_id: String,
    pub document: String,
    pub claim: String,
    pub support_span: Option<CharSpan>,
    pub error_span: Option<CharSpan>,
}

/// Live session state. Every accepted judgment is on disk (when a log is
/// attached) before it is acknowledged.
#[derive(Debug)]
pub struct AnnotationService {
    header: SessionHeader,
    index: HashMap<String, usize>,
    judgments: Vec<Judgment>,
    judged: HashSet<(String, usize)>,
    counts: HashMap<(usize, Condition), usize>,
    /// Item currently handed to each worker and not yet judged.
    pending: HashMap<String, usize>,
    conditions: HashMap<String, Condition>,
    log: Option<JudgmentLog>,
}

fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl AnnotationService {
    /// A session with no persistence.
    pub fn in_memory(header: SessionHeader) -> Self {
        let index = header
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| (it.example_id.clone(), i))
            .collect();
        AnnotationService {
            header,
            index,
            judgments: Vec::new(),
            judged: HashSet::new(),
            counts: HashMap::new(),
            pending: HashMap::new(),
            conditions: HashMap::new(),
            log: None,
        }
    }

    /// Open or create the log at `path`. An existing log is replayed (a
    /// torn final line from a crash is discarded); when `header` is given it
    /// must match the logged one.
    pub fn open(path: impl AsRef<Path>, header: Option<SessionHeader>) -> Result<Self, ServiceError> {
        let (log, contents) = JudgmentLog::open(path.as_ref(), header.as_ref())?;
        let mut service = AnnotationService::in_memory(contents.header);
        for (worker, condition) in contents.assignments {
            service.conditions.insert(worker, condition);
        }
        for j in contents.judgments {
            service.apply(j);
        }
        service.log = Some(log);
        Ok(service)
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn session_id(&self) -> &str {
        &self.header.session
    }

    pub fn judgments(&self) -> &[Judgment] {
        &self.judgments
    }

    fn check_session(&self, session: &str) -> Result<(), ServiceError> {
        if session == self.header.session {
            Ok(())
        } else {
            Err(ServiceError::UnknownSession(session.to_string()))
        }
    }

    fn apply(&mut self, j: Judgment) {
        if let Some(&i) = self.index.get(&j.example_id) {
            self.judged.insert((j.worker_id.clone(), i));
            *self.counts.entry((i, j.condition)).or_insert(0) += 1;
            if self.pending.get(&j.worker_id) == Some(&i) {
                self.pending.remove(&j.worker_id);
            }
        }
        self.conditions.entry(j.worker_id.clone()).or_insert(j.condition);
        self.judgments.push(j);
    }

    /// Condition for `worker`, assigning (and logging) one on first sight.
    fn condition_for(&mut self, worker: &str) -> Result<Condition, ServiceError> {
        if let Some(c) = self.conditions.get(worker) {
            return Ok(*c);
        }
        let c = match self.header.policy {
            HighlightPolicy::On => Condition::HighlightsOn,
            HighlightPolicy::Off => Condition::HighlightsOff,
            HighlightPolicy::Ab if self.conditions.len().is_multiple_of(2) => Condition::HighlightsOn,
            HighlightPolicy::Ab => Condition::HighlightsOff,
        };
        if let Some(log) = &mut self.log {
            log.append(&LogRecord::Assignment {
                worker_id: worker.to_string(),
                condition: c,
            })?;
        }
        self.conditions.insert(worker.to_string(), c);
        Ok(c)
    }

    fn count(&self, item: usize, condition: Condition) -> usize {
        self.counts.get(&(item, condition)).copied().unwrap_or(0)
    }

    fn in_flight(&self, item: usize, condition: Condition, except: &str) -> usize {
        self.pending
            .iter()
            .filter(|(w, i)| **i == item && w.as_str() != except && self.conditions.get(*w) == Some(&condition))
            .count()
    }

    fn task(&self, item: usize, condition: Condition) -> AnnotationTask {
        let it = &self.header.items[item];
        let highlights = (condition == Condition::HighlightsOn
            && (it.support_span.is_some() || it.error_span.is_some()))
        .then_some(Highlights {
            support_span: it.support_span,
            error_span: it.error_span,
        });
        AnnotationTask {
            session: self.header.session.clone(),
            example_id: it.example_id.clone(),
            document: it.document.clone(),
            claim: it.claim.clone(),
            highlights,
            condition,
        }
    }

    /// Next item for `worker`: one they have not judged, preferring the
    /// fewest judgments plus outstanding assignments. Items whose slots are
    /// all handed out are only offered once nothing else is left, so a
    /// worker who walks away cannot stall the session.
    pub fn next_task(&mut self, session: &str, worker: &str) -> Result<NextTask, ServiceError> {
        self.check_session(session)?;
        if worker.trim().is_empty() {
            return Err(ServiceError::Validation("worker id is empty".into()));
        }
        let condition = self.condition_for(worker)?;
        if let Some(&i) = self.pending.get(worker) {
            if self.count(i, condition) < self.header.n_judgments {
                return Ok(NextTask::Task(self.task(i, condition)));
            }
            self.pending.remove(worker);
        }
        let n = self.header.n_judgments;
        let best = (0..self.header.items.len())
            .filter(|&i| !self.judged.contains(&(worker.to_string(), i)) && self.count(i, condition) < n)
            .map(|i| (self.count(i, condition) + self.in_flight(i, condition, worker), i))
            .min();
        match best {
            Some((_, i)) => {
                self.pending.insert(worker.to_string(), i);
                Ok(NextTask::Task(self.task(i, condition)))
            }
            None => Ok(NextTask::Exhausted),
        }
    }

    pub fn submit(&mut self, s: JudgmentSubmission) -> Result<Ack, ServiceError> {
        self.check_session(&s.session)?;
        let &i = self
            .index
            .get(&s.example_id)
            .ok_or_else(|| ServiceError::UnknownExample(s.example_id.clone()))?;
        if s.worker_id.trim().is_empty() {
            return Err(ServiceError::Validation("worker id is empty".into()));
        }
        if s.elapsed_ms == 0 {
            return Err(ServiceError::Validation("elapsed_ms must be positive".into()));
        }
        let item = &self.header.items[i];
        for (side, spans, text) in [
            ("document", &s.worker_highlights.document, &item.document),
            ("claim", &s.worker_highlights.claim, &item.claim),
        ] {
            let len = char_len(text);
            if let Some(bad) = spans.iter().flatten().find(|sp| sp.is_empty() || !sp.within(len)) {
                return Err(ServiceError::Validation(format!("{side} highlight {bad} outside [0, {len})")));
            }
        }
        if self.judged.contains(&(s.worker_id.clone(), i)) {
            return Err(ServiceError::Duplicate {
                worker: s.worker_id,
                example: s.example_id,
            });
        }
        let assigned = self.conditions.get(&s.worker_id).copied();
        if let (Some(a), Some(c)) = (assigned, s.condition) {
            if a != c {
                return Err(ServiceError::Validation(format!("worker is assigned {a}, judgment says {c}")));
            }
        }
        let condition = match assigned {
            Some(c) => c,
            None => self.condition_for(&s.worker_id)?,
        };
        if self.count(i, condition) >= self.header.n_judgments {
            if self.pending.get(&s.worker_id) == Some(&i) {
                self.pending.remove(&s.worker_id);
            }
            return Err(ServiceError::ItemFull(s.example_id));
        }
        let judgment = Judgment {
            session: s.session,
            example_id: s.example_id,
            worker_id: s.worker_id,
            label: s.label,
            worker_highlights: s.worker_highlights,
            elapsed_ms: s.elapsed_ms,
            condition,
            timestamp_ms: now_ms(),
            helpfulness: s.helpfulness,
        };
        if let Some(log) = &mut self.log {
            log.append(&LogRecord::Judgment(judgment.clone()))?;
        }
        let ack = Ack {
            session: judgment.session.clone(),
            example_id: judgment.example_id.clone(),
            worker_id: judgment.worker_id.clone(),
            condition,
            item_judgments: self.count(i, condition) + 1,
            total_judgments: self.judgments.len() + 1,
        };
        self.apply(judgment);
        Ok(ack)
    }

    pub fn example(&self, id: &str) -> Result<ExampleView, ServiceError> {
        let &i = self.index.get(id).ok_or_else(|| ServiceError::UnknownExample(id.to_string()))?;
        let it = &self.header.items[i];
        Ok(ExampleView {
            example_id: it.example_id.clone(),
            document: it.document.clone(),
            claim: it.claim.clone(),
            support_span: it.support_span,
            error_span: it.error_span,
        })
    }

    pub fn report(&self, session: &str) -> Result<SessionReport, ServiceError> {
        self.check_session(session)?;
        Ok(build_report(&self.header, &self.judgments))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn header(n_items: usize, n: usize, policy: HighlightPolicy) -> SessionHeader {
        SessionHeader {
            session: "s".into(),
            n_judgments: n,
            policy,
            tool_version: "test".into(),
            items: (0..n_items)
                .map(|i| SessionItem {
                    example_id: format!("e{i}"),
                    document: "Zoë met Åsa in Tromsø.".into(),
                    claim: "Åsa met Zoë.".into(),
                    gold_label: Some(if i % 2 == 0 { Label::Consistent } else { Label::Inconsistent }),
                    support_span: Some(CharSpan { start: 0, end: 7 }),
                    error_span: Some(CharSpan { start: 0, end: 3 }),
                })
                .collect(),
        }
    }

    fn submit(svc: &mut AnnotationService, worker: &str, id: &str) -> Result<Ack, ServiceError> {
        svc.submit(JudgmentSubmission {
            session: "s".into(),
            example_id: id.into(),
            worker_id: worker.into(),
            label: Label::Consistent,
            worker_highlights: WorkerHighlights::default(),
            elapsed_ms: 1000,
            condition: None,
            helpfulness: None,
        })
    }

    #[test]
    fn three_workers_fill_every_item_exactly() {
        let mut svc = AnnotationService::in_memory(header(10, 3, HighlightPolicy::On));
        let mut done = vec![false; 3];
        while done.iter().any(|d| !d) {
            for w in 0..3 {
                if done[w] {
                    continue;
                }
                let worker = format!("w{w}");
                match svc.next_task("s", &worker).unwrap() {
                    NextTask::Task(t) => {
                        submit(&mut svc, &worker, &t.example_id).unwrap();
                    }
                    NextTask::Exhausted => done[w] = true,
                }
            }
        }
        assert_eq!(svc.judgments().len(), 30);
        for i in 0..10 {
            assert_eq!(svc.count(i, Condition::HighlightsOn), 3);
        }
        assert_eq!(svc.next_task("s", "w9").unwrap(), NextTask::Exhausted);
    }

    #[test]
    fn never_serves_a_judged_item() {
        let mut svc = AnnotationService::in_memory(header(3, 3, HighlightPolicy::Off));
        let mut seen = HashSet::new();
        while let NextTask::Task(t) = svc.next_task("s", "w").unwrap() {
            assert!(seen.insert(t.example_id.clone()));
            assert!(t.highlights.is_none());
            submit(&mut svc, "w", &t.example_id).unwrap();
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn duplicates_and_validation() {
        let mut svc = AnnotationService::in_memory(header(2, 3, HighlightPolicy::On));
        submit(&mut svc, "w", "e0").unwrap();
        assert!(matches!(submit(&mut svc, "w", "e0"), Err(ServiceError::Duplicate { .. })));
        assert!(matches!(submit(&mut svc, "w", "nope"), Err(ServiceError::UnknownExample(_))));
        let mut bad = JudgmentSubmission {
            session: "s".into(),
            example_id: "e1".into(),
            worker_id: "w".into(),
            label: Label::Inconsistent,
            worker_highlights: WorkerHighlights {
                document: None,
                claim: Some(vec![CharSpan { start: 0, end: 13 }]),
            },
            elapsed_ms: 5,
            condition: None,
            helpfulness: None,
        };
        assert!(matches!(svc.submit(bad.clone()), Err(ServiceError::Validation(_))));
        bad.worker_highlights.claim = Some(vec![CharSpan { start: 0, end: 12 }]);
        bad.condition = Some(Condition::HighlightsOff);
        assert!(matches!(svc.submit(bad.clone()), Err(ServiceError::Validation(_))));
        bad.condition = Some(Condition::HighlightsOn);
        svc.submit(bad).unwrap();
        assert!(matches!(svc.next_task("other", "w"), Err(ServiceError::UnknownSession(_))));
    }

    #[test]
    fn ab_alternates_and_sticks() {
        let mut svc = AnnotationService::in_memory(header(4, 1, HighlightPolicy::Ab));
        let conds: Vec<Condition> = ["a", "b", "c", "a"]
            .iter()
            .map(|w| match svc.next_task("s", w).unwrap() {
                NextTask::Task(t) => t.condition,
                NextTask::Exhausted => panic!(),
            })
            .collect();
        use Condition::*;
        assert_eq!(conds, vec![HighlightsOn, HighlightsOff, HighlightsOn, HighlightsOn]);
    }

    #[test]
    fn highlights_only_when_on() {
        let mut svc = AnnotationService::in_memory(header(1, 1, HighlightPolicy::On));
        let NextTask::Task(t) = svc.next_task("s", "w").unwrap() else { panic!() };
        assert_eq!(t.highlights.unwrap().support_span, Some(CharSpan { start: 0, end: 7 }));
    }
}
