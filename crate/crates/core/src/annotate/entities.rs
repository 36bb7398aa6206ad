//! Deterministic rule-based entity and number tagger.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_title, CharSpan, Document, Token};

/// Swapping is only allowed within a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityGroup {
    Named,
    Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EntityKind {
    Person,
    Location,
    Institution,
    Date,
    Numeric,
    Other,
}

impl EntityKind {
    /// Map a tagger label (ours or spaCy/CoNLL style) to a kind.
    pub fn from_label(label: &str) -> EntityKind {
        match label.to_ascii_uppercase().as_str() {
            "PERSON" | "PER" => EntityKind::Person,
            "LOCATION" | "LOC" | "GPE" => EntityKind::Location,
            "INSTITUTION" | "ORG" | "ORGANIZATION" => EntityKind::Institution,
            "DATE" | "TIME" => EntityKind::Date,
            "NUMERIC" | "CARDINAL" | "ORDINAL" | "MONEY" | "PERCENT" | "QUANTITY" => {
                EntityKind::Numeric
            }
            _ => EntityKind::Other,
        }
    }

    /// `Other` is compatible with both groups.
    pub fn compatible_with(self, group: EntityGroup) -> bool {
        match self {
            EntityKind::Person | EntityKind::Location | EntityKind::Institution => {
                group == EntityGroup::Named
            }
            EntityKind::Date | EntityKind::Numeric => group == EntityGroup::Number,
            EntityKind::Other => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub span: CharSpan,
    pub surface: String,
    pub group: EntityGroup,
    pub kind: Option<EntityKind>,
}

const MONTHS: &[&str] = &[
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.",
    "sep.", "sept.", "oct.", "nov.", "dec.",
];

const WEEKDAYS: &[&str] = &[
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];

const NUMBER_WORDS: &[&str] = &[
    "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
    "tenth",
];

const SCALES: &[&str] = &["hundred", "thousand", "million", "billion", "trillion"];

const CURRENCY: &[&str] = &["$", "£", "€", "¥", "us$"];

const CONNECTORS: &[&str] = &["of", "de", "van", "von", "der", "du", "la", "&"];

const INSTITUTION_WORDS: &[&str] = &[
    "inc.", "corp.", "co.", "ltd.", "llc", "plc", "university", "college", "school", "bank",
    "ministry", "department", "company", "party", "council", "association", "institute",
    "agency", "committee", "court", "church", "foundation", "group", "commission", "senate",
    "congress", "parliament", "police", "airlines", "hospital", "club", "fc", "union",
    "office", "army", "navy", "times", "post", "news", "network",
];

/// Words that start sentences capitalized without being names.
const COMMON_WORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "there", "here", "it", "its", "he",
    "she", "his", "her", "him", "they", "them", "their", "we", "our", "us", "you", "your", "i",
    "my", "me", "who", "what", "when", "where", "why", "how", "which", "while", "after",
    "before", "during", "since", "until", "as", "at", "by", "for", "from", "in", "into", "of",
    "on", "onto", "over", "under", "with", "without", "about", "against", "among", "between",
    "through", "to", "and", "but", "or", "nor", "so", "yet", "if", "then", "than", "because",
    "although", "though", "however", "meanwhile", "also", "still", "even", "only", "just",
    "now", "today", "yesterday", "tomorrow", "last", "next", "earlier", "later", "once",
    "some", "many", "most", "more", "all", "both", "each", "every", "any", "no", "not",
    "none", "several", "few", "other", "another", "such", "one", "police", "officials",
    "authorities", "experts", "residents", "witnesses", "researchers", "scientists",
    "according", "despite", "instead", "indeed", "overall", "finally", "furthermore",
    "moreover", "nevertheless", "otherwise", "perhaps", "please", "yes", "well", "so",
    "is", "was", "are", "were", "be", "been", "has", "have", "had", "do", "does", "did",
    "will", "would", "can", "could", "shall", "should", "may", "might", "must", "let",
    "there's", "it's", "what's", "many", "much", "new", "old", "former", "latest", "local",
];

fn lower(t: &Token) -> String {
    t.surface.to_lowercase()
}

fn is_capitalized(t: &Token) -> bool {
    t.surface.chars().next().is_some_and(|c| c.is_uppercase())
        && t.surface.chars().any(|c| c.is_alphabetic())
}

fn is_month(t: &Token) -> bool {
    is_capitalized(t) && MONTHS.contains(&lower(t).as_str())
}

/// Month names that are also common words or ambiguous abbreviations need
/// an adjacent number to count as a date.
fn month_needs_number(t: &Token) -> bool {
    matches!(lower(t).as_str(), "may" | "mar." | "jan." | "sun.")
}

fn is_weekday(t: &Token) -> bool {
    is_capitalized(t) && WEEKDAYS.contains(&lower(t).as_str())
}

fn is_numeric(t: &Token) -> bool {
    t.surface.chars().any(|c| c.is_ascii_digit())
}

fn digits_value(s: &str) -> Option<u32> {
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn is_day(t: &Token) -> bool {
    let s = lower(t);
    let core = ["st", "nd", "rd", "th"]
        .iter()
        .find_map(|suf| s.strip_suffix(suf))
        .unwrap_or(&s);
    core.len() <= 2 && digits_value(core).is_some_and(|d| (1..=31).contains(&d))
}

fn is_year(t: &Token) -> bool {
    t.surface.len() == 4 && digits_value(&t.surface).is_some_and(|y| (1000..=2999).contains(&y))
}

fn is_number_word(t: &Token) -> bool {
    NUMBER_WORDS.contains(&lower(t).as_str())
}

fn extend_quantity(tokens: &[Token], mut end: usize) -> usize {
    while end < tokens.len() && SCALES.contains(&lower(&tokens[end]).as_str()) {
        end += 1;
    }
    if end < tokens.len() && (tokens[end].surface == "%" || lower(&tokens[end]) == "percent") {
        end += 1;
    }
    end
}

/// Token ranges of number/date mentions in one sentence.
fn number_ranges(tokens: &[Token]) -> Vec<(usize, usize, EntityKind)> {
    let n = tokens.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let t = &tokens[i];
        if CURRENCY.contains(&lower(t).as_str()) && i + 1 < n && is_numeric(&tokens[i + 1]) {
            let end = extend_quantity(tokens, i + 2);
            out.push((i, end, EntityKind::Numeric));
            i = end;
        } else if is_month(t) {
            let mut end = i + 1;
            let mut has_number = false;
            if end < n && is_day(&tokens[end]) {
                end += 1;
                has_number = true;
                if end + 1 < n && tokens[end].surface == "," && is_year(&tokens[end + 1]) {
                    end += 2;
                } else if end < n && is_year(&tokens[end]) {
                    end += 1;
                }
            } else if end < n && is_year(&tokens[end]) {
                end += 1;
                has_number = true;
            }
            if month_needs_number(t) && !has_number {
                i += 1;
                continue;
            }
            out.push((i, end, EntityKind::Date));
            i = end;
        } else if is_weekday(t) {
            out.push((i, i + 1, EntityKind::Date));
            i += 1;
        } else if is_numeric(t) || is_number_word(t) {
            let mut end = i + 1;
            let kind;
            if is_day(t) && end < n && is_month(&tokens[end]) {
                end += 1;
                if end < n && is_year(&tokens[end]) {
                    end += 1;
                }
                kind = EntityKind::Date;
            } else {
                end = extend_quantity(tokens, end);
                kind = if end == i + 1 && is_year(t) {
                    EntityKind::Date
                } else {
                    EntityKind::Numeric
                };
            }
            out.push((i, end, kind));
            i = end;
        } else {
            i += 1;
        }
    }
    out
}

fn is_name_candidate(t: &Token) -> bool {
    is_capitalized(t) && t.surface != "I" && !is_title(&t.surface)
}

/// Surface statistics used to decide whether a sentence-initial capitalized
/// word is a name.
struct CaseEvidence {
    capitalized_mid: HashSet<String>,
    lowercase_seen: HashSet<String>,
}

impl CaseEvidence {
    fn collect(docs: &[&Document]) -> Self {
        let mut capitalized_mid = HashSet::new();
        let mut lowercase_seen = HashSet::new();
        for doc in docs {
            for sentence in &doc.sentences {
                let initial = initial_token(&sentence.tokens);
                for (i, t) in sentence.tokens.iter().enumerate() {
                    if Some(i) != initial && is_capitalized(t) {
                        capitalized_mid.insert(t.surface.clone());
                    }
                    if t.surface.chars().any(|c| c.is_alphabetic())
                        && t.surface == t.surface.to_lowercase()
                    {
                        lowercase_seen.insert(t.surface.clone());
                    }
                }
            }
        }
        CaseEvidence {
            capitalized_mid,
            lowercase_seen,
        }
    }

    fn initial_is_name(&self, t: &Token) -> bool {
        if self.capitalized_mid.contains(&t.surface) {
            return true;
        }
        let l = lower(t);
        !COMMON_WORDS.contains(&l.as_str()) && !self.lowercase_seen.contains(&l)
    }
}

fn initial_token(tokens: &[Token]) -> Option<usize> {
    tokens
        .iter()
        .position(|t| t.surface.chars().any(|c| c.is_alphanumeric()))
}

fn named_kind(tokens: &[Token], start: usize, end: usize) -> EntityKind {
    if start > 0 && is_title(&tokens[start - 1].surface) {
        return EntityKind::Person;
    }
    if tokens[start..end]
        .iter()
        .any(|t| INSTITUTION_WORDS.contains(&lower(t).as_str()))
    {
        return EntityKind::Institution;
    }
    EntityKind::Other
}

/// Tag `doc` with the built-in rules.
///
/// Numbers come from digit, ordinal, month-name, currency and percent
/// patterns, with multi-token dates merged. Names are maximal runs of
/// capitalized tokens (optionally joined by `of`, `de`, ...). A
/// sentence-initial capitalized word only starts a name when it is seen
/// capitalized mid-sentence elsewhere, or when it is neither a common
/// sentence starter nor seen in lowercase. `context` contributes casing
/// evidence, which matters when tagging a lone claim.
pub fn tag_builtin(doc: &Document, context: Option<&Document>) -> Vec<EntityMention> {
    let evidence_docs: Vec<&Document> = std::iter::once(doc).chain(context).collect();
    let evidence = CaseEvidence::collect(&evidence_docs);
    let mut mentions = Vec::new();
    for sentence in &doc.sentences {
        let tokens = &sentence.tokens;
        let mut used = vec![false; tokens.len()];
        let mut ranges: Vec<(usize, usize, EntityGroup, EntityKind)> = Vec::new();
        for (start, end, kind) in number_ranges(tokens) {
            used[start..end].iter_mut().for_each(|u| *u = true);
            ranges.push((start, end, EntityGroup::Number, kind));
        }

        let initial = initial_token(tokens);
        let candidate = |i: usize| !used[i] && is_name_candidate(&tokens[i]);
        let mut i = 0;
        while i < tokens.len() {
            if !candidate(i) || (Some(i) == initial && !evidence.initial_is_name(&tokens[i])) {
                i += 1;
                continue;
            }
            let start = i;
            let mut end = i + 1;
            loop {
                if end < tokens.len() && candidate(end) {
                    end += 1;
                } else if end + 1 < tokens.len()
                    && CONNECTORS.contains(&tokens[end].surface.as_str())
                    && candidate(end + 1)
                {
                    end += 2;
                } else {
                    break;
                }
            }
            ranges.push((start, end, EntityGroup::Named, named_kind(tokens, start, end)));
            i = end;
        }

        ranges.sort_by_key(|r| r.0);
        for (start, end, group, kind) in ranges {
            let span = CharSpan {
                start: tokens[start].span.start,
                end: tokens[end - 1].span.end,
            };
            mentions.push(EntityMention {
                span,
                surface: doc.slice(span).to_string(),
                group,
                kind: Some(kind),
            });
        }
    }
    mentions
}
