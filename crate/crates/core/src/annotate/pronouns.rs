use serde::{Deserialize, Serialize};

use crate::corpus::{CharSpan, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PronounGroup {
    Subjective,
    Objective,
    PossessiveDet,
    PossessiveInd,
    Reflexive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounMention {
    pub span: CharSpan,
    pub surface: String,
    pub group: PronounGroup,
    pub gendered: bool,
}

/// `(group, masculine, feminine)`. Each group has exactly one counterpart,
/// so every gendered pronoun has a distinct same-group replacement.
pub const PRONOUN_TABLE: &[(PronounGroup, &str, &str)] = &[
    (PronounGroup::Subjective, "he", "she"),
    (PronounGroup::Objective, "him", "her"),
    (PronounGroup::PossessiveDet, "his", "her"),
    (PronounGroup::PossessiveInd, "his", "hers"),
    (PronounGroup::Reflexive, "himself", "herself"),
];

/// Words after which `her` / `his` cannot be a determiner: verbs plus the
/// function words that may follow an object or standalone possessive.
const NON_NOUN_FOLLOWERS: &[&str] = &[
    // verbs and auxiliaries
    "is", "was", "are", "were", "be", "been", "has", "have", "had", "do", "does", "did", "will",
    "would", "can", "could", "shall", "should", "may", "might", "must", "said", "says", "say",
    "told", "asked", "went", "goes", "go", "came", "come", "got", "get", "made", "make", "took",
    "take", "gave", "give", "left", "became", "remained", "seemed", "felt", "knew", "thought",
    "wanted", "needed", "tried", "began", "started", "continued", "died", "won", "lost",
    "returned", "added", "called", "explained", "replied", "insisted", "admitted", "denied",
    // function words
    "a", "an", "the", "this", "that", "these", "those", "to", "in", "on", "at", "by", "for",
    "from", "with", "without", "about", "into", "onto", "over", "under", "after", "before",
    "during", "since", "until", "as", "of", "off", "up", "down", "out", "back", "away", "and",
    "or", "but", "nor", "so", "yet", "if", "when", "while", "because", "though", "although",
    "than", "then", "again", "too", "also", "not", "n't", "there", "here", "now", "today",
    "yesterday", "tomorrow", "himself", "herself", "he", "she", "him", "his", "her", "hers",
    "it", "they", "them", "we", "us", "you", "i", "me", "who", "which", "what", "where",
];

fn followed_by_non_noun(tokens: &[Token], i: usize) -> bool {
    match tokens.get(i + 1) {
        None => true,
        Some(next) => next.is_punct() || NON_NOUN_FOLLOWERS.contains(&next.lower().as_str()),
    }
}

/// Gendered pronouns in `tokens`.
///
/// `her` is a possessive determiner unless followed by punctuation or a word
/// from a closed list of verbs and function words, in which case it is
/// objective. `his` splits the same way between determiner and independent
/// possessive.
pub fn find_pronouns(tokens: &[Token]) -> Vec<PronounMention> {
    tokens
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let group = match t.lower().as_str() {
                "he" | "she" => PronounGroup::Subjective,
                "him" => PronounGroup::Objective,
                "himself" | "herself" => PronounGroup::Reflexive,
                "hers" => PronounGroup::PossessiveInd,
                "her" if followed_by_non_noun(tokens, i) => PronounGroup::Objective,
                "her" => PronounGroup::PossessiveDet,
                "his" if followed_by_non_noun(tokens, i) => PronounGroup::PossessiveInd,
                "his" => PronounGroup::PossessiveDet,
                _ => return None,
            };
            Some(PronounMention {
                span: t.span,
                surface: t.surface.clone(),
                group,
                gendered: true,
            })
        })
        .collect()
}

/// Same-group gendered alternatives for `surface` (lowercase output).
pub fn swap_candidates(surface: &str, group: PronounGroup) -> Vec<&'static str> {
    let lower = surface.to_lowercase();
    PRONOUN_TABLE
        .iter()
        .filter(|(g, _, _)| *g == group)
        .flat_map(|(_, m, f)| [*m, *f])
        .filter(|p| *p != lower)
        .collect()
}

/// Copy the capitalization pattern of `original` onto `replacement`.
pub fn match_case(original: &str, replacement: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    if original.chars().next().is_some_and(|c| c.is_uppercase()) {
        let mut chars = replacement.chars();
        return match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => String::new(),
        };
    }
    replacement.to_string()
}
