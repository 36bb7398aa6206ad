use serde::{Deserialize, Serialize};

use super::abbrev::is_abbreviation;
use super::span::CharSpan;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub span: CharSpan,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        self.surface.chars().all(|c| !c.is_alphanumeric())
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }
}

const CONTRACTIONS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

fn normalize_apostrophes(s: &str) -> String {
    s.to_lowercase().replace('\u{2019}', "'")
}

fn is_contraction(s: &str) -> bool {
    CONTRACTIONS.contains(&normalize_apostrophes(s).as_str())
}

/// Length in chars of the contraction suffix of `word`, if it has one and
/// something precedes it.
fn contraction_suffix(word: &str) -> Option<usize> {
    let norm = normalize_apostrophes(word);
    let total = norm.chars().count();
    CONTRACTIONS.iter().find_map(|suffix| {
        let len = suffix.chars().count();
        (total > len && norm.ends_with(suffix)).then_some(len)
    })
}

/// Tokenize one sentence. Spans are offset by `base_offset` chars.
///
/// Whitespace-delimited chunks are split further: leading and trailing
/// punctuation become single-char tokens, contraction suffixes (`n't`, `'s`,
/// `'re`, `'ve`, `'ll`, `'d`, `'m`) are split off, and abbreviations stay
/// whole.
pub fn tokenize(sentence_text: &str, base_offset: usize) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chunk: Vec<char> = Vec::new();
    let mut chunk_start = 0;
    for (offset, c) in sentence_text.chars().chain(std::iter::once(' ')).enumerate() {
        if c.is_whitespace() {
            if !chunk.is_empty() {
                split_chunk(&chunk, base_offset + chunk_start, &mut tokens);
                chunk.clear();
            }
        } else {
            if chunk.is_empty() {
                chunk_start = offset;
            }
            chunk.push(c);
        }
    }
    tokens
}

fn push(tokens: &mut Vec<Token>, chars: &[char], start: usize) {
    if chars.is_empty() {
        return;
    }
    tokens.push(Token {
        surface: chars.iter().collect(),
        span: CharSpan {
            start,
            end: start + chars.len(),
        },
    });
}

fn split_chunk(chunk: &[char], start: usize, tokens: &mut Vec<Token>) {
    let as_string = |c: &[char]| c.iter().collect::<String>();
    if is_contraction(&as_string(chunk)) {
        push(tokens, chunk, start);
        return;
    }

    let mut lo = 0;
    let mut hi = chunk.len();
    // leading punctuation, unless what remains is an abbreviation
    while lo < hi && !chunk[lo].is_alphanumeric() && !is_abbreviation(&as_string(&chunk[lo..hi])) {
        push(tokens, &chunk[lo..lo + 1], start + lo);
        lo += 1;
    }
    let mut trailing = Vec::new();
    while lo < hi
        && !chunk[hi - 1].is_alphanumeric()
        && !is_abbreviation(&as_string(&chunk[lo..hi]))
    {
        let core = as_string(&chunk[lo..hi]);
        if is_contraction(&core) {
            break;
        }
        hi -= 1;
        trailing.push(hi);
    }

    let core = &chunk[lo..hi];
    if !is_abbreviation(&as_string(core)) {
        if let Some(len) = contraction_suffix(&as_string(core)) {
            let cut = core.len() - len;
            push(tokens, &core[..cut], start + lo);
            push(tokens, &core[cut..], start + lo + cut);
        } else {
            push(tokens, core, start + lo);
        }
    } else {
        push(tokens, core, start + lo);
    }
    for &pos in trailing.iter().rev() {
        push(tokens, &chunk[pos..pos + 1], start + pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text, 0).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn contraction_split() {
        assert_eq!(surfaces("He didn't go."), vec!["He", "did", "n't", "go", "."]);
        assert_eq!(surfaces("I'm sure it's John's."), vec!["I", "'m", "sure", "it", "'s", "John", "'s", "."]);
        assert_eq!(surfaces("They\u{2019}re here"), vec!["They", "\u{2019}re", "here"]);
    }

    #[test]
    fn abbreviation_and_symbols() {
        assert_eq!(surfaces("U.S. GDP rose 3.2%"), vec!["U.S.", "GDP", "rose", "3.2", "%"]);
        assert_eq!(surfaces("(Mr. Lee, etc.)"), vec!["(", "Mr.", "Lee", ",", "etc.", ")"]);
        assert_eq!(surfaces("in the U.S.,"), vec!["in", "the", "U.S.", ","]);
    }

    #[test]
    fn quotes_and_runs() {
        assert_eq!(surfaces("\"Hello!\" ..."), vec!["\"", "Hello", "!", "\"", ".", ".", "."]);
        assert_eq!(surfaces("$5 'quoted'"), vec!["$", "5", "'", "quoted", "'"]);
    }

    #[test]
    fn standalone_contraction_kept() {
        assert_eq!(surfaces("did n't 's"), vec!["did", "n't", "'s"]);
    }

    #[test]
    fn offsets_are_faithful() {
        let text = "Zoë's café didn't open, right?";
        for tok in tokenize(text, 10) {
            let local = CharSpan::new(tok.span.start - 10, tok.span.end - 10).unwrap();
            assert_eq!(crate::corpus::span::char_slice(text, local), tok.surface);
        }
    }
}
