use super::abbrev::is_abbreviation;
use super::span::CharSpan;

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201d}' | '\u{2019}' | ')' | ']' | '}')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201c}' | '\u{2018}' | '(' | '[' | '{')
}

/// Split `text` into sentence spans (char offsets).
///
/// A boundary is placed after a run of `.?!` (plus closing quotes/brackets)
/// when it is followed by whitespace and then an uppercase letter, optionally
/// behind an opening quote. A single `.` ending an abbreviation or initial
/// never splits. Spans are trimmed of surrounding whitespace, so together
/// they cover every non-whitespace char exactly once.
pub fn segment_sentences(text: &str) -> Vec<CharSpan> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut cuts = Vec::new();
    let mut i = 0;
    while i < n {
        if !is_terminator(chars[i]) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < n && is_terminator(chars[j]) {
            j += 1;
        }
        let single_period = j - run_start == 1 && chars[run_start] == '.';
        while j < n && is_closer(chars[j]) {
            j += 1;
        }
        if j >= n || !chars[j].is_whitespace() {
            i = j.max(i + 1);
            continue;
        }
        let mut k = j;
        while k < n && chars[k].is_whitespace() {
            k += 1;
        }
        let starts_upper = k < n
            && (chars[k].is_uppercase()
                || (is_opener(chars[k]) && k + 1 < n && chars[k + 1].is_uppercase()));
        if starts_upper && !(single_period && ends_abbreviation(&chars, run_start)) {
            cuts.push(j);
        }
        i = k;
    }

    let mut spans = Vec::with_capacity(cuts.len() + 1);
    let mut seg_start = 0;
    for cut in cuts.into_iter().chain(std::iter::once(n)) {
        if let Some(span) = trimmed(&chars, seg_start, cut) {
            spans.push(span);
        }
        seg_start = cut;
    }
    spans
}

/// Does the whitespace-delimited word ending at `period` (inclusive) read as
/// an abbreviation?
fn ends_abbreviation(chars: &[char], period: usize) -> bool {
    let mut start = period;
    while start > 0 && !chars[start - 1].is_whitespace() {
        start -= 1;
    }
    while start < period && is_opener(chars[start]) {
        start += 1;
    }
    let word: String = chars[start..=period].iter().collect();
    is_abbreviation(&word)
}

fn trimmed(chars: &[char], mut start: usize, mut end: usize) -> Option<CharSpan> {
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    CharSpan::new(start, end).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::span::char_slice;

    fn texts(text: &str) -> Vec<&str> {
        segment_sentences(text)
            .into_iter()
            .map(|s| char_slice(text, s))
            .collect()
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(
            texts("Mr. Smith arrived. He left."),
            vec!["Mr. Smith arrived.", "He left."]
        );
    }

    #[test]
    fn empty_and_blank() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("   \n\t ").is_empty());
    }

    #[test]
    fn no_split_before_lowercase_or_digits() {
        assert_eq!(texts("It cost 3.5 million. that is odd."), vec!["It cost 3.5 million. that is odd."]);
        assert_eq!(texts("Version 2. 0 was out."), vec!["Version 2. 0 was out."]);
    }

    #[test]
    fn quotes_and_runs() {
        assert_eq!(
            texts("\"Stop!\" she said. Really?! \"Yes.\" The end"),
            vec!["\"Stop!\" she said.", "Really?!", "\"Yes.\"", "The end"]
        );
    }

    #[test]
    fn initials_do_not_split() {
        assert_eq!(
            texts("John F. Kennedy spoke in the U.S. Senate. It rained."),
            vec!["John F. Kennedy spoke in the U.S. Senate.", "It rained."]
        );
    }

    #[test]
    fn multibyte_offsets() {
        let text = "Café opened. Über won.";
        let spans = segment_sentences(text);
        assert_eq!(spans, vec![CharSpan::new(0, 12).unwrap(), CharSpan::new(13, 22).unwrap()]);
    }
}
