//! Text normalization: lowercasing, punctuation and numeral removal, stop
//! words, Porter stemming and rule-based sentence splitting.
//!
//! A [`CleanDocument`] keeps two views of a post. `text` keeps stop words and
//! sentence terminators so that summaries can quote it verbatim; `tokens` is
//! the stop-word-free, stemmed bag used for topic statistics.

mod porter;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use porter::stem;

const ENGLISH_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// Minimum words per sentence; shorter fragments merge into a neighbor.
pub const MIN_SENTENCE_WORDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    /// The bundled 175-word English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    /// One lowercase word per line; `#` starts a comment.
    pub fn parse(list: &str) -> Self {
        let words = list
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Self { words }
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for StopWords {
    fn default() -> Self {
        Self::english()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanDocument {
    pub post_id: u64,
    pub text: String,
    pub tokens: Vec<String>,
    pub sentence_spans: Vec<(usize, usize)>,
    /// Set when no tokens survive preprocessing.
    pub empty: bool,
}

impl CleanDocument {
    pub fn sentences(&self) -> impl Iterator<Item = &str> {
        self.sentence_spans.iter().map(|&(s, e)| &self.text[s..e])
    }
}

pub fn normalize(post_id: u64, raw: &str, stop: &StopWords) -> CleanDocument {
    let text = normalize_text(raw);
    let tokens = tokenize(&text, stop);
    let sentence_spans = sentence_spans(&text);
    CleanDocument {
        post_id,
        empty: tokens.is_empty(),
        text,
        tokens,
        sentence_spans,
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2018}' | '\u{2019}' | '`')
}

/// Lowercases, deletes numerals and apostrophes, and turns every other
/// non-letter into a word break. A `.`, `!` or `?` that ends a word (is
/// followed by whitespace or the end of input) survives as a sentence
/// terminator attached to the preceding word.
pub fn normalize_text(raw: &str) -> String {
    enum Item {
        Word(String),
        Stop(char),
    }
    let chars: Vec<char> = raw.chars().collect();
    let mut items: Vec<Item> = Vec::new();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let lower = c.to_ascii_lowercase();
        if lower.is_ascii_lowercase() {
            word.push(lower);
            continue;
        }
        if c.is_ascii_digit() || is_apostrophe(c) {
            continue;
        }
        if !word.is_empty() {
            items.push(Item::Word(std::mem::take(&mut word)));
        }
        if is_terminator(c) && chars.get(i + 1).is_none_or(|n| n.is_whitespace()) {
            items.push(Item::Stop(c));
        }
    }
    if !word.is_empty() {
        items.push(Item::Word(word));
    }

    let mut out = String::with_capacity(raw.len());
    let mut after_word = false;
    for item in items {
        match item {
            Item::Word(w) => {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(&w);
                after_word = true;
            }
            Item::Stop(c) => {
                if after_word {
                    out.push(c);
                }
                after_word = false;
            }
        }
    }
    out
}

/// Stop-word-filtered Porter stems of every `[a-z]+` run in `text`.
pub fn tokenize(text: &str, stop: &StopWords) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_lowercase())
        .filter(|w| !w.is_empty() && !stop.contains(w))
        .map(stem)
        .filter(|s| !s.is_empty() && !stop.contains(s))
        .collect()
}

pub fn split_sentences(text: &str) -> Vec<&str> {
    sentence_spans(text)
        .into_iter()
        .map(|(s, e)| &text[s..e])
        .collect()
}

/// Byte spans of the sentences of `text`.
///
/// Sentences end at `.`, `!` or `?` followed by whitespace, and at newline
/// runs. The terminator itself is not part of the span. Sentences with fewer
/// than [`MIN_SENTENCE_WORDS`] words merge into the following sentence (the
/// last one merges backwards).
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let mut raw: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        let next = iter.peek().map(|&(_, n)| n);
        let boundary = c == '\n' || (is_terminator(c) && next.is_none_or(char::is_whitespace));
        if boundary {
            raw.push((start, i));
            start = i + c.len_utf8();
        }
    }
    raw.push((start, text.len()));

    let trimmed: Vec<(usize, usize)> = raw
        .into_iter()
        .filter_map(|(s, e)| trim_span(text, s, e))
        .collect();

    let mut merged: Vec<(usize, usize)> = Vec::new();
    let mut pending: Option<usize> = None;
    for (s, e) in trimmed {
        let s = pending.take().unwrap_or(s);
        if word_count(&text[s..e]) < MIN_SENTENCE_WORDS {
            pending = Some(s);
        } else {
            merged.push((s, e));
        }
    }
    if let Some(s) = pending {
        match merged.last_mut() {
            Some(last) => last.1 = trim_span(text, s, text.len()).map_or(last.1, |(_, e)| e),
            None => {
                if let Some(span) = trim_span(text, s, text.len()) {
                    merged.push(span);
                }
            }
        }
    }
    merged
}

fn trim_span(text: &str, s: usize, e: usize) -> Option<(usize, usize)> {
    let slice = &text[s..e];
    let lead = slice.len() - slice.trim_start().len();
    let body = slice.trim().trim_end_matches(is_terminator).trim_end();
    if body.is_empty() || !body.chars().any(char::is_alphanumeric) {
        return None;
    }
    Some((s + lead, s + lead + body.len()))
}

fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_size() {
        assert_eq!(StopWords::english().len(), 175);
    }

    #[test]
    fn stopword_file_comments() {
        let s = StopWords::parse("# header\nfoo\n  Bar # trailing\n\n");
        assert_eq!(s.len(), 2);
        assert!(s.contains("bar"));
    }

    #[test]
    fn jenkins_example() {
        let d = normalize(1, "Jenkins tries 2 times!", &StopWords::english());
        assert_eq!(d.tokens, vec!["jenkin", "tri", "time"]);
        assert_eq!(d.text, "jenkins tries times!");
        assert!(!d.empty);
    }

    #[test]
    fn empty_and_stopword_only() {
        let stop = StopWords::english();
        let d = normalize(1, "", &stop);
        assert!(d.tokens.is_empty() && d.empty);
        assert!(d.sentence_spans.is_empty());
        let d = normalize(2, "the of and", &stop);
        assert!(d.tokens.is_empty() && d.empty);
        assert_eq!(d.text, "the of and");
    }

    #[test]
    fn apostrophes_join_and_numbers_vanish() {
        assert_eq!(
            normalize_text("I'm on API 21, it doesn't work."),
            "im on api it doesnt work."
        );
        assert_eq!(
            normalize_text("see ViewHolder.java now"),
            "see viewholder java now"
        );
        assert_eq!(normalize_text("version 2. Then"), "version. then");
        assert_eq!(normalize_text("why?! ok... fine"), "why! ok. fine");
        assert_eq!(normalize_text("...leading"), "leading");
    }

    #[test]
    fn splitting_rules() {
        assert_eq!(split_sentences("a b c. d e f"), vec!["a b c", "d e f"]);
        assert_eq!(
            split_sentences("hi. ok. the long sentence here"),
            vec!["hi. ok. the long sentence here"]
        );
        assert_eq!(
            split_sentences("one two three. four five six. ok"),
            vec!["one two three", "four five six. ok"]
        );
        assert_eq!(
            split_sentences("line one here\n\nline two here"),
            vec!["line one here", "line two here"]
        );
        assert_eq!(split_sentences("tiny"), vec!["tiny"]);
        assert!(split_sentences(" . ! ").is_empty());
    }

    #[test]
    fn joined_questions_split_back_apart() {
        let items = [
            "jenkins tries to launch tools emulator instead of emulator emulator im trying to set up jenkins ui tests and it fails on running emulator command",
            "i am trying to add kotlin sources of an aar in android studio it doesnt work when i select choose sources and choose the corresponding source jar",
            "let me explain the situation i have an sdk works with google api and implementing a lot of dependencies then i implement the lib into my new app which is also implements dependencies everything goes fine until i try to run the app",
        ];
        let text = normalize_text(&items.join(". "));
        assert_eq!(split_sentences(&text), items.to_vec());
    }
}
