//! English-only text heuristics: tokenization, phrase chunking and sentence
//! splitting.
//!
//! Phrase chunking is part-of-speech free: text is split at punctuation and
//! stopwords, and every remaining run of content tokens becomes a phrase of at
//! most [`MAX_PHRASE_TOKENS`] tokens (longer runs are cut into consecutive
//! pieces).

use std::collections::HashSet;
use std::ops::Range;
use std::sync::OnceLock;

/// Longest phrase the chunker emits, in tokens.
pub const MAX_PHRASE_TOKENS: usize = 4;

const STOPWORDS: &str = include_str!("../assets/stopwords.txt");

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Returns true if `word` (already lowercased) is an English stopword.
pub fn is_stopword(word: &str) -> bool {
    stopword_set().contains(word)
}

/// A lowercased word together with its byte range in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
    /// True when punctuation separates this token from the previous one.
    pub after_break: bool,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '\''
}

/// Splits `text` into lowercased word tokens.
///
/// Words are maximal runs of alphanumerics, hyphens and apostrophes; leading
/// and trailing hyphens/apostrophes are trimmed and a trailing possessive `'s`
/// is dropped. Any non-whitespace character between two words marks a break.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut pending_break = false;
    let mut iter = text.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if !is_word_char(c) {
            if !c.is_whitespace() {
                pending_break = true;
            }
            iter.next();
            continue;
        }
        let mut end = start;
        while let Some(&(i, c)) = iter.peek() {
            if !is_word_char(c) {
                break;
            }
            end = i + c.len_utf8();
            iter.next();
        }
        let raw = &text[start..end];
        let lead = raw.len() - raw.trim_start_matches(['-', '\'']).len();
        let mut core = raw.trim_matches(['-', '\'']);
        if let Some(stripped) = core.strip_suffix("'s").or_else(|| core.strip_suffix("'S")) {
            core = stripped.trim_end_matches(['-', '\'']);
        }
        if core.is_empty() {
            pending_break = true;
            continue;
        }
        let span_start = start + lead;
        tokens.push(Token {
            text: core.to_lowercase(),
            span: span_start..span_start + core.len(),
            after_break: pending_break,
        });
        pending_break = false;
    }
    tokens
}

/// A chunked phrase with the byte range it covers in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseSpan {
    pub text: String,
    pub span: Range<usize>,
}

/// Chunks `text` into phrases, keeping every occurrence with its location.
pub fn phrase_spans(text: &str) -> Vec<PhraseSpan> {
    let mut out = Vec::new();
    let mut run: Vec<Token> = Vec::new();

    fn flush(run: &mut Vec<Token>, out: &mut Vec<PhraseSpan>) {
        for piece in run.chunks(MAX_PHRASE_TOKENS) {
            let words: Vec<&str> = piece.iter().map(|t| t.text.as_str()).collect();
            out.push(PhraseSpan {
                text: words.join(" "),
                span: piece[0].span.start..piece[piece.len() - 1].span.end,
            });
        }
        run.clear();
    }

    for token in tokenize(text) {
        if token.after_break {
            flush(&mut run, &mut out);
        }
        if is_stopword(&token.text) || !token.text.chars().any(char::is_alphanumeric) {
            flush(&mut run, &mut out);
            continue;
        }
        run.push(token);
    }
    flush(&mut run, &mut out);
    out
}

/// Extracts the deduplicated, lowercased phrase set of `text` in order of
/// first occurrence.
pub fn extract_concepts(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    phrase_spans(text)
        .into_iter()
        .filter_map(|p| seen.insert(p.text.clone()).then_some(p.text))
        .collect()
}

/// Content words of `text`: lowercased tokens minus stopwords.
pub fn content_words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .map(|t| t.text)
        .filter(|t| !is_stopword(t))
        .collect()
}

/// Light plural folding used wherever words are matched rather than displayed
/// ("strategies" -> "strategy", "adults" -> "adult").
pub fn fold_plural(token: &str) -> String {
    if token.len() > 4 && token.ends_with("ies") {
        return format!("{}y", &token[..token.len() - 3]);
    }
    if token.len() > 3
        && token.ends_with('s')
        && !token.ends_with("ss")
        && !token.ends_with("us")
        && !token.ends_with("is")
    {
        return token[..token.len() - 1].to_string();
    }
    token.to_string()
}

const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "al", "etc", "vs", "cf", "fig", "figs", "eq", "dr", "mr", "mrs", "ms", "prof",
    "approx", "no", "vol", "pp", "st", "jr", "sr", "inc", "ltd", "co", "u.s", "u.k",
];

fn ends_with_abbreviation(before: &str) -> bool {
    let word = before
        .rsplit(|c: char| c.is_whitespace() || c == '(')
        .next()
        .unwrap_or("")
        .to_lowercase();
    if word.len() == 1 && word.chars().all(char::is_alphabetic) {
        // single initials such as "J."
        return true;
    }
    ABBREVIATIONS.contains(&word.as_str())
}

/// Splits an abstract into sentences.
///
/// A boundary is a `.`, `?` or `!` followed by whitespace and an uppercase
/// letter (optionally after an opening quote or parenthesis). A period that
/// closes a known abbreviation or a single initial is not a boundary.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '?' | '!') {
            let mut j = i + 1;
            // closing quotes/brackets stay with the sentence
            while j < chars.len() && matches!(chars[j].1, '"' | '\'' | ')' | ']' | '”' | '’') {
                j += 1;
            }
            let mut k = j;
            let mut saw_space = false;
            while k < chars.len() && chars[k].1.is_whitespace() {
                saw_space = true;
                k += 1;
            }
            let mut m = k;
            while m < chars.len() && matches!(chars[m].1, '"' | '(' | '“' | '\'') {
                m += 1;
            }
            let next_upper = m < chars.len() && chars[m].1.is_uppercase();
            let guarded = c == '.' && ends_with_abbreviation(&text[start..pos]);
            if saw_space && next_upper && !guarded {
                let end = if j < chars.len() { chars[j].0 } else { text.len() };
                let s = text[start..end].trim();
                if !s.is_empty() {
                    sentences.push(s.to_string());
                }
                start = chars[k].0;
                i = k;
                continue;
            }
        }
        i += 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}
