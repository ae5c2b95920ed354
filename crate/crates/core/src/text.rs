//! String and token semantics: edit distance, token typing, and header
//! keyword / stopword scoring against a dictionary.
//!
//! Matching is case-insensitive with punctuation stripped at token edges;
//! invoice headers vary in case and decoration arbitrarily. Keyword matching
//! is Levenshtein-tolerant (OCR substitutions are common); stopword matching
//! is exact so that near-misses like "rate" vs "date" cannot veto a header.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::model::Token;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextError {
    #[error("cannot classify empty text")]
    EmptyText,
    #[error("entry {0:?} appears in both keyword and stopword sections")]
    DictionaryConflict(String),
    #[error("malformed dictionary: {0}")]
    DictionaryFormat(&'static str),
}

/// Coarse content type of a token, a total function of its text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TokenClass {
    Amount,
    Integer,
    Date,
    Alphabetic,
    Code,
    Other,
}

/// Minimal edit distance (insert / delete / substitute, unit costs)
/// between two sequences.
pub fn levenshtein_slice<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, av) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, bv) in b.iter().enumerate() {
            let cost = usize::from(av != bv);
            cur[j + 1] = (cur[j] + 1).min(prev[j + 1] + 1).min(prev[j] + cost);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let av: Vec<char> = a.chars().collect();
    let bv: Vec<char> = b.chars().collect();
    levenshtein_slice(&av, &bv)
}

fn within_distance(a: &str, b: &str, max_dist: usize) -> bool {
    let la = a.chars().count();
    let lb = b.chars().count();
    if la.abs_diff(lb) > max_dist {
        return false;
    }
    levenshtein(a, b) <= max_dist
}

/// Currency marks accepted around amounts.
const CURRENCY: &[char] = &['$', '\u{20ac}', '\u{00a3}', '\u{00a5}'];

/// Classifies a token's text. The grammar is deterministic and total over
/// non-empty strings; precedence is date, amount, integer, alphabetic, code.
pub fn classify_token(text: &str) -> Result<TokenClass, TextError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(TextError::EmptyText);
    }
    if is_date(t) {
        return Ok(TokenClass::Date);
    }
    if is_amount(t) {
        return Ok(TokenClass::Amount);
    }
    if is_integer(t) {
        return Ok(TokenClass::Integer);
    }
    if t.chars().all(|c| c.is_alphabetic() || c == ' ') {
        return Ok(TokenClass::Alphabetic);
    }
    let has_alpha = t.chars().any(char::is_alphabetic);
    let has_digit = t.chars().any(|c| c.is_ascii_digit());
    if has_alpha && has_digit {
        return Ok(TokenClass::Code);
    }
    Ok(TokenClass::Other)
}

/// Numeric date in d/m/y, m/d/y, or y-m-d order with -, / or . separators.
fn is_date(t: &str) -> bool {
    for sep in ['/', '-', '.'] {
        if !t.contains(sep) {
            continue;
        }
        let parts: Vec<&str> = t.split(sep).collect();
        if parts.len() != 3 {
            continue;
        }
        if !parts
            .iter()
            .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()))
        {
            continue;
        }
        let lens: Vec<usize> = parts.iter().map(|p| p.len()).collect();
        let short = |l: usize| l == 1 || l == 2;
        let dmy = short(lens[0]) && short(lens[1]) && (short(lens[2]) || lens[2] == 4);
        let ymd = lens[0] == 4 && short(lens[1]) && short(lens[2]);
        if dmy || ymd {
            return true;
        }
    }
    false
}

fn is_integer(t: &str) -> bool {
    let rest = t
        .strip_prefix(['-', '+', '\u{2212}'])
        .unwrap_or(t);
    !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
}

/// Decimal-number pattern with optional sign, optional currency mark at
/// either end, and optional thousands separators in both separator locales
/// ("1,234.56" and "1.234,56").
fn is_amount(t: &str) -> bool {
    let mut s = t.trim();
    let mut marked = false;
    s = s.strip_prefix(['-', '+', '\u{2212}']).unwrap_or(s).trim_start();
    if let Some(rest) = s.strip_prefix(CURRENCY) {
        s = rest.trim_start();
        marked = true;
    }
    if let Some(rest) = s.strip_suffix(CURRENCY) {
        s = rest.trim_end();
        marked = true;
    }
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
        return false;
    }
    let seps: Vec<(usize, char)> = s
        .char_indices()
        .filter(|(_, c)| *c == '.' || *c == ',')
        .collect();
    if seps.is_empty() {
        // A bare digit run is an integer unless a currency mark is present.
        return marked;
    }
    let (last_pos, last_char) = *seps.last().unwrap();
    let tail = s.len() - last_pos - 1;
    if tail == 1 || tail == 2 {
        grouped_digits(&s[..last_pos], other_sep(last_char))
    } else if tail == 3 {
        grouped_digits(s, last_char)
    } else {
        false
    }
}

fn other_sep(c: char) -> char {
    if c == '.' {
        ','
    } else {
        '.'
    }
}

/// Digits optionally grouped by `sep`: a leading group of 1-3 digits and
/// trailing groups of exactly 3.
fn grouped_digits(s: &str, sep: char) -> bool {
    if s.is_empty() {
        return false;
    }
    let groups: Vec<&str> = s.split(sep).collect();
    if !groups
        .iter()
        .all(|g| !g.is_empty() && g.chars().all(|c| c.is_ascii_digit()))
    {
        return false;
    }
    if groups.len() == 1 {
        return true;
    }
    (1..=3).contains(&groups[0].len()) && groups[1..].iter().all(|g| g.len() == 3)
}

/// Lowercased token text with punctuation stripped at the edges.
pub fn normalize_token(text: &str) -> String {
    text.trim()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Header keyword and stopword sets. Entries are stored lowercase and the
/// two sets are disjoint by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HeaderDictionary {
    keywords: BTreeSet<String>,
    stopwords: BTreeSet<String>,
}

const DEFAULT_DICTIONARY: &str = include_str!("../data/default_dictionary.txt");

impl HeaderDictionary {
    pub fn new(
        keywords: BTreeSet<String>,
        stopwords: BTreeSet<String>,
    ) -> Result<Self, TextError> {
        if let Some(shared) = keywords.intersection(&stopwords).next() {
            return Err(TextError::DictionaryConflict(shared.clone()));
        }
        Ok(HeaderDictionary {
            keywords,
            stopwords,
        })
    }

    /// The shipped English-language defaults.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_DICTIONARY).expect("built-in dictionary is well-formed")
    }

    /// Parses the dictionary file format: one entry per line under the
    /// section markers `[keywords]` and `[stopwords]`; `#` starts a comment.
    pub fn parse(src: &str) -> Result<Self, TextError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Keywords,
            Stopwords,
        }
        let mut section = Section::None;
        let mut keywords = BTreeSet::new();
        let mut stopwords = BTreeSet::new();
        for raw in src.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[keywords]" => section = Section::Keywords,
                "[stopwords]" => section = Section::Stopwords,
                entry => {
                    let entry = normalize_entry(entry);
                    if entry.is_empty() {
                        continue;
                    }
                    match section {
                        Section::None => {
                            return Err(TextError::DictionaryFormat(
                                "entry before a section marker",
                            ))
                        }
                        Section::Keywords => {
                            keywords.insert(entry);
                        }
                        Section::Stopwords => {
                            stopwords.insert(entry);
                        }
                    }
                }
            }
        }
        Self::new(keywords, stopwords)
    }

    pub fn keywords(&self) -> &BTreeSet<String> {
        &self.keywords
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    fn keyword_match(&self, text: &str, max_dist: usize) -> bool {
        !text.is_empty()
            && self
                .keywords
                .iter()
                .any(|k| within_distance(text, k, max_dist))
    }

    fn stopword_match(&self, text: &str) -> bool {
        !text.is_empty() && self.stopwords.contains(text)
    }
}

/// Lowercase an entry and collapse inner whitespace to single spaces.
fn normalize_entry(entry: &str) -> String {
    let lower = entry.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    let mut last_space = true;
    for c in lower.chars() {
        if c.is_whitespace() {
            if !last_space {
                out.push(' ');
                last_space = true;
            }
        } else {
            out.push(c);
            last_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Fraction of a line's tokens that match a dictionary keyword within
/// `max_dist` edits. Multi-word keywords are matched against the
/// space-joined concatenation of up to two adjacent tokens, and both
/// participating tokens count as matched. Empty lines score 0.
pub fn keyword_score(line_tokens: &[&Token], dict: &HeaderDictionary, max_dist: usize) -> f64 {
    if line_tokens.is_empty() {
        return 0.0;
    }
    let norm: Vec<String> = line_tokens
        .iter()
        .map(|t| normalize_token(&t.text))
        .collect();
    let mut matched = vec![false; norm.len()];
    for (i, text) in norm.iter().enumerate() {
        if dict.keyword_match(text, max_dist) {
            matched[i] = true;
        }
    }
    for i in 0..norm.len().saturating_sub(1) {
        if norm[i].is_empty() || norm[i + 1].is_empty() {
            continue;
        }
        let mut pair = norm[i].clone();
        pair.push(' ');
        pair.push_str(&norm[i + 1]);
        if dict.keyword_match(&pair, max_dist) {
            matched[i] = true;
            matched[i + 1] = true;
        }
    }
    matched.iter().filter(|m| **m).count() as f64 / norm.len() as f64
}

/// True when any token (or adjacent pair) of the line equals a stopword
/// exactly after normalization.
pub fn stopword_hit(line_tokens: &[&Token], dict: &HeaderDictionary) -> bool {
    let norm: Vec<String> = line_tokens
        .iter()
        .map(|t| normalize_token(&t.text))
        .collect();
    if norm.iter().any(|t| dict.stopword_match(t)) {
        return true;
    }
    for w in norm.windows(2) {
        if w[0].is_empty() || w[1].is_empty() {
            continue;
        }
        let mut pair = w[0].clone();
        pair.push(' ');
        pair.push_str(&w[1]);
        if dict.stopword_match(&pair) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BBox;
    use alloc::string::ToString;

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn classify_amounts() {
        for s in [
            "1,234.56", "1.234,56", "12.50", "$12", "12\u{20ac}", "-45.00", "1,234", "+3.1",
        ] {
            assert_eq!(classify_token(s).unwrap(), TokenClass::Amount, "{s}");
        }
    }

    #[test]
    fn classify_dates() {
        for s in ["12/05/2023", "12-05-23", "12.05.2023", "2023-05-12"] {
            assert_eq!(classify_token(s).unwrap(), TokenClass::Date, "{s}");
        }
    }

    #[test]
    fn classify_integers() {
        for s in ["123", "0", "-5"] {
            assert_eq!(classify_token(s).unwrap(), TokenClass::Integer, "{s}");
        }
    }

    #[test]
    fn classify_alphabetic_code_other() {
        assert_eq!(classify_token("Walnut").unwrap(), TokenClass::Alphabetic);
        assert_eq!(classify_token("AB-1029X").unwrap(), TokenClass::Code);
        assert_eq!(classify_token("%").unwrap(), TokenClass::Other);
        assert_eq!(classify_token("12..34").unwrap(), TokenClass::Other);
    }

    #[test]
    fn classify_rejects_empty() {
        assert_eq!(classify_token("  "), Err(TextError::EmptyText));
    }

    #[test]
    fn builtin_dictionary_loads() {
        let dict = HeaderDictionary::builtin();
        assert!(dict.keywords().len() >= 40, "{}", dict.keywords().len());
        assert!(dict.stopwords().len() >= 20, "{}", dict.stopwords().len());
        assert!(dict.keywords().contains("description"));
        assert!(dict.stopwords().contains("subtotal"));
    }

    #[test]
    fn dictionary_sections_must_be_disjoint() {
        let err = HeaderDictionary::parse("[keywords]\ntotal\n[stopwords]\nTotal\n").unwrap_err();
        assert_eq!(err, TextError::DictionaryConflict("total".to_string()));
    }

    #[test]
    fn dictionary_entry_without_section_rejected() {
        assert!(HeaderDictionary::parse("total\n[keywords]\n").is_err());
    }

    fn tok(id: u64, text: &str) -> Token {
        let x = id as f64 * 50.0;
        Token::new(id, text.to_string(), BBox::new(x, 0.0, x + 40.0, 10.0).unwrap()).unwrap()
    }

    #[test]
    fn keyword_score_exact_hits() {
        let dict = HeaderDictionary::builtin();
        let toks = [tok(0, "Description"), tok(1, "Qty"), tok(2, "Amount")];
        let refs: Vec<&Token> = toks.iter().collect();
        assert_eq!(keyword_score(&refs, &dict, 0), 1.0);
    }

    #[test]
    fn keyword_score_tolerates_one_edit() {
        let dict = HeaderDictionary::builtin();
        let toks = [tok(0, "Descripton"), tok(1, "Qty")];
        let refs: Vec<&Token> = toks.iter().collect();
        assert_eq!(keyword_score(&refs, &dict, 1), 1.0);
        assert_eq!(keyword_score(&refs, &dict, 0), 0.5);
    }

    #[test]
    fn keyword_score_no_hits() {
        let dict = HeaderDictionary::builtin();
        let toks = [tok(0, "lorem"), tok(1, "ipsum")];
        let refs: Vec<&Token> = toks.iter().collect();
        assert_eq!(keyword_score(&refs, &dict, 1), 0.0);
    }

    #[test]
    fn multiword_keywords_match_adjacent_pairs() {
        let dict = HeaderDictionary::builtin();
        let toks = [tok(0, "Unit"), tok(1, "Price")];
        let refs: Vec<&Token> = toks.iter().collect();
        assert_eq!(keyword_score(&refs, &dict, 0), 1.0);
    }

    #[test]
    fn stopwords_hit_exactly_including_pairs() {
        let dict = HeaderDictionary::builtin();
        let toks = [tok(0, "Total"), tok(1, "Due"), tok(2, "145.67")];
        let refs: Vec<&Token> = toks.iter().collect();
        assert!(stopword_hit(&refs, &dict));
        let toks = [tok(0, "Rate")];
        let refs: Vec<&Token> = toks.iter().collect();
        assert!(!stopword_hit(&refs, &dict), "near-miss must not veto");
    }
}
