//! Deterministic text normalization, sentence segmentation, n-gram
//! extraction and LCS primitives that every metric builds on.
//!
//! All functions here are pure; identical input bytes always produce
//! identical output.

use std::collections::{BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;

/// One sentence as an ordered sequence of normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenizedSentence {
    tokens: Vec<String>,
}

impl TokenizedSentence {
    /// Builds a sentence from already-normalized tokens. Empty tokens are
    /// dropped so the non-empty-token invariant holds.
    pub fn from_tokens<I, T>(tokens: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Self {
            tokens: tokens
                .into_iter()
                .map(Into::into)
                .filter(|t| !t.is_empty())
                .collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// An ordered list of tokenized sentences; holds a document, a reference
/// summary or a generated summary.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TextUnit {
    sentences: Vec<TokenizedSentence>,
}

impl TextUnit {
    pub fn new(sentences: Vec<TokenizedSentence>) -> Self {
        Self { sentences }
    }

    /// Builds a unit from pre-split sentence strings, tokenizing each one
    /// and dropping sentences that tokenize to nothing.
    pub fn from_sentence_strings<I, T>(sentences: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        Self {
            sentences: sentences
                .into_iter()
                .map(|s| tokenize_sentence(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn sentences(&self) -> &[TokenizedSentence] {
        &self.sentences
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Total token count over all sentences.
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Multiset of n-grams of a single sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramMultiset {
    n: usize,
    counts: HashMap<Vec<String>, usize>,
}

impl NGramMultiset {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &HashMap<Vec<String>, usize> {
        &self.counts
    }

    pub fn get(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Sum of multiplicities; `max(0, len - n + 1)` for an n-gram multiset
    /// of a sentence of `len` tokens.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Lowercases and splits on any non-alphanumeric character, discarding the
/// separators. Digits are kept; no stemming, no stopword removal.
pub fn tokenize_sentence(raw: &str) -> TokenizedSentence {
    let lowered = raw.to_lowercase();
    TokenizedSentence {
        tokens: lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
    }
}

static SENTENCE_BOUNDARY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[.!?]+(\s+|$)").expect("valid sentence boundary regex"));

/// Naive sentence splitter: breaks on `.`, `!` or `?` followed by
/// whitespace or end of input, then tokenizes each piece. Pieces that
/// tokenize to zero tokens are dropped. Loaders for pre-split corpora
/// bypass this entirely.
pub fn split_sentences(raw: &str) -> TextUnit {
    TextUnit::from_sentence_strings(SENTENCE_BOUNDARY.split(raw))
}

/// Sliding-window n-grams of one sentence with multiplicities. Empty when
/// the sentence is shorter than `n`.
pub fn ngrams(sentence: &TokenizedSentence, n: usize) -> NGramMultiset {
    assert!(n >= 1, "n-gram order must be positive");
    let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
    if sentence.len() >= n {
        for window in sentence.tokens().windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    NGramMultiset { n, counts }
}

/// Length of a longest common subsequence of the two token sequences.
pub fn lcs_len(a: &TokenizedSentence, b: &TokenizedSentence) -> usize {
    let (a, b) = (a.tokens(), b.tokens());
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for ai in a {
        for (j, bj) in b.iter().enumerate() {
            cur[j + 1] = if ai == bj {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Positions in `a` of the canonical LCS match against `b`: among all
/// maximum-length matchings, the lexicographically smallest sequence of
/// `a`-positions (earliest positions win ties), then smallest
/// `b`-positions.
pub fn canonical_lcs_positions(a: &TokenizedSentence, b: &TokenizedSentence) -> Vec<usize> {
    let (at, bt) = (a.tokens(), b.tokens());
    let (m, n) = (at.len(), bt.len());
    // suffix[i][j] = LCS length of at[i..] and bt[j..]
    let mut suffix = vec![vec![0usize; n + 1]; m + 1];
    for i in (0..m).rev() {
        for j in (0..n).rev() {
            suffix[i][j] = if at[i] == bt[j] {
                suffix[i + 1][j + 1] + 1
            } else {
                suffix[i + 1][j].max(suffix[i][j + 1])
            };
        }
    }
    let mut out = Vec::with_capacity(suffix[0][0]);
    let (mut i, mut j) = (0usize, 0usize);
    let mut remaining = suffix[0][0];
    while remaining > 0 {
        'outer: for ci in i..m {
            for cj in j..n {
                if at[ci] == bt[cj] && suffix[ci + 1][cj + 1] >= remaining - 1 {
                    out.push(ci);
                    i = ci + 1;
                    j = cj + 1;
                    break 'outer;
                }
            }
        }
        remaining -= 1;
    }
    out
}

/// Union-LCS of one reference sentence against a multi-sentence candidate:
/// the number of distinct reference token positions matched by the
/// canonical LCS against any candidate sentence.
pub fn union_lcs(reference: &TokenizedSentence, candidate: &TextUnit) -> usize {
    let mut matched: BTreeSet<usize> = BTreeSet::new();
    for sentence in candidate.sentences() {
        matched.extend(canonical_lcs_positions(reference, sentence));
    }
    matched.len()
}
