//! Classic ROUGE-N and ROUGE-L, at sentence-pair and summary level. These
//! serve both as the input-document similarity function and as the
//! baseline the weighted variants are compared against.

use std::collections::HashMap;

use crate::text::{lcs_len, ngrams, union_lcs, TextUnit, TokenizedSentence};

/// (recall, precision, f-score) triple, each in `[0, 1]`.
///
/// `zero_denominator` flags a degenerate input (a side too short to form
/// any counting unit); the components are then zero rather than an error,
/// so corpus runs survive one bad record.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RougeScore {
    pub recall: f64,
    pub precision: f64,
    pub fscore: f64,
    pub zero_denominator: bool,
}

impl RougeScore {
    /// Builds a score from recall and precision; f is their harmonic mean,
    /// zero when both sides vanish.
    pub fn from_rp(recall: f64, precision: f64) -> Self {
        Self {
            recall,
            precision,
            fscore: f_score(recall, precision),
            zero_denominator: false,
        }
    }

    pub fn zero_with_flag() -> Self {
        Self {
            zero_denominator: true,
            ..Self::default()
        }
    }

    pub fn component(&self, which: crate::metric::Component) -> f64 {
        match which {
            crate::metric::Component::Recall => self.recall,
            crate::metric::Component::Precision => self.precision,
            crate::metric::Component::Fscore => self.fscore,
        }
    }
}

pub fn f_score(recall: f64, precision: f64) -> f64 {
    if recall + precision > 0.0 {
        2.0 * recall * precision / (recall + precision)
    } else {
        0.0
    }
}

/// Aggregated sentence-level n-gram counts of a whole unit. N-grams never
/// cross sentence boundaries.
pub(crate) fn unit_ngram_counts(unit: &TextUnit, n: usize) -> HashMap<Vec<String>, usize> {
    let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
    for sentence in unit.sentences() {
        for (gram, c) in ngrams(sentence, n).counts() {
            *counts.entry(gram.clone()).or_insert(0) += c;
        }
    }
    counts
}

/// Classic ROUGE-N with clipped multiset intersection. Recall divides by
/// the reference n-gram total, precision by the candidate total.
pub fn rouge_n(candidate: &TextUnit, reference: &TextUnit, n: usize) -> RougeScore {
    let cand = unit_ngram_counts(candidate, n);
    let refr = unit_ngram_counts(reference, n);
    let cand_total: usize = cand.values().sum();
    let ref_total: usize = refr.values().sum();
    if cand_total == 0 || ref_total == 0 {
        return RougeScore::zero_with_flag();
    }
    let overlap: usize = refr
        .iter()
        .map(|(gram, rc)| (*rc).min(cand.get(gram).copied().unwrap_or(0)))
        .sum();
    RougeScore::from_rp(
        overlap as f64 / ref_total as f64,
        overlap as f64 / cand_total as f64,
    )
}

/// Sentence-pair ROUGE-L: recall is the LCS fraction of the reference,
/// precision the LCS fraction of the candidate. Empty sides yield zeros.
pub fn rouge_l_pair(candidate: &TokenizedSentence, reference: &TokenizedSentence) -> RougeScore {
    let lcs = lcs_len(candidate, reference) as f64;
    let recall = if reference.is_empty() {
        0.0
    } else {
        lcs / reference.len() as f64
    };
    let precision = if candidate.is_empty() {
        0.0
    } else {
        lcs / candidate.len() as f64
    };
    RougeScore::from_rp(recall, precision)
}

/// Summary-level ROUGE-L via union-LCS per reference sentence, with
/// token-count denominators.
pub fn rouge_l_summary(candidate: &TextUnit, reference: &TextUnit) -> RougeScore {
    rouge_l_summary_with(candidate, reference, false)
}

/// Summary-level ROUGE-L with a choice of denominators: token counts
/// (default), or literal sentence counts for audit runs. The literal mode
/// does not keep scores within `[0, 1]`.
pub fn rouge_l_summary_with(
    candidate: &TextUnit,
    reference: &TextUnit,
    literal_sentence_denominators: bool,
) -> RougeScore {
    let numerator: usize = reference
        .sentences()
        .iter()
        .map(|r| union_lcs(r, candidate))
        .sum();
    let (ref_den, cand_den) = if literal_sentence_denominators {
        (reference.sentence_count(), candidate.sentence_count())
    } else {
        (reference.token_count(), candidate.token_count())
    };
    if ref_den == 0 || cand_den == 0 {
        return RougeScore::zero_with_flag();
    }
    let recall = numerator as f64 / ref_den as f64;
    let precision = numerator as f64 / cand_den as f64;
    if literal_sentence_denominators {
        RougeScore::from_rp(recall, precision)
    } else {
        // repeated reference sentences can push the union-LCS numerator
        // past the candidate token count; keep scores within [0, 1]
        RougeScore::from_rp(recall.min(1.0), precision.min(1.0))
    }
}
