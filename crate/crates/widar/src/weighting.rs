//! Coverage and redundancy weights for reference-summary sentences, and
//! their combination into per-sentence overall weights.
//!
//! A reference sentence earns coverage weight for every document sentence
//! it matches above the ROUGE-L recall threshold `theta1`, and loses
//! redundancy weight for every sibling reference sentence it matches above
//! `theta2`. Combined weights are rescaled so they sum to the number of
//! reference sentences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rouge::rouge_l_pair;
use crate::text::TextUnit;

#[derive(Debug, Error, PartialEq)]
pub enum WeightingError {
    #[error("input document has no sentences")]
    EmptyDocument,
    #[error("reference summary has no sentences")]
    EmptyReference,
    #[error("weight vectors have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// ROUGE-L recall thresholds for coverage (`theta1`) and redundancy
/// (`theta2`) counting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightThresholds {
    pub theta1: f64,
    pub theta2: f64,
}

impl Default for WeightThresholds {
    fn default() -> Self {
        Self {
            theta1: 0.1,
            theta2: 0.3,
        }
    }
}

/// Per-reference-sentence weights. `w_cov` and `w_red` are fractions in
/// `[0, 1]`; `w` is the combined, rescaled weight with `sum(w) == |R|`,
/// except in the all-zero fallback where every `w` is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceWeights {
    pub w_cov: Vec<f64>,
    pub w_red: Vec<f64>,
    pub w: Vec<f64>,
}

impl SentenceWeights {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Uniform all-ones weights; weighted ROUGE with these reduces to
    /// plain sentence-level ROUGE.
    pub fn uniform(len: usize) -> Self {
        Self {
            w_cov: vec![1.0; len],
            w_red: vec![1.0; len],
            w: vec![1.0; len],
        }
    }

    pub fn max_coverage(&self) -> f64 {
        self.w_cov.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_coverage(&self) -> f64 {
        if self.w_cov.is_empty() {
            0.0
        } else {
            self.w_cov.iter().sum::<f64>() / self.w_cov.len() as f64
        }
    }
}

/// Fraction of document sentences each reference sentence matches with
/// ROUGE-L recall (of the reference sentence) at least `theta1`.
pub fn coverage_weights(
    reference: &TextUnit,
    document: &TextUnit,
    theta1: f64,
) -> Result<Vec<f64>, WeightingError> {
    if reference.is_empty() {
        return Err(WeightingError::EmptyReference);
    }
    if document.is_empty() {
        return Err(WeightingError::EmptyDocument);
    }
    let doc_count = document.sentence_count() as f64;
    Ok(reference
        .sentences()
        .iter()
        .map(|r_i| {
            let hits = document
                .sentences()
                .iter()
                // recall of r_i: how much of r_i the document sentence covers
                .filter(|d_j| rouge_l_pair(d_j, r_i).recall >= theta1)
                .count();
            hits as f64 / doc_count
        })
        .collect())
}

/// One minus the fraction of sibling reference sentences each reference
/// sentence matches with ROUGE-L recall at least `theta2`.
pub fn redundancy_weights(reference: &TextUnit, theta2: f64) -> Result<Vec<f64>, WeightingError> {
    if reference.is_empty() {
        return Err(WeightingError::EmptyReference);
    }
    let ref_count = reference.sentence_count() as f64;
    Ok(reference
        .sentences()
        .iter()
        .enumerate()
        .map(|(i, r_i)| {
            let hits = reference
                .sentences()
                .iter()
                .enumerate()
                .filter(|(j, r_j)| *j != i && rouge_l_pair(r_j, r_i).recall >= theta2)
                .count();
            1.0 - hits as f64 / ref_count
        })
        .collect())
}

/// Averages coverage and redundancy weights per sentence, then rescales so
/// the weights sum to `|R|`. If every raw weight is zero, falls back to
/// uniform all-ones weights.
pub fn combine_weights(
    w_cov: Vec<f64>,
    w_red: Vec<f64>,
) -> Result<SentenceWeights, WeightingError> {
    if w_cov.len() != w_red.len() {
        return Err(WeightingError::LengthMismatch(w_cov.len(), w_red.len()));
    }
    if w_cov.is_empty() {
        return Err(WeightingError::EmptyReference);
    }
    let raw: Vec<f64> = w_cov
        .iter()
        .zip(&w_red)
        .map(|(c, r)| (c + r) / 2.0)
        .collect();
    let sum: f64 = raw.iter().sum();
    let w = if sum > 0.0 {
        let scale = raw.len() as f64 / sum;
        raw.iter().map(|x| x * scale).collect()
    } else {
        vec![1.0; raw.len()]
    };
    Ok(SentenceWeights { w_cov, w_red, w })
}

/// Runs the full weighting pass for one (reference, document) pair.
pub fn sentence_weights(
    reference: &TextUnit,
    document: &TextUnit,
    thresholds: WeightThresholds,
) -> Result<SentenceWeights, WeightingError> {
    sentence_weights_mode(reference, document, thresholds, WeightMode::Full)
}

/// Which signals feed the combined weight; the reduced modes exist for
/// ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Average of coverage and redundancy (the full metric).
    Full,
    /// Coverage only (redundancy ablated).
    CoverageOnly,
    /// Redundancy only (coverage ablated).
    RedundancyOnly,
    /// All-ones weights; reduces weighted ROUGE to sentence-level ROUGE.
    Uniform,
}

/// Weighting pass with a selectable weight mode. The chosen raw weights
/// are rescaled to sum to `|R|` exactly as in the full combination.
pub fn sentence_weights_mode(
    reference: &TextUnit,
    document: &TextUnit,
    thresholds: WeightThresholds,
    mode: WeightMode,
) -> Result<SentenceWeights, WeightingError> {
    let cov = coverage_weights(reference, document, thresholds.theta1)?;
    let red = redundancy_weights(reference, thresholds.theta2)?;
    match mode {
        WeightMode::Full => combine_weights(cov, red),
        WeightMode::CoverageOnly => {
            let raw = cov.clone();
            Ok(rescale(cov, red, raw))
        }
        WeightMode::RedundancyOnly => {
            let raw = red.clone();
            Ok(rescale(cov, red, raw))
        }
        WeightMode::Uniform => Ok(SentenceWeights {
            w: vec![1.0; cov.len()],
            w_cov: cov,
            w_red: red,
        }),
    }
}

fn rescale(w_cov: Vec<f64>, w_red: Vec<f64>, raw: Vec<f64>) -> SentenceWeights {
    let sum: f64 = raw.iter().sum();
    let w = if sum > 0.0 {
        let scale = raw.len() as f64 / sum;
        raw.iter().map(|x| x * scale).collect()
    } else {
        vec![1.0; raw.len()]
    };
    SentenceWeights { w_cov, w_red, w }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::TokenizedSentence;
    use proptest::prelude::*;

    fn unit(sentences: &[&[&str]]) -> TextUnit {
        TextUnit::new(
            sentences
                .iter()
                .map(|s| TokenizedSentence::from_tokens(s.iter().copied()))
                .collect(),
        )
    }

    #[test]
    fn coverage_verbatim_copy() {
        let doc = unit(&[&["x", "y", "z"], &["a", "b", "c"], &["p", "q"]]);
        let reference = unit(&[&["a", "b", "c"]]);
        let cov = coverage_weights(&reference, &doc, 0.1).unwrap();
        assert_eq!(cov, vec![1.0 / 3.0]);
    }

    #[test]
    fn coverage_zero_threshold_is_vacuous() {
        let doc = unit(&[&["x"], &["y"]]);
        let reference = unit(&[&["a"], &["b"]]);
        assert_eq!(
            coverage_weights(&reference, &doc, 0.0).unwrap(),
            vec![1.0, 1.0]
        );
    }

    #[test]
    fn coverage_no_shared_tokens() {
        let doc = unit(&[&["x"], &["y"]]);
        let reference = unit(&[&["a", "b"]]);
        assert_eq!(coverage_weights(&reference, &doc, 0.1).unwrap(), vec![0.0]);
    }

    #[test]
    fn coverage_empty_document_errors() {
        let reference = unit(&[&["a"]]);
        assert_eq!(
            coverage_weights(&reference, &TextUnit::default(), 0.1),
            Err(WeightingError::EmptyDocument)
        );
    }

    #[test]
    fn redundancy_twin_sentences() {
        let reference = unit(&[&["a", "b"], &["a", "b"], &["x", "y"]]);
        let red = redundancy_weights(&reference, 0.3).unwrap();
        for (got, want) in red.iter().zip([2.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn redundancy_singleton_and_all_identical() {
        assert_eq!(
            redundancy_weights(&unit(&[&["a"]]), 0.3).unwrap(),
            vec![1.0]
        );

        let reference = unit(&[&["a"], &["a"], &["a"], &["a"]]);
        let red = redundancy_weights(&reference, 0.3).unwrap();
        assert_eq!(red, vec![0.25; 4]);
    }

    #[test]
    fn combine_single_sentence_forced_to_one() {
        let w = combine_weights(vec![0.7], vec![1.0]).unwrap();
        assert_eq!(w.w, vec![1.0]);
    }

    #[test]
    fn combine_worked_example() {
        let w = combine_weights(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((w.w[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((w.w[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((w.w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn combine_degenerate_fallback() {
        let w = combine_weights(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(w.w, vec![1.0, 1.0]);
    }

    #[test]
    fn combine_length_mismatch() {
        assert_eq!(
            combine_weights(vec![0.1], vec![0.1, 0.2]),
            Err(WeightingError::LengthMismatch(1, 2))
        );
    }

    fn arb_unit(max_sents: usize) -> impl Strategy<Value = TextUnit> {
        proptest::collection::vec(proptest::collection::vec(0u8..4, 1..=5), 1..=max_sents).prop_map(
            |sents| {
                TextUnit::new(
                    sents
                        .iter()
                        .map(|s| TokenizedSentence::from_tokens(s.iter().map(u8::to_string)))
                        .collect(),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn weights_in_range_and_sum_law(
            r in arb_unit(4),
            d in arb_unit(4),
            t1 in 0.0f64..=1.0,
            t2 in 0.0f64..=1.0,
        ) {
            let cov = coverage_weights(&r, &d, t1).unwrap();
            let red = redundancy_weights(&r, t2).unwrap();
            for v in cov.iter().chain(&red) {
                prop_assert!((0.0..=1.0).contains(v));
            }
            let combined = combine_weights(cov, red).unwrap();
            let sum: f64 = combined.w.iter().sum();
            let all_ones = combined.w.iter().all(|x| *x == 1.0);
            prop_assert!((sum - r.sentence_count() as f64).abs() < 1e-9 || all_ones);
        }

        #[test]
        fn threshold_monotonicity(
            r in arb_unit(4),
            d in arb_unit(4),
            lo in 0.0f64..=1.0,
            hi in 0.0f64..=1.0,
        ) {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let cov_lo = coverage_weights(&r, &d, lo).unwrap();
            let cov_hi = coverage_weights(&r, &d, hi).unwrap();
            for (a, b) in cov_lo.iter().zip(&cov_hi) {
                prop_assert!(b <= a);
            }
            let red_lo = redundancy_weights(&r, lo).unwrap();
            let red_hi = redundancy_weights(&r, hi).unwrap();
            for (a, b) in red_lo.iter().zip(&red_hi) {
                prop_assert!(b >= a);
            }
        }

        #[test]
        fn redundancy_permutation_equivariant(r in arb_unit(4)) {
            let base = redundancy_weights(&r, 0.3).unwrap();
            let mut reversed = r.sentences().to_vec();
            reversed.reverse();
            let mut perm = redundancy_weights(&TextUnit::new(reversed), 0.3).unwrap();
            perm.reverse();
            prop_assert_eq!(base, perm);
        }
    }
}
