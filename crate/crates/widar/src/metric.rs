//! Sentence-level ROUGE variants, their weighted forms, the input-document
//! similarity score (IDSS), and the final combined WIDAR score.
//!
//! Sentence-level here means n-grams and LCS matches never cross a
//! sentence boundary ("bridge" n-grams are discarded). Matching against
//! the reference is clipped against the aggregate candidate counts and the
//! matched mass is allocated to reference sentences in proportion to their
//! n-gram counts; with uniform weights this reduces exactly to the classic
//! unit-level score, which keeps ROUGE-1 and sentence-level ROUGE-1
//! identical.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rouge::{f_score, rouge_l_summary, unit_ngram_counts, RougeScore};
use crate::text::{ngrams, union_lcs, TextUnit};
use crate::weighting::{
    sentence_weights, sentence_weights_mode, SentenceWeights, WeightMode, WeightThresholds,
    WeightingError,
};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("document is empty")]
    EmptyDocument,
    #[error("reference summary is empty")]
    EmptyReference,
    #[error("generated summary is empty")]
    EmptySummary,
    #[error("record has no references")]
    NoReferences,
    #[error(transparent)]
    Weighting(#[from] WeightingError),
}

/// ROUGE variant selecting the overlap unit: unigrams, bigrams, or LCS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[default]
    L,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::One => write!(f, "1"),
            Variant::Two => write!(f, "2"),
            Variant::L => write!(f, "L"),
        }
    }
}

/// Which component of a score triple a run reports on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Recall,
    Precision,
    #[default]
    Fscore,
}

/// How the combination coefficient lambda is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LambdaStrategy {
    /// Use the configured fixed value.
    #[default]
    Fixed,
    /// Lambda is the maximum coverage weight of the reference.
    MaxCov,
    /// Lambda is the mean coverage weight of the reference.
    MeanCov,
}

/// Aggregation of per-reference scores in the multi-reference setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MultiRefAgg {
    #[default]
    Mean,
    Max,
}

/// Full metric configuration. Defaults reproduce the reference setup:
/// ROUGE-L, f-score, fixed lambda 0.5, theta1 0.1, theta2 0.3, mean
/// aggregation over references.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub variant: Variant,
    pub component: Component,
    pub lambda: f64,
    pub lambda_strategy: LambdaStrategy,
    pub theta1: f64,
    pub theta2: f64,
    pub multi_ref_agg: MultiRefAgg,
    /// Audit mode: use the literal sentence-count denominators for
    /// summary-level ROUGE-L instead of token counts. Scores are then not
    /// guaranteed to stay within `[0, 1]`.
    pub sentence_count_denominators: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            variant: Variant::L,
            component: Component::Fscore,
            lambda: 0.5,
            lambda_strategy: LambdaStrategy::Fixed,
            theta1: 0.1,
            theta2: 0.3,
            multi_ref_agg: MultiRefAgg::Mean,
            sentence_count_denominators: false,
        }
    }
}

impl MetricConfig {
    pub fn thresholds(&self) -> WeightThresholds {
        WeightThresholds {
            theta1: self.theta1,
            theta2: self.theta2,
        }
    }

    pub fn metric_name(&self) -> String {
        format!("WIDAR_{}", self.variant)
    }
}

/// Everything one WIDAR evaluation produces: the combined score, the
/// weighted ROUGE it was built from, the document similarity, the
/// per-reference sentence weights, and the lambda actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct WidarResult {
    pub widar: RougeScore,
    pub rouge_w: RougeScore,
    pub idss: RougeScore,
    pub weights: Vec<SentenceWeights>,
    pub lambda_used: f64,
}

fn clamp_unit(x: f64) -> f64 {
    x.min(1.0)
}

/// Sentence-level ROUGE-N, optionally weighted per reference sentence.
///
/// The total matched count per n-gram is clipped against the aggregate
/// candidate multiset; each reference sentence receives its proportional
/// share of that match, scaled by its weight. The weighted recall
/// denominator carries the same weights; the precision denominator has no
/// reference index and stays unweighted (clamped into `[0, 1]`).
pub fn rouge_n_sl(
    summary: &TextUnit,
    reference: &TextUnit,
    n: usize,
    weights: Option<&SentenceWeights>,
) -> RougeScore {
    let cand = unit_ngram_counts(summary, n);
    let cand_total: usize = cand.values().sum();

    // per-gram weighted reference counts, in deterministic iteration order
    // so float accumulation is reproducible bit for bit
    let mut weighted: std::collections::BTreeMap<Vec<String>, f64> =
        std::collections::BTreeMap::new();
    let mut total: std::collections::BTreeMap<Vec<String>, usize> =
        std::collections::BTreeMap::new();
    let mut recall_den = 0.0;
    for (j, sentence) in reference.sentences().iter().enumerate() {
        let w_j = weights.map_or(1.0, |w| w.w[j]);
        let grams_j = ngrams(sentence, n);
        for (gram, count_j) in grams_j.counts() {
            *weighted.entry(gram.clone()).or_insert(0.0) += w_j * *count_j as f64;
            *total.entry(gram.clone()).or_insert(0) += count_j;
        }
        recall_den += w_j * grams_j.total() as f64;
    }

    // matched mass per gram is clipped against the aggregate candidate
    // counts and allocated to reference sentences via their weighted share
    let mut numerator = 0.0;
    for (gram, ref_count) in &total {
        let matched = (*ref_count).min(cand.get(gram).copied().unwrap_or(0)) as f64;
        numerator += matched * weighted[gram] / *ref_count as f64;
    }

    if recall_den <= 0.0 || cand_total == 0 {
        return RougeScore::zero_with_flag();
    }
    let recall = clamp_unit(numerator / recall_den);
    let precision = clamp_unit(numerator / cand_total as f64);
    RougeScore {
        recall,
        precision,
        fscore: f_score(recall, precision),
        zero_denominator: false,
    }
}

/// Sentence-level ROUGE-L via union-LCS per reference sentence, optionally
/// weighted. `literal_denominators` switches to sentence-count
/// denominators for audit runs.
pub fn rouge_l_sl(
    summary: &TextUnit,
    reference: &TextUnit,
    weights: Option<&SentenceWeights>,
    literal_denominators: bool,
) -> RougeScore {
    let mut numerator = 0.0;
    let mut recall_den = 0.0;
    for (i, r_i) in reference.sentences().iter().enumerate() {
        let w_i = weights.map_or(1.0, |w| w.w[i]);
        numerator += w_i * union_lcs(r_i, summary) as f64;
        recall_den += w_i
            * if literal_denominators {
                1.0
            } else {
                r_i.len() as f64
            };
    }
    let precision_den = if literal_denominators {
        summary.sentence_count() as f64
    } else {
        summary.token_count() as f64
    };
    if recall_den <= 0.0 || precision_den <= 0.0 {
        return RougeScore::zero_with_flag();
    }
    let (recall, precision) = if literal_denominators {
        (numerator / recall_den, numerator / precision_den)
    } else {
        (
            clamp_unit(numerator / recall_den),
            clamp_unit(numerator / precision_den),
        )
    };
    RougeScore {
        recall,
        precision,
        fscore: f_score(recall, precision),
        zero_denominator: false,
    }
}

/// Input-document similarity score: summary-level ROUGE-L between the
/// generated summary and the source document; the f-score component is the
/// similarity.
pub fn idss(summary: &TextUnit, document: &TextUnit) -> RougeScore {
    rouge_l_summary(summary, document)
}

fn resolve_lambda(cfg: &MetricConfig, weights: &SentenceWeights) -> f64 {
    match cfg.lambda_strategy {
        LambdaStrategy::Fixed => cfg.lambda,
        LambdaStrategy::MaxCov => weights.max_coverage(),
        LambdaStrategy::MeanCov => weights.mean_coverage(),
    }
}

fn combine(idss_score: &RougeScore, rouge_w: &RougeScore, lambda: f64) -> RougeScore {
    let mix = |x: f64| (1.0 - lambda) * idss_score.fscore + lambda * x;
    RougeScore {
        recall: mix(rouge_w.recall),
        precision: mix(rouge_w.precision),
        fscore: mix(rouge_w.fscore),
        zero_denominator: idss_score.zero_denominator || rouge_w.zero_denominator,
    }
}

fn weighted_rouge(
    summary: &TextUnit,
    reference: &TextUnit,
    weights: Option<&SentenceWeights>,
    cfg: &MetricConfig,
) -> RougeScore {
    match cfg.variant {
        Variant::One => rouge_n_sl(summary, reference, 1, weights),
        Variant::Two => rouge_n_sl(summary, reference, 2, weights),
        Variant::L => rouge_l_sl(summary, reference, weights, cfg.sentence_count_denominators),
    }
}

/// WIDAR against a single reference: weights the reference sentences,
/// computes the weighted sentence-level ROUGE and the document similarity,
/// and combines them as `(1 - lambda) * IDSS + lambda * ROUGE_W` for every
/// component.
pub fn widar_single(
    document: &TextUnit,
    reference: &TextUnit,
    summary: &TextUnit,
    cfg: &MetricConfig,
) -> Result<WidarResult, MetricError> {
    if document.is_empty() {
        return Err(MetricError::EmptyDocument);
    }
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    if summary.is_empty() {
        return Err(MetricError::EmptySummary);
    }
    let weights = sentence_weights(reference, document, cfg.thresholds())?;
    let rouge_w = weighted_rouge(summary, reference, Some(&weights), cfg);
    let idss_score = idss(summary, document);
    let lambda = resolve_lambda(cfg, &weights);
    let widar = combine(&idss_score, &rouge_w, lambda);
    Ok(WidarResult {
        widar,
        rouge_w,
        idss: idss_score,
        weights: vec![weights],
        lambda_used: lambda,
    })
}

fn aggregate(values: &[f64], agg: MultiRefAgg) -> f64 {
    match agg {
        MultiRefAgg::Mean => values.iter().sum::<f64>() / values.len() as f64,
        MultiRefAgg::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// WIDAR in the multi-reference setting: evaluates each reference
/// separately (IDSS is reference-independent and computed once) and
/// aggregates every score component across references.
pub fn widar_multi(
    document: &TextUnit,
    references: &[TextUnit],
    summary: &TextUnit,
    cfg: &MetricConfig,
) -> Result<WidarResult, MetricError> {
    if references.is_empty() {
        return Err(MetricError::NoReferences);
    }
    if document.is_empty() {
        return Err(MetricError::EmptyDocument);
    }
    if summary.is_empty() {
        return Err(MetricError::EmptySummary);
    }
    let idss_score = idss(summary, document);

    let mut per_ref = Vec::with_capacity(references.len());
    let mut all_weights = Vec::with_capacity(references.len());
    for reference in references {
        if reference.is_empty() {
            return Err(MetricError::EmptyReference);
        }
        let weights = sentence_weights(reference, document, cfg.thresholds())?;
        let rouge_w = weighted_rouge(summary, reference, Some(&weights), cfg);
        let lambda = resolve_lambda(cfg, &weights);
        let widar = combine(&idss_score, &rouge_w, lambda);
        all_weights.push(weights);
        per_ref.push((widar, rouge_w, lambda));
    }

    let agg = cfg.multi_ref_agg;
    let pick = |f: &dyn Fn(&(RougeScore, RougeScore, f64)) -> f64| {
        let vals: Vec<f64> = per_ref.iter().map(f).collect();
        aggregate(&vals, agg)
    };
    let degenerate = per_ref
        .iter()
        .any(|(w, r, _)| w.zero_denominator || r.zero_denominator);
    Ok(WidarResult {
        widar: RougeScore {
            recall: pick(&|t| t.0.recall),
            precision: pick(&|t| t.0.precision),
            fscore: pick(&|t| t.0.fscore),
            zero_denominator: degenerate,
        },
        rouge_w: RougeScore {
            recall: pick(&|t| t.1.recall),
            precision: pick(&|t| t.1.precision),
            fscore: pick(&|t| t.1.fscore),
            zero_denominator: degenerate,
        },
        idss: idss_score,
        weights: all_weights,
        lambda_used: pick(&|t| t.2),
    })
}

/// Multi-reference weighted sentence-level ROUGE with a selectable weight
/// mode; this is the `lambda = 1` half of WIDAR and drives the ablation
/// rows.
pub fn rouge_w_multi(
    document: &TextUnit,
    references: &[TextUnit],
    summary: &TextUnit,
    cfg: &MetricConfig,
    mode: WeightMode,
) -> Result<RougeScore, MetricError> {
    if references.is_empty() {
        return Err(MetricError::NoReferences);
    }
    let mut scores = Vec::with_capacity(references.len());
    for reference in references {
        if reference.is_empty() {
            return Err(MetricError::EmptyReference);
        }
        let weights = sentence_weights_mode(reference, document, cfg.thresholds(), mode)?;
        scores.push(weighted_rouge(summary, reference, Some(&weights), cfg));
    }
    Ok(aggregate_scores(&scores, cfg.multi_ref_agg))
}

pub(crate) fn aggregate_scores(scores: &[RougeScore], agg: MultiRefAgg) -> RougeScore {
    let pick = |f: &dyn Fn(&RougeScore) -> f64| {
        let vals: Vec<f64> = scores.iter().map(f).collect();
        aggregate(&vals, agg)
    };
    RougeScore {
        recall: pick(&|s| s.recall),
        precision: pick(&|s| s.precision),
        fscore: pick(&|s| s.fscore),
        zero_denominator: scores.iter().any(|s| s.zero_denominator),
    }
}
