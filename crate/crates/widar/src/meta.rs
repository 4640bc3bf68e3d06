//! Kendall-tau meta-evaluation: correlating metric scores with human
//! judgments, the ablation runner, and the judgment inter-correlation
//! table.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EvalRecord;
use crate::metric::{aggregate_scores, idss, widar_multi, MetricConfig, MetricError, Variant};
use crate::rouge::rouge_l_summary;
use crate::weighting::WeightMode;

#[derive(Debug, Error)]
pub enum MetaError {
    #[error("sequences have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 paired observations, got {0}")]
    TooFewRecords(usize),
    #[error("correlation undefined: every pair is tied")]
    AllTied,
    #[error("records without judgments: {}", .0.join(", "))]
    MissingJudgment(Vec<String>),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// The four human-judged summary quality dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Coherence,
    Consistency,
    Fluency,
    Relevance,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Coherence,
        Dimension::Consistency,
        Dimension::Fluency,
        Dimension::Relevance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Dimension::Coherence => "coherence",
            Dimension::Consistency => "consistency",
            Dimension::Fluency => "fluency",
            Dimension::Relevance => "relevance",
        }
    }
}

/// Mean expert scores for one summary, one value per dimension on the
/// original 1-5 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub record_id: String,
    pub coherence: f64,
    pub consistency: f64,
    pub fluency: f64,
    pub relevance: f64,
}

impl JudgmentRecord {
    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Coherence => self.coherence,
            Dimension::Consistency => self.consistency,
            Dimension::Fluency => self.fluency,
            Dimension::Relevance => self.relevance,
        }
    }
}

/// Kendall tau per dimension plus their arithmetic mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub coherence: f64,
    pub consistency: f64,
    pub fluency: f64,
    pub relevance: f64,
    pub average: f64,
}

impl CorrelationReport {
    pub fn new(coherence: f64, consistency: f64, fluency: f64, relevance: f64) -> Self {
        Self {
            coherence,
            consistency,
            fluency,
            relevance,
            average: (coherence + consistency + fluency + relevance) / 4.0,
        }
    }

    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Coherence => self.coherence,
            Dimension::Consistency => self.consistency,
            Dimension::Fluency => self.fluency,
            Dimension::Relevance => self.relevance,
        }
    }
}

/// Tau flavor. The default excludes tied pairs from both numerator and
/// denominator, `(C - D) / (C + D)`; tau-b is exposed for cross-checking
/// against common statistics packages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TauVariant {
    #[default]
    Gamma,
    TauB,
}

struct PairCounts {
    concordant: u64,
    discordant: u64,
    ties_x: u64,
    ties_y: u64,
}

/// O(n log n) concordant/discordant pair counting: sort by (x, y), count
/// tie groups, then count discordant pairs as merge-sort inversions in y.
fn pair_counts(x: &[f64], y: &[f64]) -> Result<PairCounts, MetaError> {
    if x.len() != y.len() {
        return Err(MetaError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(MetaError::TooFewRecords(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let total = n as u64 * (n as u64 - 1) / 2;
    let group_pairs = |sorted: &[f64]| {
        let mut pairs = 0u64;
        let mut run = 1u64;
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                pairs += run * (run - 1) / 2;
                run = 1;
            }
        }
        pairs + run * (run - 1) / 2
    };

    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ties_x = group_pairs(&xs);

    let mut ys: Vec<f64> = y.to_vec();
    ys.sort_by(f64::total_cmp);
    let ties_y = group_pairs(&ys);

    // pairs tied in both x and y
    let mut ties_xy = 0u64;
    let mut run = 1u64;
    for w in idx.windows(2) {
        if x[w[0]] == x[w[1]] && y[w[0]] == y[w[1]] {
            run += 1;
        } else {
            ties_xy += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties_xy += run * (run - 1) / 2;

    // y values in (x, y)-sorted order; within an x-tie group y ascends, so
    // strict inversions are exactly the discordant pairs
    let mut seq: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let discordant = count_inversions(&mut seq);

    let concordant = total + ties_xy - ties_x - ties_y - discordant;
    Ok(PairCounts {
        concordant,
        discordant,
        ties_x,
        ties_y,
    })
}

fn count_inversions(seq: &mut [f64]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mut buf = seq.to_vec();
    merge_count(seq, &mut buf)
}

fn merge_count(seq: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = seq.split_at_mut(mid);
    let (lbuf, rbuf) = buf.split_at_mut(mid);
    let mut inversions = merge_count(left, lbuf) + merge_count(right, rbuf);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if right[j] < left[i] {
            inversions += (left.len() - i) as u64;
            buf[k] = right[j];
            j += 1;
        } else {
            buf[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + left.len() - i].copy_from_slice(&left[i..]);
    buf[k + left.len() - i..].copy_from_slice(&right[j..]);
    seq.copy_from_slice(&buf[..n]);
    inversions
}

/// Kendall's tau in the `(C - D) / (C + D)` form, with pairs tied in
/// either sequence excluded from both counts.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, MetaError> {
    kendall_tau_with(x, y, TauVariant::Gamma)
}

pub fn kendall_tau_with(x: &[f64], y: &[f64], variant: TauVariant) -> Result<f64, MetaError> {
    let counts = pair_counts(x, y)?;
    let diff = counts.concordant as f64 - counts.discordant as f64;
    match variant {
        TauVariant::Gamma => {
            let denom = counts.concordant + counts.discordant;
            if denom == 0 {
                return Err(MetaError::AllTied);
            }
            Ok(diff / denom as f64)
        }
        TauVariant::TauB => {
            let n = x.len() as u64;
            let total = n * (n - 1) / 2;
            let dx = (total - counts.ties_x) as f64;
            let dy = (total - counts.ties_y) as f64;
            if dx == 0.0 || dy == 0.0 {
                return Err(MetaError::AllTied);
            }
            Ok(diff / (dx * dy).sqrt())
        }
    }
}

/// Correlates one metric score column against every judgment dimension,
/// joined on record id. Scored ids without a judgment are an error.
pub fn correlate(
    scores: &[(String, f64)],
    judgments: &[JudgmentRecord],
) -> Result<CorrelationReport, MetaError> {
    correlate_with(scores, judgments, TauVariant::Gamma)
}

pub fn correlate_with(
    scores: &[(String, f64)],
    judgments: &[JudgmentRecord],
    variant: TauVariant,
) -> Result<CorrelationReport, MetaError> {
    let by_id: std::collections::HashMap<&str, &JudgmentRecord> = judgments
        .iter()
        .map(|j| (j.record_id.as_str(), j))
        .collect();
    let mut missing: Vec<String> = scores
        .iter()
        .filter(|(id, _)| !by_id.contains_key(id.as_str()))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        missing.sort();
        return Err(MetaError::MissingJudgment(missing));
    }
    let mut ordered: Vec<&(String, f64)> = scores.iter().collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));
    let metric: Vec<f64> = ordered.iter().map(|(_, v)| *v).collect();
    let mut taus = [0.0f64; 4];
    for (slot, dim) in taus.iter_mut().zip(Dimension::ALL) {
        let human: Vec<f64> = ordered
            .iter()
            .map(|(id, _)| by_id[id.as_str()].get(dim))
            .collect();
        *slot = kendall_tau_with(&metric, &human, variant)?;
    }
    Ok(CorrelationReport::new(taus[0], taus[1], taus[2], taus[3]))
}

/// Symmetric 4x4 Kendall-tau matrix between the judgment dimensions,
/// ordered coherence, consistency, fluency, relevance. Diagonal is 1.
pub fn judgment_intercorrelation(judgments: &[JudgmentRecord]) -> Result<[[f64; 4]; 4], MetaError> {
    let mut ordered: Vec<&JudgmentRecord> = judgments.iter().collect();
    ordered.sort_by(|a, b| a.record_id.cmp(&b.record_id));
    let columns: Vec<Vec<f64>> = Dimension::ALL
        .iter()
        .map(|&d| ordered.iter().map(|j| j.get(d)).collect())
        .collect();
    let mut matrix = [[1.0f64; 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            let tau = kendall_tau(&columns[i], &columns[j])?;
            matrix[i][j] = tau;
            matrix[j][i] = tau;
        }
    }
    Ok(matrix)
}

/// One row of the ablation table: a configuration label and its
/// correlation report.
pub type AblationTable = Vec<(String, CorrelationReport)>;

fn judgments_of(records: &[EvalRecord]) -> Result<Vec<JudgmentRecord>, MetaError> {
    let missing: Vec<String> = records
        .iter()
        .filter(|r| r.judgments.is_none())
        .map(|r| r.record_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(MetaError::MissingJudgment(missing));
    }
    Ok(records
        .iter()
        .map(|r| r.judgments.clone().unwrap())
        .collect())
}

/// Runs the ablation grid: full WIDAR, weighted ROUGE alone, each weight
/// signal removed, uniform-weight sentence-level ROUGE, plain ROUGE, and
/// IDSS alone; correlates each column against the judgments.
pub fn run_ablation(
    records: &[EvalRecord],
    cfg: &MetricConfig,
) -> Result<AblationTable, MetaError> {
    let judgments = judgments_of(records)?;
    let variant_name = match cfg.variant {
        Variant::One => "1",
        Variant::Two => "2",
        Variant::L => "L",
    };

    let weight_modes = [
        (format!("ROUGE-{variant_name}_W"), WeightMode::Full),
        ("-W_red".to_owned(), WeightMode::CoverageOnly),
        ("-W_cov".to_owned(), WeightMode::RedundancyOnly),
        (format!("ROUGE-{variant_name}_SL"), WeightMode::Uniform),
    ];

    let mut columns: Vec<(String, Vec<(String, f64)>)> = Vec::new();

    let widar_col: Vec<(String, f64)> = records
        .iter()
        .map(|r| {
            widar_multi(&r.document, &r.references, &r.summary, cfg)
                .map(|res| (r.record_id.clone(), res.widar.component(cfg.component)))
        })
        .collect::<Result<_, _>>()?;
    columns.push((cfg.metric_name(), widar_col));

    for (name, mode) in weight_modes {
        let col: Vec<(String, f64)> = records
            .iter()
            .map(|r| {
                crate::metric::rouge_w_multi(&r.document, &r.references, &r.summary, cfg, mode)
                    .map(|s| (r.record_id.clone(), s.component(cfg.component)))
            })
            .collect::<Result<_, _>>()?;
        columns.push((name, col));
    }

    let plain_col: Vec<(String, f64)> = records
        .iter()
        .map(|r| {
            let per_ref: Vec<_> = r
                .references
                .iter()
                .map(|reference| rouge_l_summary(&r.summary, reference))
                .collect();
            let agg = aggregate_scores(&per_ref, cfg.multi_ref_agg);
            (r.record_id.clone(), agg.component(cfg.component))
        })
        .collect();
    columns.push(("ROUGE-L".to_owned(), plain_col));

    let idss_col: Vec<(String, f64)> = records
        .iter()
        .map(|r| (r.record_id.clone(), idss(&r.summary, &r.document).fscore))
        .collect();
    columns.push(("IDSS".to_owned(), idss_col));

    columns
        .into_iter()
        .map(|(name, col)| correlate(&col, &judgments).map(|report| (name, report)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tau_hand_cases() {
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            1.0
        );
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0
        );
        let tau = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((tau - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_error_paths() {
        assert!(matches!(
            kendall_tau(&[1.0, 2.0], &[1.0]),
            Err(MetaError::LengthMismatch(2, 1))
        ));
        assert!(matches!(
            kendall_tau(&[1.0], &[1.0]),
            Err(MetaError::TooFewRecords(1))
        ));
        assert!(matches!(
            kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(MetaError::AllTied)
        ));
    }

    #[test]
    fn tau_ties_excluded_from_denominator() {
        // pairs: (1,2) tied in x; (1,3) concordant; (2,3) concordant
        let tau = kendall_tau(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(tau, 1.0);
    }

    #[test]
    fn tau_b_matches_reference_values() {
        // scipy.stats.kendalltau([1,2,3,4,5], [3,1,2,5,4]) == 0.4
        let tau = kendall_tau_with(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[3.0, 1.0, 2.0, 5.0, 4.0],
            TauVariant::TauB,
        )
        .unwrap();
        assert!((tau - 0.4).abs() < 1e-12);
    }

    fn judgment(id: &str, scores: [f64; 4]) -> JudgmentRecord {
        JudgmentRecord {
            record_id: id.to_owned(),
            coherence: scores[0],
            consistency: scores[1],
            fluency: scores[2],
            relevance: scores[3],
        }
    }

    #[test]
    fn correlate_identical_column_is_one() {
        let judgments = vec![
            judgment("a", [1.0, 2.0, 3.0, 4.0]),
            judgment("b", [2.0, 1.0, 4.0, 3.0]),
            judgment("c", [3.0, 4.0, 1.0, 2.0]),
        ];
        let scores = vec![
            ("a".to_owned(), 1.0),
            ("b".to_owned(), 2.0),
            ("c".to_owned(), 3.0),
        ];
        let report = correlate(&scores, &judgments).unwrap();
        assert_eq!(report.coherence, 1.0);
        assert_eq!(
            report.average,
            (report.coherence + report.consistency + report.fluency + report.relevance) / 4.0
        );
    }

    #[test]
    fn correlate_missing_judgment_lists_ids() {
        let judgments = vec![judgment("a", [1.0; 4]), judgment("b", [2.0; 4])];
        let scores = vec![
            ("a".to_owned(), 1.0),
            ("zz".to_owned(), 2.0),
            ("q".to_owned(), 3.0),
        ];
        match correlate(&scores, &judgments) {
            Err(MetaError::MissingJudgment(ids)) => assert_eq!(ids, vec!["q", "zz"]),
            other => panic!("expected MissingJudgment, got {other:?}"),
        }
    }

    #[test]
    fn intercorrelation_symmetric_unit_diagonal() {
        let judgments = vec![
            judgment("a", [1.0, 2.0, 3.0, 1.0]),
            judgment("b", [2.0, 1.0, 1.0, 3.0]),
            judgment("c", [3.0, 3.0, 2.0, 2.0]),
        ];
        let m = judgment_intercorrelation(&judgments).unwrap();
        for i in 0..4 {
            assert_eq!(m[i][i], 1.0);
            for j in 0..4 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
    }

    // independent O(n^2) oracle
    fn tau_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
        let mut c = 0i64;
        let mut d = 0i64;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let p = (x[i] - x[j]) * (y[i] - y[j]);
                if p > 0.0 {
                    c += 1;
                } else if p < 0.0 {
                    d += 1;
                }
            }
        }
        if c + d == 0 {
            None
        } else {
            Some((c - d) as f64 / (c + d) as f64)
        }
    }

    proptest! {
        #[test]
        fn tau_matches_bruteforce(
            pairs in proptest::collection::vec((0u8..10, 0u8..10), 2..=50),
        ) {
            let x: Vec<f64> = pairs.iter().map(|(a, _)| *a as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|(_, b)| *b as f64).collect();
            match tau_oracle(&x, &y) {
                Some(expected) => {
                    prop_assert_eq!(kendall_tau(&x, &y).unwrap(), expected);
                }
                None => prop_assert!(matches!(kendall_tau(&x, &y), Err(MetaError::AllTied))),
            }
        }

        #[test]
        fn tau_invariant_under_monotone_transform(
            pairs in proptest::collection::vec((0u8..10, 0u8..10), 2..=30),
        ) {
            let x: Vec<f64> = pairs.iter().map(|(a, _)| *a as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|(_, b)| *b as f64).collect();
            let x2: Vec<f64> = x.iter().map(|v| (v + 1.0).ln() * 3.0).collect();
            match (kendall_tau(&x, &y), kendall_tau(&x2, &y)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                (Err(MetaError::AllTied), Err(MetaError::AllTied)) => {}
                other => prop_assert!(false, "mismatched outcomes: {:?}", other),
            }
        }

        #[test]
        fn tau_range_and_self_correlation(
            xs in proptest::collection::vec(0u8..20, 2..=40),
        ) {
            let x: Vec<f64> = xs.iter().map(|v| *v as f64).collect();
            if let Ok(tau) = kendall_tau(&x, &x) {
                prop_assert_eq!(tau, 1.0);
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                prop_assert_eq!(kendall_tau(&x, &neg).unwrap(), -1.0);
            }
        }
    }
}
