//! Timing benchmark: end-to-end WIDAR scoring over a corpus, plus a
//! seeded generator for CNN/DailyMail-scale synthetic records.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::EvalRecord;
use crate::metric::{widar_multi, MetricConfig, MetricError};
use crate::text::{TextUnit, TokenizedSentence};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark needs at least 1 record")]
    NoRecords,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub records: usize,
    pub total_secs: f64,
    pub per_record_secs: f64,
    pub machine: String,
}

/// Times WIDAR scoring of `n` records (cycling through the corpus when it
/// is shorter than `n`).
pub fn run_bench(
    records: &[EvalRecord],
    cfg: &MetricConfig,
    n: usize,
) -> Result<BenchReport, BenchError> {
    if n == 0 || records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let start = Instant::now();
    for record in records.iter().cycle().take(n) {
        widar_multi(&record.document, &record.references, &record.summary, cfg)?;
    }
    let total = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        records: n,
        total_secs: total,
        per_record_secs: total / n as f64,
        machine: format!("{} {}", std::env::consts::OS, std::env::consts::ARCH),
    })
}

const VOCAB: &[&str] = &[
    "the",
    "a",
    "of",
    "to",
    "and",
    "in",
    "said",
    "for",
    "on",
    "that",
    "with",
    "was",
    "is",
    "police",
    "court",
    "city",
    "year",
    "game",
    "team",
    "report",
    "company",
    "market",
    "people",
    "government",
    "minister",
    "president",
    "new",
    "old",
    "first",
    "last",
    "after",
    "before",
    "found",
    "left",
    "home",
    "world",
    "time",
    "week",
    "day",
    "night",
    "family",
    "child",
    "school",
    "water",
    "fire",
    "road",
    "house",
    "money",
    "plan",
    "official",
    "group",
    "leader",
];

fn random_sentence(rng: &mut ChaCha8Rng, len: usize) -> TokenizedSentence {
    TokenizedSentence::from_tokens((0..len).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]))
}

fn random_unit(rng: &mut ChaCha8Rng, sentences: usize, sentence_len: usize) -> TextUnit {
    TextUnit::new(
        (0..sentences)
            .map(|_| {
                let len = sentence_len.max(2);
                let jitter = rng.gen_range(0..=len / 2);
                random_sentence(rng, len - len / 4 + jitter)
            })
            .collect(),
    )
}

/// Deterministic synthetic corpus shaped like CNN/DailyMail records:
/// roughly 30-sentence documents and 3-sentence summaries. Summaries and
/// references borrow sentences from the document so the scores are
/// non-trivial.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<EvalRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let document = random_unit(&mut rng, 30, 20);
            let borrow = |rng: &mut ChaCha8Rng, doc: &TextUnit| {
                let mut sentences = Vec::with_capacity(3);
                for _ in 0..3 {
                    if rng.gen_bool(0.7) {
                        let j = rng.gen_range(0..doc.sentence_count());
                        sentences.push(doc.sentences()[j].clone());
                    } else {
                        sentences.push(random_sentence(rng, 15));
                    }
                }
                TextUnit::new(sentences)
            };
            let reference = borrow(&mut rng, &document);
            let summary = borrow(&mut rng, &document);
            EvalRecord {
                record_id: format!("bench-{i:05}"),
                document,
                references: vec![reference],
                summary,
                judgments: None,
            }
        })
        .collect()
}
