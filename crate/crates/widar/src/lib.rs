//! Summarization evaluation that stays robust to uneven reference
//! quality: sentence-level ROUGE with per-sentence coverage and
//! redundancy weights, combined with an input-document similarity score,
//! plus a Kendall-tau harness for correlating metric scores with human
//! judgments.

pub mod bench;
pub mod corpus;
pub mod meta;
pub mod metric;
pub mod rouge;
pub mod text;
pub mod weighting;

pub use corpus::{load_corpus, CorpusFormat, EvalRecord, ScoreRow};
pub use meta::{correlate, kendall_tau, CorrelationReport, JudgmentRecord};
pub use metric::{widar_multi, widar_single, MetricConfig, WidarResult};
pub use rouge::{rouge_l_summary, rouge_n, RougeScore};
pub use text::{split_sentences, tokenize_sentence, TextUnit, TokenizedSentence};
pub use weighting::SentenceWeights;
