//! Corpus ingestion, score persistence and the batch scoring driver.
//!
//! The native corpus format is JSONL: one object per line with `id`,
//! `document`, `references`, `summary` and optional `judgments`. Text
//! fields are either a raw string (run through the naive sentence
//! splitter) or a list of pre-split sentence strings. A separate adapter
//! reads the SummEval annotation layout and averages expert scores.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::meta::JudgmentRecord;
use crate::metric::{widar_multi, MetricConfig, MetricError};
use crate::text::{split_sentences, TextUnit};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing field `{field}` at line {line}")]
    MissingField { line: usize, field: String },
    #[error("duplicate record id `{id}` at line {line}")]
    DuplicateId { line: usize, id: String },
    #[error("record `{id}` at line {line} has no references")]
    NoReferences { line: usize, id: String },
}

/// One scoring instance: a document, one or more references, a generated
/// summary, and optionally the human judgments for it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub record_id: String,
    pub document: TextUnit,
    pub references: Vec<TextUnit>,
    pub summary: TextUnit,
    pub judgments: Option<JudgmentRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Summeval,
}

fn parse_text_field(value: &Value, line: usize, field: &str) -> Result<TextUnit, CorpusError> {
    match value {
        Value::String(raw) => Ok(split_sentences(raw)),
        Value::Array(items) => {
            let mut sentences = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Value::String(s) => sentences.push(s.clone()),
                    other => {
                        return Err(CorpusError::Parse {
                            line,
                            message: format!("field `{field}` must contain strings, found {other}"),
                        })
                    }
                }
            }
            Ok(TextUnit::from_sentence_strings(sentences))
        }
        other => Err(CorpusError::Parse {
            line,
            message: format!("field `{field}` must be a string or list of strings, found {other}"),
        }),
    }
}

fn require<'v>(obj: &'v Value, field: &str, line: usize) -> Result<&'v Value, CorpusError> {
    obj.get(field).ok_or_else(|| CorpusError::MissingField {
        line,
        field: field.to_owned(),
    })
}

fn parse_judgments(
    value: &Value,
    record_id: &str,
    line: usize,
) -> Result<JudgmentRecord, CorpusError> {
    let dim = |name: &str| -> Result<f64, CorpusError> {
        require(value, name, line)?
            .as_f64()
            .ok_or_else(|| CorpusError::Parse {
                line,
                message: format!("judgment `{name}` must be a number"),
            })
    };
    Ok(JudgmentRecord {
        record_id: record_id.to_owned(),
        coherence: dim("coherence")?,
        consistency: dim("consistency")?,
        fluency: dim("fluency")?,
        relevance: dim("relevance")?,
    })
}

fn parse_jsonl_record(obj: &Value, line: usize) -> Result<EvalRecord, CorpusError> {
    let id = require(obj, "id", line)?
        .as_str()
        .map(str::to_owned)
        .unwrap_or_else(|| require(obj, "id", line).unwrap().to_string());
    let document = parse_text_field(require(obj, "document", line)?, line, "document")?;
    let summary = parse_text_field(require(obj, "summary", line)?, line, "summary")?;
    let refs_value = require(obj, "references", line)?;
    let refs_array = refs_value.as_array().ok_or_else(|| CorpusError::Parse {
        line,
        message: "field `references` must be a list".to_owned(),
    })?;
    let references = refs_array
        .iter()
        .map(|r| parse_text_field(r, line, "references"))
        .collect::<Result<Vec<_>, _>>()?;
    if references.is_empty() {
        return Err(CorpusError::NoReferences { line, id });
    }
    let judgments = match obj.get("judgments") {
        Some(Value::Null) | None => None,
        Some(v) => Some(parse_judgments(v, &id, line)?),
    };
    Ok(EvalRecord {
        record_id: id,
        document,
        references,
        summary,
        judgments,
    })
}

fn parse_summeval_record(obj: &Value, line: usize) -> Result<EvalRecord, CorpusError> {
    let base_id = require(obj, "id", line)?
        .as_str()
        .map(str::to_owned)
        .unwrap_or_else(|| require(obj, "id", line).unwrap().to_string());
    let record_id = match obj.get("model_id").and_then(Value::as_str) {
        Some(model) => format!("{base_id}::{model}"),
        None => base_id,
    };
    let document = parse_text_field(require(obj, "text", line)?, line, "text")?;
    let summary = parse_text_field(require(obj, "decoded", line)?, line, "decoded")?;
    let refs_value = obj
        .get("references")
        .or_else(|| obj.get("reference"))
        .ok_or_else(|| CorpusError::MissingField {
            line,
            field: "references".to_owned(),
        })?;
    let references = match refs_value {
        Value::Array(items) => items
            .iter()
            .map(|r| parse_text_field(r, line, "references"))
            .collect::<Result<Vec<_>, _>>()?,
        Value::String(_) => vec![parse_text_field(refs_value, line, "references")?],
        other => {
            return Err(CorpusError::Parse {
                line,
                message: format!("field `references` must be a list or string, found {other}"),
            })
        }
    };
    if references.is_empty() {
        return Err(CorpusError::NoReferences {
            line,
            id: record_id,
        });
    }

    // average of expert annotations per dimension
    let annotations = require(obj, "expert_annotations", line)?
        .as_array()
        .ok_or_else(|| CorpusError::Parse {
            line,
            message: "field `expert_annotations` must be a list".to_owned(),
        })?;
    let judgments = if annotations.is_empty() {
        None
    } else {
        let mut sums = [0.0f64; 4];
        for annotation in annotations {
            for (slot, name) in
                sums.iter_mut()
                    .zip(["coherence", "consistency", "fluency", "relevance"])
            {
                *slot += require(annotation, name, line)?.as_f64().ok_or_else(|| {
                    CorpusError::Parse {
                        line,
                        message: format!("expert annotation `{name}` must be a number"),
                    }
                })?;
            }
        }
        let n = annotations.len() as f64;
        Some(JudgmentRecord {
            record_id: record_id.clone(),
            coherence: sums[0] / n,
            consistency: sums[1] / n,
            fluency: sums[2] / n,
            relevance: sums[3] / n,
        })
    };
    Ok(EvalRecord {
        record_id,
        document,
        references,
        summary,
        judgments,
    })
}

/// Loads a corpus file, one record per line, rejecting duplicate ids.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<EvalRecord>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let record = match format {
            CorpusFormat::Jsonl => parse_jsonl_record(&obj, line_no)?,
            CorpusFormat::Summeval => parse_summeval_record(&obj, line_no)?,
        };
        if !seen.insert(record.record_id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: record.record_id,
            });
        }
        records.push(record);
    }
    records.sort_by(|a, b| a.record_id.cmp(&b.record_id));
    Ok(records)
}

fn unit_to_sentence_strings(unit: &TextUnit) -> Vec<String> {
    unit.sentences()
        .iter()
        .map(|s| s.tokens().join(" "))
        .collect()
}

/// Canonical JSONL writer; `load_corpus` on the output reproduces the
/// records exactly.
pub fn write_corpus<W: Write>(records: &[EvalRecord], mut out: W) -> std::io::Result<()> {
    for record in records {
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), Value::String(record.record_id.clone()));
        obj.insert(
            "document".into(),
            serde_json::to_value(unit_to_sentence_strings(&record.document)).unwrap(),
        );
        obj.insert(
            "references".into(),
            Value::Array(
                record
                    .references
                    .iter()
                    .map(|r| serde_json::to_value(unit_to_sentence_strings(r)).unwrap())
                    .collect(),
            ),
        );
        obj.insert(
            "summary".into(),
            serde_json::to_value(unit_to_sentence_strings(&record.summary)).unwrap(),
        );
        if let Some(j) = &record.judgments {
            obj.insert(
                "judgments".into(),
                serde_json::json!({
                    "coherence": j.coherence,
                    "consistency": j.consistency,
                    "fluency": j.fluency,
                    "relevance": j.relevance,
                }),
            );
        }
        writeln!(out, "{}", Value::Object(obj))?;
    }
    Ok(())
}

/// One persisted score: record id, metric name, the three components, the
/// lambda actually used and the configuration fingerprint of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub record_id: String,
    pub metric: String,
    pub recall: f64,
    pub precision: f64,
    pub fscore: f64,
    pub lambda: f64,
    pub config: String,
}

/// Hex SHA-256 of the canonical JSON serialization of the configuration.
pub fn config_fingerprint(cfg: &MetricConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

impl ScoreRow {
    /// Canonical JSONL form with all floats at 6 decimal places.
    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"record_id\":{},\"metric\":{},\"recall\":{:.6},\"precision\":{:.6},\"fscore\":{:.6},\"lambda\":{:.6},\"config\":\"{}\"}}",
            serde_json::to_string(&self.record_id).unwrap(),
            serde_json::to_string(&self.metric).unwrap(),
            self.recall,
            self.precision,
            self.fscore,
            self.lambda,
            self.config,
        )
    }
}

/// Timing and configuration metadata for one run; written as a single
/// header line so the score payload below it stays byte-identical across
/// runs.
pub fn score_header(cfg: &MetricConfig, elapsed_secs: Option<f64>) -> String {
    let mut header = serde_json::json!({
        "header": {
            "metric": cfg.metric_name(),
            "fingerprint": config_fingerprint(cfg),
            "config": cfg,
        }
    });
    if let Some(secs) = elapsed_secs {
        header["header"]["elapsed_secs"] = serde_json::json!(secs);
    }
    header.to_string()
}

/// Per-record scoring outcome for the batch driver.
pub type RecordOutcome = Result<ScoreRow, (String, String)>;

/// Scores every record, optionally on a rayon pool. Records are processed
/// in record-id order and results are reassembled positionally, so serial
/// and parallel runs produce identical output.
pub fn score_corpus(records: &[EvalRecord], cfg: &MetricConfig, jobs: usize) -> Vec<RecordOutcome> {
    let fingerprint = config_fingerprint(cfg);
    let metric = cfg.metric_name();
    let mut ordered: Vec<&EvalRecord> = records.iter().collect();
    ordered.sort_by(|a, b| a.record_id.cmp(&b.record_id));

    let score_one = |record: &EvalRecord| -> RecordOutcome {
        match widar_multi(&record.document, &record.references, &record.summary, cfg) {
            Ok(result) => Ok(ScoreRow {
                record_id: record.record_id.clone(),
                metric: metric.clone(),
                recall: result.widar.recall,
                precision: result.widar.precision,
                fscore: result.widar.fscore,
                lambda: result.lambda_used,
                config: fingerprint.clone(),
            }),
            Err(e) => Err((record.record_id.clone(), e.to_string())),
        }
    };

    if jobs == 1 {
        ordered.iter().map(|r| score_one(r)).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("rayon pool");
        pool.install(|| ordered.par_iter().map(|r| score_one(r)).collect())
    }
}

/// Per-record weight dump entry for the `weights` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct WeightRow {
    pub record_id: String,
    pub reference_index: usize,
    pub w_cov: Vec<f64>,
    pub w_red: Vec<f64>,
    pub w: Vec<f64>,
}

pub fn weight_rows(record: &EvalRecord, cfg: &MetricConfig) -> Result<Vec<WeightRow>, MetricError> {
    let mut rows = Vec::with_capacity(record.references.len());
    for (i, reference) in record.references.iter().enumerate() {
        if reference.is_empty() {
            return Err(MetricError::EmptyReference);
        }
        let w = crate::weighting::sentence_weights(reference, &record.document, cfg.thresholds())?;
        rows.push(WeightRow {
            record_id: record.record_id.clone(),
            reference_index: i,
            w_cov: w.w_cov,
            w_red: w.w_red,
            w: w.w,
        });
    }
    Ok(rows)
}

/// A parsed score file: the metric name, the config fingerprint when the
/// file was produced by this tool, and the (id, value) column.
#[derive(Debug, Clone)]
pub struct ScoreColumn {
    pub metric: String,
    pub fingerprint: Option<String>,
    pub values: Vec<(String, f64)>,
}

/// Reads a score file: either this tool's JSONL output (header line plus
/// rows; `component` picks which of r/p/f to use) or a third-party file of
/// `{"record_id": ..., "score": ...}` lines.
pub fn read_score_file(
    path: &Path,
    component: crate::metric::Component,
) -> Result<ScoreColumn, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut metric = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "metric".to_owned());
    let mut fingerprint = None;
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(header) = obj.get("header") {
            if let Some(name) = header.get("metric").and_then(Value::as_str) {
                metric = name.to_owned();
            }
            fingerprint = header
                .get("fingerprint")
                .and_then(Value::as_str)
                .map(str::to_owned);
            continue;
        }
        let id = obj
            .get("record_id")
            .or_else(|| obj.get("id"))
            .and_then(Value::as_str)
            .ok_or_else(|| CorpusError::MissingField {
                line: line_no,
                field: "record_id".to_owned(),
            })?
            .to_owned();
        let value = if let Some(score) = obj.get("score").and_then(Value::as_f64) {
            score
        } else {
            let field = match component {
                crate::metric::Component::Recall => "recall",
                crate::metric::Component::Precision => "precision",
                crate::metric::Component::Fscore => "fscore",
            };
            obj.get(field)
                .and_then(Value::as_f64)
                .ok_or_else(|| CorpusError::MissingField {
                    line: line_no,
                    field: field.to_owned(),
                })?
        };
        values.push((id, value));
    }
    Ok(ScoreColumn {
        metric,
        fingerprint,
        values,
    })
}

/// Pulls the judgments out of a loaded corpus.
pub fn judgments_of(records: &[EvalRecord]) -> Vec<JudgmentRecord> {
    records.iter().filter_map(|r| r.judgments.clone()).collect()
}
