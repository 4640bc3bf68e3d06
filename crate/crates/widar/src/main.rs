use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use widar::bench::{run_bench, synthetic_corpus};
use widar::corpus::{
    config_fingerprint, judgments_of, load_corpus, read_score_file, score_corpus, score_header,
    weight_rows, CorpusFormat, ScoreColumn,
};
use widar::meta::{
    correlate_with, judgment_intercorrelation, run_ablation, CorrelationReport, Dimension,
    TauVariant,
};
use widar::metric::{Component, LambdaStrategy, MetricConfig, MultiRefAgg, Variant};

#[derive(Parser)]
#[command(
    name = "widar",
    version,
    about = "Summarization evaluation with weighted ROUGE and input-document similarity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every record of a corpus and write JSONL (and optionally CSV) score rows
    Score(ScoreArgs),
    /// Dump per-record reference-sentence weights as JSON lines
    Weights(WeightsArgs),
    /// Correlate score files against human judgments (Kendall tau)
    Correlate(CorrelateArgs),
    /// Run the ablation grid and correlate every configuration
    Ablate(AblateArgs),
    /// Kendall-tau matrix between the four human judgment dimensions
    HumanCorr(HumanCorrArgs),
    /// Time end-to-end scoring over a corpus (synthetic by default)
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Summeval,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Summeval => CorpusFormat::Summeval,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "L", alias = "l")]
    L,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComponentArg {
    #[value(name = "r")]
    Recall,
    #[value(name = "p")]
    Precision,
    #[value(name = "f")]
    Fscore,
}

#[derive(Clone, Copy, ValueEnum)]
enum LambdaStrategyArg {
    Fixed,
    MaxCov,
    MeanCov,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggArg {
    Mean,
    Max,
}

#[derive(Args)]
struct MetricArgs {
    /// ROUGE variant K
    #[arg(long, value_enum, default_value = "L")]
    variant: VariantArg,
    /// Score component X
    #[arg(long, value_enum, default_value = "f")]
    component: ComponentArg,
    /// Fixed combination coefficient (used under --lambda-strategy fixed)
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long = "lambda-strategy", value_enum, default_value = "fixed")]
    lambda_strategy: LambdaStrategyArg,
    /// ROUGE-L recall threshold for coverage weights
    #[arg(long, default_value_t = 0.1)]
    theta1: f64,
    /// ROUGE-L recall threshold for redundancy weights
    #[arg(long, default_value_t = 0.3)]
    theta2: f64,
    /// Multi-reference aggregation
    #[arg(long, value_enum, default_value = "mean")]
    agg: AggArg,
    /// Audit mode: literal sentence-count denominators for summary-level ROUGE-L
    #[arg(long = "sentence-count-denominators", default_value_t = false)]
    sentence_count_denominators: bool,
}

impl MetricArgs {
    fn config(&self) -> Result<MetricConfig> {
        if !(0.0..=1.0).contains(&self.lambda) {
            bail!("--lambda must lie in [0, 1]");
        }
        for (name, v) in [("--theta1", self.theta1), ("--theta2", self.theta2)] {
            if !(0.0..=1.0).contains(&v) {
                bail!("{name} must lie in [0, 1]");
            }
        }
        Ok(MetricConfig {
            variant: match self.variant {
                VariantArg::One => Variant::One,
                VariantArg::Two => Variant::Two,
                VariantArg::L => Variant::L,
            },
            component: match self.component {
                ComponentArg::Recall => Component::Recall,
                ComponentArg::Precision => Component::Precision,
                ComponentArg::Fscore => Component::Fscore,
            },
            lambda: self.lambda,
            lambda_strategy: match self.lambda_strategy {
                LambdaStrategyArg::Fixed => LambdaStrategy::Fixed,
                LambdaStrategyArg::MaxCov => LambdaStrategy::MaxCov,
                LambdaStrategyArg::MeanCov => LambdaStrategy::MeanCov,
            },
            theta1: self.theta1,
            theta2: self.theta2,
            multi_ref_agg: match self.agg {
                AggArg::Mean => MultiRefAgg::Mean,
                AggArg::Max => MultiRefAgg::Max,
            },
            sentence_count_denominators: self.sentence_count_denominators,
        })
    }
}

#[derive(Args)]
struct InputArgs {
    /// Corpus file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metric: MetricArgs,
    /// Output JSONL path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Additional CSV output path
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Abort on the first record that fails instead of warning
    #[arg(long, default_value_t = false)]
    strict: bool,
    /// Worker threads (1 = serial)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct WeightsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    strict: bool,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Score files (this tool's JSONL output or third-party {record_id, score} lines)
    #[arg(long, required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
    /// Corpus or judgment file supplying human judgments
    #[arg(long)]
    judgments: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    /// Component read from this tool's score files
    #[arg(long, value_enum, default_value = "f")]
    component: ComponentArg,
    /// Use tau-b instead of the ties-excluded (C-D)/(C+D) form
    #[arg(long, default_value_t = false)]
    tau_b: bool,
    /// Accept score files produced under different configurations
    #[arg(long, default_value_t = false)]
    allow_mixed_config: bool,
    /// Also write the reports as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HumanCorrArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Corpus file; a seeded synthetic corpus is generated when omitted
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    #[command(flatten)]
    metric: MetricArgs,
    /// Number of records to score
    #[arg(short = 'n', long, default_value_t = 100)]
    records: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn out_writer(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_score(args: ScoreArgs) -> Result<ExitCode> {
    let cfg = args.metric.config()?;
    let records = load_corpus(&args.input.input, args.input.format.into())
        .with_context(|| format!("loading {}", args.input.input.display()))?;
    let start = Instant::now();
    let outcomes = score_corpus(&records, &cfg, args.jobs.max(1));
    let elapsed = start.elapsed().as_secs_f64();

    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err((id, message)) => {
                if args.strict {
                    bail!("record `{id}` failed: {message}");
                }
                eprintln!("warning: record `{id}` failed: {message}");
                failures.push(id);
            }
        }
    }

    let mut out = out_writer(args.out.as_ref())?;
    writeln!(out, "{}", score_header(&cfg, Some(elapsed)))?;
    for row in &rows {
        writeln!(out, "{}", row.to_json_line())?;
    }
    out.flush()?;

    if let Some(csv_path) = &args.csv {
        let mut writer = csv::Writer::from_path(csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?;
        writer.write_record([
            "record_id",
            "metric",
            "recall",
            "precision",
            "fscore",
            "lambda",
            "config",
        ])?;
        for row in &rows {
            writer.write_record([
                row.record_id.as_str(),
                row.metric.as_str(),
                &format!("{:.6}", row.recall),
                &format!("{:.6}", row.precision),
                &format!("{:.6}", row.fscore),
                &format!("{:.6}", row.lambda),
                row.config.as_str(),
            ])?;
        }
        writer.flush()?;
    }

    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} record(s) failed", failures.len());
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_weights(args: WeightsArgs) -> Result<ExitCode> {
    let cfg = args.metric.config()?;
    let records = load_corpus(&args.input.input, args.input.format.into())?;
    let mut out = out_writer(args.out.as_ref())?;
    let mut failed = 0usize;
    for record in &records {
        match weight_rows(record, &cfg) {
            Ok(rows) => {
                for row in rows {
                    writeln!(out, "{}", serde_json::to_string(&row)?)?;
                }
            }
            Err(e) => {
                if args.strict {
                    bail!("record `{}` failed: {e}", record.record_id);
                }
                eprintln!("warning: record `{}` failed: {e}", record.record_id);
                failed += 1;
            }
        }
    }
    out.flush()?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn print_report_table(rows: &[(String, CorrelationReport)], out: &mut dyn Write) -> Result<()> {
    let mut ranked: Vec<&(String, CorrelationReport)> = rows.iter().collect();
    ranked.sort_by(|a, b| b.1.average.total_cmp(&a.1.average).then(a.0.cmp(&b.0)));

    // per-column rank, Table-3 style
    let rank_of =
        |value: f64, column: &[f64]| -> usize { 1 + column.iter().filter(|v| **v > value).count() };
    let columns: Vec<Vec<f64>> = (0..5)
        .map(|c| {
            ranked
                .iter()
                .map(|(_, r)| match c {
                    0 => r.coherence,
                    1 => r.consistency,
                    2 => r.fluency,
                    3 => r.relevance,
                    _ => r.average,
                })
                .collect()
        })
        .collect();

    let name_width = ranked
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(6)
        .max(6);
    writeln!(
        out,
        "{:<name_width$}  {:>15} {:>15} {:>15} {:>15} {:>15}",
        "Metric", "Coherence", "Consistency", "Fluency", "Relevance", "Average"
    )?;
    for (i, (name, _)) in ranked.iter().enumerate() {
        write!(out, "{name:<name_width$} ")?;
        for column in &columns {
            let value = column[i];
            write!(out, " {:>10.6} ({:>2})", value, rank_of(value, column))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn cmd_correlate(args: CorrelateArgs) -> Result<ExitCode> {
    let component = match args.component {
        ComponentArg::Recall => Component::Recall,
        ComponentArg::Precision => Component::Precision,
        ComponentArg::Fscore => Component::Fscore,
    };
    let records = load_corpus(&args.judgments, args.format.into())
        .with_context(|| format!("loading {}", args.judgments.display()))?;
    let judgments = judgments_of(&records);
    if judgments.is_empty() {
        bail!("no judgments found in {}", args.judgments.display());
    }

    let columns: Vec<ScoreColumn> = args
        .scores
        .iter()
        .map(|p| read_score_file(p, component).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<_>>()?;

    let fingerprints: Vec<&str> = columns
        .iter()
        .filter_map(|c| c.fingerprint.as_deref())
        .collect();
    if !args.allow_mixed_config && fingerprints.windows(2).any(|w| w[0] != w[1]) {
        bail!(
            "score files were produced under different configurations ({}); \
             pass --allow-mixed-config to correlate them anyway",
            {
                let mut unique: Vec<&str> = fingerprints.clone();
                unique.sort();
                unique.dedup();
                unique.join(", ")
            }
        );
    }

    let variant = if args.tau_b {
        TauVariant::TauB
    } else {
        TauVariant::Gamma
    };
    let mut rows = Vec::new();
    for column in &columns {
        let report = correlate_with(&column.values, &judgments, variant)
            .with_context(|| format!("correlating `{}`", column.metric))?;
        rows.push((column.metric.clone(), report));
    }

    let mut out = std::io::stdout().lock();
    print_report_table(&rows, &mut out)?;
    if let Some(path) = &args.out {
        let mut f = out_writer(Some(path))?;
        let map: serde_json::Map<String, serde_json::Value> = rows
            .iter()
            .map(|(name, r)| (name.clone(), serde_json::to_value(r).unwrap()))
            .collect();
        writeln!(
            f,
            "{}",
            serde_json::to_string_pretty(&serde_json::Value::Object(map))?
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ablate(args: AblateArgs) -> Result<ExitCode> {
    let cfg = args.metric.config()?;
    let records = load_corpus(&args.input.input, args.input.format.into())?;
    let table = run_ablation(&records, &cfg)?;
    let mut out = std::io::stdout().lock();
    print_report_table(&table, &mut out)?;
    if let Some(path) = &args.out {
        let mut f = out_writer(Some(path))?;
        let map: serde_json::Map<String, serde_json::Value> = table
            .iter()
            .map(|(name, r)| (name.clone(), serde_json::to_value(r).unwrap()))
            .collect();
        writeln!(
            f,
            "{}",
            serde_json::to_string_pretty(&serde_json::Value::Object(map))?
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_human_corr(args: HumanCorrArgs) -> Result<ExitCode> {
    let records = load_corpus(&args.input.input, args.input.format.into())?;
    let judgments = judgments_of(&records);
    if judgments.is_empty() {
        bail!("no judgments found in {}", args.input.input.display());
    }
    let matrix = judgment_intercorrelation(&judgments)?;
    let mut out = std::io::stdout().lock();
    write!(out, "{:<12}", "")?;
    for dim in Dimension::ALL {
        write!(out, " {:>12}", dim.name())?;
    }
    writeln!(out)?;
    for (i, dim) in Dimension::ALL.iter().enumerate() {
        write!(out, "{:<12}", dim.name())?;
        for j in 0..4 {
            write!(out, " {:>12.6}", matrix[i][j])?;
        }
        writeln!(out)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let cfg = args.metric.config()?;
    let records = match &args.input {
        Some(path) => load_corpus(path, args.format.into())?,
        None => synthetic_corpus(args.records.max(1), args.seed),
    };
    let report = run_bench(&records, &cfg, args.records)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!(
        "scored {} records in {:.3} s ({:.4} s/record, fingerprint {})",
        report.records,
        report.total_secs,
        report.per_record_secs,
        &config_fingerprint(&cfg)[..12]
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Weights(args) => cmd_weights(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::HumanCorr(args) => cmd_human_corr(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
