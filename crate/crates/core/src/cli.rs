//! Command-line drivers tying ingestion, metrics, resegmentation, true
//! latency, and meta-evaluation into reproducible batch runs.
//!
//! Reports are assembled fully in memory and written in one step, so a
//! failing run never leaves a partial file behind. Identical inputs and
//! flags produce byte-identical output, including the bootstrap confidence
//! intervals (seeded, stream-indexed RNG).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::logio::{self, ParseOptions, SegmentHypothesis, StreamRecord};
use crate::longform;
use crate::metaeval::{self, MwuSamples, PValueBucket, SystemRun};
use crate::report::{
    MetricReport, RunReport, SegmentReport, StreamMetricReport, StreamSegmentEntry,
    TrueLatencyReport, SCHEMA_VERSION,
};
use crate::shortform::{self, MetricKind};
use crate::softsegmenter::{self, Resegmentation};
use crate::textproc::LangMode;
use crate::truelat::{self, AlignmentTable};

#[derive(Debug, Parser)]
#[command(
    name = "simulst-latency",
    version,
    about = "Latency evaluation for simultaneous speech-to-text translation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute latency metrics over an instance log.
    Eval(EvalArgs),
    /// Resegment a long-form hypothesis stream against a manifest.
    Reseg(ResegArgs),
    /// Compute true latency from alignment tables.
    Truelat(TruelatArgs),
    /// Pairwise metric accuracy against true latency over run reports.
    Compare(CompareArgs),
    /// Detect anomalous simultaneous policies over run reports.
    Anomalous(AnomalousArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Tsv,
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Tsv => "tsv",
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Instance log: newline-delimited JSON records.
    #[arg(long)]
    pub logs: PathBuf,
    /// Tokenization mode.
    #[arg(long, default_value = "space")]
    pub lang_mode: LangMode,
    /// The log's source_length field is in seconds, not milliseconds.
    #[arg(long)]
    pub seconds: bool,
    /// Repair non-monotone delays with a running maximum.
    #[arg(long)]
    pub fix_monotonic: bool,
}

impl InputArgs {
    fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            lang_mode: self.lang_mode,
            source_length_in_seconds: self.seconds,
            fix_monotonic: self.fix_monotonic,
        }
    }
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    /// System identifier recorded in the report; defaults to the log file stem.
    #[arg(long)]
    pub system_id: Option<String>,
    /// Test-set identifier recorded in the report.
    #[arg(long, default_value = "unspecified")]
    pub testset_id: String,
    /// Language pair recorded in the report.
    #[arg(long, default_value = "unspecified")]
    pub language_pair: String,
}

impl IdentityArgs {
    fn system_id(&self, logs: &Path) -> String {
        self.system_id.clone().unwrap_or_else(|| {
            logs.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unnamed".to_string())
        })
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Reference file, one segment per line (short-form regime).
    #[arg(long, conflicts_with = "manifest")]
    pub refs: Option<PathBuf>,
    /// Stream manifest(s), one per log record (stream regime).
    #[arg(long)]
    pub manifest: Vec<PathBuf>,
    /// External segmentation file(s), one per stream; adds StreamLAAL.
    #[arg(long, requires = "manifest")]
    pub segmentation: Vec<PathBuf>,
    /// Alignment table file(s); adds a true-latency section.
    #[arg(long)]
    pub align_tables: Vec<PathBuf>,
    /// Metrics to compute.
    #[arg(long, value_delimiter = ',', default_values_t = MetricKind::ALL)]
    pub metrics: Vec<MetricKind>,
    #[command(flatten)]
    pub identity: IdentityArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ResegArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Stream manifest for the single stream in the log.
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TruelatArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Alignment table file(s): per segment in the short-form regime, per
    /// stream (holding one table per manifest segment) with --manifest.
    #[arg(long, required = true)]
    pub align_tables: Vec<PathBuf>,
    /// Stream manifest(s); switches to the stream regime.
    #[arg(long)]
    pub manifest: Vec<PathBuf>,
    #[command(flatten)]
    pub identity: IdentityArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Directory of run reports (JSON files produced by eval/truelat).
    #[arg(long)]
    pub reports: PathBuf,
    /// Metrics to score; defaults to every metric present in the reports.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Bootstrap resample count.
    #[arg(long, default_value_t = 10_000)]
    pub bootstrap_n: usize,
    /// RNG seed for the bootstrap.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Samples for the Mann-Whitney test: per-segment true latencies or
    /// pooled per-token delays.
    #[arg(long, default_value = "tl")]
    pub mwu_samples: MwuSamples,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct AnomalousArgs {
    /// Directory of run reports (JSON files produced by eval).
    #[arg(long)]
    pub reports: PathBuf,
    /// Metrics to check; defaults to every metric present in the reports.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Flag a system when expected minus observed online fraction exceeds
    /// this.
    #[arg(long, default_value_t = 0.15)]
    pub anomaly_threshold: f64,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    pub format: OutputFormat,
}

/// Parse `std::env::args` and run. Usage errors exit via clap.
pub fn main() -> Result<()> {
    execute(Cli::parse())
}

/// Run one parsed invocation.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Reseg(args) => cmd_reseg(args),
        Command::Truelat(args) => cmd_truelat(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Anomalous(args) => cmd_anomalous(args),
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn path_list(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn metric_labels(kinds: &[MetricKind]) -> Vec<String> {
    kinds.iter().map(|k| k.to_string()).collect()
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let parsed = logio::parse_instance_log(
        std::io::BufReader::new(std::fs::File::open(&args.input.logs)?),
        &args.input.parse_options(),
    )?;
    warn_repairs(&parsed);

    let mut metrics: Vec<MetricKind> = args.metrics.clone();
    metrics.sort();
    metrics.dedup();

    let config = serde_json::json!({
        "subcommand": "eval",
        "logs": args.input.logs.display().to_string(),
        "refs": args.refs.as_ref().map(|p| p.display().to_string()),
        "manifest": path_list(&args.manifest),
        "segmentation": path_list(&args.segmentation),
        "align_tables": path_list(&args.align_tables),
        "metrics": metric_labels(&metrics),
        "lang_mode": args.input.lang_mode.as_str(),
        "seconds": args.input.seconds,
        "fix_monotonic": args.input.fix_monotonic,
        "format": args.format.as_str(),
    });

    let report = if args.manifest.is_empty() {
        eval_short_form(&args, &metrics, parsed.segments, config)?
    } else {
        eval_stream(&args, &metrics, parsed.segments, config)?
    };

    let content = match args.format {
        OutputFormat::Json => to_pretty_json(&report)?,
        OutputFormat::Tsv => run_report_tsv(&report),
    };
    write_output(&args.output.out, &content)
}

fn warn_repairs(parsed: &logio::ParsedLog) {
    if parsed.monotonic_repairs > 0 {
        eprintln!(
            "warning: raised {} non-monotone delay value(s) to the running maximum",
            parsed.monotonic_repairs
        );
    }
    if parsed.replicated_delays > 0 {
        eprintln!(
            "warning: replicated the final delay for {} token(s) beyond the delay array",
            parsed.replicated_delays
        );
    }
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid(format!("report serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn segment_stats(segments: &[SegmentHypothesis]) -> (Vec<SegmentReport>, u64, u64, f64) {
    let mut reports = Vec::with_capacity(segments.len());
    let mut n_tokens = 0u64;
    let mut n_tail = 0u64;
    let mut duration_sum = 0.0f64;
    for (index, seg) in segments.iter().enumerate() {
        let tail = shortform::tail_token_count(seg);
        reports.push(SegmentReport {
            index,
            n_tokens: seg.len(),
            n_tail: tail,
            source_duration_ms: seg.source_duration_ms,
        });
        n_tokens += seg.len() as u64;
        n_tail += tail as u64;
        duration_sum += seg.source_duration_ms;
    }
    let avg = if segments.is_empty() {
        0.0
    } else {
        duration_sum / segments.len() as f64
    };
    (reports, n_tokens, n_tail, avg)
}

fn eval_short_form(
    args: &EvalArgs,
    metrics: &[MetricKind],
    segments: Vec<SegmentHypothesis>,
    config: serde_json::Value,
) -> Result<RunReport> {
    if segments.is_empty() {
        return Err(Error::EmptyInput("instance log has no records".into()));
    }
    let references = match &args.refs {
        Some(path) => Some(logio::load_references(&read_file(path)?, args.input.lang_mode)?),
        None => None,
    };
    if let Some(refs) = &references {
        if refs.len() != segments.len() {
            return Err(Error::invalid(format!(
                "{} log records but {} reference lines",
                segments.len(),
                refs.len()
            )));
        }
    }
    for kind in metrics {
        if kind.needs_reference() && references.is_none() {
            return Err(Error::invalid(format!(
                "metric {kind} requires --refs (reference token counts define its rate)"
            )));
        }
    }

    let mut metric_reports = BTreeMap::new();
    for &kind in metrics {
        let mut values = Vec::with_capacity(segments.len());
        for (i, seg) in segments.iter().enumerate() {
            let ref_len = references.as_ref().map(|refs| refs[i].tokens.len());
            values.push(shortform::compute(kind, seg, ref_len)?);
        }
        let agg = shortform::corpus_aggregate(&values)?;
        metric_reports.insert(
            kind.to_string(),
            MetricReport {
                value: agg.mean,
                n_defined: agg.n_defined,
                n_undefined: agg.n_undefined,
                per_segment: values.iter().map(|v| v.value).collect(),
            },
        );
    }

    let true_latency = if args.align_tables.is_empty() {
        None
    } else {
        let tables = load_tables(&args.align_tables)?;
        if tables.len() != segments.len() {
            return Err(Error::invalid(format!(
                "{} alignment tables for {} segments",
                tables.len(),
                segments.len()
            )));
        }
        let mut per_segment = Vec::with_capacity(segments.len());
        for (seg, table) in segments.iter().zip(&tables) {
            per_segment.push(truelat::true_latency(seg, table)?);
        }
        let agg = shortform::aggregate_defined(per_segment.iter().copied(), "true latency")?;
        Some(TrueLatencyReport {
            value: agg.mean,
            n_defined: agg.n_defined,
            n_undefined: agg.n_undefined,
            per_segment,
        })
    };

    let (per_segment, n_tokens, n_tail, avg_duration) = segment_stats(&segments);
    let tail = shortform::tail_fraction(&segments);
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config,
        system_id: args.identity.system_id(&args.input.logs),
        testset_id: args.identity.testset_id.clone(),
        language_pair: args.identity.language_pair.clone(),
        regime: "short".into(),
        n_segments: segments.len(),
        n_tokens,
        n_tail_tokens: n_tail,
        tail_fraction: tail,
        observed_online_fraction: 1.0 - tail,
        avg_source_duration_ms: avg_duration,
        metrics: metric_reports,
        true_latency,
        streams: Vec::new(),
        delay_samples: segments.iter().flat_map(|s| s.delays()).collect(),
        per_segment,
    })
}

fn load_tables(paths: &[PathBuf]) -> Result<Vec<AlignmentTable>> {
    let mut tables = Vec::new();
    for path in paths {
        tables.extend(logio::load_alignment_tables(&read_file(path)?)?);
    }
    Ok(tables)
}

fn build_streams(
    segments: Vec<SegmentHypothesis>,
    manifests: &[PathBuf],
    mode: LangMode,
) -> Result<Vec<StreamRecord>> {
    if segments.len() != manifests.len() {
        return Err(Error::invalid(format!(
            "{} log records but {} manifest files (pass one --manifest per stream)",
            segments.len(),
            manifests.len()
        )));
    }
    segments
        .into_iter()
        .zip(manifests)
        .map(|(hyp, path)| {
            let stream_segments = logio::load_stream_manifest(&read_file(path)?, mode)?;
            StreamRecord::new(hyp, stream_segments)
        })
        .collect()
}

fn eval_stream(
    args: &EvalArgs,
    metrics: &[MetricKind],
    segments: Vec<SegmentHypothesis>,
    config: serde_json::Value,
) -> Result<RunReport> {
    let mode = args.input.lang_mode;
    let streams = build_streams(segments, &args.manifest, mode)?;

    let segmentations: Option<Vec<Resegmentation>> = if args.segmentation.is_empty() {
        None
    } else {
        if args.segmentation.len() != streams.len() {
            return Err(Error::invalid(format!(
                "{} segmentation files for {} streams",
                args.segmentation.len(),
                streams.len()
            )));
        }
        Some(
            args.segmentation
                .iter()
                .map(|p| Resegmentation::from_json(&read_file(p)?))
                .collect::<Result<_>>()?,
        )
    };

    // Per stream, per metric label: the stream value and its segments.
    let mut stream_reports: Vec<StreamMetricReport> = Vec::new();
    let mut per_label: BTreeMap<String, Vec<longform::StreamMetricValue>> = BTreeMap::new();
    for (stream_idx, stream) in streams.iter().enumerate() {
        let mut values = Vec::new();
        for &kind in metrics {
            values.push(longform::stream_metric(stream, kind, mode)?);
        }
        if let Some(segmentations) = &segmentations {
            values.push(longform::stream_laal_compat(
                stream,
                &segmentations[stream_idx],
            )?);
        }
        for value in values {
            stream_reports.push(StreamMetricReport {
                stream_id: stream_idx.to_string(),
                kind: value.kind.to_string(),
                value: value.value,
                per_segment: value
                    .per_segment
                    .iter()
                    .map(|s| StreamSegmentEntry {
                        index: s.index,
                        value: s.value,
                        defined: s.value.is_some(),
                        n_tokens: s.n_tokens,
                        n_tail_excluded: s.n_tail_excluded,
                    })
                    .collect(),
            });
            per_label.entry(value.kind.to_string()).or_default().push(value);
        }
    }

    let mut metric_reports = BTreeMap::new();
    for (label, values) in per_label {
        let agg = shortform::aggregate_defined(
            values.iter().map(|v| Some(v.value)),
            "stream metric",
        )?;
        metric_reports.insert(
            label,
            MetricReport {
                value: agg.mean,
                n_defined: values.iter().map(|v| v.per_segment.len() - v.n_undefined).sum(),
                n_undefined: values.iter().map(|v| v.n_undefined).sum(),
                per_segment: values
                    .iter()
                    .flat_map(|v| v.per_segment.iter().map(|s| s.value))
                    .collect(),
            },
        );
    }

    let true_latency = if args.align_tables.is_empty() {
        None
    } else {
        if args.align_tables.len() != streams.len() {
            return Err(Error::invalid(format!(
                "{} alignment table files for {} streams (pass one per stream)",
                args.align_tables.len(),
                streams.len()
            )));
        }
        let mut per_segment = Vec::new();
        for (stream, path) in streams.iter().zip(&args.align_tables) {
            let tables = logio::load_alignment_tables(&read_file(path)?)?;
            let (_, values) = truelat::true_latency_stream(stream, &tables, mode)?;
            per_segment.extend(values);
        }
        let agg = shortform::aggregate_defined(per_segment.iter().copied(), "true latency")?;
        Some(TrueLatencyReport {
            value: agg.mean,
            n_defined: agg.n_defined,
            n_undefined: agg.n_undefined,
            per_segment,
        })
    };

    // Stream-level tail statistics: a tail token is one emitted at or after
    // the end of its whole stream.
    let stream_hyps: Vec<SegmentHypothesis> =
        streams.iter().map(|s| s.hypothesis.clone()).collect();
    let tail = shortform::tail_fraction(&stream_hyps);
    let n_tokens: u64 = stream_hyps.iter().map(|s| s.len() as u64).sum();
    let n_tail: u64 = stream_hyps
        .iter()
        .map(|s| shortform::tail_token_count(s) as u64)
        .sum();

    // Per manifest segment: assigned tokens and segment-local tails.
    let mut per_segment = Vec::new();
    let mut duration_sum = 0.0;
    let mut n_manifest_segments = 0usize;
    for stream in &streams {
        let segmentation = softsegmenter::resegment_stream(stream, mode)?;
        for (reseg, manifest) in segmentation.segments.iter().zip(&stream.segments) {
            let local_tail = reseg
                .tokens
                .iter()
                .filter(|t| t.delay_ms - manifest.reference.start_ms >= manifest.duration_ms)
                .count();
            per_segment.push(SegmentReport {
                index: n_manifest_segments,
                n_tokens: reseg.tokens.len(),
                n_tail: local_tail,
                source_duration_ms: manifest.duration_ms,
            });
            duration_sum += manifest.duration_ms;
            n_manifest_segments += 1;
        }
    }
    let avg_duration = if n_manifest_segments == 0 {
        0.0
    } else {
        duration_sum / n_manifest_segments as f64
    };

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config,
        system_id: args.identity.system_id(&args.input.logs),
        testset_id: args.identity.testset_id.clone(),
        language_pair: args.identity.language_pair.clone(),
        regime: "stream".into(),
        n_segments: n_manifest_segments,
        n_tokens,
        n_tail_tokens: n_tail,
        tail_fraction: tail,
        observed_online_fraction: 1.0 - tail,
        avg_source_duration_ms: avg_duration,
        metrics: metric_reports,
        true_latency,
        streams: stream_reports,
        delay_samples: stream_hyps.iter().flat_map(|s| s.delays()).collect(),
        per_segment,
    })
}

fn run_report_tsv(report: &RunReport) -> String {
    let mut out = String::from("metric\tvalue\tn_defined\tn_undefined\n");
    for (label, metric) in &report.metrics {
        let _ = writeln!(
            out,
            "{label}\t{}\t{}\t{}",
            metric.value, metric.n_defined, metric.n_undefined
        );
    }
    if let Some(tl) = &report.true_latency {
        let _ = writeln!(
            out,
            "TrueLatency\t{}\t{}\t{}",
            tl.value, tl.n_defined, tl.n_undefined
        );
    }
    let _ = writeln!(out, "tail_fraction\t{}\t\t", report.tail_fraction);
    let _ = writeln!(
        out,
        "observed_online_fraction\t{}\t\t",
        report.observed_online_fraction
    );
    out
}

// ---------------------------------------------------------------------------
// reseg
// ---------------------------------------------------------------------------

fn cmd_reseg(args: ResegArgs) -> Result<()> {
    let parsed = logio::parse_instance_log(
        std::io::BufReader::new(std::fs::File::open(&args.input.logs)?),
        &args.input.parse_options(),
    )?;
    warn_repairs(&parsed);
    let mut segments = parsed.segments;
    if segments.len() != 1 {
        return Err(Error::invalid(format!(
            "reseg expects a log with exactly one stream record, found {}",
            segments.len()
        )));
    }
    let hypothesis = segments.remove(0);
    let manifest =
        logio::load_stream_manifest(&read_file(&args.manifest)?, args.input.lang_mode)?;
    let stream = StreamRecord::new(hypothesis, manifest)?;
    let segmentation = softsegmenter::resegment_stream(&stream, args.input.lang_mode)?;
    let content = to_pretty_json(&segmentation.to_json())?;
    write_output(&args.output.out, &content)
}

// ---------------------------------------------------------------------------
// truelat
// ---------------------------------------------------------------------------

fn cmd_truelat(args: TruelatArgs) -> Result<()> {
    let eval_args = EvalArgs {
        input: args.input,
        refs: None,
        manifest: args.manifest,
        segmentation: Vec::new(),
        align_tables: args.align_tables,
        metrics: Vec::new(),
        identity: args.identity,
        output: args.output,
        format: args.format,
    };
    let parsed = logio::parse_instance_log(
        std::io::BufReader::new(std::fs::File::open(&eval_args.input.logs)?),
        &eval_args.input.parse_options(),
    )?;
    warn_repairs(&parsed);

    let config = serde_json::json!({
        "subcommand": "truelat",
        "logs": eval_args.input.logs.display().to_string(),
        "manifest": path_list(&eval_args.manifest),
        "align_tables": path_list(&eval_args.align_tables),
        "lang_mode": eval_args.input.lang_mode.as_str(),
        "seconds": eval_args.input.seconds,
        "fix_monotonic": eval_args.input.fix_monotonic,
        "format": eval_args.format.as_str(),
    });

    let report = if eval_args.manifest.is_empty() {
        eval_short_form(&eval_args, &[], parsed.segments, config)?
    } else {
        eval_stream(&eval_args, &[], parsed.segments, config)?
    };
    let content = match eval_args.format {
        OutputFormat::Json => to_pretty_json(&report)?,
        OutputFormat::Tsv => run_report_tsv(&report),
    };
    write_output(&eval_args.output.out, &content)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn load_reports(dir: &Path) -> Result<Vec<RunReport>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::invalid(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no .json reports in {}",
            dir.display()
        )));
    }
    let mut reports = Vec::new();
    for path in paths {
        match serde_json::from_slice::<RunReport>(&read_file(&path)?) {
            Ok(report) => reports.push(report),
            Err(e) => eprintln!("warning: skipping {}: {e}", path.display()),
        }
    }
    Ok(reports)
}

#[derive(Debug, serde::Serialize)]
struct AccuracyRow {
    metric: String,
    bucket: &'static str,
    accuracy: f64,
    ci_low: f64,
    ci_high: f64,
    n_pairs: usize,
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let reports = load_reports(&args.reports)?;
    let mut runs: Vec<SystemRun> = Vec::new();
    let mut skipped = 0usize;
    for report in &reports {
        match report.to_system_run() {
            Ok(run) => runs.push(run),
            Err(e) => {
                eprintln!("warning: {e}");
                skipped += 1;
            }
        }
    }
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} report(s) without true latency");
    }
    if runs.len() < 2 {
        return Err(Error::invalid(format!(
            "compare needs at least two usable reports, found {}",
            runs.len()
        )));
    }
    runs.sort_by(|a, b| {
        (&a.testset_id, &a.language_pair, &a.system_id)
            .cmp(&(&b.testset_id, &b.language_pair, &b.system_id))
    });
    let outcomes = metaeval::build_outcomes(&runs, args.mwu_samples)?;
    let cross_group = runs.len() * (runs.len() - 1) / 2 - outcomes.len();
    if cross_group > 0 {
        eprintln!(
            "warning: skipped {cross_group} pair(s) not sharing a test set and language pair"
        );
    }
    if outcomes.is_empty() {
        return Err(Error::EmptyInput(
            "no system pairs share a test set and language pair".into(),
        ));
    }

    let metrics: Vec<String> = if args.metrics.is_empty() {
        let labels: BTreeSet<String> = runs
            .iter()
            .flat_map(|r| r.scores.keys().cloned())
            .collect();
        labels.into_iter().collect()
    } else {
        args.metrics.clone()
    };

    let mut rows: Vec<AccuracyRow> = Vec::new();
    for metric in &metrics {
        for bucket in PValueBucket::ALL {
            let subset: Vec<metaeval::ComparisonOutcome> = outcomes
                .iter()
                .filter(|o| bucket.contains(o.p_value))
                .cloned()
                .collect();
            let n_pairs = subset
                .iter()
                .filter(|o| o.delta_tl != 0.0 && o.delta_metric.contains_key(metric))
                .count();
            if n_pairs == 0 {
                continue;
            }
            let accuracy = metaeval::sign_accuracy(&subset, metric)?;
            let (ci_low, ci_high) =
                metaeval::bootstrap_accuracy_ci(&subset, metric, args.bootstrap_n, args.seed)?;
            rows.push(AccuracyRow {
                metric: metric.clone(),
                bucket: bucket.label(),
                accuracy,
                ci_low,
                ci_high,
                n_pairs,
            });
        }
    }

    let content = match args.format {
        OutputFormat::Tsv => {
            let mut out = String::from("metric\tbucket\taccuracy\tci_low\tci_high\tn_pairs\n");
            for row in &rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    row.metric, row.bucket, row.accuracy, row.ci_low, row.ci_high, row.n_pairs
                );
            }
            out
        }
        OutputFormat::Json => to_pretty_json(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "config": {
                "subcommand": "compare",
                "reports": args.reports.display().to_string(),
                "metrics": metrics,
                "bootstrap_n": args.bootstrap_n,
                "seed": args.seed,
                "format": args.format.as_str(),
            },
            "n_outcomes": outcomes.len(),
            "rows": rows,
        }))?,
    };
    write_output(&args.output.out, &content)
}

// ---------------------------------------------------------------------------
// anomalous
// ---------------------------------------------------------------------------

#[derive(Debug, serde::Serialize)]
struct AnomalyRow {
    system: String,
    metric: String,
    observed: f64,
    expected: f64,
    expected_raw: f64,
    flagged: bool,
}

fn cmd_anomalous(args: AnomalousArgs) -> Result<()> {
    let reports = load_reports(&args.reports)?;
    let mut runs: Vec<SystemRun> = reports.iter().map(|r| r.to_system_run_lenient()).collect();
    runs.sort_by(|a, b| a.system_id.cmp(&b.system_id));

    let metrics: Vec<String> = if args.metrics.is_empty() {
        let labels: BTreeSet<String> = runs
            .iter()
            .flat_map(|r| r.scores.keys().cloned())
            .collect();
        labels.into_iter().collect()
    } else {
        args.metrics.clone()
    };
    if metrics.is_empty() {
        return Err(Error::EmptyInput("reports carry no metric scores".into()));
    }

    let mut rows: Vec<AnomalyRow> = Vec::new();
    for run in &runs {
        for metric in &metrics {
            if !run.scores.contains_key(metric) {
                continue;
            }
            let check = metaeval::detect_anomalous(run, metric, args.anomaly_threshold)?;
            rows.push(AnomalyRow {
                system: run.system_id.clone(),
                metric: metric.clone(),
                observed: check.observed,
                expected: check.expected.clamped,
                expected_raw: check.expected.raw,
                flagged: check.flagged,
            });
        }
    }

    let content = match args.format {
        OutputFormat::Tsv => {
            let mut out = String::from("system\tmetric\tobserved\texpected\tflagged\n");
            for row in &rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    row.system, row.metric, row.observed, row.expected, row.flagged
                );
            }
            out
        }
        OutputFormat::Json => to_pretty_json(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "config": {
                "subcommand": "anomalous",
                "reports": args.reports.display().to_string(),
                "metrics": metrics,
                "anomaly_threshold": args.anomaly_threshold,
                "format": args.format.as_str(),
            },
            "rows": rows,
        }))?,
    };
    write_output(&args.output.out, &content)
}
