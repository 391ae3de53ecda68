//! Ingestion of instance logs, reference files, stream manifests, and
//! alignment tables into the domain types.
//!
//! All times are normalized to milliseconds at the parsing boundary. Logs
//! whose `source_length` field is in seconds must be declared as such via
//! [`ParseOptions::source_length_in_seconds`]; units are never guessed.

use std::io::BufRead;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::textproc::{self, LangMode};
use crate::truelat::{AlignmentTable, SourceWord};

/// One emitted hypothesis token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenEvent {
    /// Surface form as split from the prediction string (original casing).
    pub token: String,
    /// Source audio consumed when this token was emitted, in ms.
    pub delay_ms: f64,
    /// Optional wall-clock emission time, in ms. Carried as opaque metadata;
    /// no metric in this crate reads it.
    pub elapsed_ms: Option<f64>,
}

/// Ordered token events for one audio segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentHypothesis {
    pub tokens: Vec<TokenEvent>,
    /// Total duration of the source audio, in ms. Strictly positive.
    pub source_duration_ms: f64,
    /// Original untokenized prediction string.
    pub raw_text: String,
}

impl SegmentHypothesis {
    /// Build a validated hypothesis: positive duration, non-negative and
    /// non-decreasing delays, non-empty tokens.
    pub fn new(tokens: Vec<TokenEvent>, source_duration_ms: f64, raw_text: String) -> Result<Self> {
        if !source_duration_ms.is_finite() || source_duration_ms <= 0.0 {
            return Err(Error::invalid(format!(
                "source duration must be positive, got {source_duration_ms}"
            )));
        }
        let mut prev = 0.0f64;
        for (i, event) in tokens.iter().enumerate() {
            if event.token.is_empty() {
                return Err(Error::invalid(format!("token {} is empty", i + 1)));
            }
            if event.delay_ms < 0.0 {
                return Err(Error::invalid(format!(
                    "token {} has negative delay {}",
                    i + 1,
                    event.delay_ms
                )));
            }
            if event.delay_ms < prev {
                return Err(Error::invalid(format!(
                    "non-monotone delays: token {} at {} ms after {} ms",
                    i + 1,
                    event.delay_ms,
                    prev
                )));
            }
            prev = event.delay_ms;
        }
        Ok(SegmentHypothesis {
            tokens,
            source_duration_ms,
            raw_text,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The delay sequence, in token order.
    pub fn delays(&self) -> Vec<f64> {
        self.tokens.iter().map(|t| t.delay_ms).collect()
    }
}

/// Reference translation for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentReference {
    /// Lowercased tokens, the deterministic tokenization of `raw_text`.
    pub tokens: Vec<String>,
    pub raw_text: String,
    /// Segment start offset within its stream, in ms. 0 for short-form.
    pub start_ms: f64,
}

impl SegmentReference {
    pub fn new(raw_text: &str, start_ms: f64, mode: LangMode) -> Self {
        SegmentReference {
            tokens: textproc::tokenize(raw_text, mode),
            raw_text: raw_text.to_string(),
            start_ms,
        }
    }
}

/// One reference segment of a stream, with its source duration.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSegment {
    pub reference: SegmentReference,
    pub duration_ms: f64,
}

impl StreamSegment {
    pub fn end_ms(&self) -> f64 {
        self.reference.start_ms + self.duration_ms
    }
}

/// An unsegmented audio stream: a continuous hypothesis plus the manifest of
/// reference segments it will be scored against.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamRecord {
    /// Hypothesis covering the whole stream; its `source_duration_ms` is the
    /// total stream duration.
    pub hypothesis: SegmentHypothesis,
    pub segments: Vec<StreamSegment>,
}

/// Segment boundaries may exceed the stream duration by at most this much,
/// absorbing rounding in externally produced manifests.
pub const MANIFEST_TOLERANCE_MS: f64 = 1.0;

impl StreamRecord {
    pub fn new(hypothesis: SegmentHypothesis, segments: Vec<StreamSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyInput("stream has no reference segments".into()));
        }
        validate_segment_timings(&segments)?;
        let last_end = segments.last().expect("non-empty").end_ms();
        if last_end > hypothesis.source_duration_ms + MANIFEST_TOLERANCE_MS {
            return Err(Error::invalid(format!(
                "last segment ends at {last_end} ms, beyond the stream duration {} ms",
                hypothesis.source_duration_ms
            )));
        }
        Ok(StreamRecord {
            hypothesis,
            segments,
        })
    }

    pub fn total_duration_ms(&self) -> f64 {
        self.hypothesis.source_duration_ms
    }
}

fn validate_segment_timings(segments: &[StreamSegment]) -> Result<()> {
    for (i, seg) in segments.iter().enumerate() {
        if seg.reference.start_ms < 0.0 {
            return Err(Error::invalid(format!(
                "segment {} has negative start {}",
                i + 1,
                seg.reference.start_ms
            )));
        }
        if !seg.duration_ms.is_finite() || seg.duration_ms <= 0.0 {
            return Err(Error::invalid(format!(
                "segment {} has non-positive duration {}",
                i + 1,
                seg.duration_ms
            )));
        }
        if i > 0 {
            let prev = &segments[i - 1];
            if seg.reference.start_ms < prev.reference.start_ms {
                return Err(Error::invalid(format!(
                    "segment {} starts before segment {}",
                    i + 1,
                    i
                )));
            }
            if seg.reference.start_ms < prev.end_ms() - MANIFEST_TOLERANCE_MS {
                return Err(Error::invalid(format!(
                    "segment {} (start {} ms) overlaps segment {} (end {} ms)",
                    i + 1,
                    seg.reference.start_ms,
                    i,
                    prev.end_ms()
                )));
            }
        }
    }
    Ok(())
}

/// Options controlling instance-log parsing.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub lang_mode: LangMode,
    /// The log's `source_length` field is in seconds and must be scaled.
    pub source_length_in_seconds: bool,
    /// Repair non-monotone delays with a running maximum instead of failing.
    pub fix_monotonic: bool,
}

/// Parse result: segments in file order plus repair bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLog {
    pub segments: Vec<SegmentHypothesis>,
    /// Number of delay values raised by the running-maximum repair.
    pub monotonic_repairs: usize,
    /// Number of delay values replicated to cover extra tokens.
    pub replicated_delays: usize,
}

#[derive(Deserialize)]
struct RawLogRecord {
    #[serde(default)]
    #[allow(dead_code)]
    index: Option<i64>,
    prediction: String,
    delays: Vec<f64>,
    #[serde(default)]
    elapsed: Option<Vec<f64>>,
    source_length: f64,
}

/// Parse a newline-delimited JSON instance log.
///
/// One [`SegmentHypothesis`] per record, in file order. Errors carry the
/// 1-based line number of the offending record.
pub fn parse_instance_log<R: BufRead>(reader: R, opts: &ParseOptions) -> Result<ParsedLog> {
    let mut segments = Vec::new();
    let mut monotonic_repairs = 0usize;
    let mut replicated_delays = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawLogRecord = serde_json::from_str(&line).map_err(|e| {
            if e.is_syntax() || e.is_eof() {
                Error::MalformedJson {
                    line: line_no,
                    message: e.to_string(),
                }
            } else {
                Error::record(line_no, format!("schema error: {e}"))
            }
        })?;
        let (segment, repairs, replications) = record_to_segment(record, line_no, opts)?;
        monotonic_repairs += repairs;
        replicated_delays += replications;
        segments.push(segment);
    }

    Ok(ParsedLog {
        segments,
        monotonic_repairs,
        replicated_delays,
    })
}

fn record_to_segment(
    record: RawLogRecord,
    line_no: usize,
    opts: &ParseOptions,
) -> Result<(SegmentHypothesis, usize, usize)> {
    let scale = if opts.source_length_in_seconds {
        1000.0
    } else {
        1.0
    };
    let source_duration_ms = record.source_length * scale;
    if !source_duration_ms.is_finite() || source_duration_ms <= 0.0 {
        return Err(Error::record(
            line_no,
            format!("source_length must be positive, got {}", record.source_length),
        ));
    }

    let mut delays: Vec<f64> = record.delays.iter().map(|d| d.max(0.0)).collect();

    let mut repairs = 0usize;
    let mut running_max = 0.0f64;
    for (i, d) in delays.iter_mut().enumerate() {
        if *d < running_max {
            if opts.fix_monotonic {
                *d = running_max;
                repairs += 1;
            } else {
                return Err(Error::record(
                    line_no,
                    format!(
                        "non-monotone delays: value {} at position {} is below {} \
                         (use --fix-monotonic to repair)",
                        *d,
                        i + 1,
                        running_max
                    ),
                ));
            }
        }
        running_max = *d;
    }

    let tokens = textproc::tokenize_cased(&record.prediction, opts.lang_mode);
    let n_tokens = tokens.len();
    let n_delays = delays.len();

    // Detokenization artifacts can split the prediction into more tokens than
    // the log has delays; the extra tokens belong to the final write burst.
    let mut replications = 0usize;
    if n_tokens > n_delays {
        let last = *delays.last().ok_or_else(|| {
            Error::record(
                line_no,
                format!("{n_tokens} tokens but no delays to replicate"),
            )
        })?;
        replications = n_tokens - n_delays;
        delays.resize(n_tokens, last);
    } else if n_tokens < n_delays {
        return Err(Error::record(
            line_no,
            format!("{n_tokens} tokens but {n_delays} delays"),
        ));
    }

    let elapsed = match &record.elapsed {
        Some(e) if e.len() == n_delays && n_delays > 0 => {
            let mut e = e.clone();
            let last = *e.last().expect("non-empty");
            e.resize(tokens.len(), last);
            Some(e)
        }
        // Length mismatch: the field is opaque metadata, drop it.
        _ => None,
    };

    let events: Vec<TokenEvent> = tokens
        .into_iter()
        .enumerate()
        .map(|(i, token)| TokenEvent {
            token,
            delay_ms: delays[i],
            elapsed_ms: elapsed.as_ref().map(|e| e[i]),
        })
        .collect();

    let segment = SegmentHypothesis::new(events, source_duration_ms, record.prediction)
        .map_err(|e| Error::record(line_no, e.to_string()))?;
    Ok((segment, repairs, replications))
}

/// Serialize segments back to the instance-log format.
///
/// Re-parsing the output with the same options yields identical segments.
pub fn write_instance_log<W: std::io::Write>(
    segments: &[SegmentHypothesis],
    mut writer: W,
) -> Result<()> {
    for (i, seg) in segments.iter().enumerate() {
        let delays: Vec<f64> = seg.delays();
        let elapsed: Option<Vec<f64>> = seg
            .tokens
            .iter()
            .map(|t| t.elapsed_ms)
            .collect::<Option<Vec<f64>>>();
        let mut obj = serde_json::Map::new();
        obj.insert("index".into(), serde_json::json!(i));
        obj.insert("prediction".into(), serde_json::json!(seg.raw_text));
        obj.insert("delays".into(), serde_json::json!(delays));
        if let Some(elapsed) = elapsed {
            obj.insert("elapsed".into(), serde_json::json!(elapsed));
        }
        obj.insert(
            "source_length".into(),
            serde_json::json!(seg.source_duration_ms),
        );
        serde_json::to_writer(&mut writer, &serde_json::Value::Object(obj))
            .map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Load a plain-text reference file, one segment per line.
pub fn load_references(bytes: &[u8], mode: LangMode) -> Result<Vec<SegmentReference>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::invalid(format!("reference file is not valid UTF-8: {e}")))?;
    let refs: Vec<SegmentReference> = text
        .lines()
        .map(|line| SegmentReference::new(line, 0.0, mode))
        .collect();
    if refs.is_empty() {
        return Err(Error::EmptyInput("reference file is empty".into()));
    }
    Ok(refs)
}

#[derive(Deserialize)]
struct RawManifestSegment {
    start_ms: f64,
    duration_ms: f64,
    reference: String,
}

/// Load a stream manifest: a JSON array of `{start_ms, duration_ms, reference}`.
///
/// Segments must be ordered by start time and non-overlapping (1 ms
/// tolerance).
pub fn load_stream_manifest(bytes: &[u8], mode: LangMode) -> Result<Vec<StreamSegment>> {
    let raw: Vec<RawManifestSegment> = serde_json::from_slice(bytes)
        .map_err(|e| Error::invalid(format!("manifest is not a valid JSON array: {e}")))?;
    if raw.is_empty() {
        return Err(Error::EmptyInput("manifest has no segments".into()));
    }
    let segments: Vec<StreamSegment> = raw
        .into_iter()
        .map(|s| StreamSegment {
            reference: SegmentReference::new(&s.reference, s.start_ms, mode),
            duration_ms: s.duration_ms,
        })
        .collect();
    validate_segment_timings(&segments)?;
    Ok(segments)
}

#[derive(Deserialize)]
struct RawSourceWord {
    word: String,
    start_ms: f64,
    end_ms: f64,
}

#[derive(Deserialize)]
struct RawAlignmentTable {
    source_words: Vec<RawSourceWord>,
    links: Vec<(usize, usize)>,
}

/// Load one alignment table: `{source_words: [...], links: [[tgt, src], ...]}`.
///
/// Source indices are validated here; target indices can only be checked
/// against a hypothesis when the table is applied.
pub fn load_alignment_table(bytes: &[u8]) -> Result<AlignmentTable> {
    let raw: RawAlignmentTable = serde_json::from_slice(bytes)
        .map_err(|e| Error::invalid(format!("alignment table is not valid JSON: {e}")))?;
    alignment_table_from_raw(raw)
}

/// Load a file containing either a single alignment table or a JSON array of
/// tables (one per segment, in segment order).
pub fn load_alignment_tables(bytes: &[u8]) -> Result<Vec<AlignmentTable>> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| Error::invalid(format!("alignment table file is not valid JSON: {e}")))?;
    match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(|v| {
                let raw: RawAlignmentTable = serde_json::from_value(v)
                    .map_err(|e| Error::invalid(format!("invalid alignment table entry: {e}")))?;
                alignment_table_from_raw(raw)
            })
            .collect(),
        other => {
            let raw: RawAlignmentTable = serde_json::from_value(other)
                .map_err(|e| Error::invalid(format!("invalid alignment table: {e}")))?;
            Ok(vec![alignment_table_from_raw(raw)?])
        }
    }
}

fn alignment_table_from_raw(raw: RawAlignmentTable) -> Result<AlignmentTable> {
    let source_words: Vec<SourceWord> = raw
        .source_words
        .into_iter()
        .map(|w| SourceWord {
            word: w.word,
            start_ms: w.start_ms,
            end_ms: w.end_ms,
        })
        .collect();
    for (i, w) in source_words.iter().enumerate() {
        if w.start_ms < 0.0 {
            return Err(Error::invalid(format!(
                "source word {} has negative start {}",
                i + 1,
                w.start_ms
            )));
        }
        if w.end_ms < w.start_ms {
            return Err(Error::invalid(format!(
                "source word {} ends at {} before it starts at {}",
                i + 1,
                w.end_ms,
                w.start_ms
            )));
        }
    }
    for &(tgt, src) in &raw.links {
        if src >= source_words.len() {
            return Err(Error::invalid(format!(
                "link ({tgt}, {src}) references source word {src}, but the table has {}",
                source_words.len()
            )));
        }
    }
    Ok(AlignmentTable {
        source_words,
        links: raw.links,
    })
}
