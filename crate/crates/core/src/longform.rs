//! Stream-level latency metrics over resegmented long-form hypotheses.
//!
//! Every metric here follows the same pattern: resegment the stream, score
//! each segment with relative delays (absolute delay minus segment start)
//! against the segment's own duration and reference length, then average the
//! defined per-segment values. Segments that received no tokens are skipped
//! and counted as undefined.
//!
//! LongYAAL differs from the mechanical per-segment application in one way:
//! a segment's sum keeps every token assigned to it, even those emitted
//! after the segment's own audio ended, and only drops tokens emitted at or
//! after the end of the whole stream.

use crate::error::{Error, Result};
use crate::logio::{SegmentHypothesis, StreamRecord, TokenEvent};
use crate::shortform::{self, MetricKind};
use crate::softsegmenter::{self, Resegmentation};
use crate::textproc::LangMode;

/// The stream-level metric family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamMetricKind {
    /// Per-segment LAAL over an externally supplied segmentation.
    StreamLaal,
    LongAp,
    LongAl,
    LongLaal,
    LongDal,
    LongAtd,
    LongYaal,
}

impl StreamMetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StreamMetricKind::StreamLaal => "StreamLAAL",
            StreamMetricKind::LongAp => "LongAP",
            StreamMetricKind::LongAl => "LongAL",
            StreamMetricKind::LongLaal => "LongLAAL",
            StreamMetricKind::LongDal => "LongDAL",
            StreamMetricKind::LongAtd => "LongATD",
            StreamMetricKind::LongYaal => "LongYAAL",
        }
    }

    /// The stream-level counterpart of a short-form metric.
    pub fn for_short_form(kind: MetricKind) -> Self {
        match kind {
            MetricKind::Ap => StreamMetricKind::LongAp,
            MetricKind::Al => StreamMetricKind::LongAl,
            MetricKind::Laal => StreamMetricKind::LongLaal,
            MetricKind::Dal => StreamMetricKind::LongDal,
            MetricKind::Atd => StreamMetricKind::LongAtd,
            MetricKind::Yaal => StreamMetricKind::LongYaal,
        }
    }
}

impl std::fmt::Display for StreamMetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One segment's contribution to a stream metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMetricValue {
    pub index: usize,
    /// `None` for segments the metric could not score (no tokens, or all
    /// tokens excluded).
    pub value: Option<f64>,
    /// Tokens assigned to the segment by the segmenter.
    pub n_tokens: usize,
    /// Tokens of this segment that the metric left out of its sum.
    pub n_tail_excluded: usize,
}

/// A stream metric: the mean of the defined per-segment values.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamMetricValue {
    pub kind: StreamMetricKind,
    pub value: f64,
    pub n_undefined: usize,
    pub per_segment: Vec<SegmentMetricValue>,
}

fn finish(
    kind: StreamMetricKind,
    per_segment: Vec<SegmentMetricValue>,
) -> Result<StreamMetricValue> {
    let agg = shortform::aggregate_defined(
        per_segment.iter().map(|s| s.value),
        kind.as_str(),
    )
    .map_err(|e| match e {
        Error::EmptyInput(_) => Error::EmptyInput("stream has no segments".into()),
        other => other,
    })?;
    Ok(StreamMetricValue {
        kind,
        value: agg.mean,
        n_undefined: agg.n_undefined,
        per_segment,
    })
}

/// Build the windowed per-segment hypothesis: relative delays against the
/// segment's manifest duration.
pub(crate) fn windowed_segment(
    tokens: &[TokenEvent],
    start_ms: f64,
    duration_ms: f64,
) -> SegmentHypothesis {
    let rebased: Vec<TokenEvent> = tokens
        .iter()
        .map(|t| TokenEvent {
            token: t.token.clone(),
            // Tokens assigned ahead of the first segment's start clamp to 0.
            delay_ms: (t.delay_ms - start_ms).max(0.0),
            elapsed_ms: t.elapsed_ms,
        })
        .collect();
    SegmentHypothesis {
        tokens: rebased,
        source_duration_ms: duration_ms,
        raw_text: String::new(),
    }
}

fn per_segment_short_form(
    stream: &StreamRecord,
    segmentation: &Resegmentation,
    kind: MetricKind,
) -> Result<Vec<SegmentMetricValue>> {
    let mut out = Vec::with_capacity(stream.segments.len());
    for (idx, (reseg, manifest)) in segmentation
        .segments
        .iter()
        .zip(&stream.segments)
        .enumerate()
    {
        let n_tokens = reseg.tokens.len();
        if n_tokens == 0 {
            out.push(SegmentMetricValue {
                index: idx,
                value: None,
                n_tokens: 0,
                n_tail_excluded: 0,
            });
            continue;
        }
        let windowed = windowed_segment(
            &reseg.tokens,
            manifest.reference.start_ms,
            manifest.duration_ms,
        );
        let ref_len = manifest.reference.tokens.len();
        let value = shortform::compute(kind, &windowed, Some(ref_len))?;
        let n_tail_excluded = match kind {
            MetricKind::Al | MetricKind::Laal => {
                let tau = shortform::cutoff_tau(&windowed.delays(), windowed.source_duration_ms)?;
                n_tokens - tau
            }
            _ => 0,
        };
        out.push(SegmentMetricValue {
            index: idx,
            value: value.value,
            n_tokens,
            n_tail_excluded,
        });
    }
    Ok(out)
}

/// Stream-level metric of the given short-form kind, resegmenting internally.
///
/// For YAAL this is [`long_yaal`]: the only stream-level YAAL defined here is
/// the one that cuts at the end of the stream rather than at segment
/// boundaries.
pub fn stream_metric(
    stream: &StreamRecord,
    kind: MetricKind,
    mode: LangMode,
) -> Result<StreamMetricValue> {
    if kind == MetricKind::Yaal {
        return long_yaal(stream, mode);
    }
    let segmentation = softsegmenter::resegment_stream(stream, mode)?;
    let per_segment = per_segment_short_form(stream, &segmentation, kind)?;
    finish(StreamMetricKind::for_short_form(kind), per_segment)
}

/// Stream-level YAAL.
///
/// Per segment, every assigned token emitted strictly before the end of the
/// whole stream enters the lagging sum with its relative delay, which may
/// exceed the segment duration. The lagging rate for segment `s` is
/// `max(included tokens, reference length) / duration`. Segments whose
/// tokens were all emitted at or after the stream end are undefined.
pub fn long_yaal(stream: &StreamRecord, mode: LangMode) -> Result<StreamMetricValue> {
    let segmentation = softsegmenter::resegment_stream(stream, mode)?;
    long_yaal_over(stream, &segmentation)
}

fn long_yaal_over(
    stream: &StreamRecord,
    segmentation: &Resegmentation,
) -> Result<StreamMetricValue> {
    let stream_end = stream.total_duration_ms();
    let mut per_segment = Vec::with_capacity(stream.segments.len());
    for (idx, (reseg, manifest)) in segmentation
        .segments
        .iter()
        .zip(&stream.segments)
        .enumerate()
    {
        let n_tokens = reseg.tokens.len();
        // Delays are monotone, so the stream-end tail is a suffix.
        let included: Vec<f64> = reseg
            .tokens
            .iter()
            .take_while(|t| t.delay_ms < stream_end)
            .map(|t| (t.delay_ms - manifest.reference.start_ms).max(0.0))
            .collect();
        let n_included = included.len();
        if n_included == 0 {
            per_segment.push(SegmentMetricValue {
                index: idx,
                value: None,
                n_tokens,
                n_tail_excluded: n_tokens,
            });
            continue;
        }
        let ref_len = manifest.reference.tokens.len();
        let gamma = n_included.max(ref_len) as f64 / manifest.duration_ms;
        per_segment.push(SegmentMetricValue {
            index: idx,
            value: Some(shortform::average_lagging(&included, n_included, gamma)),
            n_tokens,
            n_tail_excluded: n_tokens - n_included,
        });
    }
    finish(StreamMetricKind::LongYaal, per_segment)
}

/// Per-segment LAAL over an externally produced segmentation (for example a
/// different resegmentation tool's output converted to the interchange
/// format). Segment starts and durations come from the stream manifest; the
/// supplied segmentation only decides which tokens belong where.
pub fn stream_laal_compat(
    stream: &StreamRecord,
    segmentation: &Resegmentation,
) -> Result<StreamMetricValue> {
    if segmentation.segments.len() != stream.segments.len() {
        return Err(Error::invalid(format!(
            "segmentation has {} segments but the manifest has {}",
            segmentation.segments.len(),
            stream.segments.len()
        )));
    }
    segmentation.verify_partition(&stream.hypothesis.tokens)?;
    let per_segment = per_segment_short_form(stream, segmentation, MetricKind::Laal)?;
    finish(StreamMetricKind::StreamLaal, per_segment)
}
