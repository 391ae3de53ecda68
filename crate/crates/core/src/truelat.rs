//! Reference latency from externally produced word alignments.
//!
//! Producing the alignments is out of scope: forced aligners give the source
//! word timestamps, a word aligner gives the target-to-source links, and this
//! module only consumes the resulting table. The score is the mean gap
//! between each eligible target token's emission time and the end time of
//! the latest source word linked to it. Eligible tokens are those with at
//! least one link that were emitted strictly before the end of the source;
//! unaligned tokens and tail tokens never influence the value.

use crate::error::{Error, Result};
use crate::logio::{SegmentHypothesis, StreamRecord};
use crate::longform;
use crate::shortform::{aggregate_defined, CorpusValue};
use crate::softsegmenter;
use crate::textproc::LangMode;

/// One source word with its time span within the segment's audio.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceWord {
    pub word: String,
    pub start_ms: f64,
    pub end_ms: f64,
}

/// Source word timings plus target-to-source links (0-based indices, may be
/// many-to-many).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlignmentTable {
    pub source_words: Vec<SourceWord>,
    pub links: Vec<(usize, usize)>,
}

/// True latency of one segment, in ms; `None` when no target token is
/// eligible. The value can be negative: a token may be emitted before its
/// aligned source word finishes, and no clamping is applied.
pub fn true_latency(seg: &SegmentHypothesis, table: &AlignmentTable) -> Result<Option<f64>> {
    let mut aligned_end: Vec<Option<f64>> = vec![None; seg.len()];
    for &(tgt, src) in &table.links {
        if tgt >= seg.len() {
            return Err(Error::invalid(format!(
                "link ({tgt}, {src}) references target token {tgt}, but the hypothesis has {}",
                seg.len()
            )));
        }
        let word = table.source_words.get(src).ok_or_else(|| {
            Error::invalid(format!(
                "link ({tgt}, {src}) references source word {src}, but the table has {}",
                table.source_words.len()
            ))
        })?;
        let end = aligned_end[tgt].get_or_insert(f64::NEG_INFINITY);
        *end = end.max(word.end_ms);
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    for (token, end) in seg.tokens.iter().zip(&aligned_end) {
        let Some(end) = end else { continue };
        if token.delay_ms >= seg.source_duration_ms {
            continue;
        }
        sum += token.delay_ms - end;
        count += 1;
    }
    if count == 0 {
        return Ok(None);
    }
    Ok(Some(sum / count as f64))
}

/// Mean over defined per-segment true latencies; undefined segments are
/// skipped and counted.
pub fn true_latency_corpus(
    pairs: &[(&SegmentHypothesis, &AlignmentTable)],
) -> Result<CorpusValue> {
    let values: Vec<Option<f64>> = pairs
        .iter()
        .map(|(seg, table)| true_latency(seg, table))
        .collect::<Result<_>>()?;
    aggregate_defined(values, "true latency")
}

/// Long-form true latency: the stream hypothesis is windowed by the
/// segmenter first, then each windowed segment is scored against its own
/// alignment table (timestamps relative to the segment's audio).
pub fn true_latency_stream(
    stream: &StreamRecord,
    tables: &[AlignmentTable],
    mode: LangMode,
) -> Result<(CorpusValue, Vec<Option<f64>>)> {
    if tables.len() != stream.segments.len() {
        return Err(Error::invalid(format!(
            "{} alignment tables for {} stream segments",
            tables.len(),
            stream.segments.len()
        )));
    }
    let segmentation = softsegmenter::resegment_stream(stream, mode)?;
    let mut values = Vec::with_capacity(stream.segments.len());
    for ((reseg, manifest), table) in segmentation
        .segments
        .iter()
        .zip(&stream.segments)
        .zip(tables)
    {
        if reseg.tokens.is_empty() {
            values.push(None);
            continue;
        }
        let windowed = longform::windowed_segment(
            &reseg.tokens,
            manifest.reference.start_ms,
            manifest.duration_ms,
        );
        values.push(true_latency(&windowed, table)?);
    }
    let agg = aggregate_defined(values.iter().copied(), "true latency")?;
    Ok((agg, values))
}
