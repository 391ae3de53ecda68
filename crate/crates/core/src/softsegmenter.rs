//! Resegmentation of a long-form hypothesis token stream against reference
//! segments.
//!
//! The aligner runs a global monotone dynamic program (Needleman-Wunsch
//! style) between the concatenated reference token sequence and the
//! hypothesis token sequence. A matched pair contributes the character-set
//! similarity of the two tokens; skipping a token on either side costs
//! nothing. Two pairings are forbidden outright: a hypothesis token emitted
//! at or before the start of the matched token's segment (tokens cannot
//! belong to segments that had not started yet), and a punctuation token
//! paired with a non-punctuation token.
//!
//! Matched hypothesis tokens land in their reference token's segment;
//! unmatched ones follow the nearest preceding matched token (or the first
//! segment when there is none). Delays are never altered, and the original
//! casing is kept so the per-segment text can feed translation quality
//! metrics unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logio::{SegmentReference, StreamRecord, TokenEvent};
use crate::textproc::{self, LangMode};

/// Score of one reference/hypothesis token pair, or `None` when the pairing
/// is forbidden (future segment, or punctuation on exactly one side).
pub fn pair_score(
    ref_token: &str,
    segment_start_ms: f64,
    hyp_token: &str,
    emission_ms: f64,
) -> Option<f64> {
    if segment_start_ms >= emission_ms {
        return None;
    }
    if textproc::is_punctuation(ref_token) != textproc::is_punctuation(hyp_token) {
        return None;
    }
    Some(textproc::char_similarity(ref_token, hyp_token))
}

/// One output segment: the hypothesis tokens assigned to it, in stream order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResegmentedSegment {
    pub segment_index: usize,
    /// Start of the segment within the stream, in ms.
    pub start_ms: f64,
    /// Assigned tokens with their absolute delays preserved.
    pub tokens: Vec<TokenEvent>,
    /// Detokenized original-cased text of the assigned tokens.
    pub text: String,
}

impl ResegmentedSegment {
    /// Delays re-based to the segment start.
    pub fn relative_delays(&self) -> Vec<f64> {
        self.tokens
            .iter()
            .map(|t| t.delay_ms - self.start_ms)
            .collect()
    }
}

/// A partition of the hypothesis token stream into reference segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Resegmentation {
    pub segments: Vec<ResegmentedSegment>,
}

impl Resegmentation {
    /// Check that the per-segment token lists concatenate back to exactly
    /// the given hypothesis sequence (token text and delay; elapsed times
    /// are metadata the interchange format does not carry).
    pub fn verify_partition(&self, hypothesis: &[TokenEvent]) -> Result<()> {
        let total: usize = self.segments.iter().map(|s| s.tokens.len()).sum();
        if total != hypothesis.len() {
            return Err(Error::invalid(format!(
                "segmentation holds {total} tokens but the stream has {}",
                hypothesis.len()
            )));
        }
        let mut offset = 0usize;
        for seg in &self.segments {
            for token in &seg.tokens {
                let expected = &hypothesis[offset];
                if token.token != expected.token || token.delay_ms != expected.delay_ms {
                    return Err(Error::invalid(format!(
                        "segmentation diverges from the stream at token {}",
                        offset + 1
                    )));
                }
                offset += 1;
            }
        }
        Ok(())
    }

    /// Serialize to the interchange format: a JSON array of per-segment
    /// objects with text, tokens, and absolute/relative delays.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<ResegJsonSegment> = self
            .segments
            .iter()
            .map(|s| ResegJsonSegment {
                segment_index: s.segment_index,
                text: s.text.clone(),
                tokens: s.tokens.iter().map(|t| t.token.clone()).collect(),
                delays_abs_ms: s.tokens.iter().map(|t| t.delay_ms).collect(),
                delays_rel_ms: s.relative_delays(),
            })
            .collect();
        serde_json::to_value(entries).expect("resegmentation serializes")
    }

    /// Parse the interchange format back. Segment starts are recovered from
    /// the absolute/relative delay difference where tokens exist.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let entries: Vec<ResegJsonSegment> = serde_json::from_slice(bytes)
            .map_err(|e| Error::invalid(format!("invalid resegmentation JSON: {e}")))?;
        let mut segments = Vec::with_capacity(entries.len());
        for entry in entries {
            if entry.tokens.len() != entry.delays_abs_ms.len() {
                return Err(Error::invalid(format!(
                    "segment {}: {} tokens but {} delays",
                    entry.segment_index,
                    entry.tokens.len(),
                    entry.delays_abs_ms.len()
                )));
            }
            let start_ms = match (entry.delays_abs_ms.first(), entry.delays_rel_ms.first()) {
                (Some(abs), Some(rel)) => abs - rel,
                _ => 0.0,
            };
            let tokens = entry
                .tokens
                .into_iter()
                .zip(entry.delays_abs_ms.iter())
                .map(|(token, &delay_ms)| TokenEvent {
                    token,
                    delay_ms,
                    elapsed_ms: None,
                })
                .collect();
            segments.push(ResegmentedSegment {
                segment_index: entry.segment_index,
                start_ms,
                tokens,
                text: entry.text,
            });
        }
        Ok(Resegmentation { segments })
    }
}

#[derive(Serialize, Deserialize)]
struct ResegJsonSegment {
    segment_index: usize,
    text: String,
    tokens: Vec<String>,
    delays_abs_ms: Vec<f64>,
    delays_rel_ms: Vec<f64>,
}

// Backtrace moves.
const MOVE_NONE: u8 = 0;
const MOVE_MATCH: u8 = 1;
const MOVE_SKIP_HYP: u8 = 2;
const MOVE_SKIP_REF: u8 = 3;

/// Align hypothesis tokens to reference segments, maximizing the total pair
/// score over all monotone alignments.
///
/// Ties are broken deterministically: the backtrace prefers match over
/// skip-hypothesis over skip-reference.
pub fn align(
    references: &[SegmentReference],
    hypothesis: &[TokenEvent],
    mode: LangMode,
) -> Result<Resegmentation> {
    align_with_score(references, hypothesis, mode).map(|(resegmentation, _)| resegmentation)
}

/// [`align`], also returning the total score of the chosen alignment.
pub fn align_with_score(
    references: &[SegmentReference],
    hypothesis: &[TokenEvent],
    mode: LangMode,
) -> Result<(Resegmentation, f64)> {
    if references.is_empty() {
        return Err(Error::EmptyInput("no reference segments to align to".into()));
    }

    // Flatten references into one token sequence tagged with its segment.
    let mut ref_tokens: Vec<(&str, usize, f64)> = Vec::new();
    for (seg_idx, reference) in references.iter().enumerate() {
        for token in &reference.tokens {
            ref_tokens.push((token.as_str(), seg_idx, reference.start_ms));
        }
    }

    let hyp_lower: Vec<String> = hypothesis
        .iter()
        .map(|t| t.token.to_lowercase())
        .collect();

    let m = ref_tokens.len();
    let n = hypothesis.len();

    // score[i][j]: best total for the first i reference and j hypothesis
    // tokens. All moves score >= 0, so every cell is reachable via skips.
    let width = n + 1;
    let mut score = vec![0.0f64; (m + 1) * width];
    let mut moves = vec![MOVE_NONE; (m + 1) * width];
    moves[1..=n].fill(MOVE_SKIP_HYP);
    for i in 1..=m {
        moves[i * width] = MOVE_SKIP_REF;
    }
    for i in 1..=m {
        let (ref_token, _, seg_start) = ref_tokens[i - 1];
        for j in 1..=n {
            let idx = i * width + j;
            let mut best;
            let mut best_move;
            match pair_score(ref_token, seg_start, &hyp_lower[j - 1], hypothesis[j - 1].delay_ms)
            {
                Some(s) => {
                    best = score[(i - 1) * width + (j - 1)] + s;
                    best_move = MOVE_MATCH;
                }
                None => {
                    best = f64::NEG_INFINITY;
                    best_move = MOVE_NONE;
                }
            }
            let skip_hyp = score[i * width + (j - 1)];
            if skip_hyp > best || best_move == MOVE_NONE {
                best = skip_hyp;
                best_move = MOVE_SKIP_HYP;
            }
            let skip_ref = score[(i - 1) * width + j];
            if skip_ref > best {
                best = skip_ref;
                best_move = MOVE_SKIP_REF;
            }
            score[idx] = best;
            moves[idx] = best_move;
        }
    }

    // Backtrace, recording the matched segment per hypothesis token.
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut i = m;
    let mut j = n;
    while i > 0 || j > 0 {
        match moves[i * width + j] {
            MOVE_MATCH => {
                assignment[j - 1] = Some(ref_tokens[i - 1].1);
                i -= 1;
                j -= 1;
            }
            MOVE_SKIP_HYP => j -= 1,
            MOVE_SKIP_REF => i -= 1,
            _ => unreachable!("backtrace escaped the table"),
        }
    }

    // Unmatched tokens follow the nearest preceding match.
    let mut last_segment = 0usize;
    let mut per_segment_tokens: Vec<Vec<TokenEvent>> = vec![Vec::new(); references.len()];
    for (j, token) in hypothesis.iter().enumerate() {
        if let Some(seg) = assignment[j] {
            last_segment = seg;
        }
        per_segment_tokens[last_segment].push(token.clone());
    }

    let segments = per_segment_tokens
        .into_iter()
        .enumerate()
        .map(|(seg_idx, tokens)| {
            let surfaces: Vec<&str> = tokens.iter().map(|t| t.token.as_str()).collect();
            ResegmentedSegment {
                segment_index: seg_idx,
                start_ms: references[seg_idx].start_ms,
                text: textproc::detokenize(&surfaces, mode),
                tokens,
            }
        })
        .collect();

    Ok((Resegmentation { segments }, score[m * width + n]))
}

/// Resegment a stream record: align its hypothesis against the manifest's
/// reference segments.
pub fn resegment_stream(stream: &StreamRecord, mode: LangMode) -> Result<Resegmentation> {
    let references: Vec<SegmentReference> = stream
        .segments
        .iter()
        .map(|s| s.reference.clone())
        .collect();
    align(&references, &stream.hypothesis.tokens, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logio::{SegmentHypothesis, StreamSegment};

    fn token(text: &str, delay: f64) -> TokenEvent {
        TokenEvent {
            token: text.to_string(),
            delay_ms: delay,
            elapsed_ms: None,
        }
    }

    fn reference(text: &str, start: f64) -> SegmentReference {
        SegmentReference::new(text, start, LangMode::default())
    }

    #[test]
    fn pair_score_examples() {
        assert_eq!(pair_score("hello", 0.0, "hello", 500.0), Some(1.0));
        assert_eq!(pair_score("hello", 1000.0, "hello", 800.0), None);
        assert_eq!(pair_score(",", 0.0, "world", 500.0), None);
        assert_eq!(pair_score("hello", 500.0, "hello", 500.0), None);
    }

    #[test]
    fn align_assigns_tokens_to_their_segments() {
        let refs = vec![reference("hello world", 0.0), reference("good night", 1000.0)];
        let hyp = vec![
            token("hello", 500.0),
            token("world", 900.0),
            token("good", 1600.0),
            token("night", 2100.0),
        ];
        let reseg = align(&refs, &hyp, LangMode::default()).unwrap();
        assert_eq!(reseg.segments[0].tokens.len(), 2);
        assert_eq!(reseg.segments[1].tokens.len(), 2);
        assert_eq!(reseg.segments[1].tokens[0].token, "good");
        assert_eq!(reseg.segments[1].text, "good night");
    }

    #[test]
    fn future_segments_cannot_claim_early_tokens() {
        // "good" is emitted before segment 2 starts, so it can only follow
        // the preceding match into segment 1.
        let refs = vec![reference("hello", 0.0), reference("good night", 1000.0)];
        let hyp = vec![
            token("hello", 500.0),
            token("good", 800.0),
            token("night", 2100.0),
        ];
        let reseg = align(&refs, &hyp, LangMode::default()).unwrap();
        assert_eq!(reseg.segments[0].tokens.len(), 2);
        assert_eq!(reseg.segments[0].tokens[1].token, "good");
        assert_eq!(reseg.segments[1].tokens.len(), 1);
    }

    #[test]
    fn exact_match_recovers_reference_boundaries() {
        let refs = vec![reference("a b c", 0.0), reference("d e", 3000.0)];
        let hyp = vec![
            token("a", 500.0),
            token("b", 1000.0),
            token("c", 1500.0),
            token("d", 3500.0),
            token("e", 4000.0),
        ];
        let reseg = align(&refs, &hyp, LangMode::default()).unwrap();
        assert_eq!(reseg.segments[0].tokens.len(), refs[0].tokens.len());
        assert_eq!(reseg.segments[1].tokens.len(), refs[1].tokens.len());
    }

    #[test]
    fn empty_hypothesis_yields_empty_segments() {
        let refs = vec![reference("a", 0.0), reference("b", 1000.0)];
        let reseg = align(&refs, &[], LangMode::default()).unwrap();
        assert_eq!(reseg.segments.len(), 2);
        assert!(reseg.segments.iter().all(|s| s.tokens.is_empty()));
    }

    #[test]
    fn empty_references_are_an_error() {
        assert!(align(&[], &[token("a", 100.0)], LangMode::default()).is_err());
    }

    #[test]
    fn delays_and_order_are_preserved() {
        let refs = vec![reference("x y", 0.0), reference("z", 2000.0)];
        let hyp = vec![token("y", 700.0), token("q", 900.0), token("z", 2500.0)];
        let reseg = align(&refs, &hyp, LangMode::default()).unwrap();
        reseg.verify_partition(&hyp).unwrap();
        let flattened: Vec<f64> = reseg
            .segments
            .iter()
            .flat_map(|s| s.tokens.iter().map(|t| t.delay_ms))
            .collect();
        assert_eq!(flattened, vec![700.0, 900.0, 2500.0]);
    }

    #[test]
    fn resegment_stream_keeps_absolute_delays() {
        let hyp = SegmentHypothesis::new(
            vec![token("a", 500.0), token("b", 2500.0)],
            5000.0,
            "a b".into(),
        )
        .unwrap();
        let stream = StreamRecord::new(
            hyp,
            vec![
                StreamSegment {
                    reference: reference("a", 0.0),
                    duration_ms: 2000.0,
                },
                StreamSegment {
                    reference: reference("b", 2000.0),
                    duration_ms: 3000.0,
                },
            ],
        )
        .unwrap();
        let reseg = resegment_stream(&stream, LangMode::default()).unwrap();
        assert_eq!(reseg.segments[0].relative_delays(), vec![500.0]);
        assert_eq!(reseg.segments[1].relative_delays(), vec![500.0]);
        assert_eq!(reseg.segments[1].tokens[0].delay_ms, 2500.0);
    }

    #[test]
    fn json_round_trip() {
        let refs = vec![reference("a b", 0.0), reference("c", 1000.0)];
        let hyp = vec![token("a", 100.0), token("b", 200.0), token("c", 1200.0)];
        let reseg = align(&refs, &hyp, LangMode::default()).unwrap();
        let json = serde_json::to_vec(&reseg.to_json()).unwrap();
        let back = Resegmentation::from_json(&json).unwrap();
        back.verify_partition(&hyp).unwrap();
        assert_eq!(back.segments.len(), 2);
        assert_eq!(back.segments[1].start_ms, 1000.0);
    }
}
