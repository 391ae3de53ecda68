//! Per-segment latency metrics: AP, AL, LAAL, DAL, ATD, and YAAL, plus
//! corpus-level aggregation and the tail-word statistic.
//!
//! Conventions shared by all metrics:
//!
//! * `d_i` is the amount of source audio (ms) consumed when hypothesis token
//!   `i` was emitted; delays are non-decreasing.
//! * `|X|` is the source duration in ms, `|Y|` the hypothesis length in
//!   tokens, and the reference length is passed by the caller.
//! * The ideal policy emits token `i` at `(i-1)/γ` where `γ` is a rate in
//!   tokens per millisecond; the AL family measures the average lag behind
//!   it up to a cutoff token.
//!
//! Delays are used raw except inside AP, which clamps them to `[0, |X|]`;
//! clamping elsewhere would hide the tail behavior that YAAL and the tail
//! statistic are meant to expose.

use crate::error::{Error, Result};
use crate::logio::SegmentHypothesis;

/// Assumed duration of one source speech token for ATD, in ms.
pub const ATD_SOURCE_TOKEN_MS: f64 = 300.0;

/// The short-form metric family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Ap,
    Al,
    Laal,
    Dal,
    Atd,
    Yaal,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Ap,
        MetricKind::Al,
        MetricKind::Laal,
        MetricKind::Dal,
        MetricKind::Atd,
        MetricKind::Yaal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Ap => "AP",
            MetricKind::Al => "AL",
            MetricKind::Laal => "LAAL",
            MetricKind::Dal => "DAL",
            MetricKind::Atd => "ATD",
            MetricKind::Yaal => "YAAL",
        }
    }

    /// Whether the metric needs the reference token count.
    pub fn needs_reference(&self) -> bool {
        matches!(self, MetricKind::Al | MetricKind::Laal | MetricKind::Yaal)
    }
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AP" => Ok(MetricKind::Ap),
            "AL" => Ok(MetricKind::Al),
            "LAAL" => Ok(MetricKind::Laal),
            "DAL" => Ok(MetricKind::Dal),
            "ATD" => Ok(MetricKind::Atd),
            "YAAL" => Ok(MetricKind::Yaal),
            other => Err(format!(
                "unknown metric `{other}` (expected AP|AL|LAAL|DAL|ATD|YAAL)"
            )),
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed metric. `value` is `None` only for YAAL on segments where no
/// token was emitted before the end of the source (offline behavior).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub kind: MetricKind,
    pub value: Option<f64>,
}

impl MetricValue {
    fn defined(kind: MetricKind, value: f64) -> Self {
        MetricValue {
            kind,
            value: Some(value),
        }
    }

    fn undefined(kind: MetricKind) -> Self {
        MetricValue { kind, value: None }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

/// Rate and cutoff parameters of one segment, as used by the AL family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    /// Ideal-policy rate in tokens per millisecond.
    pub tokens_per_ms: f64,
    /// 1-based index of the first token emitted once the whole source was
    /// read, or `|Y|` if no delay reaches the source duration.
    pub cutoff: usize,
    /// 1-based index of the last token emitted strictly before the end of
    /// the source; `None` when every token waited for the full input.
    pub cutoff_yaal: Option<usize>,
}

impl GammaParams {
    pub fn for_segment(seg: &SegmentHypothesis, gamma: f64) -> Result<Self> {
        let delays = seg.delays();
        Ok(GammaParams {
            tokens_per_ms: gamma,
            cutoff: cutoff_tau(&delays, seg.source_duration_ms)?,
            cutoff_yaal: cutoff_tau_yaal(&delays, seg.source_duration_ms),
        })
    }

    /// Emission time of token `i` (1-based) under the ideal policy.
    pub fn ideal_delay(&self, i: usize) -> f64 {
        (i - 1) as f64 / self.tokens_per_ms
    }
}

/// 1-based index of the first delay reaching the source duration.
///
/// Uses `d_i >= |X|` rather than exact equality (floating-point delays rarely
/// hit the duration exactly) and falls back to `|Y|` when no delay reaches it,
/// which keeps truncated logs scoreable.
pub fn cutoff_tau(delays: &[f64], source_duration_ms: f64) -> Result<usize> {
    if delays.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    Ok(delays
        .iter()
        .position(|&d| d >= source_duration_ms)
        .map(|i| i + 1)
        .unwrap_or(delays.len()))
}

/// 1-based index of the last delay strictly below the source duration, or
/// `None` if every token was emitted at or after the end of the source.
pub fn cutoff_tau_yaal(delays: &[f64], source_duration_ms: f64) -> Option<usize> {
    // Delays are non-decreasing, so the qualifying tokens form a prefix.
    let count = delays
        .iter()
        .take_while(|&&d| d < source_duration_ms)
        .count();
    (count > 0).then_some(count)
}

pub(crate) fn average_lagging(delays: &[f64], cutoff: usize, tokens_per_ms: f64) -> f64 {
    let mut sum = 0.0;
    for (i, &d) in delays.iter().take(cutoff).enumerate() {
        sum += d - i as f64 / tokens_per_ms;
    }
    sum / cutoff as f64
}

/// Average proportion of the source consumed per emitted token, in `(0, 1]`.
///
/// Delays are clamped to `[0, |X|]` before use.
pub fn ap(seg: &SegmentHypothesis) -> Result<MetricValue> {
    if seg.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    let x = seg.source_duration_ms;
    let sum: f64 = seg
        .tokens
        .iter()
        .map(|t| t.delay_ms.clamp(0.0, x))
        .sum();
    Ok(MetricValue::defined(
        MetricKind::Ap,
        sum / (x * seg.len() as f64),
    ))
}

/// Average lagging behind the ideal policy, cut off at the first token
/// emitted after the whole source was read. `γ = ref_len / |X|`.
pub fn al(seg: &SegmentHypothesis, ref_len: usize) -> Result<MetricValue> {
    if seg.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    if ref_len == 0 {
        return Err(Error::invalid("AL requires a non-empty reference"));
    }
    let delays = seg.delays();
    let tau = cutoff_tau(&delays, seg.source_duration_ms)?;
    let gamma = ref_len as f64 / seg.source_duration_ms;
    Ok(MetricValue::defined(
        MetricKind::Al,
        average_lagging(&delays, tau, gamma),
    ))
}

/// Length-aware AL: the rate uses `max(|Y|, ref_len)`, which removes AL's
/// reward for overgeneration.
pub fn laal(seg: &SegmentHypothesis, ref_len: usize) -> Result<MetricValue> {
    if seg.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    if ref_len == 0 {
        return Err(Error::invalid("LAAL requires a non-empty reference"));
    }
    let delays = seg.delays();
    let tau = cutoff_tau(&delays, seg.source_duration_ms)?;
    let gamma = seg.len().max(ref_len) as f64 / seg.source_duration_ms;
    Ok(MetricValue::defined(
        MetricKind::Laal,
        average_lagging(&delays, tau, gamma),
    ))
}

/// Differentiable average lagging over all hypothesis tokens, with a minimum
/// spacing of `1/γ` between effective delays. `γ = |Y| / |X|`.
pub fn dal(seg: &SegmentHypothesis) -> Result<MetricValue> {
    if seg.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    let gamma = seg.len() as f64 / seg.source_duration_ms;
    let step = 1.0 / gamma;
    let mut sum = 0.0;
    let mut prev_effective = f64::NEG_INFINITY;
    for (i, token) in seg.tokens.iter().enumerate() {
        let effective = if i == 0 {
            token.delay_ms
        } else {
            token.delay_ms.max(prev_effective + step)
        };
        sum += effective - i as f64 / gamma;
        prev_effective = effective;
    }
    Ok(MetricValue::defined(
        MetricKind::Dal,
        sum / seg.len() as f64,
    ))
}

/// Average token delay: the mean gap between each hypothesis token and the
/// end of the source token it is paired with.
///
/// The source is modeled as fixed 300 ms tokens (the final one shortened to
/// end exactly at `|X|`). The delay sequence is split into chunks at every
/// strict increase (each chunk is one write burst); the source tokens whose
/// end times fall between two consecutive chunk delays are the input consumed
/// before that chunk. Pairing walks both sides monotonically, shifting for
/// overgeneration and capping at the last source token already consumed.
pub fn atd(seg: &SegmentHypothesis) -> Result<MetricValue> {
    if seg.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    let x = seg.source_duration_ms;
    let delays = seg.delays();
    let n_src = (x / ATD_SOURCE_TOKEN_MS).ceil().max(1.0) as usize;
    // End time of source token k (1-based); index 0 means "nothing consumed".
    let src_end = |k: usize| -> f64 {
        if k == 0 {
            0.0
        } else {
            (ATD_SOURCE_TOKEN_MS * k as f64).min(x)
        }
    };
    // Number of source tokens whose end time is <= d.
    let consumed_by = |d: f64| -> usize {
        if d >= x {
            n_src
        } else {
            ((d / ATD_SOURCE_TOKEN_MS).floor() as usize).min(n_src)
        }
    };

    let mut sum = 0.0;
    let mut chunk_start = 0usize;
    let mut y_before = 0usize; // target tokens in earlier chunks
    let mut x_before = 0usize; // source tokens consumed by earlier chunks
    while chunk_start < delays.len() {
        let d = delays[chunk_start];
        let mut chunk_end = chunk_start + 1;
        while chunk_end < delays.len() && delays[chunk_end] == d {
            chunk_end += 1;
        }
        let x_consumed = consumed_by(d);
        let overgen = y_before.saturating_sub(x_before);
        for (t, &delay) in delays.iter().enumerate().take(chunk_end).skip(chunk_start) {
            let shifted = (t + 1) - overgen;
            let paired = shifted.min(x_consumed);
            sum += delay - src_end(paired);
        }
        y_before = chunk_end;
        x_before = x_consumed;
        chunk_start = chunk_end;
    }
    Ok(MetricValue::defined(
        MetricKind::Atd,
        sum / delays.len() as f64,
    ))
}

/// LAAL restricted to the tokens emitted strictly before the end of the
/// source. Undefined for offline segments (no such token).
///
/// The rate counts only the tokens entering the sum, so tokens emitted at or
/// after the end of the source can never affect the value.
pub fn yaal(seg: &SegmentHypothesis, ref_len: usize) -> Result<MetricValue> {
    if seg.is_empty() {
        return Err(Error::EmptyHypothesis);
    }
    if ref_len == 0 {
        return Err(Error::invalid("YAAL requires a non-empty reference"));
    }
    let delays = seg.delays();
    match cutoff_tau_yaal(&delays, seg.source_duration_ms) {
        None => Ok(MetricValue::undefined(MetricKind::Yaal)),
        Some(tau) => {
            let gamma = tau.max(ref_len) as f64 / seg.source_duration_ms;
            Ok(MetricValue::defined(
                MetricKind::Yaal,
                average_lagging(&delays, tau, gamma),
            ))
        }
    }
}

/// Compute one metric. `ref_len` is required for AL, LAAL, and YAAL.
pub fn compute(
    kind: MetricKind,
    seg: &SegmentHypothesis,
    ref_len: Option<usize>,
) -> Result<MetricValue> {
    let need_ref = || {
        ref_len.ok_or_else(|| {
            Error::invalid(format!("{kind} requires a reference token count"))
        })
    };
    match kind {
        MetricKind::Ap => ap(seg),
        MetricKind::Al => al(seg, need_ref()?),
        MetricKind::Laal => laal(seg, need_ref()?),
        MetricKind::Dal => dal(seg),
        MetricKind::Atd => atd(seg),
        MetricKind::Yaal => yaal(seg, need_ref()?),
    }
}

/// Mean over defined values, with a count of the skipped undefined ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusValue {
    pub mean: f64,
    pub n_defined: usize,
    pub n_undefined: usize,
}

pub(crate) fn aggregate_defined<I>(values: I, what: &'static str) -> Result<CorpusValue>
where
    I: IntoIterator<Item = Option<f64>>,
{
    let mut sum = 0.0;
    let mut n_defined = 0usize;
    let mut n_undefined = 0usize;
    let mut any = false;
    for value in values {
        any = true;
        match value {
            Some(v) => {
                sum += v;
                n_defined += 1;
            }
            None => n_undefined += 1,
        }
    }
    if !any {
        return Err(Error::EmptyInput(format!("no {what} values to aggregate")));
    }
    if n_defined == 0 {
        return Err(Error::AllUndefined(what));
    }
    Ok(CorpusValue {
        mean: sum / n_defined as f64,
        n_defined,
        n_undefined,
    })
}

/// Unweighted mean over segments; undefined segments are skipped and counted.
pub fn corpus_aggregate(values: &[MetricValue]) -> Result<CorpusValue> {
    aggregate_defined(values.iter().map(|v| v.value), "metric")
}

/// Number of tokens emitted at or after the end of the source.
pub fn tail_token_count(seg: &SegmentHypothesis) -> usize {
    seg.tokens
        .iter()
        .filter(|t| t.delay_ms >= seg.source_duration_ms)
        .count()
}

/// Fraction of all corpus tokens emitted at or after the end-of-segment
/// signal. Returns 0 for a corpus with no tokens.
pub fn tail_fraction(segments: &[SegmentHypothesis]) -> f64 {
    let total: usize = segments.iter().map(|s| s.len()).sum();
    if total == 0 {
        return 0.0;
    }
    let tail: usize = segments.iter().map(tail_token_count).sum();
    tail as f64 / total as f64
}
