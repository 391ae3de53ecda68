//! Report file schema shared by the CLI subcommands.
//!
//! Every JSON report carries a schema version and the fully resolved
//! configuration that produced it, so a report is reproducible from its own
//! header. Maps are ordered and floats serialize canonically; identical
//! inputs and configuration produce byte-identical files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metaeval::SystemRun;

pub const SCHEMA_VERSION: u32 = 1;

/// Corpus-level value of one metric plus its per-segment breakdown.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricReport {
    pub value: f64,
    pub n_defined: usize,
    pub n_undefined: usize,
    /// One entry per segment; `null` where the metric is undefined.
    pub per_segment: Vec<Option<f64>>,
}

/// True-latency section of a run report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrueLatencyReport {
    pub value: f64,
    pub n_defined: usize,
    pub n_undefined: usize,
    pub per_segment: Vec<Option<f64>>,
}

/// Per-segment bookkeeping used by the tail statistics and anomaly checks.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SegmentReport {
    pub index: usize,
    pub n_tokens: usize,
    pub n_tail: usize,
    pub source_duration_ms: f64,
}

/// One stream-level metric with its per-segment breakdown.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StreamMetricReport {
    pub stream_id: String,
    pub kind: String,
    pub value: f64,
    pub per_segment: Vec<StreamSegmentEntry>,
}

/// Per-segment entry of a stream metric.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StreamSegmentEntry {
    pub index: usize,
    pub value: Option<f64>,
    pub defined: bool,
    pub n_tokens: usize,
    pub n_tail_excluded: usize,
}

/// The output of `eval` and `truelat`, and the input of `compare` and
/// `anomalous`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub schema_version: u32,
    /// Fully resolved configuration, as a flat JSON object.
    pub config: serde_json::Value,
    pub system_id: String,
    pub testset_id: String,
    pub language_pair: String,
    /// `"short"` or `"stream"`.
    pub regime: String,
    pub n_segments: usize,
    pub n_tokens: u64,
    pub n_tail_tokens: u64,
    pub tail_fraction: f64,
    pub observed_online_fraction: f64,
    pub avg_source_duration_ms: f64,
    /// Corpus metric values by label (short-form kinds or the stream family).
    pub metrics: BTreeMap<String, MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_latency: Option<TrueLatencyReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub streams: Vec<StreamMetricReport>,
    /// Pooled per-token delays, in input order (significance-test samples).
    pub delay_samples: Vec<f64>,
    pub per_segment: Vec<SegmentReport>,
}

impl RunReport {
    /// View the report as a comparison-ready system run. Requires the
    /// true-latency section.
    pub fn to_system_run(&self) -> Result<SystemRun> {
        let tl = self.true_latency.as_ref().ok_or_else(|| {
            Error::invalid(format!(
                "report for {} has no true-latency section",
                self.system_id
            ))
        })?;
        Ok(SystemRun {
            system_id: self.system_id.clone(),
            testset_id: self.testset_id.clone(),
            language_pair: self.language_pair.clone(),
            scores: self
                .metrics
                .iter()
                .map(|(label, m)| (label.clone(), m.value))
                .collect(),
            tl_corpus: tl.value,
            tl_per_segment: tl.per_segment.iter().flatten().copied().collect(),
            delay_samples: self.delay_samples.clone(),
            n_tokens: self.n_tokens,
            n_tail_tokens: self.n_tail_tokens,
            avg_source_duration_ms: self.avg_source_duration_ms,
        })
    }

    /// System-run view for commands that do not need true latency.
    pub fn to_system_run_lenient(&self) -> SystemRun {
        let (tl_corpus, tl_per_segment) = match &self.true_latency {
            Some(tl) => (tl.value, tl.per_segment.iter().flatten().copied().collect()),
            None => (0.0, Vec::new()),
        };
        SystemRun {
            system_id: self.system_id.clone(),
            testset_id: self.testset_id.clone(),
            language_pair: self.language_pair.clone(),
            scores: self
                .metrics
                .iter()
                .map(|(label, m)| (label.clone(), m.value))
                .collect(),
            tl_corpus,
            tl_per_segment,
            delay_samples: self.delay_samples.clone(),
            n_tokens: self.n_tokens,
            n_tail_tokens: self.n_tail_tokens,
            avg_source_duration_ms: self.avg_source_duration_ms,
        }
    }
}
