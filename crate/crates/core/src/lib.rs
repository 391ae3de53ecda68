//! Latency evaluation toolkit for simultaneous speech-to-text translation.
//!
//! Simultaneous systems emit translation tokens while the source audio is
//! still playing; each token carries a delay, the amount of source audio
//! consumed at emission. This crate turns instance logs of such systems into
//! latency scores and comparisons:
//!
//! * [`shortform`] — the established per-segment metrics (AP, AL, LAAL, DAL,
//!   ATD) plus YAAL, which scores only the tokens emitted strictly before the
//!   end of the source and is therefore immune to end-of-segment tail words.
//! * [`softsegmenter`] — delay-aware monotone alignment of a long-form
//!   hypothesis stream onto reference segments.
//! * [`longform`] — stream-level metrics over the resegmented output:
//!   the Long* family, LongYAAL, and StreamLAAL over external segmentations.
//! * [`truelat`] — reference latency out of forced-alignment timestamps and
//!   word-alignment links.
//! * [`metaeval`] — pairwise sign accuracy against true latency with
//!   Mann-Whitney significance buckets, bootstrap confidence intervals, and
//!   anomalous-policy detection.
//! * [`logio`] — parsers for instance logs, reference files, stream
//!   manifests, and alignment tables.
//!
//! The `examples/` directory holds one runnable walkthrough per capability;
//! the `simulst-latency` binary wraps the same entry points for batch use.

pub mod cli;
pub mod error;
pub mod logio;
pub mod longform;
pub mod metaeval;
pub mod report;
pub mod shortform;
pub mod softsegmenter;
pub mod textproc;
pub mod truelat;

pub use error::{Error, Result};
pub use logio::{SegmentHypothesis, SegmentReference, StreamRecord, TokenEvent};
pub use shortform::{MetricKind, MetricValue};
pub use textproc::LangMode;
