//! Stream-level metrics: the Long* family, LongYAAL, and StreamLAAL over an
//! externally supplied segmentation.
//!
//! ```bash
//! cargo run -p simulst-latency --example long_form_metrics
//! ```

use simulst_latency::logio::{self, ParseOptions, StreamRecord};
use simulst_latency::longform;
use simulst_latency::shortform::MetricKind;
use simulst_latency::softsegmenter;
use simulst_latency::textproc::LangMode;

fn main() -> simulst_latency::Result<()> {
    let log = concat!(
        r#"{"prediction":"the cat sat . it was warm .","delays":"#,
        r#"[900.0,1600.0,2300.0,4200.0,4600.0,5300.0,6100.0,7400.0],"#,
        r#""source_length":8000.0}"#,
        "\n",
    );
    let manifest = r#"[
        {"start_ms": 0,    "duration_ms": 4000, "reference": "the cat sat ."},
        {"start_ms": 4000, "duration_ms": 4000, "reference": "it was warm ."}
    ]"#;

    let mode = LangMode::SpaceDelimited;
    let mut parsed = logio::parse_instance_log(log.as_bytes(), &ParseOptions::default())?;
    let segments = logio::load_stream_manifest(manifest.as_bytes(), mode)?;
    let stream = StreamRecord::new(parsed.segments.remove(0), segments)?;

    println!("metric      value     per-segment");
    for kind in MetricKind::ALL {
        let value = longform::stream_metric(&stream, kind, mode)?;
        let per_segment: Vec<String> = value
            .per_segment
            .iter()
            .map(|s| match s.value {
                Some(v) => format!("{v:.1}"),
                None => "undef".to_string(),
            })
            .collect();
        println!(
            "{:<10}  {:>8.1}  [{}]",
            value.kind.to_string(),
            value.value,
            per_segment.join(", ")
        );
    }

    // StreamLAAL scores a segmentation produced elsewhere. Feeding the
    // built-in segmenter's own output back in reproduces LongLAAL; a
    // different resegmentation tool's output will generally differ.
    let external = softsegmenter::resegment_stream(&stream, mode)?;
    let compat = longform::stream_laal_compat(&stream, &external)?;
    println!("{:<10}  {:>8.1}  (external segmentation)", compat.kind.to_string(), compat.value);
    Ok(())
}
