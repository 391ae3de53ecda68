//! Split a continuous long-form hypothesis onto reference segments with the
//! delay-aware aligner.
//!
//! ```bash
//! cargo run -p simulst-latency --example resegment_stream
//! ```

use simulst_latency::logio::{self, ParseOptions, StreamRecord};
use simulst_latency::softsegmenter;
use simulst_latency::textproc::LangMode;

fn main() -> simulst_latency::Result<()> {
    // One unsegmented 9-second stream. The system never saw the reference
    // sentence boundaries; its delays are absolute stream times.
    let log = concat!(
        r#"{"prediction":"Hello everyone . Today we will talk about latency .","delays":"#,
        r#"[700.0,1400.0,2100.0,3600.0,3900.0,4400.0,5200.0,6100.0,7000.0,8200.0],"#,
        r#""source_length":9000.0}"#,
        "\n",
    );
    // The manifest pairs each reference sentence with its audio span.
    let manifest = r#"[
        {"start_ms": 0,    "duration_ms": 3000, "reference": "Hello everybody."},
        {"start_ms": 3000, "duration_ms": 6000, "reference": "Today we talk about latency."}
    ]"#;

    let mode = LangMode::SpaceDelimited;
    let mut parsed = logio::parse_instance_log(log.as_bytes(), &ParseOptions::default())?;
    let segments = logio::load_stream_manifest(manifest.as_bytes(), mode)?;
    let stream = StreamRecord::new(parsed.segments.remove(0), segments)?;

    let resegmentation = softsegmenter::resegment_stream(&stream, mode)?;
    for segment in &resegmentation.segments {
        println!("segment {} (starts at {} ms)", segment.segment_index, segment.start_ms);
        println!("  text: {}", segment.text);
        println!(
            "  delays (abs): {:?}",
            segment.tokens.iter().map(|t| t.delay_ms).collect::<Vec<_>>()
        );
        println!("  delays (rel): {:?}", segment.relative_delays());
    }

    // The interchange format consumed by `eval --segmentation` and external
    // quality scoring.
    println!("\n{}", serde_json::to_string_pretty(&resegmentation.to_json()).unwrap());
    Ok(())
}
