//! Score a short-form instance log: per-segment and corpus latency metrics.
//!
//! ```bash
//! cargo run -p simulst-latency --example short_form_metrics
//! ```

use simulst_latency::logio::{self, ParseOptions};
use simulst_latency::shortform::{self, MetricKind};

fn main() -> simulst_latency::Result<()> {
    // Two segments in the SimulEval instance-log format. In segment 2 most
    // of the translation waits for the end-of-segment signal: the delays of
    // the last three tokens equal the source length.
    let log = concat!(
        r#"{"index":0,"prediction":"Guten Morgen allerseits .","delays":[600.0,1100.0,1900.0,2400.0],"source_length":2500.0}"#,
        "\n",
        r#"{"index":1,"prediction":"Ich habe eine Frage .","delays":[500.0,3000.0,3000.0,3000.0,3000.0],"source_length":3000.0}"#,
        "\n",
    );
    let references = "Guten Morgen zusammen.\nIch h\u{e4}tte eine Frage.\n";

    let parsed = logio::parse_instance_log(log.as_bytes(), &ParseOptions::default())?;
    let refs = logio::load_references(references.as_bytes(), Default::default())?;

    println!("segment  metric  value");
    for kind in MetricKind::ALL {
        let mut values = Vec::new();
        for (i, seg) in parsed.segments.iter().enumerate() {
            let value = shortform::compute(kind, seg, Some(refs[i].tokens.len()))?;
            match value.value {
                Some(v) => println!("{:>7}  {:>6}  {v:.1}", i, kind),
                None => println!("{:>7}  {:>6}  undefined (offline segment)", i, kind),
            }
            values.push(value);
        }
        let corpus = shortform::corpus_aggregate(&values)?;
        println!(
            "{:>7}  {:>6}  {:.1}  (skipped {})\n",
            "corpus", kind, corpus.mean, corpus.n_undefined
        );
    }

    // Segment 2 shows the tail bias: LAAL charges the deferred tokens to the
    // latency estimate, YAAL scores only the simultaneously produced prefix.
    let seg = &parsed.segments[1];
    let ref_len = refs[1].tokens.len();
    println!(
        "tail contrast on segment 1: LAAL = {:.0} ms, YAAL = {:.0} ms",
        shortform::laal(seg, ref_len)?.value.unwrap(),
        shortform::yaal(seg, ref_len)?.value.unwrap(),
    );
    println!(
        "tail fraction of the corpus: {:.3}",
        shortform::tail_fraction(&parsed.segments)
    );
    Ok(())
}
