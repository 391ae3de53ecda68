//! Flag systems that look fast but defer most of the translation to the
//! end-of-segment signal, by comparing observed and metric-implied online
//! word fractions.
//!
//! ```bash
//! cargo run -p simulst-latency --example detect_anomalous
//! ```

use std::collections::BTreeMap;

use simulst_latency::metaeval::{self, SystemRun};

fn run(id: &str, n_tokens: u64, n_tail: u64, yaal_ms: f64) -> SystemRun {
    SystemRun {
        system_id: id.to_string(),
        testset_id: "demo".to_string(),
        language_pair: "en-de".to_string(),
        scores: BTreeMap::from([("YAAL".to_string(), yaal_ms)]),
        tl_corpus: 0.0,
        tl_per_segment: vec![0.0],
        delay_samples: Vec::new(),
        n_tokens,
        n_tail_tokens: n_tail,
        avg_source_duration_ms: 5000.0,
    }
}

fn main() -> simulst_latency::Result<()> {
    // A steady simultaneous system translates most words online and its
    // latency implies about as much. An anomalous one emits a short cheap
    // prefix (tiny YAAL on the online part) and dumps the rest at the
    // end-of-segment signal: impressive expected fraction, poor observed.
    let systems = [
        run("steady", 1000, 120, 900.0),
        run("cautious", 1000, 250, 1500.0),
        run("anomalous", 1000, 700, 450.0),
    ];

    let threshold = 0.15;
    println!("system     observed  expected  gap     flagged");
    for system in &systems {
        let check = metaeval::detect_anomalous(system, "YAAL", threshold)?;
        println!(
            "{:<9}  {:>8.3}  {:>8.3}  {:>6.3}  {}",
            system.system_id,
            check.observed,
            check.expected.clamped,
            check.expected.clamped - check.observed,
            check.flagged
        );
    }
    println!("\n(threshold on expected - observed: {threshold})");
    Ok(())
}
