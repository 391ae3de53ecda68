//! Pairwise meta-evaluation: score metric sign accuracy against true
//! latency, bucketed by Mann-Whitney significance, with bootstrap
//! confidence intervals.
//!
//! ```bash
//! cargo run -p simulst-latency --example compare_systems
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simulst_latency::metaeval::{self, MwuSamples, PValueBucket, SystemRun};

/// A synthetic system: per-segment true latencies around `tl_center`, one
/// well-behaved metric that tracks true latency, and one noisy metric.
fn system(rng: &mut ChaCha8Rng, id: &str, tl_center: f64) -> SystemRun {
    let tl_per_segment: Vec<f64> = (0..60)
        .map(|_| tl_center + rng.gen_range(-250.0..250.0))
        .collect();
    let tl_corpus = tl_per_segment.iter().sum::<f64>() / tl_per_segment.len() as f64;
    let mut scores = BTreeMap::new();
    scores.insert("tracking".to_string(), tl_corpus * 1.1 + 30.0);
    scores.insert("noisy".to_string(), tl_corpus + rng.gen_range(-600.0..600.0));
    SystemRun {
        system_id: id.to_string(),
        testset_id: "demo".to_string(),
        language_pair: "en-de".to_string(),
        scores,
        tl_corpus,
        tl_per_segment,
        delay_samples: Vec::new(),
        n_tokens: 600,
        n_tail_tokens: 60,
        avg_source_duration_ms: 5000.0,
    }
}

fn main() -> simulst_latency::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let runs: Vec<SystemRun> = (0..8)
        .map(|i| system(&mut rng, &format!("sys{i}"), 400.0 + 300.0 * i as f64))
        .collect();

    let outcomes = metaeval::build_outcomes(&runs, MwuSamples::SegmentTrueLatency)?;
    println!("{} system pairs on the same test set\n", outcomes.len());

    println!("metric    bucket          accuracy  95% CI            pairs");
    for metric in ["tracking", "noisy"] {
        for bucket in PValueBucket::ALL {
            let subset: Vec<_> = outcomes
                .iter()
                .filter(|o| bucket.contains(o.p_value))
                .cloned()
                .collect();
            if subset.is_empty() {
                continue;
            }
            let Ok(accuracy) = metaeval::sign_accuracy(&subset, metric) else {
                continue;
            };
            let (low, high) = metaeval::bootstrap_accuracy_ci(&subset, metric, 10_000, 42)?;
            println!(
                "{:<8}  {:<14}  {:>8.3}  [{:.3}, {:.3}]    {}",
                metric,
                bucket.label(),
                accuracy,
                low,
                high,
                subset.len()
            );
        }
    }
    Ok(())
}
