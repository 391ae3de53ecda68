//! Pairwise metric meta-evaluation against true latency.
//!
//! Systems are compared in pairs on the same test set and language pair. A
//! metric is judged by sign accuracy: how often the sign of its score
//! difference matches the sign of the true-latency difference. Pairs are
//! bucketed by the significance of their true-latency separation
//! (Mann-Whitney U), and accuracies carry bootstrap confidence intervals.
//! Unpaired tests only: the two systems hypothesize different token
//! sequences, so per-segment values cannot be paired.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One system's evaluation on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRun {
    pub system_id: String,
    pub testset_id: String,
    pub language_pair: String,
    /// Corpus scores by metric label.
    pub scores: BTreeMap<String, f64>,
    /// Corpus true latency.
    pub tl_corpus: f64,
    /// Per-segment true latencies (the defined ones), the default
    /// significance-test samples.
    pub tl_per_segment: Vec<f64>,
    /// Pooled per-token delays, the alternative significance-test samples.
    pub delay_samples: Vec<f64>,
    pub n_tokens: u64,
    pub n_tail_tokens: u64,
    /// Mean source segment duration, in ms.
    pub avg_source_duration_ms: f64,
}

/// Which samples feed the Mann-Whitney test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MwuSamples {
    #[default]
    SegmentTrueLatency,
    TokenDelays,
}

impl std::str::FromStr for MwuSamples {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tl" => Ok(MwuSamples::SegmentTrueLatency),
            "delays" => Ok(MwuSamples::TokenDelays),
            other => Err(format!("unknown sample kind `{other}` (expected tl|delays)")),
        }
    }
}

/// One compared system pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome {
    pub system_a: String,
    pub system_b: String,
    pub testset_id: String,
    pub language_pair: String,
    /// True-latency difference, A minus B.
    pub delta_tl: f64,
    /// Score difference per metric label, A minus B.
    pub delta_metric: BTreeMap<String, f64>,
    /// Two-sided Mann-Whitney p-value on the true-latency samples.
    pub p_value: f64,
}

/// Build all same-testset, same-language-pair outcomes. Runs are paired in
/// input order; cross-group pairs do not exist by construction.
pub fn build_outcomes(runs: &[SystemRun], samples: MwuSamples) -> Result<Vec<ComparisonOutcome>> {
    let mut outcomes = Vec::new();
    for (i, a) in runs.iter().enumerate() {
        for b in runs.iter().skip(i + 1) {
            if a.testset_id != b.testset_id || a.language_pair != b.language_pair {
                continue;
            }
            let (samples_a, samples_b) = match samples {
                MwuSamples::SegmentTrueLatency => (&a.tl_per_segment, &b.tl_per_segment),
                MwuSamples::TokenDelays => (&a.delay_samples, &b.delay_samples),
            };
            let p_value = mann_whitney_u(samples_a, samples_b)?.p_value;
            let mut delta_metric = BTreeMap::new();
            for (label, &score_a) in &a.scores {
                if let Some(&score_b) = b.scores.get(label) {
                    delta_metric.insert(label.clone(), score_a - score_b);
                }
            }
            outcomes.push(ComparisonOutcome {
                system_a: a.system_id.clone(),
                system_b: b.system_id.clone(),
                testset_id: a.testset_id.clone(),
                language_pair: a.language_pair.clone(),
                delta_tl: a.tl_corpus - b.tl_corpus,
                delta_metric,
                p_value,
            });
        }
    }
    Ok(outcomes)
}

/// Significance buckets used for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueBucket {
    All,
    Below005,
    Below0001,
    Between0001And005,
}

impl PValueBucket {
    pub const ALL: [PValueBucket; 4] = [
        PValueBucket::All,
        PValueBucket::Below005,
        PValueBucket::Below0001,
        PValueBucket::Between0001And005,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            PValueBucket::All => "all",
            PValueBucket::Below005 => "p<0.05",
            PValueBucket::Below0001 => "p<0.001",
            PValueBucket::Between0001And005 => "0.001<=p<0.05",
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        match self {
            PValueBucket::All => true,
            PValueBucket::Below005 => p < 0.05,
            PValueBucket::Below0001 => p < 0.001,
            PValueBucket::Between0001And005 => (0.001..0.05).contains(&p),
        }
    }
}

/// Fraction of pairs where the metric's score difference has the same sign
/// as the true-latency difference.
///
/// Pairs with a zero true-latency difference carry no ranking information
/// and are excluded; a zero metric difference against a nonzero true-latency
/// difference counts as a disagreement.
pub fn sign_accuracy(outcomes: &[ComparisonOutcome], metric: &str) -> Result<f64> {
    let mut agree = 0usize;
    let mut total = 0usize;
    for outcome in outcomes {
        if outcome.delta_tl == 0.0 {
            continue;
        }
        let Some(&dm) = outcome.delta_metric.get(metric) else {
            continue;
        };
        total += 1;
        let same_sign = (outcome.delta_tl > 0.0 && dm > 0.0)
            || (outcome.delta_tl < 0.0 && dm < 0.0);
        if same_sign {
            agree += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyInput(format!(
            "no comparable pairs for metric {metric}"
        )));
    }
    Ok(agree as f64 / total as f64)
}

/// Result of a two-sided Mann-Whitney U test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuResult {
    pub u_a: f64,
    pub u_b: f64,
    pub p_value: f64,
    /// Whether the p-value came from exact enumeration.
    pub exact: bool,
}

/// Largest number of assignments the exact test will enumerate before
/// falling back to the normal approximation.
const EXACT_ENUMERATION_CAP: f64 = 2e6;

/// Two-sided Mann-Whitney U test. No distributional assumption on the
/// samples.
///
/// When either sample has fewer than 8 values (and the assignment count is
/// tractable) the p-value is exact: the fraction of all
/// `C(n_a + n_b, n_a)` group assignments whose U statistic deviates from
/// `n_a·n_b/2` at least as much as the observed one. Otherwise the normal
/// approximation with tie and continuity corrections is used.
pub fn mann_whitney_u(samples_a: &[f64], samples_b: &[f64]) -> Result<MwuResult> {
    if samples_a.is_empty() || samples_b.is_empty() {
        return Err(Error::EmptyInput("Mann-Whitney requires non-empty samples".into()));
    }
    if samples_a.iter().chain(samples_b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("Mann-Whitney samples must be finite"));
    }
    let n_a = samples_a.len();
    let n_b = samples_b.len();
    let n = n_a + n_b;

    // Pool, sort, and assign midranks.
    let mut pooled: Vec<(f64, bool)> = samples_a
        .iter()
        .map(|&v| (v, true))
        .chain(samples_b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite values"));
    let mut ranks = vec![0.0f64; n];
    let mut tie_correction = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0;
        for rank in ranks.iter_mut().take(j).skip(i) {
            *rank = midrank;
        }
        let t = (j - i) as f64;
        tie_correction += t * t * t - t;
        i = j;
    }

    let rank_sum_a: f64 = ranks
        .iter()
        .zip(&pooled)
        .filter(|(_, (_, in_a))| *in_a)
        .map(|(r, _)| *r)
        .sum();
    let u_a = rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0;
    let u_b = (n_a * n_b) as f64 - u_a;

    let use_exact = (n_a < 8 || n_b < 8) && binomial(n, n_a.min(n_b)) <= EXACT_ENUMERATION_CAP;
    let p_value = if use_exact {
        exact_two_sided_p(&ranks, n_a, u_a)
    } else {
        normal_two_sided_p(u_a, n_a, n_b, tie_correction)
    };

    Ok(MwuResult {
        u_a,
        u_b,
        p_value,
        exact: use_exact,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut result = 1.0f64;
    for i in 0..k {
        result *= (n - i) as f64 / (i + 1) as f64;
        if result > 1e18 {
            return f64::INFINITY;
        }
    }
    result
}

// Exact permutation distribution of U over all assignments of the pooled
// midranks to group A, conditioning on observed ties. Midranks are halves,
// so U values and deviations are exact in f64.
fn exact_two_sided_p(ranks: &[f64], n_a: usize, u_a_observed: f64) -> f64 {
    let n = ranks.len();
    let center = (n_a * (n - n_a)) as f64 / 2.0;
    let observed_dev = (u_a_observed - center).abs();
    let base = (n_a * (n_a + 1)) as f64 / 2.0;

    let mut matched = 0u64;
    let mut total = 0u64;
    // Depth-first over all n-choose-n_a rank subsets, carrying the rank sum.
    let mut stack: Vec<(usize, usize, f64)> = vec![(0, 0, 0.0)];
    while let Some((next, chosen, rank_sum)) = stack.pop() {
        if chosen == n_a {
            total += 1;
            if ((rank_sum - base) - center).abs() >= observed_dev {
                matched += 1;
            }
            continue;
        }
        let remaining = n - next;
        if remaining < n_a - chosen {
            continue;
        }
        stack.push((next + 1, chosen, rank_sum));
        stack.push((next + 1, chosen + 1, rank_sum + ranks[next]));
    }
    matched as f64 / total as f64
}

fn normal_two_sided_p(u_a: f64, n_a: usize, n_b: usize, tie_correction: f64) -> f64 {
    let n = (n_a + n_b) as f64;
    let mean = (n_a * n_b) as f64 / 2.0;
    let variance =
        (n_a * n_b) as f64 / 12.0 * ((n + 1.0) - tie_correction / (n * (n - 1.0)));
    if variance <= 0.0 {
        // Every pooled value is tied; no separation is detectable.
        return 1.0;
    }
    let z = ((u_a - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    (erfc(z / std::f64::consts::SQRT_2)).min(1.0)
}

// Complementary error function, Chebyshev fit with relative error <= 1.2e-7
// everywhere (Numerical Recipes erfcc).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Percentile bootstrap confidence interval (2.5% / 97.5%) for the sign
/// accuracy of a metric, resampling outcome pairs with replacement.
///
/// Deterministic: resample `r` draws its indices from a ChaCha8 stream
/// derived from `(seed, r)`, so the result does not depend on evaluation
/// order. Resamples that contain no comparable pair are skipped.
pub fn bootstrap_accuracy_ci(
    outcomes: &[ComparisonOutcome],
    metric: &str,
    n_resamples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput("no outcomes to resample".into()));
    }
    if n_resamples == 0 {
        return Err(Error::invalid("bootstrap needs at least one resample"));
    }
    // Fail fast if the point accuracy itself is undefined.
    sign_accuracy(outcomes, metric)?;

    let mut accuracies = Vec::with_capacity(n_resamples);
    let mut resample = Vec::with_capacity(outcomes.len());
    for r in 0..n_resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        resample.clear();
        for _ in 0..outcomes.len() {
            let idx = rng.gen_range(0..outcomes.len());
            resample.push(outcomes[idx].clone());
        }
        if let Ok(acc) = sign_accuracy(&resample, metric) {
            accuracies.push(acc);
        }
    }
    if accuracies.is_empty() {
        return Err(Error::AllUndefined("bootstrap accuracy"));
    }
    accuracies.sort_by(|a, b| a.partial_cmp(b).expect("accuracies are finite"));
    Ok((
        percentile(&accuracies, 0.025),
        percentile(&accuracies, 0.975),
    ))
}

// Linear interpolation between order statistics; `sorted` must be ascending.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let position = q * (sorted.len() - 1) as f64;
    let lower = position.floor() as usize;
    let upper = position.ceil() as usize;
    if lower == upper {
        return sorted[lower];
    }
    let fraction = position - lower as f64;
    sorted[lower] + (sorted[upper] - sorted[lower]) * fraction
}

/// Fraction of corpus tokens emitted strictly before their segment's end.
/// Complements the tail fraction exactly.
pub fn observed_online_fraction(run: &SystemRun) -> Result<f64> {
    if run.n_tokens == 0 {
        return Err(Error::EmptyInput(format!(
            "run {} has no tokens",
            run.system_id
        )));
    }
    Ok(1.0 - run.n_tail_tokens as f64 / run.n_tokens as f64)
}

/// Expected online fraction implied by a latency value: `(X_avg - L) / X_avg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedOnlineFraction {
    pub raw: f64,
    /// `raw` clamped to `[0, 1]` for reporting.
    pub clamped: f64,
}

/// Expected fraction of online-translated words for a latency of
/// `latency_ms` on segments averaging `avg_segment_len_ms` (must be
/// positive).
pub fn expected_online_fraction(latency_ms: f64, avg_segment_len_ms: f64) -> ExpectedOnlineFraction {
    debug_assert!(avg_segment_len_ms > 0.0);
    let raw = (avg_segment_len_ms - latency_ms) / avg_segment_len_ms;
    ExpectedOnlineFraction {
        raw,
        clamped: raw.clamp(0.0, 1.0),
    }
}

/// Outcome of the anomalous-policy check for one system and metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyCheck {
    pub flagged: bool,
    pub observed: f64,
    pub expected: ExpectedOnlineFraction,
}

/// Flag a system whose metric-implied online fraction exceeds the observed
/// one by more than `threshold`: the signature of a policy that emits a
/// low-latency prefix and defers the rest to the end-of-segment signal.
pub fn detect_anomalous(run: &SystemRun, metric: &str, threshold: f64) -> Result<AnomalyCheck> {
    let score = *run.scores.get(metric).ok_or_else(|| {
        Error::invalid(format!(
            "run {} has no score for metric {metric}",
            run.system_id
        ))
    })?;
    let observed = observed_online_fraction(run)?;
    let expected = expected_online_fraction(score, run.avg_source_duration_ms);
    Ok(AnomalyCheck {
        flagged: expected.clamped - observed > threshold,
        observed,
        expected,
    })
}
