//! Reference latency from word alignments: how long the user actually
//! waited for each aligned target word.
//!
//! ```bash
//! cargo run -p simulst-latency --example true_latency
//! ```

use simulst_latency::logio::{self, ParseOptions};
use simulst_latency::truelat;

fn main() -> simulst_latency::Result<()> {
    let log = concat!(
        r#"{"prediction":"guten Morgen zusammen","delays":[900.0,1400.0,2600.0],"source_length":3000.0}"#,
        "\n",
    );
    // Upstream tooling supplies the table: a forced aligner timestamps the
    // source words, a word aligner links target tokens to source words.
    let table_json = r#"{
        "source_words": [
            {"word": "good",     "start_ms": 100,  "end_ms": 500},
            {"word": "morning",  "start_ms": 500,  "end_ms": 1100},
            {"word": "everyone", "start_ms": 1100, "end_ms": 1900}
        ],
        "links": [[0, 0], [1, 1], [2, 2]]
    }"#;

    let parsed = logio::parse_instance_log(log.as_bytes(), &ParseOptions::default())?;
    let table = logio::load_alignment_table(table_json.as_bytes())?;
    let segment = &parsed.segments[0];

    for (i, token) in segment.tokens.iter().enumerate() {
        let ends: Vec<f64> = table
            .links
            .iter()
            .filter(|(tgt, _)| *tgt == i)
            .map(|&(_, src)| table.source_words[src].end_ms)
            .collect();
        println!(
            "token {:<10} emitted at {:>6.0} ms, aligned source ends {:?}",
            token.token, token.delay_ms, ends
        );
    }

    let value = truelat::true_latency(segment, &table)?;
    println!("\ntrue latency: {:.1} ms", value.expect("aligned tokens exist"));

    let corpus = truelat::true_latency_corpus(&[(segment, &table)])?;
    println!(
        "corpus mean: {:.1} ms over {} defined segment(s)",
        corpus.mean, corpus.n_defined
    );
    Ok(())
}
