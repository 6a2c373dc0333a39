//! Regenerates the bundled synthetic corpora.
//!
//! ```text
//! cargo run --example make_synthetic -- [OUT_DIR]
//! ```
//!
//! Writes `oracle/` and `noisy/` under `OUT_DIR` (default
//! `crates/core/data/synthetic`), each holding the three splits, the
//! backend script and a run config.

use std::path::PathBuf;

use evex::synthetic::{SyntheticConfig, SyntheticCorpus};

fn main() -> evex::Result<()> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic"));
    for (name, cfg) in [
        ("oracle", SyntheticConfig::oracle()),
        ("noisy", SyntheticConfig::noisy()),
    ] {
        let corpus = SyntheticCorpus::generate(&cfg);
        let dir = out.join(name);
        corpus.write(&dir)?;
        let n_events: usize = [&corpus.train, &corpus.dev, &corpus.test]
            .iter()
            .flat_map(|s| s.iter())
            .map(|i| i.gold_frames().len())
            .sum();
        println!(
            "{name}: {}/{}/{} contexts, {n_events} events, {} script entries -> {}",
            corpus.train.len(),
            corpus.dev.len(),
            corpus.test.len(),
            corpus.script.len(),
            dir.display()
        );
    }
    Ok(())
}
