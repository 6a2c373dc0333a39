//! Runs every stage on a bundled synthetic corpus and prints the test
//! report and the beam-only comparison.
//!
//! ```text
//! cargo run --example synthetic_pipeline -- [oracle|noisy] [RUN_DIR]
//! ```

use std::path::PathBuf;

use evex::run::{Run, RunConfig, Split};
use evex::Subtask;

fn main() -> evex::Result<()> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "oracle".into());
    let run_dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("evex-{which}")));
    let config_path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/synthetic")
        .join(&which)
        .join("config.json");

    let run = Run::open(RunConfig::load(&config_path)?, &run_dir)?;
    let report = run.pipeline()?;
    println!("{which} corpus, run dir {}", run_dir.display());
    println!("selection: alpha={} theta={}", report.alpha, report.theta);
    for subtask in Subtask::ALL {
        println!(
            "  {:<6} F1={:.4}",
            subtask.label(),
            report.report.get(subtask).f1
        );
    }
    let ablation = run.report(Split::Test)?;
    println!(
        "beam only (theta={}): Trig-C F1={:.4}, gain {:+.2} points",
        ablation.beam_only.theta,
        ablation.beam_only.report.trig_c.f1,
        100.0 * ablation.trig_c_gain
    );
    Ok(())
}
