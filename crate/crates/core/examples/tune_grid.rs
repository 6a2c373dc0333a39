//! Grid search of the fusion weight and threshold on dev, using a run
//! directory prepared by the pipeline stages up to selector training.

use evex::run::{Run, RunConfig, Split};
use evex::tuning::grid_search;
use evex::Subtask;

fn main() -> evex::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/noisy");
    let run_dir = std::env::temp_dir().join("evex-tune-grid");
    let run = Run::open(RunConfig::load(&dir.join("config.json"))?, &run_dir)?;
    run.preprocess()?;
    run.gen_candidates(&[Split::Train, Split::Dev])?;
    run.train_selector()?;

    let dev = run.scored_split(Split::Dev, true)?;
    let t = &run.config().tuning;
    let result = grid_search(
        &dev,
        &t.alpha_grid,
        &t.theta_grid,
        Subtask::TriggerClassification,
    )?;

    print!("{:>6}", "a\\t");
    for theta in t.theta_grid.iter().step_by(2) {
        print!("{theta:>6.2}");
    }
    println!();
    for alpha in &t.alpha_grid {
        print!("{alpha:>6.1}");
        for row in result
            .table
            .rows
            .iter()
            .filter(|r| r.alpha == *alpha)
            .step_by(2)
        {
            print!("{:>6.1}", 100.0 * row.report.trig_c.f1);
        }
        println!();
    }
    println!(
        "best dev Trig-C F1 {:.2} at alpha={} theta={}",
        100.0 * result.best,
        result.alpha,
        result.theta
    );
    result.table.write_csv(&run_dir.join("grid.csv"))?;
    println!("full table in {}", run_dir.join("grid.csv").display());
    Ok(())
}
