use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evex::run::{exit_code, Overrides, Run, RunConfig, Split};

#[derive(Parser)]
#[command(
    name = "evex",
    version,
    about = "Generative event extraction with re-ranked trigger candidates"
)]
struct Cli {
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH", default_value = "run")]
    run_dir: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true, value_name = "ID")]
    backend: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build training pairs and the ontology from the train split
    Preprocess,
    /// Beam-search trigger candidates and cache argument outputs
    GenCandidates {
        /// Defaults to every split
        #[arg(long)]
        split: Option<Split>,
    },
    /// Train the candidate ranker on train-split candidates
    TrainSelector,
    /// Grid-search alpha and theta on dev
    Tune,
    Predict {
        #[arg(long, default_value = "test")]
        split: Split,
    },
    Evaluate {
        #[arg(long, default_value = "test")]
        split: Split,
    },
    /// Every stage, ending with the test report
    Pipeline,
    /// Theta and alpha sweeps plus the beam-only comparison
    Report {
        #[arg(long, default_value = "test")]
        split: Split,
    },
}

fn run(cli: Cli) -> evex::Result<()> {
    let path = cli
        .config
        .ok_or_else(|| evex::Error::Config("--config is required".into()))?;
    let mut config = RunConfig::load(&path)?;
    config.apply(&Overrides {
        seed: cli.seed,
        alpha: cli.alpha,
        theta: cli.theta,
        backend: cli.backend,
    })?;
    let run = Run::open(config, cli.run_dir)?;
    match cli.command {
        Command::Preprocess => {
            let s = run.preprocess()?;
            println!(
                "{} pairs, {} event types, {} lines skipped",
                s.pairs,
                s.event_types,
                s.load_report.skipped.len()
            );
        }
        Command::GenCandidates { split } => {
            let splits = split.map_or(Split::ALL.to_vec(), |s| vec![s]);
            run.gen_candidates(&splits)?;
        }
        Command::TrainSelector => {
            let r = run.train_selector()?;
            println!("epoch losses: {:?}", r.epoch_losses);
        }
        Command::Tune => {
            let r = run.tune()?;
            println!(
                "alpha={} theta={} dev {}={:.4}",
                r.alpha,
                r.theta,
                r.metric.label(),
                r.best
            );
        }
        Command::Predict { split } => {
            let p = run.predict(split)?;
            println!(
                "{} predictions written to {}",
                p.len(),
                run.predictions_path(split).display()
            );
        }
        Command::Evaluate { split } => print_report(&run.evaluate(split)?),
        Command::Pipeline => print_report(&run.pipeline()?),
        Command::Report { split } => {
            let a = run.report(split)?;
            println!(
                "{split}: Trig-C {:.4} at alpha={} theta={}; beam only {:.4} at theta={}",
                a.selected.report.trig_c.f1,
                a.selected.alpha,
                a.selected.theta,
                a.beam_only.report.trig_c.f1,
                a.beam_only.theta
            );
        }
    }
    Ok(())
}

fn print_report(r: &evex::run::SplitReport) {
    println!("{} (alpha={}, theta={})", r.split, r.alpha, r.theta);
    for subtask in evex::Subtask::ALL {
        let s = r.report.get(subtask);
        println!(
            "  {:<6} P={:.4} R={:.4} F1={:.4} ({}/{} pred, {} gold)",
            subtask.label(),
            s.precision,
            s.recall,
            s.f1,
            s.n_correct,
            s.n_pred,
            s.n_gold
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
