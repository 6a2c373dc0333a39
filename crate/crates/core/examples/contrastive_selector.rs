//! Trains the hashed linear ranker with the margin objective on candidates
//! from the noisy synthetic backend, then compares how often the top-ranked
//! test candidate is correct under beam order and under the ranker.

use std::path::Path;

use evex::codec::{self, CodecConfig};
use evex::corpus::load_corpus;
use evex::generation::{generate_split, CandidateList, GenerationConfig, ToyBackend};
use evex::selector::{train_selector, SelectorSample};
use evex::{ContextInstance, HashedLinearScorer, RankScorer, SelectorTrainConfig};

fn top1_correct(
    instances: &[ContextInstance],
    lists: &[CandidateList],
    score: impl Fn(&CandidateList, usize) -> f64,
) -> usize {
    let cfg = CodecConfig::default();
    instances
        .iter()
        .zip(lists)
        .filter(|(inst, list)| {
            let best = (0..list.candidates.len())
                .max_by(|&a, &b| score(list, a).total_cmp(&score(list, b)));
            let gold: Vec<String> = if inst.gold_frames().is_empty() {
                vec![cfg.empty_token.clone()]
            } else {
                inst.gold_triggers()
                    .iter()
                    .map(codec::encode_trigger)
                    .collect()
            };
            best.is_some_and(|i| gold.contains(&list.candidates[i].raw_text))
        })
        .count()
}

fn main() -> evex::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/noisy");
    let backend = ToyBackend::from_file(&dir.join("script.json"))?;
    let (cfg, gen) = (CodecConfig::default(), GenerationConfig::default());
    let (train, _) = load_corpus(&dir.join("train.jsonl"))?;
    let (test, _) = load_corpus(&dir.join("test.jsonl"))?;
    let (train_lists, _) = generate_split(&backend, &train, &gen, &cfg, false)?;
    let (test_lists, _) = generate_split(&backend, &test, &gen, &cfg, false)?;

    let samples: Vec<SelectorSample> = train
        .iter()
        .zip(train_lists)
        .map(|(i, l)| SelectorSample::new(i, l))
        .collect();
    let mut scorer = HashedLinearScorer::default();
    let report = train_selector(&mut scorer, &samples, &SelectorTrainConfig::default(), &cfg)?;
    println!("hinge loss per epoch:");
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        println!("  {epoch:>2}: {loss:.2}");
    }

    let by_beam = top1_correct(&test, &test_lists, |l, i| l.candidates[i].beam_score);
    let by_rank = top1_correct(&test, &test_lists, |l, i| {
        scorer.score(&l.context, &l.candidates[i].raw_text)
    });
    println!(
        "top candidate correct on {} test contexts: beam {by_beam}, ranker {by_rank}",
        test.len()
    );

    let model = std::env::temp_dir().join("evex-selector.model");
    scorer.save(&model)?;
    let reloaded = HashedLinearScorer::load(&model)?;
    assert_eq!(reloaded, scorer);
    println!("model saved to {}", model.display());
    Ok(())
}
