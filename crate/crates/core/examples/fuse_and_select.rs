//! Fuses ranker and beam scores for one context and shows which candidates
//! survive as the weight and threshold move.

use std::collections::BTreeMap;

use evex::generation::{CandidateList, TriggerCandidate};
use evex::selector::select_scored;
use evex::{SelectionConfig, Trigger};

fn candidate(word: &str, ty: &str, beam: f64, rank: f64) -> TriggerCandidate {
    TriggerCandidate {
        raw_text: format!("{word} [{ty}]"),
        triggers: vec![Trigger::new(word, ty).unwrap()],
        beam_score: beam,
        rank_score: Some(rank),
        fused_score: None,
    }
}

fn main() -> evex::Result<()> {
    let list = CandidateList {
        doc_id: "doc-1".into(),
        context: "The rebels attacked the convoy and killed the driver .".into(),
        candidates: vec![
            candidate("convoy", "Conflict_Attack", -0.4, -1.5),
            candidate("attacked", "Conflict_Attack", -0.9, 2.1),
            candidate("killed", "Life_Die", -1.3, 1.8),
            candidate("killed", "Conflict_Attack", -1.6, -0.7),
        ],
        arguments: BTreeMap::new(),
    };

    for (alpha, theta) in [(0.0, 0.2), (0.4, 0.2), (0.4, 0.35), (1.0, 0.2)] {
        let cfg = SelectionConfig::new(alpha, theta)?;
        let s = select_scored(&list, &cfg)?;
        println!("alpha={alpha} theta={theta}");
        for ((c, f), keep) in list.candidates.iter().zip(&s.fused).zip(&s.selected) {
            println!(
                "  {:<28} fused={f:.4} {}",
                c.raw_text,
                if *keep { "kept" } else { "" }
            );
        }
    }
    Ok(())
}
