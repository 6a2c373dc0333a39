use crate::error::{Error, Result};
use crate::event_model::Trigger;
use crate::generation::CandidateList;

use super::{RankScorer, SelectionConfig};

/// Numerically stable softmax (temperature 1). Empty in, empty out.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let Some(max) = xs.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `alpha * softmax(rank) + (1 - alpha) * softmax(beam)`, elementwise.
pub fn fuse(rank_scores: &[f64], beam_scores: &[f64], alpha: f64) -> Vec<f64> {
    assert_eq!(rank_scores.len(), beam_scores.len());
    let p = softmax(rank_scores);
    let q = softmax(beam_scores);
    p.iter()
        .zip(&q)
        .map(|(p, q)| alpha * p + (1.0 - alpha) * q)
        .collect()
}

/// Fills in `rank_score` for every candidate of `list`.
pub fn score_candidates(list: &mut CandidateList, scorer: &dyn RankScorer) {
    for c in &mut list.candidates {
        c.rank_score = Some(scorer.score(&list.context, &c.raw_text));
    }
}

/// Fused scores from cached rank and beam scores. Rank scores may be absent
/// only when `alpha == 0`.
pub fn fused_scores(list: &CandidateList, alpha: f64) -> Result<Vec<f64>> {
    let beam: Vec<f64> = list.candidates.iter().map(|c| c.beam_score).collect();
    let rank: Vec<f64> = if alpha == 0.0 {
        vec![0.0; beam.len()]
    } else {
        list.candidates
            .iter()
            .map(|c| c.rank_score)
            .collect::<Option<_>>()
            .ok_or_else(|| {
                Error::Config(format!("{}: candidates carry no rank scores", list.doc_id))
            })?
    };
    Ok(fuse(&rank, &beam, alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Union of the triggers of every selected candidate, in candidate order.
    pub triggers: Vec<Trigger>,
    pub fused: Vec<f64>,
    pub selected: Vec<bool>,
    /// Every candidate tied exactly at `theta`, so nothing was selected.
    pub tied_at_threshold: bool,
}

/// Keeps each candidate whose fused score is strictly above `theta`.
pub fn select_scored(list: &CandidateList, cfg: &SelectionConfig) -> Result<Selection> {
    let fused = fused_scores(list, cfg.alpha)?;
    let selected: Vec<bool> = fused.iter().map(|&f| f > cfg.theta).collect();
    let mut triggers: Vec<Trigger> = Vec::new();
    for (c, _) in list.candidates.iter().zip(&selected).filter(|(_, s)| **s) {
        for t in &c.triggers {
            if !triggers.contains(t) {
                triggers.push(t.clone());
            }
        }
    }
    let tied_at_threshold = !fused.is_empty() && fused.iter().all(|&f| f == cfg.theta);
    Ok(Selection {
        triggers,
        fused,
        selected,
        tied_at_threshold,
    })
}

/// Scores `candidates` with `scorer` and returns the final trigger set.
pub fn fuse_and_select(
    candidates: &CandidateList,
    scorer: &dyn RankScorer,
    cfg: &SelectionConfig,
) -> Vec<Trigger> {
    let mut scored = candidates.clone();
    score_candidates(&mut scored, scorer);
    select_scored(&scored, cfg)
        .expect("rank scores were just filled in")
        .triggers
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::generation::TriggerCandidate;
    use proptest::prelude::*;

    fn list(rank: &[f64], beam: &[f64]) -> CandidateList {
        let candidates = rank
            .iter()
            .zip(beam)
            .enumerate()
            .map(|(i, (r, b))| {
                let t = Trigger::new(&format!("w{i}"), "T").unwrap();
                TriggerCandidate {
                    raw_text: format!("w{i} [T]"),
                    triggers: vec![t],
                    beam_score: *b,
                    rank_score: Some(*r),
                    fused_score: None,
                }
            })
            .collect();
        CandidateList {
            doc_id: "d".into(),
            context: "ctx".into(),
            candidates,
            arguments: BTreeMap::new(),
        }
    }

    fn words(s: &Selection) -> Vec<&str> {
        s.triggers.iter().map(Trigger::word).collect()
    }

    #[test]
    fn worked_two_candidate_example() {
        let l = list(&[2.0, 0.0], &[0.0, 0.0]);
        let s = select_scored(&l, &SelectionConfig::new(0.4, 0.2).unwrap()).unwrap();
        // p = [0.8808, 0.1192], q = [0.5, 0.5]
        assert!((s.fused[0] - 0.6523).abs() < 5e-5, "{:?}", s.fused);
        assert!((s.fused[1] - 0.3477).abs() < 5e-5);
        assert_eq!(words(&s), ["w0", "w1"]);
        let s = select_scored(&l, &SelectionConfig::new(0.4, 0.35).unwrap()).unwrap();
        assert_eq!(words(&s), ["w0"]);
    }

    #[test]
    fn singleton_is_selected_below_one() {
        let l = list(&[-3.0], &[-7.5]);
        let s = select_scored(&l, &SelectionConfig::new(0.4, 0.99).unwrap()).unwrap();
        assert_eq!(s.fused, vec![1.0]);
        assert_eq!(s.triggers.len(), 1);
        let s = select_scored(&l, &SelectionConfig::new(0.4, 1.0).unwrap()).unwrap();
        assert!(s.triggers.is_empty());
    }

    #[test]
    fn alpha_zero_ignores_rank() {
        let a = list(&[5.0, -5.0, 0.0], &[-1.0, -0.5, -3.0]);
        let b = list(&[-5.0, 5.0, 9.0], &[-1.0, -0.5, -3.0]);
        let cfg = SelectionConfig::new(0.0, 0.3).unwrap();
        let sa = select_scored(&a, &cfg).unwrap();
        assert_eq!(sa.fused, select_scored(&b, &cfg).unwrap().fused);
        let mut unscored = a.clone();
        for c in &mut unscored.candidates {
            c.rank_score = None;
        }
        assert_eq!(select_scored(&unscored, &cfg).unwrap().fused, sa.fused);
        assert!(select_scored(&unscored, &SelectionConfig::default()).is_err());
    }

    #[test]
    fn empty_list_selects_nothing() {
        let l = list(&[], &[]);
        let s = select_scored(&l, &SelectionConfig::default()).unwrap();
        assert!(s.triggers.is_empty() && !s.tied_at_threshold);
    }

    #[test]
    fn ties_at_threshold_select_nothing() {
        let l = list(&[1.0, 1.0], &[0.0, 0.0]);
        let s = select_scored(&l, &SelectionConfig::new(0.3, 0.5).unwrap()).unwrap();
        assert!(s.triggers.is_empty());
        assert!(s.tied_at_threshold);
    }

    #[test]
    fn none_candidate_contributes_no_triggers() {
        let mut l = list(&[0.0, 0.0], &[0.0, -1.0]);
        l.candidates[0].triggers.clear();
        l.candidates[0].raw_text = "[none]".into();
        let s = select_scored(&l, &SelectionConfig::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(s.selected, [true, true]);
        assert_eq!(words(&s), ["w1"]);
    }

    #[test]
    fn softmax_is_stable() {
        let p = softmax(&[1000.0, 1000.0]);
        assert_eq!(p, vec![0.5, 0.5]);
        assert!(softmax(&[]).is_empty());
    }

    fn scores(n: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        n.prop_flat_map(|n| {
            (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-30.0f64..0.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn fused_is_a_distribution((rank, beam) in scores(1..12), alpha in 0.0f64..=1.0) {
            let f = fuse(&rank, &beam, alpha);
            prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(f.iter().all(|x| (0.0..=1.0).contains(x)));
        }

        #[test]
        fn raising_rank_is_monotone(
            (rank, beam) in scores(2..10),
            alpha in 0.0f64..=1.0,
            bump in 0.0f64..5.0,
            idx in 0usize..10,
        ) {
            let i = idx % rank.len();
            let before = fuse(&rank, &beam, alpha);
            let mut raised = rank.clone();
            raised[i] += bump;
            let after = fuse(&raised, &beam, alpha);
            prop_assert!(after[i] >= before[i] - 1e-12);
            for j in (0..rank.len()).filter(|&j| j != i) {
                prop_assert!(after[j] <= before[j] + 1e-12);
            }
        }

        #[test]
        fn permutation_equivariant(
            (rank, beam) in scores(1..10),
            alpha in 0.0f64..=1.0,
            theta in 0.0f64..=1.0,
            rot in 0usize..10,
        ) {
            let n = rank.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let l = list(&rank, &beam);
            let mut p = l.clone();
            p.candidates = perm.iter().map(|&i| l.candidates[i].clone()).collect();
            let cfg = SelectionConfig { alpha, theta };
            let a = select_scored(&l, &cfg).unwrap();
            let b = select_scored(&p, &cfg).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                prop_assert!((b.fused[k] - a.fused[i]).abs() < 1e-12);
            }
            let mut sa = a.triggers.clone();
            let mut sb = b.triggers.clone();
            sa.sort();
            sb.sort();
            prop_assert_eq!(sa, sb);
        }

        #[test]
        fn threshold_extremes((rank, beam) in scores(1..10), alpha in 0.0f64..=1.0) {
            let l = list(&rank, &beam);
            let all = select_scored(&l, &SelectionConfig { alpha, theta: 0.0 }).unwrap();
            prop_assert!(all.selected.iter().all(|s| *s) || all.fused.contains(&0.0));
            let none = select_scored(&l, &SelectionConfig { alpha, theta: 1.0 }).unwrap();
            prop_assert!(none.triggers.is_empty());
        }
    }
}
