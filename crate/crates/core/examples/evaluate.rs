//! Scores predicted frames against gold with the four F1 metrics.

use evex::metrics::evaluate_corpus;
use evex::{ArgumentPair, ContextInstance, EventFrame, Subtask, Trigger};

fn frame(word: &str, ty: &str, args: &[(&str, &str)]) -> EventFrame {
    EventFrame::new(
        Trigger::new(word, ty).unwrap(),
        args.iter().map(|(r, e)| ArgumentPair::new(r, e).unwrap()),
    )
}

fn main() -> evex::Result<()> {
    let gold = vec![
        ContextInstance::new(
            "d1",
            "And gave ... then went home ... killed him .",
            vec![
                frame(
                    "killed",
                    "Life_Die",
                    &[("Agent", "father - in - law"), ("Place", "home")],
                ),
                frame("went", "Movement_Transport", &[("Destination", "home")]),
            ],
        )?,
        ContextInstance::new("d2", "Nothing happened today .", vec![])?,
    ];
    let predictions = vec![
        (
            "d1".to_string(),
            vec![
                // right word and type, one argument with the wrong role
                frame(
                    "killed",
                    "Life_Die",
                    &[("Agent", "father - in - law"), ("Victim", "home")],
                ),
                // right word, wrong type
                frame("went", "Conflict_Attack", &[("Destination", "home")]),
            ],
        ),
        ("d2".to_string(), vec![frame("happened", "Life_Die", &[])]),
    ];

    let report = evaluate_corpus(&predictions, &gold)?;
    for subtask in Subtask::ALL {
        let s = report.get(subtask);
        println!(
            "{:<6} correct={} pred={} gold={}  P={:.3} R={:.3} F1={:.3}",
            subtask.label(),
            s.n_correct,
            s.n_pred,
            s.n_gold,
            s.precision,
            s.recall,
            s.f1
        );
    }
    println!("\n{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
