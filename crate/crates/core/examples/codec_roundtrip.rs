//! Linearizes a two-event context into generator training pairs, then reads
//! generator-style output back into triggers and role-labeled arguments,
//! including a malformed output the decoder recovers from.

use evex::codec::{self, CodecConfig};
use evex::corpus::{make_training_pairs, PairOptions};
use evex::{ArgumentPair, ContextInstance, EventFrame, Ontology, Trigger};

fn main() -> evex::Result<()> {
    let cfg = CodecConfig::default();
    let ontology = Ontology::from_listing([
        ("Life_Die", vec!["Agent", "Victim", "Place"]),
        ("Movement_Transport", vec!["Artifact", "Destination"]),
    ])?;
    let instance = ContextInstance::new(
        "doc-1",
        "And gave ... then went home ... killed him .",
        vec![
            EventFrame::new(
                Trigger::new("killed", "Life_Die")?,
                [
                    ArgumentPair::new("Agent", "father - in - law")?,
                    ArgumentPair::new("Place", "home")?,
                ],
            ),
            EventFrame::new(
                Trigger::new("went", "Movement_Transport")?,
                [ArgumentPair::new("Destination", "home")?],
            ),
        ],
    )?;

    println!("training pairs:");
    let opts = PairOptions {
        multi_trigger_target: true,
        ..Default::default()
    };
    for pair in make_training_pairs(&instance, &ontology, &cfg, opts)? {
        println!("  {:?}\n    {} -> {}", pair.task, pair.input, pair.target);
    }

    let beam = "killed [Life_Die] [and] went [Movement_Transport]";
    let triggers = codec::decode_trigger_candidate(beam, &cfg);
    println!("\n{beam:?} decodes to:");
    for t in &triggers.items {
        println!("  word={:?} type={:?}", t.word(), t.event_type());
    }

    for output in [
        "<Agent> father - in - law </Agent> <Victim> [None] </Victim> <Place> home </Place>",
        "<Agent> father - in - law </Agent> <Place> home",
    ] {
        let args = codec::decode_argument_output(output, &cfg);
        println!("\n{output:?} decodes to:");
        for a in &args.items {
            println!("  {} = {:?}", a.role(), a.entity());
        }
        for w in &args.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
