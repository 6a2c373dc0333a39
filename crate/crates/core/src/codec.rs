//! Linearization of event frames to and from generator text.
//!
//! Trigger inputs look like `TriggerEvent: <context>` and their targets like
//! `went [Movement_Transport] [and] killed [Life_Die]`. Argument inputs append
//! `<Trigger> <word>` to the context and their targets are role-tagged slots:
//! `<Agent> father - in - law </Agent> <Place> [None] </Place>`.
//!
//! Decoders never fail. Anything they cannot read is skipped and reported in
//! [`Decoded::warnings`].

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{
    is_none_marker, normalize_ws, ArgumentPair, EventFrame, Ontology, Trigger,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodecConfig {
    pub trigger_prefix: String,
    pub argument_prefix: String,
    pub trigger_marker: String,
    pub and_token: String,
    /// Unfilled argument slot.
    pub none_token: String,
    /// Trigger target of a context with no events.
    pub empty_token: String,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            trigger_prefix: "TriggerEvent: ".into(),
            argument_prefix: "Arguments: ".into(),
            trigger_marker: "<Trigger>".into(),
            and_token: "[and]".into(),
            none_token: "[None]".into(),
            empty_token: "[none]".into(),
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("trigger_prefix", &self.trigger_prefix),
            ("argument_prefix", &self.argument_prefix),
            ("trigger_marker", &self.trigger_marker),
            ("and_token", &self.and_token),
            ("none_token", &self.none_token),
            ("empty_token", &self.empty_token),
        ];
        for (i, (name, value)) in fields.iter().enumerate() {
            if value.trim().is_empty() {
                return Err(Error::Config(format!("codec.{name} must be nonempty")));
            }
            for (other, other_value) in &fields[i + 1..] {
                if value == other_value {
                    return Err(Error::Config(format!(
                        "codec.{name} and codec.{other} must differ"
                    )));
                }
            }
        }
        Ok(())
    }

    /// True if `s` contains any token with special meaning to the decoders.
    pub fn is_reserved_free(&self, s: &str) -> bool {
        let tokens = [
            &self.trigger_marker,
            &self.and_token,
            &self.none_token,
            &self.empty_token,
        ];
        !tokens.iter().any(|t| s.contains(t.as_str())) && !is_none_marker(s)
    }
}

/// Decoder output plus whatever could not be parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded<T> {
    pub items: Vec<T>,
    pub warnings: Vec<String>,
}

impl<T> Default for Decoded<T> {
    fn default() -> Self {
        Decoded {
            items: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

pub fn build_trigger_prompt(context: &str, cfg: &CodecConfig) -> Result<String> {
    let context = normalize_ws(context);
    if context.is_empty() {
        return Err(Error::EmptyContext);
    }
    Ok(format!("{}{}", cfg.trigger_prefix, context))
}

pub fn build_argument_prompt(
    context: &str,
    trigger_word: &str,
    cfg: &CodecConfig,
) -> Result<String> {
    let word = normalize_ws(trigger_word);
    if word.is_empty() {
        return Err(Error::EmptyTriggerWord);
    }
    let context = normalize_ws(context);
    if context.is_empty() {
        return Err(Error::EmptyContext);
    }
    Ok(format!(
        "{}{} {} {}",
        cfg.argument_prefix, context, cfg.trigger_marker, word
    ))
}

/// `word [Type]`, the candidate-text form of a single trigger.
pub fn encode_trigger(trigger: &Trigger) -> String {
    format!("{} [{}]", trigger.word(), trigger.event_type())
}

pub fn encode_triggers(triggers: &[Trigger], cfg: &CodecConfig) -> String {
    if triggers.is_empty() {
        return cfg.empty_token.clone();
    }
    let joiner = format!(" {} ", cfg.and_token);
    triggers
        .iter()
        .map(encode_trigger)
        .collect::<Vec<_>>()
        .join(&joiner)
}

pub fn encode_trigger_target(frames: &[EventFrame], cfg: &CodecConfig) -> String {
    let triggers: Vec<Trigger> = frames.iter().map(|f| f.trigger().clone()).collect();
    encode_triggers(&triggers, cfg)
}

fn trigger_segment_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // The final bracketed token is the type; everything before it is the word.
    RE.get_or_init(|| Regex::new(r"(?s)^(.*?)\s*\[\s*([^\[\]\s]+)\s*\]$").unwrap())
}

pub fn decode_trigger_candidate(text: &str, cfg: &CodecConfig) -> Decoded<Trigger> {
    let mut out = Decoded::default();
    let text = text.trim();
    if text.is_empty() {
        out.warnings.push("empty trigger output".into());
        return out;
    }
    if is_none_marker(text) {
        return out;
    }
    for segment in text.split(cfg.and_token.as_str()) {
        let segment = segment.trim();
        if segment.is_empty() {
            out.warnings.push(format!("empty segment in {text:?}"));
            continue;
        }
        if is_none_marker(segment) {
            continue;
        }
        let Some(caps) = trigger_segment_re().captures(segment) else {
            out.warnings
                .push(format!("unparseable trigger segment {segment:?}"));
            continue;
        };
        match Trigger::new(&caps[1], &caps[2]) {
            Ok(t) => out.items.push(t),
            Err(e) => out.warnings.push(format!("segment {segment:?}: {e}")),
        }
    }
    out
}

pub fn encode_argument_target(
    frame: &EventFrame,
    ontology: &Ontology,
    cfg: &CodecConfig,
) -> Result<String> {
    let event_type = frame.trigger().event_type();
    let roles = ontology
        .roles(event_type)
        .ok_or_else(|| Error::TypeNotInOntology(event_type.to_string()))?;
    let joiner = format!(" {} ", cfg.and_token);
    let slots: Vec<String> = roles
        .iter()
        .map(|role| {
            let fillers: Vec<&str> = frame
                .arguments()
                .iter()
                .filter(|a| a.role() == role)
                .map(ArgumentPair::entity)
                .collect();
            let fill = if fillers.is_empty() {
                cfg.none_token.clone()
            } else {
                fillers.join(&joiner)
            };
            format!("<{role}> {fill} </{role}>")
        })
        .collect();
    Ok(slots.join(" "))
}

fn role_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<\s*(/)?\s*([^<>\s/][^<>\s]*)\s*>").unwrap())
}

struct Tag<'a> {
    start: usize,
    end: usize,
    closing: bool,
    name: &'a str,
}

pub fn decode_argument_output(text: &str, cfg: &CodecConfig) -> Decoded<ArgumentPair> {
    let mut out = Decoded::default();
    if text.trim().is_empty() {
        out.warnings.push("empty argument output".into());
        return out;
    }
    let tags: Vec<Tag> = role_tag_re()
        .captures_iter(text)
        .map(|c| {
            let whole = c.get(0).unwrap();
            Tag {
                start: whole.start(),
                end: whole.end(),
                closing: c.get(1).is_some(),
                name: c.get(2).unwrap().as_str(),
            }
        })
        .collect();
    if tags.is_empty() {
        out.warnings.push(format!("no role tags in {text:?}"));
        return out;
    }

    let mut i = 0;
    while i < tags.len() {
        let open = &tags[i];
        if open.closing {
            out.warnings
                .push(format!("stray closing tag </{}>", open.name));
            i += 1;
            continue;
        }
        match tags.get(i + 1) {
            Some(close) if close.closing && close.name == open.name => {
                push_fill(&mut out, open.name, &text[open.end..close.start], cfg);
                i += 2;
            }
            _ => {
                out.warnings.push(format!("unclosed tag <{}>", open.name));
                i += 1;
            }
        }
    }
    out
}

fn push_fill(out: &mut Decoded<ArgumentPair>, role: &str, fill: &str, cfg: &CodecConfig) {
    for piece in fill.split(cfg.and_token.as_str()) {
        let piece = piece.trim();
        if piece.is_empty() || is_none_marker(piece) {
            continue;
        }
        match ArgumentPair::new(role, piece) {
            Ok(arg) => out.items.push(arg),
            Err(e) => out.warnings.push(format!("<{role}>: {e}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> CodecConfig {
        CodecConfig::default()
    }

    fn trig(w: &str, t: &str) -> Trigger {
        Trigger::new(w, t).unwrap()
    }

    fn arg(r: &str, e: &str) -> ArgumentPair {
        ArgumentPair::new(r, e).unwrap()
    }

    fn figure_ontology() -> Ontology {
        Ontology::from_listing([
            ("Life_Die", vec!["Agent", "Place"]),
            ("Movement_Transport", vec!["Artifact", "Place"]),
        ])
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let mut dup = cfg();
        dup.none_token = dup.and_token.clone();
        assert!(dup.validate().is_err());
        let mut blank = cfg();
        blank.trigger_marker = " ".into();
        assert!(blank.validate().is_err());
    }

    #[test]
    fn trigger_prompt() {
        assert_eq!(
            build_trigger_prompt("He went home .", &cfg()).unwrap(),
            "TriggerEvent: He went home ."
        );
        assert_eq!(
            build_trigger_prompt("   He went home .  ", &cfg()).unwrap(),
            "TriggerEvent: He went home ."
        );
        assert!(matches!(
            build_trigger_prompt("", &cfg()),
            Err(Error::EmptyContext)
        ));
    }

    #[test]
    fn argument_prompt() {
        assert_eq!(
            build_argument_prompt(
                "And gave ... then went home ... killed him .",
                "killed",
                &cfg()
            )
            .unwrap(),
            "Arguments: And gave ... then went home ... killed him . <Trigger> killed"
        );
        assert_eq!(
            build_argument_prompt("... went home ...", "went", &cfg()).unwrap(),
            "Arguments: ... went home ... <Trigger> went"
        );
        assert!(matches!(
            build_argument_prompt("ctx", "", &cfg()),
            Err(Error::EmptyTriggerWord)
        ));
    }

    #[test]
    fn trigger_targets() {
        let killed = EventFrame::new(trig("killed", "Life_Die"), vec![]);
        let went = EventFrame::new(trig("went", "Movement_Transport"), vec![]);
        assert_eq!(
            encode_trigger_target(std::slice::from_ref(&killed), &cfg()),
            "killed [Life_Die]"
        );
        assert_eq!(
            encode_trigger_target(&[went, killed], &cfg()),
            "went [Movement_Transport] [and] killed [Life_Die]"
        );
        assert_eq!(encode_trigger_target(&[], &cfg()), "[none]");
    }

    #[test]
    fn trigger_decoding() {
        let d = decode_trigger_candidate("killed [Life_Die]", &cfg());
        assert_eq!(d.items, vec![trig("killed", "Life_Die")]);
        assert!(d.warnings.is_empty());

        let d =
            decode_trigger_candidate("went [Movement_Transport] [and] killed [Life_Die]", &cfg());
        assert_eq!(
            d.items,
            vec![
                trig("went", "Movement_Transport"),
                trig("killed", "Life_Die")
            ]
        );

        let d = decode_trigger_candidate("gibberish with no brackets", &cfg());
        assert!(d.items.is_empty());
        assert_eq!(d.warnings.len(), 1);

        for none in ["[none]", "[None]", "[ none ]"] {
            let d = decode_trigger_candidate(none, &cfg());
            assert!(d.items.is_empty() && d.warnings.is_empty(), "{none}");
        }
    }

    #[test]
    fn trigger_decoding_takes_last_bracket_as_type() {
        let d = decode_trigger_candidate("blew [up] [Conflict_Attack]", &cfg());
        assert_eq!(d.items, vec![trig("blew [up]", "Conflict_Attack")]);
        let d = decode_trigger_candidate("set  fire  [ Conflict_Attack ]", &cfg());
        assert_eq!(d.items, vec![trig("set fire", "Conflict_Attack")]);
        // bracket with no word in front
        let d = decode_trigger_candidate("[Life_Die]", &cfg());
        assert!(d.items.is_empty());
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn partial_segments_keep_the_good_ones() {
        let d = decode_trigger_candidate("went [Movement_Transport] [and] junk [and]", &cfg());
        assert_eq!(d.items, vec![trig("went", "Movement_Transport")]);
        assert_eq!(d.warnings.len(), 2);
    }

    #[test]
    fn argument_targets() {
        let ont = figure_ontology();
        let killed = EventFrame::new(
            trig("killed", "Life_Die"),
            vec![arg("Agent", "father - in - law"), arg("Place", "home")],
        );
        assert_eq!(
            encode_argument_target(&killed, &ont, &cfg()).unwrap(),
            "<Agent> father - in - law </Agent> <Place> home </Place>"
        );
        let went = EventFrame::new(trig("went", "Movement_Transport"), vec![]);
        assert_eq!(
            encode_argument_target(&went, &ont, &cfg()).unwrap(),
            "<Artifact> [None] </Artifact> <Place> [None] </Place>"
        );
        let unknown = EventFrame::new(trig("paid", "Transaction_Transfer_Money"), vec![]);
        assert!(matches!(
            encode_argument_target(&unknown, &ont, &cfg()),
            Err(Error::TypeNotInOntology(_))
        ));
    }

    #[test]
    fn multi_entity_role() {
        let ont = Ontology::from_listing([("Contact_Meet", ["Entity"])]).unwrap();
        let frame = EventFrame::new(
            trig("met", "Contact_Meet"),
            vec![arg("Entity", "a"), arg("Entity", "b")],
        );
        let text = encode_argument_target(&frame, &ont, &cfg()).unwrap();
        assert_eq!(text, "<Entity> a [and] b </Entity>");
        assert_eq!(
            decode_argument_output(&text, &cfg()).items,
            vec![arg("Entity", "a"), arg("Entity", "b")]
        );
    }

    #[test]
    fn argument_decoding() {
        let d = decode_argument_output(
            "<Agent> father - in - law </Agent> <Place> home </Place>",
            &cfg(),
        );
        assert_eq!(
            d.items,
            vec![arg("Agent", "father - in - law"), arg("Place", "home")]
        );
        assert!(d.warnings.is_empty());

        assert!(
            decode_argument_output("<Artifact> [None] </Artifact>", &cfg())
                .items
                .is_empty()
        );
        // spacing inside tags and placeholders as printed in generated output
        let d = decode_argument_output(
            "<Artifact> [ None] </Artifact> ... <Place> home </ Place >",
            &cfg(),
        );
        assert_eq!(d.items, vec![arg("Place", "home")]);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn argument_decoding_malformed() {
        let d = decode_argument_output("<Agent> him <Place> home </Place>", &cfg());
        assert_eq!(d.items, vec![arg("Place", "home")]);
        assert_eq!(d.warnings, vec!["unclosed tag <Agent>".to_string()]);

        let d = decode_argument_output("</Agent> x <Place> home </Agent>", &cfg());
        assert!(d.items.is_empty());
        assert_eq!(d.warnings.len(), 3);

        let d = decode_argument_output("no tags here", &cfg());
        assert!(d.items.is_empty());
        assert_eq!(d.warnings.len(), 1);
        assert_eq!(decode_argument_output("", &cfg()).warnings.len(), 1);
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-z][a-z'-]{0,7}( [a-z][a-z-]{0,7}){0,2}"
    }

    fn event_type() -> impl Strategy<Value = String> {
        "[A-Z][a-z]{1,6}(_[A-Z][a-z]{1,6})?"
    }

    proptest! {
        #[test]
        fn trigger_roundtrip(pairs in prop::collection::vec((word(), event_type()), 0..5)) {
            let triggers: Vec<Trigger> = pairs.iter().map(|(w, t)| trig(w, t)).collect();
            let text = encode_triggers(&triggers, &cfg());
            let d = decode_trigger_candidate(&text, &cfg());
            prop_assert!(d.warnings.is_empty());
            prop_assert_eq!(d.items, triggers);
        }

        #[test]
        fn argument_roundtrip(
            roles in prop::collection::vec("[A-Z][a-z]{1,8}", 1..5),
            fills in prop::collection::vec((0usize..5, word()), 0..6),
        ) {
            let ont = Ontology::from_listing([("T", roles.clone())]).unwrap();
            let role_list = ont.roles("T").unwrap().to_vec();
            let args: Vec<ArgumentPair> = fills
                .iter()
                .map(|(r, e)| arg(&role_list[r % role_list.len()], e))
                .collect();
            let frame = EventFrame::new(trig("x", "T"), args);
            let text = encode_argument_target(&frame, &ont, &cfg()).unwrap();
            let decoded = EventFrame::new(trig("x", "T"), decode_argument_output(&text, &cfg()).items);
            prop_assert_eq!(decoded, frame);
        }

        #[test]
        fn decoders_never_panic(s in ".{0,80}") {
            let t = decode_trigger_candidate(&s, &cfg());
            for trig in &t.items {
                prop_assert!(!trig.word().is_empty());
                prop_assert!(!trig.event_type().chars().any(char::is_whitespace));
            }
            let a = decode_argument_output(&s, &cfg());
            for arg in &a.items {
                prop_assert!(!is_none_marker(arg.entity()));
            }
        }

        #[test]
        fn encoding_is_deterministic(pairs in prop::collection::vec((word(), event_type()), 0..4)) {
            let triggers: Vec<Trigger> = pairs.iter().map(|(w, t)| trig(w, t)).collect();
            prop_assert_eq!(encode_triggers(&triggers, &cfg()), encode_triggers(&triggers, &cfg()));
        }
    }
}
