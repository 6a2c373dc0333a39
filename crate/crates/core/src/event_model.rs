//! Contexts, triggers, argument frames and the training-time ontology.
//!
//! All values are validated on construction and immutable afterwards.
//! Surface strings are whitespace-normalized (trimmed, internal runs
//! collapsed to one space) so that equality is insensitive to spacing noise
//! coming back from a generator.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trims and collapses internal whitespace runs to a single space.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `[None]`, `[none]`, `[ None ]` and friends.
pub(crate) fn is_none_marker(s: &str) -> bool {
    let squashed: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    squashed.eq_ignore_ascii_case("[none]")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTrigger")]
pub struct Trigger {
    word: String,
    #[serde(rename = "type")]
    event_type: String,
}

#[derive(Deserialize)]
struct RawTrigger {
    word: String,
    #[serde(rename = "type")]
    event_type: String,
}

impl TryFrom<RawTrigger> for Trigger {
    type Error = Error;

    fn try_from(raw: RawTrigger) -> Result<Self> {
        Trigger::new(&raw.word, &raw.event_type)
    }
}

impl Trigger {
    pub fn new(word: &str, event_type: &str) -> Result<Self> {
        let word = normalize_ws(word);
        if word.is_empty() {
            return Err(Error::InvalidTrigger("empty trigger word".into()));
        }
        let event_type = event_type.trim();
        if event_type.is_empty() {
            return Err(Error::InvalidTrigger(format!(
                "empty event type for {word:?}"
            )));
        }
        if event_type.chars().any(char::is_whitespace) {
            return Err(Error::InvalidTrigger(format!(
                "event type {event_type:?} contains whitespace"
            )));
        }
        Ok(Trigger {
            word,
            event_type: event_type.to_string(),
        })
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn event_type(&self) -> &str {
        &self.event_type
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawArgument")]
pub struct ArgumentPair {
    role: String,
    entity: String,
}

#[derive(Deserialize)]
struct RawArgument {
    role: String,
    entity: String,
}

impl TryFrom<RawArgument> for ArgumentPair {
    type Error = Error;

    fn try_from(raw: RawArgument) -> Result<Self> {
        ArgumentPair::new(&raw.role, &raw.entity)
    }
}

impl ArgumentPair {
    pub fn new(role: &str, entity: &str) -> Result<Self> {
        let role = role.trim();
        let entity = normalize_ws(entity);
        if role.is_empty() {
            return Err(Error::InvalidArgument("empty role".into()));
        }
        if entity.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "empty entity for role {role}"
            )));
        }
        if is_none_marker(&entity) {
            return Err(Error::InvalidArgument(format!(
                "placeholder {entity:?} is not an entity"
            )));
        }
        Ok(ArgumentPair {
            role: role.to_string(),
            entity,
        })
    }

    pub fn role(&self) -> &str {
        &self.role
    }

    pub fn entity(&self) -> &str {
        &self.entity
    }
}

/// One event: a typed trigger plus its role-labelled arguments.
///
/// Duplicate `(role, entity)` pairs are collapsed on construction, keeping
/// first-occurrence order. Equality ignores argument order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawFrame")]
pub struct EventFrame {
    trigger: Trigger,
    arguments: Vec<ArgumentPair>,
}

#[derive(Deserialize)]
struct RawFrame {
    trigger: Trigger,
    #[serde(default)]
    arguments: Vec<ArgumentPair>,
}

impl From<RawFrame> for EventFrame {
    fn from(raw: RawFrame) -> Self {
        EventFrame::new(raw.trigger, raw.arguments)
    }
}

impl EventFrame {
    pub fn new(trigger: Trigger, arguments: impl IntoIterator<Item = ArgumentPair>) -> Self {
        let mut deduped: Vec<ArgumentPair> = Vec::new();
        for arg in arguments {
            if !deduped.contains(&arg) {
                deduped.push(arg);
            }
        }
        EventFrame {
            trigger,
            arguments: deduped,
        }
    }

    pub fn trigger(&self) -> &Trigger {
        &self.trigger
    }

    pub fn arguments(&self) -> &[ArgumentPair] {
        &self.arguments
    }

    fn sorted_arguments(&self) -> Vec<&ArgumentPair> {
        let mut args: Vec<_> = self.arguments.iter().collect();
        args.sort();
        args
    }
}

impl PartialEq for EventFrame {
    fn eq(&self, other: &Self) -> bool {
        self.trigger == other.trigger && self.sorted_arguments() == other.sorted_arguments()
    }
}

impl Eq for EventFrame {}

/// One sentence with its gold events. A context without events is a
/// legitimate negative example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextInstance {
    doc_id: String,
    context: String,
    gold_frames: Vec<EventFrame>,
}

impl ContextInstance {
    pub fn new(
        doc_id: impl Into<String>,
        context: &str,
        gold_frames: Vec<EventFrame>,
    ) -> Result<Self> {
        let context = normalize_ws(context);
        if context.is_empty() {
            return Err(Error::EmptyContext);
        }
        Ok(ContextInstance {
            doc_id: doc_id.into(),
            context,
            gold_frames,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn context(&self) -> &str {
        &self.context
    }

    pub fn gold_frames(&self) -> &[EventFrame] {
        &self.gold_frames
    }

    pub fn gold_triggers(&self) -> Vec<Trigger> {
        self.gold_frames.iter().map(|f| f.trigger.clone()).collect()
    }

    /// Gold trigger words that do not occur in the context text. Such frames
    /// are kept (and still scored); this is a diagnostic only.
    pub fn unanchored_triggers(&self) -> Vec<String> {
        self.gold_frames
            .iter()
            .filter(|f| !self.context.contains(f.trigger.word()))
            .map(|f| {
                format!(
                    "trigger {:?} [{}] not found in context",
                    f.trigger.word(),
                    f.trigger.event_type()
                )
            })
            .collect()
    }
}

/// Event type to ordered role list. Only ever used to lay out argument
/// targets for training; inference never consults it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ontology {
    roles_by_type: IndexMap<String, Vec<String>>,
}

pub(crate) fn check_role_name(role: &str) -> Result<()> {
    let bad = role.is_empty()
        || role.starts_with('/')
        || role
            .chars()
            .any(|c| c == '<' || c == '>' || c.is_whitespace());
    if bad {
        Err(Error::InvalidRole(role.to_string()))
    } else {
        Ok(())
    }
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an ontology from explicit `(type, roles)` listings, deduplicating
    /// roles in order.
    pub fn from_listing<T, R>(listing: impl IntoIterator<Item = (T, R)>) -> Result<Self>
    where
        T: Into<String>,
        R: IntoIterator,
        R::Item: Into<String>,
    {
        let mut ontology = Ontology::new();
        for (event_type, roles) in listing {
            let event_type = event_type.into();
            ontology
                .roles_by_type
                .entry(event_type.clone())
                .or_default();
            for role in roles {
                ontology.add_role(&event_type, &role.into())?;
            }
        }
        Ok(ontology)
    }

    fn add_role(&mut self, event_type: &str, role: &str) -> Result<()> {
        check_role_name(role)?;
        let roles = self
            .roles_by_type
            .entry(event_type.to_string())
            .or_default();
        if !roles.iter().any(|r| r == role) {
            roles.push(role.to_string());
        }
        Ok(())
    }

    pub fn roles(&self, event_type: &str) -> Option<&[String]> {
        self.roles_by_type.get(event_type).map(Vec::as_slice)
    }

    pub fn contains_type(&self, event_type: &str) -> bool {
        self.roles_by_type.contains_key(event_type)
    }

    pub fn event_types(&self) -> impl Iterator<Item = &str> {
        self.roles_by_type.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.roles_by_type.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles_by_type.is_empty()
    }
}

/// Induces the role inventory from gold frames, in first-seen order.
pub fn ontology_from_corpus(instances: &[ContextInstance]) -> Result<Ontology> {
    if instances.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut ontology = Ontology::new();
    for frame in instances.iter().flat_map(|i| i.gold_frames.iter()) {
        let event_type = frame.trigger.event_type();
        ontology
            .roles_by_type
            .entry(event_type.to_string())
            .or_default();
        for arg in &frame.arguments {
            ontology.add_role(event_type, arg.role())?;
        }
    }
    Ok(ontology)
}

/// Lists every way `frame` departs from `ontology`; empty means conformant.
pub fn validate_frame(frame: &EventFrame, ontology: &Ontology) -> Vec<String> {
    let event_type = frame.trigger.event_type();
    let Some(roles) = ontology.roles(event_type) else {
        return vec![format!("unknown event type: {event_type}")];
    };
    let mut violations = Vec::new();
    for arg in &frame.arguments {
        let msg = format!("unknown role {} for type {event_type}", arg.role());
        if !roles.iter().any(|r| r == arg.role()) && !violations.contains(&msg) {
            violations.push(msg);
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trig(w: &str, t: &str) -> Trigger {
        Trigger::new(w, t).unwrap()
    }

    fn arg(r: &str, e: &str) -> ArgumentPair {
        ArgumentPair::new(r, e).unwrap()
    }

    fn instance(id: &str, ctx: &str, frames: Vec<EventFrame>) -> ContextInstance {
        ContextInstance::new(id, ctx, frames).unwrap()
    }

    #[test]
    fn trigger_invariants() {
        assert_eq!(
            trig("  went \t away ", "Movement_Transport").word(),
            "went away"
        );
        assert!(Trigger::new("   ", "Life_Die").is_err());
        assert!(Trigger::new("went", "").is_err());
        assert!(Trigger::new("went", "Movement Transport").is_err());
    }

    #[test]
    fn argument_rejects_placeholder() {
        assert!(ArgumentPair::new("Place", "[None]").is_err());
        assert!(ArgumentPair::new("Place", "[ none ]").is_err());
        assert!(ArgumentPair::new("", "home").is_err());
        assert!(ArgumentPair::new("Place", " ").is_err());
    }

    #[test]
    fn frame_equality_ignores_argument_order_and_duplicates() {
        let a = EventFrame::new(
            trig("killed", "Life_Die"),
            vec![
                arg("Agent", "him"),
                arg("Place", "home"),
                arg("Agent", "him"),
            ],
        );
        let b = EventFrame::new(
            trig("killed", "Life_Die"),
            vec![arg("Place", "home"), arg("Agent", "him")],
        );
        assert_eq!(a.arguments().len(), 2);
        assert_eq!(a, b);
        let c = EventFrame::new(trig("killed", "Conflict_Attack"), b.arguments().to_vec());
        assert_ne!(b, c);
    }

    #[test]
    fn single_frame_induction() {
        let inst = instance(
            "d1",
            "He went home .",
            vec![EventFrame::new(
                trig("went", "Movement_Transport"),
                vec![arg("Destination", "home")],
            )],
        );
        let ont = ontology_from_corpus(&[inst]).unwrap();
        assert_eq!(ont.roles("Movement_Transport").unwrap(), ["Destination"]);
        assert_eq!(ont.len(), 1);
    }

    #[test]
    fn induction_keeps_first_seen_order() {
        let a = instance(
            "d1",
            "x killed y .",
            vec![EventFrame::new(
                trig("killed", "Life_Die"),
                vec![arg("Agent", "x")],
            )],
        );
        let b = instance(
            "d2",
            "x killed y at z .",
            vec![EventFrame::new(
                trig("killed", "Life_Die"),
                vec![arg("Place", "z"), arg("Agent", "x")],
            )],
        );
        let ont = ontology_from_corpus(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(ont.roles("Life_Die").unwrap(), ["Agent", "Place"]);
        // idempotent
        assert_eq!(ont, ontology_from_corpus(&[a, b]).unwrap());
    }

    #[test]
    fn induction_edge_cases() {
        assert!(matches!(ontology_from_corpus(&[]), Err(Error::EmptyCorpus)));
        let empty = instance("d0", "Nothing happened .", vec![]);
        assert!(ontology_from_corpus(&[empty]).unwrap().is_empty());
        let bad = instance(
            "d1",
            "x killed y",
            vec![EventFrame::new(
                trig("killed", "Life_Die"),
                vec![arg("<Agent>", "x")],
            )],
        );
        assert!(matches!(
            ontology_from_corpus(&[bad]),
            Err(Error::InvalidRole(_))
        ));
    }

    #[test]
    fn validation_messages() {
        let ont = Ontology::from_listing([("Life_Die", ["Agent", "Place"])]).unwrap();
        let ok = EventFrame::new(trig("killed", "Life_Die"), vec![arg("Agent", "x")]);
        assert!(validate_frame(&ok, &ont).is_empty());
        let unknown = EventFrame::new(trig("went", "X"), vec![]);
        assert_eq!(validate_frame(&unknown, &ont), ["unknown event type: X"]);
        let bad_role = EventFrame::new(trig("killed", "Life_Die"), vec![arg("Foo", "x")]);
        assert_eq!(
            validate_frame(&bad_role, &ont),
            ["unknown role Foo for type Life_Die"]
        );
    }

    #[test]
    fn unanchored_triggers_are_flagged_not_dropped() {
        let inst = instance(
            "d1",
            "He went home .",
            vec![
                EventFrame::new(trig("went", "Movement_Transport"), vec![]),
                EventFrame::new(trig("killed", "Life_Die"), vec![]),
            ],
        );
        assert_eq!(inst.gold_frames().len(), 2);
        assert_eq!(inst.unanchored_triggers().len(), 1);
    }

    #[test]
    fn same_word_two_types_is_allowed() {
        let inst = instance(
            "d1",
            "They struck the town .",
            vec![
                EventFrame::new(trig("struck", "Conflict_Attack"), vec![]),
                EventFrame::new(trig("struck", "Life_Die"), vec![]),
            ],
        );
        assert_eq!(inst.gold_triggers().len(), 2);
    }

    #[test]
    fn serde_shape() {
        let frame: EventFrame = serde_json::from_str(
            r#"{"trigger":{"word":"went","type":"Movement_Transport"},"arguments":[{"role":"Destination","entity":"home"}]}"#,
        )
        .unwrap();
        assert_eq!(frame.trigger().event_type(), "Movement_Transport");
        let back = serde_json::to_string(&frame).unwrap();
        assert!(back.contains(r#""type":"Movement_Transport""#));
        assert!(serde_json::from_str::<Trigger>(r#"{"word":"","type":"X"}"#).is_err());
    }
}
