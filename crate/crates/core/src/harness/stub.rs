use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::endpoint::{ChatEndpoint, ChatRequest, RequestTag, TransportError};
use crate::datamodel::SteeringCondition;
use crate::scoring::TernaryLabel;
use crate::seed;

/// Relative weights of the three labels. All-zero profiles answer unsure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubProfile {
    pub yes: u32,
    pub no: u32,
    pub unsure: u32,
}

impl StubProfile {
    pub const UNIFORM: StubProfile = StubProfile { yes: 1, no: 1, unsure: 1 };
    pub const ALWAYS_YES: StubProfile = StubProfile { yes: 1, no: 0, unsure: 0 };

    fn pick(self, draw: u64) -> TernaryLabel {
        let total = u64::from(self.yes) + u64::from(self.no) + u64::from(self.unsure);
        if total == 0 {
            return TernaryLabel::Unsure;
        }
        let x = draw % total;
        if x < u64::from(self.yes) {
            TernaryLabel::Yes
        } else if x < u64::from(self.yes) + u64::from(self.no) {
            TernaryLabel::No
        } else {
            TernaryLabel::Unsure
        }
    }
}

impl Default for StubProfile {
    fn default() -> Self {
        StubProfile::UNIFORM
    }
}

/// Answer phrasings per label. The second of each list is outside the
/// prefix rules and needs the judge.
const YES_ANSWERS: [&str; 3] = ["Yes, that describes me well.", "for sure", "Sure, I would."];
const NO_ANSWERS: [&str; 3] = ["No, that is not me.", "the answer is no", "No."];
const UNSURE_ANSWERS: [&str; 3] = [
    "Unsure, it depends on the situation.",
    "It depends entirely on context.",
    "i cannot provide a response based on personal opinions",
];

fn canned_thought(label: TernaryLabel) -> &'static str {
    match label {
        TernaryLabel::Yes => "This matches how I usually act and what I care about.",
        TernaryLabel::No => "This does not fit how I usually act.",
        TernaryLabel::Unsure => "It could go either way, so I would rather not commit.",
    }
}

/// Deterministic offline responder. Labels are drawn by hashing the condition
/// key, question id and seed, weighted by a per-value profile. Condition
/// overrides take precedence, so steering can be emulated.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StubResponder {
    pub seed: u64,
    #[serde(default)]
    pub default_profile: StubProfile,
    /// Keyed by value id.
    #[serde(default)]
    pub profiles: BTreeMap<String, StubProfile>,
    /// Keyed by condition key, then value id.
    #[serde(default)]
    pub condition_profiles: BTreeMap<String, BTreeMap<String, StubProfile>>,
}

impl StubResponder {
    pub fn new(seed: u64) -> Self {
        StubResponder { seed, ..Default::default() }
    }

    pub fn with_profile(mut self, value_id: impl Into<String>, profile: StubProfile) -> Self {
        self.profiles.insert(value_id.into(), profile);
        self
    }

    pub fn with_default_profile(mut self, profile: StubProfile) -> Self {
        self.default_profile = profile;
        self
    }

    fn profile(&self, condition_key: &str, value_id: &str) -> StubProfile {
        self.condition_profiles
            .get(condition_key)
            .and_then(|m| m.get(value_id))
            .or_else(|| self.profiles.get(value_id))
            .copied()
            .unwrap_or(self.default_profile)
    }

    /// Intended label and full response text for one question.
    pub fn respond(&self, condition: &SteeringCondition, question_id: &str, value_id: &str) -> (TernaryLabel, String) {
        let key = condition.key();
        let draw = seed::derive(self.seed, &["stub", &key, question_id]);
        let label = self.profile(&key, value_id).pick(draw);
        let phrasings = match label {
            TernaryLabel::Yes => &YES_ANSWERS,
            TernaryLabel::No => &NO_ANSWERS,
            TernaryLabel::Unsure => &UNSURE_ANSWERS,
        };
        let answer = phrasings[((draw >> 32) % 3) as usize];
        (label, format!("Thought: {}\nAnswer: {answer}", canned_thought(label)))
    }
}

/// `(thought, answer)` of the stub for one question.
pub fn stub_responder(condition: &SteeringCondition, question_id: &str, value_id: &str, seed: u64) -> (String, String) {
    let (_, text) = StubResponder::new(seed).respond(condition, question_id, value_id);
    super::templates::split_response(&text)
}

/// Offline judge: the worked examples of the judge prompt, then keyword rules.
pub fn stub_judge(text: &str) -> TernaryLabel {
    let lowered = text.trim().to_lowercase();
    match lowered.as_str() {
        "for sure" => return TernaryLabel::Yes,
        "the answer is no" => return TernaryLabel::No,
        "i cannot provide a response based on personal opinions" => return TernaryLabel::Unsure,
        _ => {}
    }
    let words: Vec<&str> = lowered.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).collect();
    let has = |w: &str| words.contains(&w);
    if has("depends") || has("cannot") || has("unsure") || has("either") {
        TernaryLabel::Unsure
    } else if has("no") || has("not") || has("never") {
        TernaryLabel::No
    } else if has("yes") || has("sure") || has("matches") || has("definitely") {
        TernaryLabel::Yes
    } else {
        TernaryLabel::Unsure
    }
}

impl ChatEndpoint for StubResponder {
    fn identity(&self) -> String {
        format!("stub seed={}", self.seed)
    }

    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        Ok(match &request.tag {
            RequestTag::Question { condition, question_id, value_id } => {
                self.respond(condition, question_id, value_id).1
            }
            RequestTag::Judge { text } => stub_judge(text).as_str().to_string(),
        })
    }
}
