use serde::{Deserialize, Serialize};

use super::{Result, ScoringError};
use crate::datamodel::{Polarity, ResponseRecord};
use crate::Rate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TernaryLabel {
    Yes,
    No,
    Unsure,
}

impl TernaryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TernaryLabel::Yes => "yes",
            TernaryLabel::No => "no",
            TernaryLabel::Unsure => "unsure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Label(TernaryLabel),
    /// No prefix rule applies; the caller must ask the judge endpoint.
    NeedsJudge,
}

/// Answer prefixes recognised without a judge, checked on the lowercased text.
const PREFIX_RULES: [(&str, TernaryLabel); 6] = [
    ("yes", TernaryLabel::Yes),
    ("sure", TernaryLabel::Yes),
    ("no", TernaryLabel::No),
    ("unsure", TernaryLabel::Unsure),
    ("i cannot", TernaryLabel::Unsure),
    ("i am unable", TernaryLabel::Unsure),
];

/// Leading characters skipped before prefix matching (quotes, whitespace, bullets).
fn strip_leading(s: &str) -> &str {
    s.trim_start_matches(|c: char| !c.is_alphanumeric())
}

/// Applies the prefix rule table. Anything unmatched (for instance
/// "for sure") is left to the judge.
pub fn classify_answer(answer: &str) -> Classification {
    let lowered = answer.to_lowercase();
    let text = strip_leading(&lowered);
    PREFIX_RULES
        .iter()
        .find(|(prefix, _)| text.starts_with(prefix))
        .map_or(Classification::NeedsJudge, |(_, label)| Classification::Label(*label))
}

/// Number of prefix rules matching `answer`; never more than one.
#[cfg(test)]
pub(crate) fn matching_rules(answer: &str) -> usize {
    let lowered = answer.to_lowercase();
    let text = strip_leading(&lowered);
    PREFIX_RULES.iter().filter(|(p, _)| text.starts_with(p)).count()
}

/// Signed item score: agreeing with a positively keyed item counts +1.
pub fn score(label: TernaryLabel, polarity: Polarity) -> i8 {
    match label {
        TernaryLabel::Yes => polarity.sign(),
        TernaryLabel::No => -polarity.sign(),
        TernaryLabel::Unsure => 0,
    }
}

/// Fraction of records whose judged thought disagrees with the answer label.
pub fn thought_answer_inconsistency(records: &[ResponseRecord]) -> Result<Rate> {
    if records.is_empty() {
        return Err(ScoringError::EmptyInput);
    }
    let mut differing = 0i64;
    for r in records {
        match (r.label, r.thought_label) {
            (Some(a), Some(t)) => differing += i64::from(a != t),
            _ => {
                return Err(ScoringError::UnlabeledRecord {
                    condition: r.condition.key(),
                    question_id: r.question_id.clone(),
                })
            }
        }
    }
    Ok(Rate::new(differing.into(), (records.len() as i64).into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::SteeringCondition;
    use proptest::prelude::*;
    use TernaryLabel::*;

    #[test]
    fn prefix_rules() {
        assert_eq!(classify_answer("Yes, definitely."), Classification::Label(Yes));
        assert_eq!(classify_answer("  \"Sure thing\""), Classification::Label(Yes));
        assert_eq!(classify_answer("No."), Classification::Label(No));
        assert_eq!(classify_answer("UNSURE"), Classification::Label(Unsure));
        assert_eq!(
            classify_answer("i cannot provide a response based on personal opinions"),
            Classification::Label(Unsure)
        );
        assert_eq!(classify_answer("I am unable to answer."), Classification::Label(Unsure));
        assert_eq!(classify_answer("for sure"), Classification::NeedsJudge);
        assert_eq!(classify_answer("the answer is no"), Classification::NeedsJudge);
        assert_eq!(classify_answer("It depends entirely on context."), Classification::NeedsJudge);
        assert_eq!(classify_answer(""), Classification::NeedsJudge);
    }

    #[test]
    fn score_table_is_exhaustive() {
        for p in [Polarity::Positive, Polarity::Negative] {
            assert_eq!(score(Yes, p), p.sign());
            assert_eq!(score(No, p), -p.sign());
            assert_eq!(score(Unsure, p), 0);
        }
        assert_eq!(score(Yes, Polarity::Positive), 1);
        assert_eq!(score(No, Polarity::Positive), -1);
        assert_eq!(score(Unsure, Polarity::Negative), 0);
    }

    fn rec(answer: TernaryLabel, thought: Option<TernaryLabel>) -> ResponseRecord {
        ResponseRecord {
            condition: SteeringCondition::role("r0"),
            question_id: "q".into(),
            thought: String::new(),
            answer: String::new(),
            label: Some(answer),
            thought_label: thought,
        }
    }

    #[test]
    fn inconsistency_counts_disagreements() {
        let agree: Vec<_> = (0..10).map(|_| rec(Yes, Some(Yes))).collect();
        assert_eq!(thought_answer_inconsistency(&agree).unwrap(), Rate::from_integer(0.into()));
        let mut five: Vec<_> = (0..4).map(|_| rec(No, Some(No))).collect();
        five.push(rec(No, Some(Unsure)));
        assert_eq!(thought_answer_inconsistency(&five).unwrap(), Rate::new(1.into(), 5.into()));
        assert!(matches!(thought_answer_inconsistency(&[]), Err(ScoringError::EmptyInput)));
        assert!(matches!(thought_answer_inconsistency(&[rec(Yes, None)]), Err(ScoringError::UnlabeledRecord { .. })));
    }

    proptest! {
        #[test]
        fn case_insensitive_on_ascii(s in "[ -~]{0,24}") {
            prop_assert_eq!(classify_answer(&s), classify_answer(&s.to_uppercase()));
        }

        #[test]
        fn rules_never_tie(s in "(yes|sure|no|unsure|i cannot|i am unable|for|the)?[ -~]{0,16}") {
            prop_assert!(matching_rules(&s) <= 1);
        }

        #[test]
        fn total_on_arbitrary_strings(s in ".*") {
            let first = classify_answer(&s);
            prop_assert_eq!(first, classify_answer(&s));
        }
    }
}
