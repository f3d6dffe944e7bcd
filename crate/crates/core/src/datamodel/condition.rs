use std::fmt;

use serde::{Deserialize, Serialize};

/// Direction of an explicit value instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Inclined,
    Disinclined,
}

impl Direction {
    pub fn word(self) -> &'static str {
        match self {
            Direction::Inclined => "inclined",
            Direction::Disinclined => "disinclined",
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Direction::Inclined => 1,
            Direction::Disinclined => -1,
        }
    }
}

/// How a response set was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConditionKind {
    /// Role prompt only.
    Role { role_id: String },
    /// SAE feature amplified while the role prompt is active.
    Sae { role_id: String, feature_id: u32, layer: u32, strength: f64, token_span: String },
    /// Explicit instruction towards or away from one value.
    Instruction { role_id: String, value_id: String, direction: Direction },
}

/// A steering condition: a role prompt, optionally composed with an SAE
/// intervention or an explicit value instruction, under one prompt template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringCondition {
    #[serde(flatten)]
    pub kind: ConditionKind,
    pub template_id: String,
}

pub const DEFAULT_TEMPLATE: &str = "default";

impl SteeringCondition {
    pub fn role(role_id: impl Into<String>) -> Self {
        SteeringCondition {
            kind: ConditionKind::Role { role_id: role_id.into() },
            template_id: DEFAULT_TEMPLATE.into(),
        }
    }

    pub fn sae(role_id: impl Into<String>, feature_id: u32, layer: u32, strength: f64) -> Self {
        SteeringCondition {
            kind: ConditionKind::Sae {
                role_id: role_id.into(),
                feature_id,
                layer,
                strength,
                token_span: "your values".into(),
            },
            template_id: DEFAULT_TEMPLATE.into(),
        }
    }

    pub fn instruction(role_id: impl Into<String>, value_id: impl Into<String>, direction: Direction) -> Self {
        SteeringCondition {
            kind: ConditionKind::Instruction { role_id: role_id.into(), value_id: value_id.into(), direction },
            template_id: DEFAULT_TEMPLATE.into(),
        }
    }

    pub fn with_template(mut self, template_id: impl Into<String>) -> Self {
        self.template_id = template_id.into();
        self
    }

    pub fn role_id(&self) -> &str {
        match &self.kind {
            ConditionKind::Role { role_id }
            | ConditionKind::Sae { role_id, .. }
            | ConditionKind::Instruction { role_id, .. } => role_id,
        }
    }

    pub fn is_role_only(&self) -> bool {
        matches!(self.kind, ConditionKind::Role { .. })
    }

    pub fn feature_id(&self) -> Option<u32> {
        match self.kind {
            ConditionKind::Sae { feature_id, .. } => Some(feature_id),
            _ => None,
        }
    }

    /// Canonical identity string. Distinct conditions have distinct keys and
    /// matrices order their rows by it.
    pub fn key(&self) -> String {
        match &self.kind {
            ConditionKind::Role { role_id } => format!("role/{role_id}@{}", self.template_id),
            ConditionKind::Sae { role_id, feature_id, layer, strength, token_span } => {
                format!("sae/{role_id}/f{feature_id}/l{layer}/x{strength}/{token_span}@{}", self.template_id)
            }
            ConditionKind::Instruction { role_id, value_id, direction } => {
                format!("instr/{role_id}/{value_id}/{}@{}", direction.word(), self.template_id)
            }
        }
    }

    /// Checks the field-level invariants that do not need a catalog.
    pub fn check(&self) -> Result<(), String> {
        if let ConditionKind::Sae { strength, .. } = &self.kind {
            if !(strength.is_finite() && *strength > 0.0) {
                return Err(format!("{}: SAE strength must be positive, got {strength}", self.key()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for SteeringCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format_is_flat_and_tagged() {
        let c = SteeringCondition::sae("r0", 1025, 12, 100.0);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["type"], "sae");
        assert_eq!(v["feature_id"], 1025);
        assert_eq!(v["template_id"], "default");
        let back: SteeringCondition = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);

        let i: SteeringCondition = serde_json::from_str(
            r#"{"type":"instruction","role_id":"r1","value_id":"Aesthetic","direction":"disinclined","template_id":"t"}"#,
        )
        .unwrap();
        assert_eq!(i.key(), "instr/r1/Aesthetic/disinclined@t");
    }

    #[test]
    fn keys_distinguish_conditions() {
        let a = SteeringCondition::sae("r0", 1, 12, 100.0);
        let b = SteeringCondition::sae("r0", 1, 12, 50.0);
        assert_ne!(a.key(), b.key());
        assert_ne!(SteeringCondition::role("r0").key(), SteeringCondition::role("r0").with_template("t2").key());
    }

    #[test]
    fn non_positive_strength_fails_check() {
        assert!(SteeringCondition::sae("r", 1, 1, 0.0).check().is_err());
        assert!(SteeringCondition::sae("r", 1, 1, f64::NAN).check().is_err());
        assert!(SteeringCondition::sae("r", 1, 1, 2.0).check().is_ok());
    }
}
