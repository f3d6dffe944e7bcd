use std::collections::BTreeSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{read_file, DataError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Role {
    pub id: String,
    #[serde(default)]
    pub attributes: IndexMap<String, String>,
    #[serde(default)]
    pub is_baseline: bool,
}

impl Role {
    /// Biography line used in prompts. A `bio` attribute is used verbatim,
    /// otherwise attributes render as `Key: value` pairs joined by `; `.
    pub fn bio(&self) -> String {
        if let Some(bio) = self.attributes.get("bio") {
            return bio.clone();
        }
        self.attributes.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join("; ")
    }
}

/// Roles of a dataset with exactly one empty baseline role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Role>", into = "Vec<Role>")]
pub struct RoleSet {
    roles: Vec<Role>,
}

impl RoleSet {
    pub fn new(roles: Vec<Role>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let dups: Vec<String> = roles.iter().filter(|r| !seen.insert(r.id.clone())).map(|r| r.id.clone()).collect();
        if !dups.is_empty() {
            return Err(DataError::integrity("duplicate role ids", dups));
        }
        let baselines: Vec<&Role> = roles.iter().filter(|r| r.is_baseline).collect();
        if baselines.len() != 1 {
            return Err(DataError::integrity(
                format!("exactly one baseline role required, found {}", baselines.len()),
                baselines.iter().map(|r| r.id.clone()).collect(),
            ));
        }
        if !baselines[0].attributes.is_empty() {
            return Err(DataError::integrity("baseline role must have no attributes", vec![baselines[0].id.clone()]));
        }
        Ok(RoleSet { roles })
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn baseline(&self) -> &Role {
        self.roles.iter().find(|r| r.is_baseline).expect("validated on construction")
    }

    pub fn get(&self, id: &str) -> Option<&Role> {
        self.roles.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }
}

impl TryFrom<Vec<Role>> for RoleSet {
    type Error = DataError;

    fn try_from(roles: Vec<Role>) -> Result<Self> {
        RoleSet::new(roles)
    }
}

impl From<RoleSet> for Vec<Role> {
    fn from(set: RoleSet) -> Vec<Role> {
        set.roles
    }
}

/// Reads a JSON array of roles.
pub fn load_roles(path: &Path) -> Result<RoleSet> {
    let roles: Vec<Role> =
        serde_json::from_str(&read_file(path)?).map_err(|e| DataError::parse(Some(e.line()), e.to_string()))?;
    RoleSet::new(roles)
}
