//! Fixtures and independent oracles shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

pub mod oracles;
pub mod server;

use indexmap::IndexMap;
use valuegraph::datamodel::{Catalog, Role, RoleSet};

/// Two values with the definitions used by the instruction examples, plus a
/// third with no upper dimension.
pub fn fixture_catalog() -> Catalog {
    Catalog::from_json(
        r#"{"values": [
  {"id": "understanding", "name": "Understanding",
   "definition": "The ability to understand why people behave in a particular way and to forgive them when they do something wrong",
   "upper_dimensions": ["universalism"],
   "questions": [
     {"id": "und1", "text": "Do you try to see why people act the way they do?", "polarity": 1},
     {"id": "und2", "text": "Do you find it hard to forgive people who wronged you?", "polarity": -1},
     {"id": "und3", "text": "Would you hear someone out before judging them?", "polarity": 1}]},
  {"id": "aesthetic", "name": "Aesthetic", "definition": "Harmony and beauty",
   "upper_dimensions": ["universalism"],
   "questions": [
     {"id": "aes1", "text": "Do you visit galleries or concerts when you can?", "polarity": 1},
     {"id": "aes2", "text": "Is the look of your surroundings unimportant to you?", "polarity": -1}]},
  {"id": "achievement", "name": "Achievement", "definition": "Personal success through demonstrated competence",
   "questions": [
     {"id": "ach1", "text": "Do you set yourself ambitious goals?", "polarity": 1}]}
]}"#,
    )
    .expect("fixture catalog is valid")
}

fn role(id: &str, attrs: &[(&str, &str)]) -> Role {
    Role {
        id: id.into(),
        attributes: attrs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<IndexMap<_, _>>(),
        is_baseline: false,
    }
}

/// Baseline `r0`, the engineer `r1` and the geneticist `r2`, whose bio keeps
/// its surrounding quotes.
pub fn fixture_roles() -> RoleSet {
    RoleSet::new(vec![
        Role { id: "r0".into(), attributes: IndexMap::new(), is_baseline: true },
        role("r1", &[("bio", "Gender: male; Job: Engineer, maintenance (IT), MBTI: ENFJ")]),
        role("r2", &[("bio", "\"Gender: female; Job: Clinical molecular geneticist, MBTI: INFP\"")]),
    ])
    .expect("fixture roles are valid")
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}
