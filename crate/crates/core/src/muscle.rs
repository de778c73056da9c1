//! Muscle identifiers and the color groups they belong to.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Functional group of a muscle. The workbench assigns one hue per group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MuscleGroup {
    Pushing,
    Forearm,
    Back,
    Finger,
}

impl MuscleGroup {
    pub const ALL: [MuscleGroup; 4] =
        [MuscleGroup::Pushing, MuscleGroup::Forearm, MuscleGroup::Back, MuscleGroup::Finger];

    pub fn as_str(self) -> &'static str {
        match self {
            MuscleGroup::Pushing => "pushing",
            MuscleGroup::Forearm => "forearm",
            MuscleGroup::Back => "back",
            MuscleGroup::Finger => "finger",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for MuscleGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MuscleId {
    pub name: String,
    pub group: MuscleGroup,
}

impl MuscleId {
    pub fn new(name: impl Into<String>, group: MuscleGroup) -> Self {
        Self { name: name.into(), group }
    }
}

impl fmt::Display for MuscleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// The 8-muscle upper-limb layout: two muscles per group.
pub fn default_catalog() -> Vec<MuscleId> {
    [
        ("BIC", MuscleGroup::Pushing),
        ("TRI", MuscleGroup::Pushing),
        ("PT", MuscleGroup::Forearm),
        ("PQ", MuscleGroup::Forearm),
        ("UT", MuscleGroup::Back),
        ("LT", MuscleGroup::Back),
        ("FDS", MuscleGroup::Finger),
        ("EDC", MuscleGroup::Finger),
    ]
    .into_iter()
    .map(|(name, group)| MuscleId::new(name.to_string(), group))
    .collect()
}

/// Checks catalog invariants: unique names. Returns the first duplicate.
pub fn find_duplicate(catalog: &[MuscleId]) -> Option<&str> {
    catalog
        .iter()
        .enumerate()
        .find_map(|(i, m)| catalog[..i].iter().any(|other| other.name == m.name).then_some(m.name.as_str()))
}
