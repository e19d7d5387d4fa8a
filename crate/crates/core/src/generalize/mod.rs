//! Vocabulary generalization: strategies that map a word form to the key used
//! for lexicon matching.

mod chars;
pub mod lancaster;
pub mod porter;
pub mod snowball;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// No reduction: only identical word forms match.
    Exact,
    Porter,
    /// English Snowball (Porter2).
    Snowball,
    Lancaster,
    /// Snowball applied twice.
    #[serde(rename = "snowball2")]
    DoubleSnowball,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Exact,
        Strategy::Porter,
        Strategy::Snowball,
        Strategy::Lancaster,
        Strategy::DoubleSnowball,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exact => "exact",
            Strategy::Porter => "porter",
            Strategy::Snowball => "snowball",
            Strategy::Lancaster => "lancaster",
            Strategy::DoubleSnowball => "snowball2",
        }
    }

    pub fn generalize(self, word: &str) -> String {
        match self {
            Strategy::Exact => word.to_string(),
            Strategy::Porter => porter::stem(word),
            Strategy::Snowball => snowball::stem(word),
            Strategy::Lancaster => lancaster::stem(word),
            Strategy::DoubleSnowball => snowball::stem(&snowball::stem(word)),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy {0:?} (expected exact|porter|snowball|lancaster|snowball2)")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|strategy| strategy.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

/// Free-function form of [`Strategy::generalize`].
pub fn generalize(strategy: Strategy, word: &str) -> String {
    strategy.generalize(word)
}
