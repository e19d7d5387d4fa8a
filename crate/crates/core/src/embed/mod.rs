//! Compass embeddings: one shared model trained on the union of all corpora,
//! then one slice per corpus that retrains target vectors against the
//! compass's frozen context matrix.

mod io;
mod matrix;
mod model;
pub mod objective;
mod train;
mod vocab;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use io::{load_compass, load_slice, read_vectors, save_compass, save_slice, write_vectors, ModelMeta, Provenance, Role};
pub use matrix::Matrix;
pub use model::{cosine, cosine_vectors, nearest, CompassModel, Embedding, SliceModel, StaticEmbedding};
pub use train::{train_compass, train_slice};
pub use vocab::{build_vocab, Vocabulary};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("token stream is empty")]
    EmptyStream,
    #[error("no token reaches min_count {0}")]
    EmptyVocabulary(usize),
    #[error("corpus too small: {tokens} tokens survive, need at least {needed}")]
    Degenerate { tokens: usize, needed: usize },
    #[error("token {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("slice token {0:?} is absent from the compass vocabulary")]
    VocabularyMismatch(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("malformed model file {path}: {reason}")]
    Format { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Cbow,
    SkipGram,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Cbow => "cbow",
            Architecture::SkipGram => "skipgram",
        })
    }
}

impl FromStr for Architecture {
    type Err = EmbedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cbow" => Ok(Architecture::Cbow),
            "skipgram" | "skip-gram" | "sg" => Ok(Architecture::SkipGram),
            other => Err(EmbedError::InvalidHyperparams(format!("unknown architecture {other:?}"))),
        }
    }
}

/// `Deterministic` trains on one thread and is bit-reproducible for a seed.
/// `Fast` applies updates from several threads without locking and is not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    Deterministic,
    Fast,
}

impl TrainingMode {
    pub fn reproducible(self) -> bool {
        self == TrainingMode::Deterministic
    }
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainingMode::Deterministic => "deterministic",
            TrainingMode::Fast => "fast",
        })
    }
}

impl FromStr for TrainingMode {
    type Err = EmbedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "deterministic" => Ok(TrainingMode::Deterministic),
            "fast" => Ok(TrainingMode::Fast),
            other => Err(EmbedError::InvalidHyperparams(format!("unknown training mode {other:?}"))),
        }
    }
}

/// Missing fields take their defaults when deserialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub dimension: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs_compass: usize,
    pub epochs_slice: usize,
    pub min_count: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub architecture: Architecture,
    pub seed: u64,
    pub mode: TrainingMode,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dimension: 100,
            window: 5,
            negative: 5,
            epochs_compass: 50,
            epochs_slice: 50,
            min_count: 2,
            learning_rate: 0.025,
            subsample: 1e-3,
            architecture: Architecture::Cbow,
            seed: 1,
            mode: TrainingMode::Deterministic,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let fail = |msg: &str| Err(EmbedError::InvalidHyperparams(msg.to_string()));
        if self.dimension < 2 {
            return fail("dimension must be at least 2");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if self.negative < 1 {
            return fail("negative must be at least 1");
        }
        if self.epochs_compass < 1 || self.epochs_slice < 1 {
            return fail("epochs must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive");
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return fail("subsample threshold must be non-negative");
        }
        Ok(())
    }
}
