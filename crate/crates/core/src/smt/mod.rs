//! A self-contained miniature phrase-based translator: IBM Model 1 EM
//! alignment, phrase extraction from intersected bidirectional Viterbi
//! alignments, a stupid-backoff n-gram language model, dictionary rule
//! injection, and a monotone beam-search decoder.
//!
//! This is deliberately minimal: no reordering, no tuning, no smoothing
//! features. What it must do well is respect phrasal rules injected from a
//! bilingual dictionary, and it does that unconditionally.

pub mod decoder;
pub mod lm;
pub mod model1;
pub mod phrase;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("language model order must be >= 1")]
    ZeroOrder,
    #[error("backoff factor must lie in (0, 1), got {0}")]
    BadBackoffFactor(f64),
    #[error("floor probability must lie in (0, 1], got {0}")]
    BadFloorProbability(f64),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Training-time settings for the translator bundle.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SmtConfig {
    pub em_iterations: usize,
    pub use_null: bool,
    pub max_phrase_len: usize,
    pub lm_order: usize,
    pub lm_alpha: f64,
    /// Probability floor for dictionary rules injected into the phrase table.
    pub floor_prob: f64,
    pub decoder: decoder::DecoderConfig,
}

impl Default for SmtConfig {
    fn default() -> Self {
        SmtConfig {
            em_iterations: 5,
            use_null: false,
            max_phrase_len: 4,
            lm_order: 3,
            lm_alpha: 0.4,
            floor_prob: 1.0,
            decoder: decoder::DecoderConfig::default(),
        }
    }
}
