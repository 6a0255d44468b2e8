//! IBM Model 1 lexical translation probabilities, trained with EM, plus
//! Viterbi alignment.
//!
//! Internal maps are ordered so that floating-point accumulation follows a
//! fixed order: identical inputs give bit-identical tables on every run.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::corpus::{ParallelCorpus, SentencePair};

use super::SmtError;

/// Probability returned for (target, source) pairs the table has never seen.
pub const PROB_FLOOR: f64 = 1e-9;

/// A source-side conditioning event: a real word or the empty (NULL) word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SourceKey {
    Null,
    Word(String),
}

/// Lexical table t(target | source). Per-source distributions sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    probs: BTreeMap<SourceKey, BTreeMap<String, f64>>,
    use_null: bool,
}

impl TranslationTable {
    /// A table with no mass anywhere: every lookup returns the floor.
    pub fn empty(use_null: bool) -> Self {
        TranslationTable {
            probs: BTreeMap::new(),
            use_null,
        }
    }

    /// t(target | source), with [`PROB_FLOOR`] for unseen pairs.
    pub fn prob(&self, target: &str, source: &str) -> f64 {
        self.probs
            .get(&SourceKey::Word(source.to_string()))
            .and_then(|row| row.get(target))
            .copied()
            .unwrap_or(PROB_FLOOR)
    }

    /// t(target | NULL); the floor when the table was trained without NULL.
    pub fn null_prob(&self, target: &str) -> f64 {
        self.probs
            .get(&SourceKey::Null)
            .and_then(|row| row.get(target))
            .copied()
            .unwrap_or(PROB_FLOOR)
    }

    pub fn uses_null(&self) -> bool {
        self.use_null
    }

    /// Maximum per-source normalization error; used by invariant checks.
    pub fn max_normalization_error(&self) -> f64 {
        self.probs
            .values()
            .map(|row| (row.values().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn source_keys(pair: &SentencePair, use_null: bool) -> Vec<SourceKey> {
        let mut keys = Vec::with_capacity(pair.source.len() + usize::from(use_null));
        if use_null {
            keys.push(SourceKey::Null);
        }
        keys.extend(
            pair.source
                .tokens()
                .iter()
                .map(|t| SourceKey::Word(t.clone())),
        );
        keys
    }
}

/// Uniform initialization over co-occurring pairs: t(y|x) = 1/|{targets seen
/// in a pair with x}|. With NULL, every target word co-occurs with NULL.
pub fn initial_table(corpus: &ParallelCorpus, use_null: bool) -> TranslationTable {
    let mut cooc: BTreeMap<SourceKey, BTreeSet<String>> = BTreeMap::new();
    for pair in &corpus.pairs {
        for key in TranslationTable::source_keys(pair, use_null) {
            let targets = cooc.entry(key).or_default();
            for t in pair.target.tokens() {
                targets.insert(t.clone());
            }
        }
    }
    let probs = cooc
        .into_iter()
        .map(|(key, targets)| {
            let p = 1.0 / targets.len() as f64;
            (key, targets.into_iter().map(|t| (t, p)).collect())
        })
        .collect();
    TranslationTable { probs, use_null }
}

/// One EM iteration: expected counts under `table`, then per-source
/// renormalization.
pub fn em_step(table: &TranslationTable, corpus: &ParallelCorpus) -> TranslationTable {
    let mut counts: BTreeMap<SourceKey, BTreeMap<String, f64>> = BTreeMap::new();
    for pair in &corpus.pairs {
        let keys = TranslationTable::source_keys(pair, table.use_null);
        for t in pair.target.tokens() {
            let denom: f64 = keys.iter().map(|k| lookup(table, k, t)).sum();
            if denom <= 0.0 {
                continue;
            }
            for k in &keys {
                let fraction = lookup(table, k, t) / denom;
                *counts
                    .entry(k.clone())
                    .or_default()
                    .entry(t.clone())
                    .or_insert(0.0) += fraction;
            }
        }
    }
    let probs = counts
        .into_iter()
        .map(|(key, row)| {
            let total: f64 = row.values().sum();
            let row = row.into_iter().map(|(t, c)| (t, c / total)).collect();
            (key, row)
        })
        .collect();
    TranslationTable {
        probs,
        use_null: table.use_null,
    }
}

fn lookup(table: &TranslationTable, key: &SourceKey, target: &str) -> f64 {
    table
        .probs
        .get(key)
        .and_then(|row| row.get(target))
        .copied()
        .unwrap_or(PROB_FLOOR)
}

/// Model 1 corpus log-likelihood under `table`, including the uniform
/// alignment prior 1/(number of source positions).
pub fn log_likelihood(table: &TranslationTable, corpus: &ParallelCorpus) -> f64 {
    let mut ll = 0.0;
    for pair in &corpus.pairs {
        let keys = TranslationTable::source_keys(pair, table.use_null);
        let positions = keys.len() as f64;
        for t in pair.target.tokens() {
            let total: f64 = keys.iter().map(|k| lookup(table, k, t)).sum();
            ll += (total / positions).ln();
        }
    }
    ll
}

/// Trains Model 1 with exactly `iterations` EM steps. Zero iterations return
/// the uniform initialization.
pub fn train_model1(
    corpus: &ParallelCorpus,
    iterations: usize,
    use_null: bool,
) -> Result<TranslationTable, SmtError> {
    if corpus.is_empty() {
        return Err(SmtError::EmptyCorpus);
    }
    let mut table = initial_table(corpus, use_null);
    for _ in 0..iterations {
        table = em_step(&table, corpus);
    }
    Ok(table)
}

/// Word alignment links for one sentence pair, as (source_index, target_index).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alignment {
    pub links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn from_links(links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Alignment {
            links: links.into_iter().collect(),
        }
    }

    /// Swaps link direction; used to bring a reverse-model alignment into the
    /// forward pair's index space.
    pub fn swapped(&self) -> Alignment {
        Alignment {
            links: self.links.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    /// Links present in both alignments.
    pub fn intersect(&self, other: &Alignment) -> Alignment {
        Alignment {
            links: self.links.intersection(&other.links).cloned().collect(),
        }
    }
}

/// Links every target position to its argmax-probability source position.
/// Ties go to the leftmost source index. When the table was trained with
/// NULL and NULL strictly beats every real position, the target word stays
/// unaligned.
pub fn viterbi_align(table: &TranslationTable, pair: &SentencePair) -> Alignment {
    let mut links = BTreeSet::new();
    for (j, t) in pair.target.tokens().iter().enumerate() {
        let mut best_i = 0usize;
        let mut best_p = f64::NEG_INFINITY;
        for (i, s) in pair.source.tokens().iter().enumerate() {
            let p = table.prob(t, s);
            if p > best_p {
                best_p = p;
                best_i = i;
            }
        }
        if table.use_null && table.null_prob(t) > best_p {
            continue;
        }
        if best_p > f64::NEG_INFINITY {
            links.insert((best_i, j));
        }
    }
    Alignment { links }
}
