//! Seeded synthetic corpora.
//!
//! Stands in for large external datasets at desk scale: a bijective
//! source/target vocabulary, monotone parallel sentences, a monolingual pool
//! in which a set of dictionary-only rare words occur with controlled
//! frequencies, and the matching rare-word lexicon. Everything is a pure
//! function of the seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::corpus::{
    BilingualDictionary, LexiconEntry, MonolingualCorpus, ParallelCorpus, Sentence, SentencePair,
};

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub vocab_size: usize,
    pub training_pairs: usize,
    pub monolingual_sentences: usize,
    pub rare_entries: usize,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            vocab_size: 200,
            training_pairs: 2000,
            monolingual_sentences: 5000,
            rare_entries: 20,
            min_len: 3,
            max_len: 9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub bitext: ParallelCorpus,
    pub monolingual: MonolingualCorpus,
    pub dictionary: BilingualDictionary,
}

pub fn source_word(i: usize) -> String {
    format!("s{i:03}")
}

pub fn target_word(i: usize) -> String {
    format!("t{i:03}")
}

pub fn rare_source_word(i: usize) -> String {
    format!("r{i:02}")
}

pub fn rare_target_word(i: usize) -> String {
    format!("R{i:02}")
}

/// How many monolingual sentences mention rare word `i`: the first two
/// entries are scarce (fewer matches than typical per-entry quotas), the
/// rest are plentiful so per-entry quotas keep binding as they grow.
pub fn planned_matches(i: usize) -> usize {
    if i < 2 {
        3 + i
    } else {
        45 + (i % 10)
    }
}

/// Deterministic corpus triple for end-to-end exercises.
///
/// Source word `s{i}` translates to `t{i}`; parallel sentences are monotone,
/// so the miniature translator can learn the mapping well. Rare words occur
/// only in the dictionary and the monolingual pool, never in the bitext.
pub fn rare_word_fixture(cfg: &FixtureConfig, seed: u64) -> Fixture {
    assert!(cfg.vocab_size > 0 && cfg.min_len > 0 && cfg.min_len <= cfg.max_len);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let mut pairs = Vec::with_capacity(cfg.training_pairs);
    for _ in 0..cfg.training_pairs {
        let len = rng.gen_range(cfg.min_len..=cfg.max_len);
        let ids: Vec<usize> = (0..len).map(|_| rng.gen_range(0..cfg.vocab_size)).collect();
        pairs.push(SentencePair {
            source: Sentence::new(ids.iter().map(|&i| source_word(i)).collect()).unwrap(),
            target: Sentence::new(ids.iter().map(|&i| target_word(i)).collect()).unwrap(),
        });
    }

    let entries: Vec<LexiconEntry> = (0..cfg.rare_entries)
        .map(|i| LexiconEntry::new(vec![rare_source_word(i)], vec![rare_target_word(i)]).unwrap())
        .collect();

    let mut mono: Vec<Sentence> = Vec::with_capacity(cfg.monolingual_sentences);
    for i in 0..cfg.rare_entries {
        for _ in 0..planned_matches(i) {
            let len = rng.gen_range(cfg.min_len..=cfg.max_len);
            let slot = rng.gen_range(0..len);
            let tokens: Vec<String> = (0..len)
                .map(|pos| {
                    if pos == slot {
                        rare_source_word(i)
                    } else {
                        source_word(rng.gen_range(0..cfg.vocab_size))
                    }
                })
                .collect();
            mono.push(Sentence::new(tokens).unwrap());
        }
    }
    while mono.len() < cfg.monolingual_sentences {
        let len = rng.gen_range(cfg.min_len..=cfg.max_len);
        let tokens: Vec<String> = (0..len)
            .map(|_| source_word(rng.gen_range(0..cfg.vocab_size)))
            .collect();
        mono.push(Sentence::new(tokens).unwrap());
    }
    // shuffle so rare-word sentences are spread over the id range
    for i in (1..mono.len()).rev() {
        let j = rng.gen_range(0..=i);
        mono.swap(i, j);
    }

    Fixture {
        bitext: ParallelCorpus::new(pairs),
        monolingual: MonolingualCorpus::new(mono),
        dictionary: BilingualDictionary::new(entries),
    }
}
