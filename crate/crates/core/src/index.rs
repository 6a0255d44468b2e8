//! Inverted index over a monolingual corpus, backing per-entry sentence
//! retrieval.
//!
//! Posting lists only say which sentences contain which tokens; retrieval
//! verifies the contiguous phrase match against the stored sentence before
//! ranking. The index is immutable once built and safe to query from any
//! number of threads.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::corpus::{MonolingualCorpus, Sentence};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// How retrieval picks among more than `k` matching sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub enum SelectionPolicy {
    /// Ascending length, ties by ascending id. Short sentences translate
    /// cleanly and the choice is deterministic.
    #[default]
    ShortestFirst,
    /// Uniform sample without replacement, deterministic for a given seed;
    /// results are returned in ascending id order.
    SeededSample { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct InvertedIndex {
    postings: HashMap<String, Vec<u32>>,
    store: MonolingualCorpus,
}

/// Single-pass streaming build. Each sentence id is posted once per distinct
/// token it contains, in ascending id order.
pub fn build_index(corpus: MonolingualCorpus) -> InvertedIndex {
    let mut postings: HashMap<String, Vec<u32>> = HashMap::new();
    for (id, sentence) in corpus.sentences.iter().enumerate() {
        let id = id as u32;
        for tok in sentence.tokens() {
            let list = postings.entry(tok.clone()).or_default();
            if list.last() != Some(&id) {
                list.push(id);
            }
        }
    }
    InvertedIndex {
        postings,
        store: corpus,
    }
}

impl InvertedIndex {
    pub fn store(&self) -> &MonolingualCorpus {
        &self.store
    }

    pub fn sentence(&self, id: u32) -> &Sentence {
        self.store.sentence(id)
    }

    pub fn postings(&self, token: &str) -> &[u32] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sentences containing `phrase` as a contiguous token subsequence, at
    /// most `max_len` tokens long, ranked shortest first with ties by id;
    /// at most `k` results.
    pub fn retrieve(&self, phrase: &[String], k: usize, max_len: usize) -> Vec<u32> {
        self.retrieve_with_policy(phrase, k, max_len, SelectionPolicy::ShortestFirst)
    }

    pub fn retrieve_with_policy(
        &self,
        phrase: &[String],
        k: usize,
        max_len: usize,
        policy: SelectionPolicy,
    ) -> Vec<u32> {
        if phrase.is_empty() || k == 0 {
            return Vec::new();
        }
        let mut candidates = self.postings(&phrase[0]).to_vec();
        for tok in &phrase[1..] {
            if candidates.is_empty() {
                return Vec::new();
            }
            candidates = intersect_sorted(&candidates, self.postings(tok));
        }
        let mut matches: Vec<u32> = candidates
            .into_iter()
            .filter(|&id| {
                let sentence = self.store.sentence(id);
                sentence.len() <= max_len && sentence.contains_phrase(phrase)
            })
            .collect();
        match policy {
            SelectionPolicy::ShortestFirst => {
                matches.sort_by_key(|&id| (self.store.sentence(id).len(), id));
                matches.truncate(k);
                matches
            }
            SelectionPolicy::SeededSample { seed } => {
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ fnv1a(phrase));
                let take = k.min(matches.len());
                // partial Fisher-Yates: the first `take` slots end up a
                // uniform sample without replacement
                for i in 0..take {
                    let j = rng.gen_range(i..matches.len());
                    matches.swap(i, j);
                }
                let mut picked = matches[..take].to_vec();
                picked.sort_unstable();
                picked
            }
        }
    }

    /// Serialized form: a documented header plus the stored sentences. The
    /// postings are rebuilt deterministically on load, so the round trip is
    /// byte-exact.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "#corpus-index v1")?;
        writeln!(w, "sentences\t{}", self.store.len())?;
        for sentence in &self.store.sentences {
            writeln!(w, "{sentence}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, IndexError> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(header)) if header == "#corpus-index v1" => {}
            _ => {
                return Err(IndexError::Malformed {
                    line: 1,
                    message: "expected #corpus-index v1 header".to_string(),
                })
            }
        }
        let declared: usize = match lines.next() {
            Some(Ok(line)) => line
                .strip_prefix("sentences\t")
                .and_then(|v| v.parse().ok())
                .ok_or(IndexError::Malformed {
                    line: 2,
                    message: "expected sentences<TAB>count".to_string(),
                })?,
            _ => {
                return Err(IndexError::Malformed {
                    line: 2,
                    message: "expected sentences<TAB>count".to_string(),
                })
            }
        };
        let mut sentences = Vec::with_capacity(declared);
        for (idx, line) in lines.enumerate() {
            let line = line?;
            sentences.push(Sentence::from_line(&line));
            if sentences.len() > declared {
                return Err(IndexError::Malformed {
                    line: idx + 3,
                    message: "more sentences than declared".to_string(),
                });
            }
        }
        if sentences.len() != declared {
            return Err(IndexError::Malformed {
                line: declared + 2,
                message: format!("declared {declared} sentences, found {}", sentences.len()),
            });
        }
        Ok(build_index(MonolingualCorpus::new(sentences)))
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// FNV-1a over phrase tokens; mixes the phrase into sampling seeds without
/// depending on process-randomized hashers.
fn fnv1a(phrase: &[String]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for tok in phrase {
        for byte in tok.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash ^= 0x1f;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
