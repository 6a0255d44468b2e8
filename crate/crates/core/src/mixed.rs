//! Mixed word/character relabeling.
//!
//! Frequent words pass through unchanged; out-of-vocabulary words are
//! rewritten as character runs in which every character carries a positional
//! marker: the first character is prefixed with the begin marker, interior
//! characters with the middle marker, and the last character with the end
//! marker. A one-character word becomes a single begin-marked token.
//! `restore` is the exact inverse on well-formed input and a total, repairing
//! function on anything else (machine translation output can be malformed).
//!
//! "Character" means Unicode scalar value throughout, which is deterministic
//! and language-neutral (one CJK ideograph is one character).

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{BilingualDictionary, ParallelCorpus, Sentence, SentencePair, Vocabulary};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MixedError {
    #[error("invalid marker scheme: {0}")]
    InvalidScheme(String),
    #[error("token {token:?} contains a marker string; refusing to relabel (escaping would break round-trips)")]
    MarkerCollision { token: String },
    #[error("line {line}: token {token:?} contains a marker string")]
    MarkerCollisionAt { token: String, line: usize },
    #[error("dictionary entry {entry}: token {token:?} contains a marker string")]
    MarkerCollisionInDictionary { token: String, entry: usize },
}

/// The three positional marker strings. Defaults are `⟨B⟩`, `⟨M⟩`, `⟨E⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerScheme {
    begin: String,
    middle: String,
    end: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marker {
    Begin,
    Middle,
    End,
}

impl Default for MarkerScheme {
    fn default() -> Self {
        MarkerScheme {
            begin: "⟨B⟩".to_string(),
            middle: "⟨M⟩".to_string(),
            end: "⟨E⟩".to_string(),
        }
    }
}

impl MarkerScheme {
    /// Markers must be non-empty, pairwise distinct, whitespace-free, and no
    /// marker may be a prefix of another (so a token matches at most one).
    pub fn new(begin: &str, middle: &str, end: &str) -> Result<Self, MixedError> {
        let markers = [begin, middle, end];
        for m in markers {
            if m.is_empty() {
                return Err(MixedError::InvalidScheme("empty marker".to_string()));
            }
            if m.chars().any(char::is_whitespace) {
                return Err(MixedError::InvalidScheme(format!(
                    "marker {m:?} contains whitespace"
                )));
            }
        }
        for (i, a) in markers.iter().enumerate() {
            for (j, b) in markers.iter().enumerate() {
                if i != j && b.starts_with(a) {
                    return Err(MixedError::InvalidScheme(format!(
                        "marker {a:?} is a prefix of {b:?}"
                    )));
                }
            }
        }
        Ok(MarkerScheme {
            begin: begin.to_string(),
            middle: middle.to_string(),
            end: end.to_string(),
        })
    }

    pub fn begin(&self) -> &str {
        &self.begin
    }

    pub fn middle(&self) -> &str {
        &self.middle
    }

    pub fn end(&self) -> &str {
        &self.end
    }

    fn collides(&self, token: &str) -> bool {
        token.contains(&self.begin) || token.contains(&self.middle) || token.contains(&self.end)
    }

    /// Splits a marked token into its marker kind and remaining content.
    /// Returns None for plain tokens. The no-prefix invariant guarantees at
    /// most one marker can match.
    fn classify<'t>(&self, token: &'t str) -> Option<(Marker, &'t str)> {
        if let Some(rest) = token.strip_prefix(self.begin.as_str()) {
            Some((Marker::Begin, rest))
        } else if let Some(rest) = token.strip_prefix(self.middle.as_str()) {
            Some((Marker::Middle, rest))
        } else {
            token
                .strip_prefix(self.end.as_str())
                .map(|rest| (Marker::End, rest))
        }
    }
}

/// A sentence whose tokens are either plain words or marked character tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedSentence {
    tokens: Vec<String>,
}

impl MixedSentence {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        MixedSentence { tokens }
    }

    pub fn from_line(line: &str) -> Self {
        MixedSentence {
            tokens: line.split_whitespace().map(str::to_string).collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Marked tokens are valid sentence tokens, so the conversion is direct.
    pub fn into_sentence(self) -> Sentence {
        Sentence::new(self.tokens).expect("mixed tokens satisfy sentence invariants")
    }
}

impl std::fmt::Display for MixedSentence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.tokens.join(" "))
    }
}

/// Rewrites one word as a marked character run.
pub fn relabel_word(word: &str, scheme: &MarkerScheme) -> Result<Vec<String>, MixedError> {
    debug_assert!(!word.is_empty());
    if scheme.collides(word) {
        return Err(MixedError::MarkerCollision {
            token: word.to_string(),
        });
    }
    let chars: Vec<char> = word.chars().collect();
    let last = chars.len() - 1;
    Ok(chars
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let marker = if i == 0 {
                &scheme.begin
            } else if i == last {
                &scheme.end
            } else {
                &scheme.middle
            };
            format!("{marker}{c}")
        })
        .collect())
}

/// In-vocabulary tokens pass through; OOV tokens are replaced inline by their
/// marked character run. Any token containing a marker string is rejected,
/// in-vocabulary or not, since it would corrupt the inverse.
pub fn relabel_sentence(
    s: &Sentence,
    vocab: &Vocabulary,
    scheme: &MarkerScheme,
) -> Result<MixedSentence, MixedError> {
    let mut tokens = Vec::with_capacity(s.len());
    for tok in s.tokens() {
        if scheme.collides(tok) {
            return Err(MixedError::MarkerCollision { token: tok.clone() });
        }
        if vocab.contains(tok) {
            tokens.push(tok.clone());
        } else {
            tokens.extend(relabel_word(tok, scheme)?);
        }
    }
    Ok(MixedSentence { tokens })
}

/// Result of [`restore`]: the recovered sentence plus how many malformed
/// marked runs had to be repaired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restored {
    pub sentence: Sentence,
    pub repaired_runs: usize,
}

/// Inverse of [`relabel_sentence`]. Total: malformed input never aborts.
///
/// Repair rules, applied while scanning left to right:
/// - a begin-marked token opens a run; middle-marked tokens extend it and an
///   end-marked token completes it as one word;
/// - a begin-marked token followed by neither a middle nor an end token is a
///   complete one-character word (this is how one-character words relabel);
/// - a middle or end token with no open run is stripped of its marker and
///   emitted as a standalone word, counting one repair;
/// - a run with middle characters that never sees its end token is joined
///   into one word anyway, counting one repair;
/// - a bare marker token with no content is dropped, counting one repair.
///
/// Marked-token content longer than one character is accepted verbatim.
pub fn restore(m: &MixedSentence, scheme: &MarkerScheme) -> Restored {
    let mut out: Vec<String> = Vec::with_capacity(m.tokens.len());
    let mut repairs = 0usize;
    // open run: accumulated word plus whether any middle token was seen
    let mut run: Option<(String, bool)> = None;

    fn close(run: &mut Option<(String, bool)>, out: &mut Vec<String>, repairs: &mut usize) {
        if let Some((word, saw_middle)) = run.take() {
            if saw_middle {
                *repairs += 1;
            }
            out.push(word);
        }
    }

    for tok in &m.tokens {
        match scheme.classify(tok) {
            None => {
                close(&mut run, &mut out, &mut repairs);
                out.push(tok.clone());
            }
            Some((marker, content)) => {
                if content.is_empty() {
                    // bare marker: nothing to emit
                    close(&mut run, &mut out, &mut repairs);
                    repairs += 1;
                    continue;
                }
                match marker {
                    Marker::Begin => {
                        close(&mut run, &mut out, &mut repairs);
                        run = Some((content.to_string(), false));
                    }
                    Marker::Middle => match run.as_mut() {
                        Some((word, saw_middle)) => {
                            word.push_str(content);
                            *saw_middle = true;
                        }
                        None => {
                            repairs += 1;
                            out.push(content.to_string());
                        }
                    },
                    Marker::End => match run.take() {
                        Some((mut word, _)) => {
                            word.push_str(content);
                            out.push(word);
                        }
                        None => {
                            repairs += 1;
                            out.push(content.to_string());
                        }
                    },
                }
            }
        }
    }
    close(&mut run, &mut out, &mut repairs);

    Restored {
        sentence: Sentence::new(out).expect("restored tokens satisfy sentence invariants"),
        repaired_runs: repairs,
    }
}

/// True when every marked token sits inside a well-formed run: one begin
/// token, zero or more middle tokens, then an end token, or a lone begin
/// token (one-character word). Every [`relabel_sentence`] output passes.
pub fn is_well_formed(m: &MixedSentence, scheme: &MarkerScheme) -> bool {
    #[derive(PartialEq)]
    enum State {
        Ground,
        AfterBegin,
        InMiddle,
    }
    let mut state = State::Ground;
    for tok in &m.tokens {
        match scheme.classify(tok) {
            None => {
                if state == State::InMiddle {
                    return false; // run with middles must close with an end token
                }
                state = State::Ground;
            }
            Some((_, "")) => return false,
            Some((Marker::Begin, _)) => {
                if state == State::InMiddle {
                    return false;
                }
                state = State::AfterBegin;
            }
            Some((Marker::Middle, _)) => {
                if state == State::Ground {
                    return false;
                }
                state = State::InMiddle;
            }
            Some((Marker::End, _)) => {
                if state == State::Ground {
                    return false;
                }
                state = State::Ground;
            }
        }
    }
    state != State::InMiddle
}

/// Relabels both sides of every pair against their language's vocabulary.
/// With `include_dic`, every lexicon entry is appended as one extra pair,
/// relabeled the same way.
pub fn transform_training_data(
    corpus: &ParallelCorpus,
    dic: &BilingualDictionary,
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
    include_dic: bool,
    scheme: &MarkerScheme,
) -> Result<ParallelCorpus, MixedError> {
    let results: Vec<Result<SentencePair, MixedError>> = corpus
        .pairs
        .par_iter()
        .map(|pair| {
            Ok(SentencePair {
                source: relabel_sentence(&pair.source, src_vocab, scheme)?.into_sentence(),
                target: relabel_sentence(&pair.target, tgt_vocab, scheme)?.into_sentence(),
            })
        })
        .collect();

    let mut pairs = Vec::with_capacity(results.len() + if include_dic { dic.len() } else { 0 });
    for (idx, result) in results.into_iter().enumerate() {
        match result {
            Ok(pair) => pairs.push(pair),
            Err(MixedError::MarkerCollision { token }) => {
                return Err(MixedError::MarkerCollisionAt {
                    token,
                    line: idx + 1,
                })
            }
            Err(other) => return Err(other),
        }
    }

    if include_dic {
        for (idx, entry) in dic.entries().iter().enumerate() {
            let as_pair = (|| {
                let source = Sentence::new(entry.source_phrase.clone())
                    .expect("lexicon phrases satisfy token invariants");
                let target = Sentence::new(entry.target_phrase.clone())
                    .expect("lexicon phrases satisfy token invariants");
                Ok(SentencePair {
                    source: relabel_sentence(&source, src_vocab, scheme)?.into_sentence(),
                    target: relabel_sentence(&target, tgt_vocab, scheme)?.into_sentence(),
                })
            })();
            match as_pair {
                Ok(pair) => pairs.push(pair),
                Err(MixedError::MarkerCollision { token }) => {
                    return Err(MixedError::MarkerCollisionInDictionary {
                        token,
                        entry: idx + 1,
                    })
                }
                Err(other) => return Err(other),
            }
        }
    }

    Ok(ParallelCorpus::new(pairs))
}
