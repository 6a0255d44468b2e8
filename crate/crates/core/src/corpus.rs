//! Corpus ingestion, frequency-thresholded vocabularies, and bilingual
//! dictionary filtering.
//!
//! Input text is expected pre-tokenized: one sentence per line, tokens
//! separated by whitespace. Word segmentation is deliberately out of scope.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("empty token rejected")]
    EmptyToken,
    #[error("token {0:?} contains whitespace")]
    WhitespaceInToken(String),
    #[error("unaligned streams: source has {source_lines} lines, target has {target_lines}")]
    UnalignedStreams {
        source_lines: usize,
        target_lines: usize,
    },
    #[error("vocabulary threshold must be >= 1")]
    ZeroThreshold,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("lexicon entry has an empty {side} phrase")]
    EmptyLexiconPhrase { side: &'static str },
}

/// A tokenized sentence. Tokens are non-empty and contain no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    /// Builds a sentence from explicit tokens, validating the token invariants.
    pub fn new(tokens: Vec<String>) -> Result<Self, CorpusError> {
        for tok in &tokens {
            validate_token(tok)?;
        }
        Ok(Sentence { tokens })
    }

    /// Splits a pre-tokenized line on whitespace. Never fails: whitespace
    /// splitting cannot produce empty or space-bearing tokens.
    pub fn from_line(line: &str) -> Self {
        Sentence {
            tokens: line.split_whitespace().map(str::to_string).collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// True when `phrase` occurs as a contiguous token subsequence.
    /// An empty phrase matches nothing.
    pub fn contains_phrase(&self, phrase: &[String]) -> bool {
        if phrase.is_empty() || phrase.len() > self.tokens.len() {
            return false;
        }
        self.tokens.windows(phrase.len()).any(|w| w == phrase)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tokens.join(" "))
    }
}

pub(crate) fn validate_token(tok: &str) -> Result<(), CorpusError> {
    if tok.is_empty() {
        return Err(CorpusError::EmptyToken);
    }
    if tok.chars().any(char::is_whitespace) {
        return Err(CorpusError::WhitespaceInToken(tok.to_string()));
    }
    Ok(())
}

/// One aligned source/target sentence pair. Both sides are non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SentencePair {
    pub source: Sentence,
    pub target: Sentence,
}

impl SentencePair {
    pub fn swapped(&self) -> SentencePair {
        SentencePair {
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }
}

/// An ordered sequence of sentence pairs; ingestion order is preserved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<SentencePair>) -> Self {
        ParallelCorpus { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source_sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|p| &p.source)
    }

    pub fn target_sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|p| &p.target)
    }

    /// Writes the corpus as two aligned one-sentence-per-line text files.
    pub fn write_files(&self, mut source: impl Write, mut target: impl Write) -> io::Result<()> {
        for pair in &self.pairs {
            writeln!(source, "{}", pair.source)?;
            writeln!(target, "{}", pair.target)?;
        }
        Ok(())
    }
}

/// Sentences with dense integer ids 0..M-1 assigned in ingestion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonolingualCorpus {
    pub sentences: Vec<Sentence>,
}

impl MonolingualCorpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        MonolingualCorpus { sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, id: u32) -> &Sentence {
        &self.sentences[id as usize]
    }
}

/// Counters reported by the ingestion routines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct IngestStats {
    pub kept: usize,
    pub dropped_overlong: usize,
    pub skipped_empty: usize,
}

/// Reads two aligned line streams into a parallel corpus.
///
/// Pairs where either side exceeds `max_len` tokens are dropped; pairs where
/// either side is an empty line are skipped. Both events are counted in the
/// returned stats. Unequal line counts are an error.
pub fn ingest_parallel(
    source_lines: impl BufRead,
    target_lines: impl BufRead,
    max_len: Option<usize>,
) -> Result<(ParallelCorpus, IngestStats), CorpusError> {
    let mut pairs = Vec::new();
    let mut stats = IngestStats::default();
    let mut src_iter = source_lines.lines();
    let mut tgt_iter = target_lines.lines();
    let mut src_count = 0usize;
    let mut tgt_count = 0usize;
    loop {
        match (src_iter.next(), tgt_iter.next()) {
            (None, None) => break,
            (Some(s), Some(t)) => {
                src_count += 1;
                tgt_count += 1;
                let source = Sentence::from_line(&s?);
                let target = Sentence::from_line(&t?);
                if source.is_empty() || target.is_empty() {
                    stats.skipped_empty += 1;
                    continue;
                }
                if let Some(limit) = max_len {
                    if source.len() > limit || target.len() > limit {
                        stats.dropped_overlong += 1;
                        continue;
                    }
                }
                pairs.push(SentencePair { source, target });
            }
            (Some(s), None) => {
                s?;
                src_count += 1;
                // drain the longer side so the error reports real counts
                src_count += src_iter.count();
                return Err(CorpusError::UnalignedStreams {
                    source_lines: src_count,
                    target_lines: tgt_count,
                });
            }
            (None, Some(t)) => {
                t?;
                tgt_count += 1;
                tgt_count += tgt_iter.count();
                return Err(CorpusError::UnalignedStreams {
                    source_lines: src_count,
                    target_lines: tgt_count,
                });
            }
        }
    }
    stats.kept = pairs.len();
    Ok((ParallelCorpus::new(pairs), stats))
}

/// Reads a monolingual file, skipping empty lines.
pub fn ingest_monolingual(
    lines: impl BufRead,
) -> Result<(MonolingualCorpus, IngestStats), CorpusError> {
    let mut sentences = Vec::new();
    let mut stats = IngestStats::default();
    for line in lines.lines() {
        let sentence = Sentence::from_line(&line?);
        if sentence.is_empty() {
            stats.skipped_empty += 1;
        } else {
            sentences.push(sentence);
        }
    }
    stats.kept = sentences.len();
    Ok((MonolingualCorpus::new(sentences), stats))
}

/// Word frequencies plus a threshold `u`; a word is kept iff its exact corpus
/// count is >= `u`. Everything outside the kept set is out-of-vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    counts: HashMap<String, u64>,
    threshold: u64,
    kept: HashSet<String>,
}

impl Vocabulary {
    /// Counts tokens over `sentences` and applies `threshold` (>= 1).
    pub fn build<'a>(
        sentences: impl IntoIterator<Item = &'a Sentence>,
        threshold: u64,
    ) -> Result<Self, CorpusError> {
        if threshold == 0 {
            return Err(CorpusError::ZeroThreshold);
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        for sentence in sentences {
            for tok in sentence.tokens() {
                *counts.entry(tok.clone()).or_insert(0) += 1;
            }
        }
        let kept = counts
            .iter()
            .filter(|(_, &c)| c >= threshold)
            .map(|(w, _)| w.clone())
            .collect();
        Ok(Vocabulary {
            counts,
            threshold,
            kept,
        })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.kept.contains(word)
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn kept(&self) -> &HashSet<String> {
        &self.kept
    }

    pub fn kept_len(&self) -> usize {
        self.kept.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }

    /// Dumps `word<TAB>count` lines, descending count then lexicographic.
    pub fn write_tsv(&self, mut w: impl Write) -> io::Result<()> {
        let mut rows: Vec<(&String, u64)> = self.counts.iter().map(|(k, &v)| (k, v)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (word, count) in rows {
            writeln!(w, "{word}\t{count}")?;
        }
        Ok(())
    }

    /// Reads a dump produced by [`Vocabulary::write_tsv`]. The threshold is not
    /// part of the dump and must be supplied.
    pub fn read_tsv(r: impl BufRead, threshold: u64) -> Result<Self, CorpusError> {
        if threshold == 0 {
            return Err(CorpusError::ZeroThreshold);
        }
        let mut counts = HashMap::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (word, count) = line.split_once('\t').ok_or(CorpusError::Malformed {
                line: idx + 1,
                message: "expected word<TAB>count".to_string(),
            })?;
            validate_token(word)?;
            let count: u64 = count.parse().map_err(|_| CorpusError::Malformed {
                line: idx + 1,
                message: format!("bad count {count:?}"),
            })?;
            counts.insert(word.to_string(), count);
        }
        let kept = counts
            .iter()
            .filter(|(_, &c)| c >= threshold)
            .map(|(w, _)| w.clone())
            .collect();
        Ok(Vocabulary {
            counts,
            threshold,
            kept,
        })
    }
}

/// Free-function form of [`Vocabulary::build`].
pub fn build_vocabulary<'a>(
    sentences: impl IntoIterator<Item = &'a Sentence>,
    threshold: u64,
) -> Result<Vocabulary, CorpusError> {
    Vocabulary::build(sentences, threshold)
}

/// True iff `word` is outside the vocabulary's kept set. Rejects tokens that
/// violate the token invariants rather than answering for them.
pub fn is_oov(word: &str, vocab: &Vocabulary) -> Result<bool, CorpusError> {
    validate_token(word)?;
    Ok(!vocab.contains(word))
}

/// One dictionary entry: a source phrase and one of its translations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexiconEntry {
    pub source_phrase: Vec<String>,
    pub target_phrase: Vec<String>,
}

impl LexiconEntry {
    pub fn new(
        source_phrase: Vec<String>,
        target_phrase: Vec<String>,
    ) -> Result<Self, CorpusError> {
        if source_phrase.is_empty() {
            return Err(CorpusError::EmptyLexiconPhrase { side: "source" });
        }
        if target_phrase.is_empty() {
            return Err(CorpusError::EmptyLexiconPhrase { side: "target" });
        }
        for tok in source_phrase.iter().chain(target_phrase.iter()) {
            validate_token(tok)?;
        }
        Ok(LexiconEntry {
            source_phrase,
            target_phrase,
        })
    }
}

/// A translation lexicon. A source phrase may map to several targets; exact
/// duplicate (source, target) entries are collapsed, keeping first position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BilingualDictionary {
    entries: Vec<LexiconEntry>,
    by_source: HashMap<Vec<String>, Vec<usize>>,
}

impl BilingualDictionary {
    pub fn new(entries: Vec<LexiconEntry>) -> Self {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        let mut by_source: HashMap<Vec<String>, Vec<usize>> = HashMap::new();
        for entry in entries {
            let key = (entry.source_phrase.clone(), entry.target_phrase.clone());
            if !seen.insert(key) {
                continue;
            }
            by_source
                .entry(entry.source_phrase.clone())
                .or_default()
                .push(kept.len());
            kept.push(entry);
        }
        BilingualDictionary {
            entries: kept,
            by_source,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All target phrases recorded for `source`.
    pub fn targets_for(&self, source: &[String]) -> Vec<&[String]> {
        match self.by_source.get(source) {
            Some(indices) => indices
                .iter()
                .map(|&i| self.entries[i].target_phrase.as_slice())
                .collect(),
            None => Vec::new(),
        }
    }

    /// Parses `source_phrase<TAB>target_phrase` lines, phrases space-separated.
    pub fn read_tsv(r: impl BufRead) -> Result<Self, CorpusError> {
        let mut entries = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (src, tgt) = line.split_once('\t').ok_or(CorpusError::Malformed {
                line: idx + 1,
                message: "expected source<TAB>target".to_string(),
            })?;
            let source: Vec<String> = src.split_whitespace().map(str::to_string).collect();
            let target: Vec<String> = tgt.split_whitespace().map(str::to_string).collect();
            entries.push(LexiconEntry::new(source, target).map_err(|e| {
                CorpusError::Malformed {
                    line: idx + 1,
                    message: e.to_string(),
                }
            })?);
        }
        Ok(BilingualDictionary::new(entries))
    }

    pub fn write_tsv(&self, mut w: impl Write) -> io::Result<()> {
        for entry in &self.entries {
            writeln!(
                w,
                "{}\t{}",
                entry.source_phrase.join(" "),
                entry.target_phrase.join(" ")
            )?;
        }
        Ok(())
    }
}

/// Retains exactly the entries whose source phrase contains at least one
/// token outside `source_vocab`'s kept set. For single-token sources this is
/// the usual "source word is rare or unseen" filter.
pub fn filter_dictionary(
    dic: &BilingualDictionary,
    source_vocab: &Vocabulary,
) -> BilingualDictionary {
    let entries = dic
        .entries
        .iter()
        .filter(|e| e.source_phrase.iter().any(|t| !source_vocab.contains(t)))
        .cloned()
        .collect();
    BilingualDictionary::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn corpus_from(lines: &[&str]) -> Vec<Sentence> {
        lines.iter().map(|l| Sentence::from_line(l)).collect()
    }

    #[test]
    fn ingest_identity_case() {
        let (corpus, stats) =
            ingest_parallel(Cursor::new("a b\n"), Cursor::new("x y\n"), Some(50)).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.pairs[0].source.tokens(), ["a", "b"]);
        assert_eq!(stats.kept, 1);
        assert_eq!(stats.dropped_overlong, 0);
    }

    #[test]
    fn ingest_drops_overlong_pairs() {
        let (corpus, stats) =
            ingest_parallel(Cursor::new("a b c\n"), Cursor::new("x\n"), Some(2)).unwrap();
        assert!(corpus.is_empty());
        assert_eq!(stats.dropped_overlong, 1);
    }

    #[test]
    fn ingest_unequal_counts_is_error() {
        let err = ingest_parallel(Cursor::new("a\nb\n"), Cursor::new("x\n"), None).unwrap_err();
        match err {
            CorpusError::UnalignedStreams {
                source_lines,
                target_lines,
            } => {
                assert_eq!(source_lines, 2);
                assert_eq!(target_lines, 1);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn ingest_skips_empty_lines_with_count() {
        let (corpus, stats) =
            ingest_parallel(Cursor::new("a\n\nb\n"), Cursor::new("x\ny\nz\n"), None).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(stats.skipped_empty, 1);
    }

    #[test]
    fn vocabulary_threshold_is_inclusive() {
        let sentences = corpus_from(&["a a b", "a c b"]);
        let vocab = Vocabulary::build(&sentences, 2).unwrap();
        assert_eq!(vocab.count("a"), 3);
        assert_eq!(vocab.count("b"), 2);
        assert_eq!(vocab.count("c"), 1);
        assert!(vocab.contains("a"));
        assert!(vocab.contains("b"));
        assert!(!vocab.contains("c"));
    }

    #[test]
    fn vocabulary_high_threshold_keeps_nothing() {
        let sentences = corpus_from(&["a a b", "a c b"]);
        let vocab = Vocabulary::build(&sentences, 4).unwrap();
        assert_eq!(vocab.kept_len(), 0);
    }

    #[test]
    fn vocabulary_threshold_one_keeps_all() {
        let sentences = corpus_from(&["a a b", "a c b"]);
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        assert_eq!(vocab.kept_len(), 3);
    }

    #[test]
    fn empty_input_gives_empty_vocabulary() {
        let vocab = Vocabulary::build(&[] as &[Sentence], 1).unwrap();
        assert_eq!(vocab.kept_len(), 0);
        assert_eq!(vocab.total_tokens(), 0);
    }

    #[test]
    fn is_oov_basic() {
        let sentences = corpus_from(&["a b"]);
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        assert!(!is_oov("a", &vocab).unwrap());
        assert!(is_oov("c", &vocab).unwrap());
        assert!(is_oov("", &vocab).is_err());
    }

    #[test]
    fn filter_retains_oov_sourced_entries() {
        let sentences = corpus_from(&["a b"]);
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        let dic = BilingualDictionary::new(vec![
            LexiconEntry::new(vec!["a".into()], vec!["A".into()]).unwrap(),
            LexiconEntry::new(vec!["c".into()], vec!["C".into()]).unwrap(),
        ]);
        let filtered = filter_dictionary(&dic, &vocab);
        assert_eq!(filtered.len(), 1);
        assert_eq!(filtered.entries()[0].source_phrase, vec!["c".to_string()]);
    }

    #[test]
    fn filter_drops_fully_known_entry() {
        let sentences = corpus_from(&["a"]);
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        let dic =
            BilingualDictionary::new(vec![
                LexiconEntry::new(vec!["a".into()], vec!["A".into()]).unwrap()
            ]);
        assert!(filter_dictionary(&dic, &vocab).is_empty());
    }

    #[test]
    fn filter_keeps_multi_token_source_with_one_oov_token() {
        let sentences = corpus_from(&["c"]);
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(
            vec!["c".into(), "d".into()],
            vec!["CD".into()],
        )
        .unwrap()]);
        assert_eq!(filter_dictionary(&dic, &vocab).len(), 1);
    }

    #[test]
    fn filter_is_idempotent() {
        let sentences = corpus_from(&["a a b x"]);
        let vocab = Vocabulary::build(&sentences, 2).unwrap();
        let dic = BilingualDictionary::new(vec![
            LexiconEntry::new(vec!["a".into()], vec!["A".into()]).unwrap(),
            LexiconEntry::new(vec!["x".into()], vec!["X".into()]).unwrap(),
            LexiconEntry::new(vec!["q".into()], vec!["Q".into()]).unwrap(),
        ]);
        let once = filter_dictionary(&dic, &vocab);
        let twice = filter_dictionary(&once, &vocab);
        assert_eq!(once, twice);
    }

    #[test]
    fn dictionary_deduplicates_exact_entries() {
        let e = LexiconEntry::new(vec!["a".into()], vec!["A".into()]).unwrap();
        let dic = BilingualDictionary::new(vec![e.clone(), e.clone()]);
        assert_eq!(dic.len(), 1);
        let e2 = LexiconEntry::new(vec!["a".into()], vec!["B".into()]).unwrap();
        let dic = BilingualDictionary::new(vec![e.clone(), e2]);
        assert_eq!(dic.len(), 2);
        assert_eq!(dic.targets_for(&["a".to_string()]).len(), 2);
    }

    #[test]
    fn dictionary_tsv_round_trip() {
        let text = "zorblat\tgizmo\nc d\tC D\n";
        let dic = BilingualDictionary::read_tsv(Cursor::new(text)).unwrap();
        assert_eq!(dic.len(), 2);
        let mut out = Vec::new();
        dic.write_tsv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn vocab_tsv_sorted_and_round_trips() {
        let sentences = corpus_from(&["b a a c c"]);
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        let mut out = Vec::new();
        vocab.write_tsv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "a\t2\nc\t2\nb\t1\n");
        let reread = Vocabulary::read_tsv(Cursor::new(text.as_bytes()), 1).unwrap();
        assert_eq!(reread, vocab);
    }

    #[test]
    fn contains_phrase_contiguous_only() {
        let s = Sentence::from_line("q y z");
        assert!(s.contains_phrase(&["q".into(), "y".into()]));
        assert!(!s.contains_phrase(&["q".into(), "z".into()]));
        assert!(!s.contains_phrase(&[]));
    }

    proptest! {
        #[test]
        fn counts_sum_to_total_tokens(lines in proptest::collection::vec("[a-e]( [a-e]){0,6}", 0..20)) {
            let sentences: Vec<Sentence> = lines.iter().map(|l| Sentence::from_line(l)).collect();
            let total: usize = sentences.iter().map(|s| s.len()).sum();
            let vocab = Vocabulary::build(&sentences, 2).unwrap();
            prop_assert_eq!(vocab.total_tokens(), total as u64);
        }

        #[test]
        fn kept_sets_shrink_as_threshold_grows(
            lines in proptest::collection::vec("[a-e]( [a-e]){0,6}", 1..20),
            u1 in 1u64..5,
            bump in 0u64..5,
        ) {
            let sentences: Vec<Sentence> = lines.iter().map(|l| Sentence::from_line(l)).collect();
            let lo = Vocabulary::build(&sentences, u1).unwrap();
            let hi = Vocabulary::build(&sentences, u1 + bump).unwrap();
            prop_assert!(hi.kept().is_subset(lo.kept()));
        }

        #[test]
        fn ingest_without_limit_preserves_pairs(lines in proptest::collection::vec("[a-e]( [a-e]){0,6}", 1..20)) {
            let text = lines.join("\n") + "\n";
            let (corpus, stats) = ingest_parallel(
                Cursor::new(text.clone()),
                Cursor::new(text),
                None,
            ).unwrap();
            prop_assert_eq!(corpus.len(), lines.len());
            prop_assert_eq!(stats.kept, lines.len());
            for (pair, line) in corpus.pairs.iter().zip(&lines) {
                prop_assert_eq!(&pair.source.to_string(), line);
            }
        }
    }
}
