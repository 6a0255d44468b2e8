//! Evaluation: case-insensitive corpus-level n-gram BLEU with brevity
//! penalty and multi-reference support, the dictionary hit rate, and
//! vocabulary-size reporting.

use std::collections::HashMap;

use thiserror::Error;

use crate::corpus::{BilingualDictionary, ParallelCorpus, Sentence, Vocabulary};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluation set is empty")]
    Empty,
    #[error("sources, references and hypotheses must be line-aligned: {0}")]
    LengthMismatch(String),
    #[error("sentence {0} has no reference")]
    MissingReference(usize),
    #[error("maximum n-gram order must be >= 1")]
    ZeroOrder,
}

/// Line-aligned sources, per-sentence reference sets, and one hypothesis per
/// source. Reference counts may be ragged; scoring requires at least one
/// reference per sentence.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub sources: Vec<Sentence>,
    pub references: Vec<Vec<Sentence>>,
    pub hypotheses: Vec<Sentence>,
}

impl EvalSet {
    pub fn new(
        sources: Vec<Sentence>,
        references: Vec<Vec<Sentence>>,
        hypotheses: Vec<Sentence>,
    ) -> Result<Self, EvalError> {
        if sources.len() != references.len() || sources.len() != hypotheses.len() {
            return Err(EvalError::LengthMismatch(format!(
                "{} sources, {} reference rows, {} hypotheses",
                sources.len(),
                references.len(),
                hypotheses.len()
            )));
        }
        Ok(EvalSet {
            sources,
            references,
            hypotheses,
        })
    }

    /// For metrics that never look at the source side (BLEU), with empty
    /// placeholder sources.
    pub fn for_scoring(
        references: Vec<Vec<Sentence>>,
        hypotheses: Vec<Sentence>,
    ) -> Result<Self, EvalError> {
        let sources = vec![Sentence::from_line(""); hypotheses.len()];
        Self::new(sources, references, hypotheses)
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

fn fold_case(s: &Sentence) -> Vec<String> {
    s.tokens().iter().map(|t| t.to_lowercase()).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts: HashMap<&[String], u64> = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU in [0, 1].
///
/// Clipped n-gram matches are aggregated over the whole corpus (clipping
/// against the maximum per-reference count), combined as a uniform geometric
/// mean over orders 1..=`max_order`, and multiplied by the brevity penalty
/// exp(min(0, 1 - r/c)) where r sums each sentence's closest reference
/// length (ties toward the shorter reference).
///
/// Orders with zero candidate n-grams corpus-wide are excluded from the
/// geometric mean, so short fixtures do not hit log(0); an included order
/// with zero matches makes the score exactly 0 (no smoothing).
pub fn bleu(set: &EvalSet, max_order: usize, case_insensitive: bool) -> Result<f64, EvalError> {
    if set.is_empty() {
        return Err(EvalError::Empty);
    }
    if max_order == 0 {
        return Err(EvalError::ZeroOrder);
    }
    let mut matched = vec![0u64; max_order];
    let mut total = vec![0u64; max_order];
    let mut hyp_len_sum = 0usize;
    let mut ref_len_sum = 0usize;

    for (idx, (hyp, refs)) in set.hypotheses.iter().zip(&set.references).enumerate() {
        if refs.is_empty() {
            return Err(EvalError::MissingReference(idx + 1));
        }
        let hyp_tokens = if case_insensitive {
            fold_case(hyp)
        } else {
            hyp.tokens().to_vec()
        };
        let ref_tokens: Vec<Vec<String>> = refs
            .iter()
            .map(|r| {
                if case_insensitive {
                    fold_case(r)
                } else {
                    r.tokens().to_vec()
                }
            })
            .collect();

        hyp_len_sum += hyp_tokens.len();
        ref_len_sum += closest_length(hyp_tokens.len(), &ref_tokens);

        for n in 1..=max_order {
            let hyp_ngrams = ngram_counts(&hyp_tokens, n);
            if hyp_ngrams.is_empty() {
                continue;
            }
            let mut max_ref: HashMap<&[String], u64> = HashMap::new();
            for r in &ref_tokens {
                for (ngram, count) in ngram_counts(r, n) {
                    let slot = max_ref.entry(ngram).or_insert(0);
                    *slot = (*slot).max(count);
                }
            }
            for (ngram, count) in hyp_ngrams {
                total[n - 1] += count;
                matched[n - 1] += count.min(max_ref.get(ngram).copied().unwrap_or(0));
            }
        }
    }

    if hyp_len_sum == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    let mut included = 0usize;
    for n in 0..max_order {
        if total[n] == 0 {
            continue;
        }
        if matched[n] == 0 {
            return Ok(0.0);
        }
        log_sum += (matched[n] as f64 / total[n] as f64).ln();
        included += 1;
    }
    if included == 0 {
        return Ok(0.0);
    }
    let geo_mean = (log_sum / included as f64).exp();
    let bp = if hyp_len_sum >= ref_len_sum {
        1.0
    } else {
        (1.0 - ref_len_sum as f64 / hyp_len_sum as f64).exp()
    };
    Ok(bp * geo_mean)
}

fn closest_length(hyp_len: usize, refs: &[Vec<String>]) -> usize {
    let mut best = refs[0].len();
    for r in &refs[1..] {
        let len = r.len();
        let d_new = len.abs_diff(hyp_len);
        let d_best = best.abs_diff(hyp_len);
        if d_new < d_best || (d_new == d_best && len < best) {
            best = len;
        }
    }
    best
}

/// Smoothed sentence-level BLEU, for debugging only: add-one smoothing on
/// every order above 1 that has candidates, brevity penalty as in [`bleu`].
/// Corpus scores in reports always come from the unsmoothed corpus metric.
pub fn sentence_bleu_smoothed(
    hypothesis: &Sentence,
    references: &[Sentence],
    max_order: usize,
    case_insensitive: bool,
) -> f64 {
    let hyp_tokens = if case_insensitive {
        fold_case(hypothesis)
    } else {
        hypothesis.tokens().to_vec()
    };
    let ref_tokens: Vec<Vec<String>> = references
        .iter()
        .map(|r| {
            if case_insensitive {
                fold_case(r)
            } else {
                r.tokens().to_vec()
            }
        })
        .collect();
    if hyp_tokens.is_empty() || ref_tokens.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut included = 0usize;
    for n in 1..=max_order {
        let hyp_ngrams = ngram_counts(&hyp_tokens, n);
        if hyp_ngrams.is_empty() {
            continue;
        }
        let mut max_ref: HashMap<&[String], u64> = HashMap::new();
        for r in &ref_tokens {
            for (ngram, count) in ngram_counts(r, n) {
                let slot = max_ref.entry(ngram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        let mut m = 0u64;
        let mut t = 0u64;
        for (ngram, count) in hyp_ngrams {
            t += count;
            m += count.min(max_ref.get(ngram).copied().unwrap_or(0));
        }
        let (m, t) = if n > 1 { (m + 1, t + 1) } else { (m, t) };
        if m == 0 {
            return 0.0;
        }
        log_sum += (m as f64 / t as f64).ln();
        included += 1;
    }
    if included == 0 {
        return 0.0;
    }
    let geo_mean = (log_sum / included as f64).exp();
    let r = closest_length(hyp_tokens.len(), &ref_tokens);
    let bp = if hyp_tokens.len() >= r {
        1.0
    } else {
        (1.0 - r as f64 / hyp_tokens.len() as f64).exp()
    };
    bp * geo_mean
}

/// Hit-rate counting granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HitMode {
    /// Unit is the lexicon entry: covered when its source phrase occurs in
    /// some eval source, hit when at least one hypothesis for such a
    /// sentence contains any of the source's dictionary targets.
    #[default]
    TypeLevel,
    /// Unit is an (entry, sentence) occurrence; every covering sentence is
    /// scored separately.
    TokenLevel,
}

/// Per-entry outcome detail.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HitRow {
    pub source: String,
    pub target: String,
    /// Eval sentences whose source contains the entry's source phrase.
    pub covered_sentences: usize,
    /// Covered sentences whose hypothesis contains any dictionary target
    /// for this source (contiguous, case-insensitive).
    pub hit_sentences: usize,
    pub covered: bool,
    pub hit: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HitReport {
    pub covered_entries: usize,
    pub hits: usize,
    /// None when nothing is covered: the rate is undefined, not zero.
    pub rate: Option<f64>,
    pub rows: Vec<HitRow>,
}

/// Measures how many covered dictionary entries made it into the hypotheses.
///
/// Source coverage is exact surface matching; target hits are
/// case-insensitive and count the target anywhere in the hypothesis, which
/// is deliberately lax (no alignment check) and is noted in report output.
pub fn hit_rate(dic: &BilingualDictionary, set: &EvalSet, mode: HitMode) -> HitReport {
    let folded_hyps: Vec<Vec<String>> = set.hypotheses.iter().map(fold_case).collect();
    let mut rows = Vec::with_capacity(dic.len());
    for entry in dic.entries() {
        let targets: Vec<Vec<String>> = dic
            .targets_for(&entry.source_phrase)
            .into_iter()
            .map(|t| t.iter().map(|w| w.to_lowercase()).collect())
            .collect();
        let mut covered_sentences = 0usize;
        let mut hit_sentences = 0usize;
        for (source, hyp) in set.sources.iter().zip(&folded_hyps) {
            if !source.contains_phrase(&entry.source_phrase) {
                continue;
            }
            covered_sentences += 1;
            if targets.iter().any(|t| contains_subsequence(hyp, t)) {
                hit_sentences += 1;
            }
        }
        rows.push(HitRow {
            source: entry.source_phrase.join(" "),
            target: entry.target_phrase.join(" "),
            covered_sentences,
            hit_sentences,
            covered: covered_sentences > 0,
            hit: hit_sentences > 0,
        });
    }
    let (covered_entries, hits) = match mode {
        HitMode::TypeLevel => (
            rows.iter().filter(|r| r.covered).count(),
            rows.iter().filter(|r| r.hit).count(),
        ),
        HitMode::TokenLevel => (
            rows.iter().map(|r| r.covered_sentences).sum(),
            rows.iter().map(|r| r.hit_sentences).sum(),
        ),
    };
    let rate = if covered_entries == 0 {
        None
    } else {
        Some(hits as f64 / covered_entries as f64)
    };
    HitReport {
        covered_entries,
        hits,
        rate,
        rows,
    }
}

fn contains_subsequence(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty()
        && needle.len() <= haystack.len()
        && haystack.windows(needle.len()).any(|w| w == needle)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VocabReportRow {
    pub name: String,
    pub source_vocab: usize,
    pub target_vocab: usize,
}

/// Kept-vocabulary sizes for each named corpus variant under the given
/// thresholds.
pub fn vocab_report(
    corpora: &[(&str, &ParallelCorpus)],
    source_threshold: u64,
    target_threshold: u64,
) -> Vec<VocabReportRow> {
    corpora
        .iter()
        .map(|(name, corpus)| {
            let src = Vocabulary::build(corpus.source_sentences(), source_threshold)
                .expect("threshold validated by caller");
            let tgt = Vocabulary::build(corpus.target_sentences(), target_threshold)
                .expect("threshold validated by caller");
            VocabReportRow {
                name: name.to_string(),
                source_vocab: src.kept_len(),
                target_vocab: tgt.kept_len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LexiconEntry;
    use proptest::prelude::*;

    fn s(line: &str) -> Sentence {
        Sentence::from_line(line)
    }

    fn single_ref_set(hyps: &[&str], refs: &[&str]) -> EvalSet {
        EvalSet::for_scoring(
            refs.iter().map(|r| vec![s(r)]).collect(),
            hyps.iter().map(|h| s(h)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_scores_one() {
        let set = single_ref_set(&["the cat sat", "on a mat"], &["the cat sat", "on a mat"]);
        assert_eq!(bleu(&set, 4, true).unwrap(), 1.0);
    }

    #[test]
    fn short_hypothesis_pays_brevity_penalty() {
        // precisions 1 at orders 1..3, order 4 has no candidates, BP = e^(1-4/3)
        let set = single_ref_set(&["the cat sat"], &["the cat sat down"]);
        let expected = (1.0f64 - 4.0 / 3.0).exp();
        assert!((bleu(&set, 4, true).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn disjoint_tokens_score_zero() {
        let set = single_ref_set(&["x y"], &["a b"]);
        assert_eq!(bleu(&set, 4, true).unwrap(), 0.0);
    }

    #[test]
    fn clipping_caps_repeated_ngrams() {
        // "the" appears twice in the hypothesis, once in the reference
        let set = single_ref_set(&["the the"], &["the cat"]);
        // 1-grams: 1 of 2 match; 2-grams: 0 of 1 -> zero at an included order
        assert_eq!(bleu(&set, 2, true).unwrap(), 0.0);
        // order 1 only: clipped precision 1/2, BP = 1
        assert_eq!(bleu(&set, 1, true).unwrap(), 0.5);
    }

    #[test]
    fn multi_reference_takes_max_clip_and_closest_length() {
        let refs = vec![vec![s("the cat sat"), s("a cat sat down here")]];
        let set = EvalSet::for_scoring(refs, vec![s("the cat sat")]).unwrap();
        assert_eq!(bleu(&set, 3, true).unwrap(), 1.0);
    }

    #[test]
    fn closest_ref_length_ties_choose_shorter() {
        // hyp length 3: references of lengths 2 and 4 tie; shorter wins so BP = 1
        let refs = vec![vec![s("a b"), s("a b c d")]];
        let set = EvalSet::for_scoring(refs, vec![s("a b x")]).unwrap();
        let score = bleu(&set, 1, true).unwrap();
        assert!((score - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn case_insensitive_flag_folds_case() {
        let set = single_ref_set(&["The CAT"], &["the cat"]);
        assert_eq!(bleu(&set, 2, true).unwrap(), 1.0);
        assert_eq!(bleu(&set, 2, false).unwrap(), 0.0);
    }

    #[test]
    fn empty_set_is_error() {
        let set = EvalSet::for_scoring(vec![], vec![]).unwrap();
        assert!(matches!(bleu(&set, 4, true), Err(EvalError::Empty)));
    }

    #[test]
    fn missing_reference_is_error() {
        let set = EvalSet::for_scoring(vec![vec![]], vec![s("a")]).unwrap();
        assert!(matches!(
            bleu(&set, 4, true),
            Err(EvalError::MissingReference(1))
        ));
    }

    #[test]
    fn smoothed_sentence_variant_is_nonzero_on_partial_match() {
        let score = sentence_bleu_smoothed(&s("the cat sat"), &[s("the dog sat")], 4, true);
        assert!(score > 0.0 && score < 1.0);
    }

    fn dict(entries: &[(&str, &str)]) -> BilingualDictionary {
        BilingualDictionary::new(
            entries
                .iter()
                .map(|(src, tgt)| {
                    LexiconEntry::new(
                        src.split_whitespace().map(str::to_string).collect(),
                        tgt.split_whitespace().map(str::to_string).collect(),
                    )
                    .unwrap()
                })
                .collect(),
        )
    }

    #[test]
    fn hit_rate_full_hit() {
        let dic = dict(&[("q", "Q")]);
        let set = EvalSet::new(vec![s("x q y")], vec![vec![s("X Q Y")]], vec![s("X q Y")]).unwrap();
        let report = hit_rate(&dic, &set, HitMode::TypeLevel);
        assert_eq!(report.covered_entries, 1);
        assert_eq!(report.hits, 1);
        assert_eq!(report.rate, Some(1.0));
    }

    #[test]
    fn hit_rate_two_of_three() {
        let dic = dict(&[("q", "Q"), ("w", "W"), ("z", "Z")]);
        let set = EvalSet::new(
            vec![s("q a"), s("w b"), s("z c")],
            vec![vec![s("Q A")], vec![s("W B")], vec![s("Z C")]],
            vec![s("Q A"), s("W B"), s("nope C")],
        )
        .unwrap();
        let report = hit_rate(&dic, &set, HitMode::TypeLevel);
        assert_eq!(report.covered_entries, 3);
        assert_eq!(report.hits, 2);
        assert!((report.rate.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hit_rate_undefined_when_nothing_covered() {
        let dic = dict(&[("q", "Q")]);
        let set = EvalSet::new(vec![s("a b")], vec![vec![s("A B")]], vec![s("A B")]).unwrap();
        let report = hit_rate(&dic, &set, HitMode::TypeLevel);
        assert_eq!(report.covered_entries, 0);
        assert_eq!(report.rate, None);
    }

    #[test]
    fn hit_rate_any_target_of_same_source_counts() {
        let dic = dict(&[("q", "Q1"), ("q", "Q2")]);
        let set = EvalSet::new(vec![s("q")], vec![vec![s("Q2")]], vec![s("Q2")]).unwrap();
        let report = hit_rate(&dic, &set, HitMode::TypeLevel);
        // both entries share the source, so both count as hit
        assert_eq!(report.covered_entries, 2);
        assert_eq!(report.hits, 2);
    }

    #[test]
    fn hit_rate_token_level_counts_occurrences() {
        let dic = dict(&[("q", "Q")]);
        let set = EvalSet::new(
            vec![s("q a"), s("q b"), s("c")],
            vec![vec![s("Q A")], vec![s("Q B")], vec![s("C")]],
            vec![s("Q A"), s("nope"), s("C")],
        )
        .unwrap();
        let report = hit_rate(&dic, &set, HitMode::TokenLevel);
        assert_eq!(report.covered_entries, 2);
        assert_eq!(report.hits, 1);
        assert_eq!(report.rate, Some(0.5));
    }

    #[test]
    fn hit_rate_target_match_is_case_insensitive() {
        let dic = dict(&[("q", "Quota")]);
        let set = EvalSet::new(vec![s("q")], vec![vec![s("x")]], vec![s("QUOTA")]).unwrap();
        let report = hit_rate(&dic, &set, HitMode::TypeLevel);
        assert_eq!(report.hits, 1);
    }

    #[test]
    fn vocab_report_matches_vocabulary_sizes() {
        let corpus = ParallelCorpus::new(vec![crate::corpus::SentencePair {
            source: s("a a b"),
            target: s("X Y"),
        }]);
        let rows = vocab_report(&[("baseline", &corpus)], 2, 1);
        assert_eq!(rows[0].source_vocab, 1);
        assert_eq!(rows[0].target_vocab, 2);
        let empty = ParallelCorpus::default();
        let rows = vocab_report(&[("empty", &empty)], 2, 1);
        assert_eq!((rows[0].source_vocab, rows[0].target_vocab), (0, 0));
    }

    proptest! {
        #[test]
        fn bleu_bounded_and_permutation_invariant(
            data in proptest::collection::vec(("[a-c]( [a-c]){0,4}", "[a-c]( [a-c]){0,4}"), 1..6),
            rotate in 0usize..5,
        ) {
            let hyps: Vec<Sentence> = data.iter().map(|(h, _)| s(h)).collect();
            let refs: Vec<Vec<Sentence>> = data.iter().map(|(_, r)| vec![s(r)]).collect();
            let set = EvalSet::for_scoring(refs.clone(), hyps.clone()).unwrap();
            let score = bleu(&set, 4, true).unwrap();
            prop_assert!((0.0..=1.0).contains(&score));

            let k = rotate % data.len();
            let mut hyps_rot = hyps;
            hyps_rot.rotate_left(k);
            let mut refs_rot = refs;
            refs_rot.rotate_left(k);
            let rotated = EvalSet::for_scoring(refs_rot, hyps_rot).unwrap();
            let score_rot = bleu(&rotated, 4, true).unwrap();
            prop_assert!((score - score_rot).abs() < 1e-12);
        }

        #[test]
        fn uppercasing_everything_is_free_under_case_folding(
            data in proptest::collection::vec(("[a-c]( [a-c]){0,4}", "[a-c]( [a-c]){0,4}"), 1..6),
        ) {
            let set = EvalSet::for_scoring(
                data.iter().map(|(_, r)| vec![s(r)]).collect(),
                data.iter().map(|(h, _)| s(h)).collect(),
            ).unwrap();
            let upper = EvalSet::for_scoring(
                data.iter().map(|(_, r)| vec![s(&r.to_uppercase())]).collect(),
                data.iter().map(|(h, _)| s(&h.to_uppercase())).collect(),
            ).unwrap();
            let a = bleu(&set, 4, true).unwrap();
            let b = bleu(&upper, 4, true).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
