//! Pseudo sentence pair synthesis.
//!
//! The full loop: train the miniature phrase-based translator on the bitext
//! merged with the dictionary, retrieve monolingual sentences containing each
//! lexicon entry's source phrase, translate them, and pair source with
//! translation. When target enforcement is on, any translation that lost the
//! entry's target phrase is re-decoded with the entry's rule forced, so every
//! emitted pair provably contains both sides of its lexicon entry.

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{BilingualDictionary, ParallelCorpus, Sentence, SentencePair, Vocabulary};
use crate::index::{InvertedIndex, SelectionPolicy};
use crate::mixed::{transform_training_data, MarkerScheme, MixedError};
use crate::smt::decoder::{decode_forced, decode_with_score, DecoderConfig};
use crate::smt::lm::{train_lm, NGramLM};
use crate::smt::model1::{train_model1, viterbi_align, TranslationTable};
use crate::smt::phrase::{extract_phrases, merge_dictionary, score_phrase_table, PhraseTable};
use crate::smt::{SmtConfig, SmtError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Mixed(#[from] MixedError),
    #[error("internal guarantee violated: translation of sentence {mono_id} lost target phrase {target:?} despite forced decoding")]
    GuaranteeViolated { mono_id: u32, target: String },
}

/// Everything needed to translate: lexical tables both directions, the
/// scored phrase table (with dictionary rules merged in), the target-side
/// language model, and decoder settings.
#[derive(Debug, Clone)]
pub struct Translator {
    pub forward: TranslationTable,
    pub backward: TranslationTable,
    pub phrase_table: PhraseTable,
    pub lm: NGramLM,
    pub decoder: DecoderConfig,
}

/// Trains the translator bundle on `bitext` merged with `dic`.
///
/// The dictionary enters twice: its entries are appended to the alignment
/// training corpus, and they are force-inserted into the phrase table at the
/// configured floor probability. The language model is trained on the target
/// side of the bitext. An empty dictionary gives plain SMT training.
pub fn build_pbmt(
    bitext: &ParallelCorpus,
    dic: &BilingualDictionary,
    cfg: &SmtConfig,
) -> Result<Translator, SynthError> {
    if bitext.is_empty() {
        return Err(SynthError::Smt(SmtError::EmptyCorpus));
    }
    let mut training = bitext.clone();
    for entry in dic.entries() {
        training.pairs.push(SentencePair {
            source: Sentence::new(entry.source_phrase.clone())
                .expect("lexicon phrases satisfy token invariants"),
            target: Sentence::new(entry.target_phrase.clone())
                .expect("lexicon phrases satisfy token invariants"),
        });
    }
    let swapped = ParallelCorpus::new(training.pairs.iter().map(SentencePair::swapped).collect());

    let forward = train_model1(&training, cfg.em_iterations, cfg.use_null)?;
    let backward = train_model1(&swapped, cfg.em_iterations, cfg.use_null)?;

    let mut extracted = Vec::new();
    for (pair, rev) in training.pairs.iter().zip(&swapped.pairs) {
        let fwd_links = viterbi_align(&forward, pair);
        let bwd_links = viterbi_align(&backward, rev).swapped();
        extracted.extend(extract_phrases(
            pair,
            &fwd_links,
            &bwd_links,
            cfg.max_phrase_len,
        ));
    }
    let mut phrase_table = score_phrase_table(&extracted, cfg.max_phrase_len);
    merge_dictionary(&mut phrase_table, dic, cfg.floor_prob)?;

    let lm = train_lm(bitext.target_sentences(), cfg.lm_order, cfg.lm_alpha)?;

    Ok(Translator {
        forward,
        backward,
        phrase_table,
        lm,
        decoder: cfg.decoder.clone(),
    })
}

/// One synthesized pair with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoPair {
    pub source: Sentence,
    pub target: Sentence,
    /// Index of the lexicon entry this pair was synthesized for.
    pub entry_index: usize,
    /// Id of the monolingual sentence the source came from.
    pub mono_id: u32,
    /// Whether constrained re-decoding had to fire to keep the target phrase.
    pub forced: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PseudoCorpus {
    pub pairs: Vec<PseudoPair>,
    /// Pairs emitted per lexicon entry, indexed like the dictionary.
    pub per_entry_counts: Vec<usize>,
}

impl PseudoCorpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn as_parallel(&self) -> ParallelCorpus {
        ParallelCorpus::new(
            self.pairs
                .iter()
                .map(|p| SentencePair {
                    source: p.source.clone(),
                    target: p.target.clone(),
                })
                .collect(),
        )
    }
}

/// Per-entry synthesis diagnostics.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct SynthesisReport {
    /// Entries for which no monolingual sentence matched.
    pub zero_match_entries: Vec<usize>,
    /// Pairs that needed constrained re-decoding.
    pub forced_pairs: usize,
    /// Total sentences retrieved over all entries.
    pub retrieved: usize,
}

#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    /// Pseudo pairs requested per lexicon entry (the per-entry quota).
    pub pairs_per_entry: usize,
    /// Retrieved sentences longer than this are excluded.
    pub max_len: usize,
    pub policy: SelectionPolicy,
    /// Re-decode with the entry's rule forced whenever the free translation
    /// lost the target phrase. Off reproduces dictionary-free synthesis.
    pub enforce_targets: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            pairs_per_entry: 10,
            max_len: 50,
            policy: SelectionPolicy::ShortestFirst,
            enforce_targets: true,
        }
    }
}

/// Synthesizes up to `pairs_per_entry` pseudo pairs for every lexicon entry.
/// Entries are processed independently (and in parallel); output order
/// follows dictionary order, so results are deterministic regardless of
/// thread count.
pub fn synthesize(
    dic: &BilingualDictionary,
    index: &InvertedIndex,
    translator: &Translator,
    opts: &SynthesisOptions,
) -> Result<(PseudoCorpus, SynthesisReport), SynthError> {
    let per_entry: Vec<Result<Vec<PseudoPair>, SynthError>> = dic
        .entries()
        .par_iter()
        .enumerate()
        .map(|(entry_index, entry)| {
            let ids = index.retrieve_with_policy(
                &entry.source_phrase,
                opts.pairs_per_entry,
                opts.max_len,
                opts.policy,
            );
            let mut pairs = Vec::with_capacity(ids.len());
            for mono_id in ids {
                let source = index.sentence(mono_id).clone();
                let (mut target, _) = decode_with_score(
                    &source,
                    &translator.phrase_table,
                    &translator.lm,
                    &translator.decoder,
                );
                let mut forced = false;
                if opts.enforce_targets && !target.contains_phrase(&entry.target_phrase) {
                    let (redone, _) = decode_forced(
                        &source,
                        &translator.phrase_table,
                        &translator.lm,
                        &translator.decoder,
                        entry,
                    );
                    target = redone;
                    forced = true;
                    if !target.contains_phrase(&entry.target_phrase) {
                        return Err(SynthError::GuaranteeViolated {
                            mono_id,
                            target: entry.target_phrase.join(" "),
                        });
                    }
                }
                pairs.push(PseudoPair {
                    source,
                    target,
                    entry_index,
                    mono_id,
                    forced,
                });
            }
            Ok(pairs)
        })
        .collect();

    let mut corpus = PseudoCorpus {
        pairs: Vec::new(),
        per_entry_counts: vec![0; dic.len()],
    };
    let mut report = SynthesisReport::default();
    for (entry_index, result) in per_entry.into_iter().enumerate() {
        let pairs = result?;
        if pairs.is_empty() {
            report.zero_match_entries.push(entry_index);
        }
        report.retrieved += pairs.len();
        report.forced_pairs += pairs.iter().filter(|p| p.forced).count();
        corpus.per_entry_counts[entry_index] = pairs.len();
        corpus.pairs.extend(pairs);
    }
    Ok((corpus, report))
}

/// Relabeling settings applied after corpus concatenation.
#[derive(Debug, Clone)]
pub struct MixedSpec {
    pub scheme: MarkerScheme,
    pub source_threshold: u64,
    pub target_threshold: u64,
}

/// Appends the pseudo pairs after the bitext, in stable order. With a mixed
/// spec, the mixed word/character transform is applied to the concatenation,
/// with vocabularies recomputed over the concatenation.
pub fn combine(
    bitext: &ParallelCorpus,
    pseudo: &PseudoCorpus,
    mixed: Option<&MixedSpec>,
) -> Result<ParallelCorpus, SynthError> {
    let mut combined = bitext.clone();
    combined.pairs.extend(pseudo.as_parallel().pairs);
    match mixed {
        None => Ok(combined),
        Some(spec) => {
            let src_vocab = Vocabulary::build(combined.source_sentences(), spec.source_threshold)
                .expect("thresholds validated by caller");
            let tgt_vocab = Vocabulary::build(combined.target_sentences(), spec.target_threshold)
                .expect("thresholds validated by caller");
            Ok(transform_training_data(
                &combined,
                &BilingualDictionary::empty(),
                &src_vocab,
                &tgt_vocab,
                false,
                &spec.scheme,
            )?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LexiconEntry;
    use crate::corpus::MonolingualCorpus;
    use crate::index::build_index;
    use crate::mixed::is_well_formed;
    use crate::mixed::MixedSentence;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn pair(src: &str, tgt: &str) -> SentencePair {
        SentencePair {
            source: Sentence::from_line(src),
            target: Sentence::from_line(tgt),
        }
    }

    /// Twenty monotone pairs over a five-word bijective vocabulary.
    fn toy_bitext() -> ParallelCorpus {
        let words = ["a", "b", "c", "d", "e"];
        let mut pairs = Vec::new();
        for i in 0..20 {
            let ids = [i % 5, (i + 1) % 5, (i + 3) % 5];
            let src: Vec<&str> = ids.iter().map(|&k| words[k]).collect();
            let tgt: Vec<String> = ids.iter().map(|&k| words[k].to_uppercase()).collect();
            pairs.push(pair(&src.join(" "), &tgt.join(" ")));
        }
        ParallelCorpus::new(pairs)
    }

    fn toy_dictionary() -> BilingualDictionary {
        BilingualDictionary::new(vec![
            LexiconEntry::new(toks("q"), toks("Q")).unwrap(),
            LexiconEntry::new(toks("w"), toks("W")).unwrap(),
            LexiconEntry::new(toks("z"), toks("Z")).unwrap(),
        ])
    }

    #[test]
    fn pbmt_contains_dictionary_rule() {
        let bitext = ParallelCorpus::new(vec![pair("a", "A")]);
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("q"), toks("Q")).unwrap()]);
        let translator = build_pbmt(&bitext, &dic, &SmtConfig::default()).unwrap();
        assert_eq!(
            translator
                .phrase_table
                .rule_log_prob(&toks("q"), &toks("Q")),
            Some(0.0)
        );
    }

    #[test]
    fn empty_dictionary_is_plain_training() {
        let bitext = toy_bitext();
        let with_empty = build_pbmt(
            &bitext,
            &BilingualDictionary::empty(),
            &SmtConfig::default(),
        )
        .unwrap();
        let direct = build_pbmt(
            &bitext,
            &BilingualDictionary::new(vec![]),
            &SmtConfig::default(),
        )
        .unwrap();
        assert_eq!(with_empty.phrase_table, direct.phrase_table);
    }

    #[test]
    fn empty_bitext_is_error() {
        assert!(build_pbmt(
            &ParallelCorpus::default(),
            &BilingualDictionary::empty(),
            &SmtConfig::default()
        )
        .is_err());
    }

    #[test]
    fn each_lexicon_source_decodes_to_its_target() {
        let translator =
            build_pbmt(&toy_bitext(), &toy_dictionary(), &SmtConfig::default()).unwrap();
        for entry in toy_dictionary().entries() {
            let source = Sentence::new(entry.source_phrase.clone()).unwrap();
            let (out, _) = decode_with_score(
                &source,
                &translator.phrase_table,
                &translator.lm,
                &translator.decoder,
            );
            assert_eq!(out.tokens(), entry.target_phrase.as_slice());
        }
    }

    fn toy_translator() -> Translator {
        // hand-built rules over a flat LM; exercises synthesis in isolation
        let mut table = PhraseTable::new(4);
        table.insert_rule(&toks("x"), toks("X"), 0.0);
        table.insert_rule(&toks("y"), toks("Y"), 0.0);
        table.insert_rule(&toks("q"), toks("Q"), 0.0);
        Translator {
            forward: train_model1(&ParallelCorpus::new(vec![pair("x", "X")]), 1, false).unwrap(),
            backward: train_model1(&ParallelCorpus::new(vec![pair("X", "x")]), 1, false).unwrap(),
            phrase_table: table,
            lm: train_lm(&[] as &[Sentence], 1, 0.4).unwrap(),
            decoder: DecoderConfig::default(),
        }
    }

    #[test]
    fn synthesize_pairs_retrieved_with_translations() {
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("q"), toks("Q")).unwrap()]);
        let index = build_index(MonolingualCorpus::new(vec![
            Sentence::from_line("x q"),
            Sentence::from_line("q y"),
        ]));
        let opts = SynthesisOptions {
            pairs_per_entry: 2,
            ..SynthesisOptions::default()
        };
        let (corpus, report) = synthesize(&dic, &index, &toy_translator(), &opts).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.pairs[0].source.to_string(), "x q");
        assert_eq!(corpus.pairs[0].target.to_string(), "X Q");
        assert_eq!(corpus.pairs[1].source.to_string(), "q y");
        assert_eq!(corpus.pairs[1].target.to_string(), "Q Y");
        assert_eq!(report.forced_pairs, 0);
        assert!(report.zero_match_entries.is_empty());
    }

    #[test]
    fn synthesize_zero_quota_is_empty() {
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("q"), toks("Q")).unwrap()]);
        let index = build_index(MonolingualCorpus::new(vec![Sentence::from_line("x q")]));
        let opts = SynthesisOptions {
            pairs_per_entry: 0,
            ..SynthesisOptions::default()
        };
        let (corpus, _) = synthesize(&dic, &index, &toy_translator(), &opts).unwrap();
        assert!(corpus.is_empty());
    }

    #[test]
    fn synthesize_reports_zero_match_entries() {
        let dic = BilingualDictionary::new(vec![
            LexiconEntry::new(toks("q"), toks("Q")).unwrap(),
            LexiconEntry::new(toks("nope"), toks("NOPE")).unwrap(),
        ]);
        let index = build_index(MonolingualCorpus::new(vec![Sentence::from_line("x q")]));
        let (corpus, report) = synthesize(
            &dic,
            &index,
            &toy_translator(),
            &SynthesisOptions::default(),
        )
        .unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.per_entry_counts, vec![1, 0]);
        assert_eq!(report.zero_match_entries, vec![1]);
    }

    #[test]
    fn synthesize_forces_lost_targets() {
        // "q" translates to a competing word unless the rule is forced
        let mut table = PhraseTable::new(4);
        table.insert_rule(&toks("q"), toks("OTHER"), 0.0);
        table.insert_rule(&toks("q"), toks("Q"), -1.0);
        let translator = Translator {
            phrase_table: table,
            ..toy_translator()
        };
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("q"), toks("Q")).unwrap()]);
        let index = build_index(MonolingualCorpus::new(vec![Sentence::from_line("q")]));
        let (corpus, report) =
            synthesize(&dic, &index, &translator, &SynthesisOptions::default()).unwrap();
        assert_eq!(corpus.pairs[0].target.to_string(), "Q");
        assert!(corpus.pairs[0].forced);
        assert_eq!(report.forced_pairs, 1);
    }

    #[test]
    fn synthesize_without_enforcement_keeps_free_translation() {
        let mut table = PhraseTable::new(4);
        table.insert_rule(&toks("q"), toks("OTHER"), 0.0);
        let translator = Translator {
            phrase_table: table,
            ..toy_translator()
        };
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("q"), toks("Q")).unwrap()]);
        let index = build_index(MonolingualCorpus::new(vec![Sentence::from_line("q")]));
        let opts = SynthesisOptions {
            enforce_targets: false,
            ..SynthesisOptions::default()
        };
        let (corpus, report) = synthesize(&dic, &index, &translator, &opts).unwrap();
        assert_eq!(corpus.pairs[0].target.to_string(), "OTHER");
        assert!(!corpus.pairs[0].forced);
        assert_eq!(report.forced_pairs, 0);
    }

    #[test]
    fn combine_appends_in_stable_order() {
        let bitext = ParallelCorpus::new(vec![pair("a", "A"), pair("b", "B")]);
        let pseudo = PseudoCorpus {
            pairs: vec![
                PseudoPair {
                    source: Sentence::from_line("x"),
                    target: Sentence::from_line("X"),
                    entry_index: 0,
                    mono_id: 0,
                    forced: false,
                },
                PseudoPair {
                    source: Sentence::from_line("y"),
                    target: Sentence::from_line("Y"),
                    entry_index: 0,
                    mono_id: 1,
                    forced: false,
                },
                PseudoPair {
                    source: Sentence::from_line("z"),
                    target: Sentence::from_line("Z"),
                    entry_index: 1,
                    mono_id: 2,
                    forced: false,
                },
            ],
            per_entry_counts: vec![2, 1],
        };
        let out = combine(&bitext, &pseudo, None).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out.pairs[0].source.to_string(), "a");
        assert_eq!(out.pairs[4].source.to_string(), "z");
    }

    #[test]
    fn combine_empty_pseudo_is_identity() {
        let bitext = ParallelCorpus::new(vec![pair("a", "A")]);
        let out = combine(&bitext, &PseudoCorpus::default(), None).unwrap();
        assert_eq!(out, bitext);
    }

    #[test]
    fn combine_with_mixed_spec_leaves_no_plain_oov() {
        let bitext =
            ParallelCorpus::new(vec![pair("a a a b", "A A A B"), pair("a rare", "A RARE")]);
        let spec = MixedSpec {
            scheme: MarkerScheme::default(),
            source_threshold: 2,
            target_threshold: 2,
        };
        let out = combine(&bitext, &PseudoCorpus::default(), Some(&spec)).unwrap();
        let src_vocab = Vocabulary::build(bitext.source_sentences(), 2).unwrap();
        let tgt_vocab = Vocabulary::build(bitext.target_sentences(), 2).unwrap();
        for p in &out.pairs {
            for (sentence, vocab) in [(&p.source, &src_vocab), (&p.target, &tgt_vocab)] {
                let mixed = MixedSentence::from_tokens(sentence.tokens().to_vec());
                assert!(is_well_formed(&mixed, &spec.scheme));
                for tok in sentence.tokens() {
                    let marked = tok.starts_with(spec.scheme.begin())
                        || tok.starts_with(spec.scheme.middle())
                        || tok.starts_with(spec.scheme.end());
                    if !marked {
                        assert!(vocab.contains(tok), "plain token {tok:?} is OOV");
                    }
                }
            }
        }
    }
}
