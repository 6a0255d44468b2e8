//! Corpus engineering for bilingual dictionaries whose entries are rare or
//! unseen in the parallel training data.
//!
//! Two transformations turn such dictionaries into training signal for
//! downstream translation systems:
//!
//! - the **mixed word/character transform** ([`mixed`]) keeps frequent words
//!   intact and rewrites rare words as positional-marked character runs, so
//!   the dictionary can simply be appended as extra training pairs;
//! - **pseudo sentence pair synthesis** ([`synthesis`]) retrieves monolingual
//!   sentences containing each entry's source phrase through an inverted
//!   index ([`index`]), translates them with a built-in miniature
//!   phrase-based translator ([`smt`]) whose phrase table carries the
//!   dictionary as forced rules, and emits the pairs with provenance.
//!
//! [`eval`] implements corpus BLEU and the dictionary hit rate so results
//! can be measured, and [`pipeline`] wires everything behind one declarative
//! config. All outputs are deterministic given a config and seed.

pub mod corpus;
pub mod eval;
pub mod index;
pub mod mixed;
pub mod pipeline;
pub mod smt;
pub mod synthesis;
pub mod synthetic;

pub use corpus::{
    build_vocabulary, filter_dictionary, ingest_monolingual, ingest_parallel, is_oov,
    BilingualDictionary, CorpusError, LexiconEntry, MonolingualCorpus, ParallelCorpus, Sentence,
    SentencePair, Vocabulary,
};
pub use eval::{bleu, hit_rate, vocab_report, EvalSet, HitMode, HitReport};
pub use index::{build_index, InvertedIndex, SelectionPolicy};
pub use mixed::{
    is_well_formed, relabel_sentence, relabel_word, restore, transform_training_data, MarkerScheme,
    MixedError, MixedSentence, Restored,
};
pub use pipeline::{
    run_pipeline, validate_config, ConfigErrors, Mode, PipelineConfig, PipelineError, RunSummary,
};
pub use smt::decoder::{decode, decode_forced, decode_with_score, DecoderConfig};
pub use smt::lm::{train_lm, NGramLM};
pub use smt::model1::{train_model1, viterbi_align, Alignment, TranslationTable};
pub use smt::phrase::{extract_phrases, merge_dictionary, score_phrase_table, PhraseTable};
pub use smt::{SmtConfig, SmtError};
pub use synthesis::{
    build_pbmt, combine, synthesize, MixedSpec, PseudoCorpus, PseudoPair, SynthError,
    SynthesisOptions, SynthesisReport, Translator,
};
