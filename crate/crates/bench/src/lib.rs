//! Shared benchmark fixtures.

use lexforge::corpus::{filter_dictionary, BilingualDictionary, Vocabulary};
use lexforge::index::{build_index, InvertedIndex};
use lexforge::smt::SmtConfig;
use lexforge::synthesis::{build_pbmt, Translator};
use lexforge::synthetic::{rare_word_fixture, Fixture, FixtureConfig};

pub struct BenchSetup {
    pub fixture: Fixture,
    pub rare: BilingualDictionary,
    pub index: InvertedIndex,
    pub translator: Translator,
}

pub fn setup() -> BenchSetup {
    let fixture = rare_word_fixture(
        &FixtureConfig {
            training_pairs: 500,
            monolingual_sentences: 5000,
            ..FixtureConfig::default()
        },
        0xBE9C4,
    );
    let src_vocab = Vocabulary::build(fixture.bitext.source_sentences(), 2).unwrap();
    let rare = filter_dictionary(&fixture.dictionary, &src_vocab);
    let index = build_index(fixture.monolingual.clone());
    let translator = build_pbmt(&fixture.bitext, &rare, &SmtConfig::default()).unwrap();
    BenchSetup {
        fixture,
        rare,
        index,
        translator,
    }
}
