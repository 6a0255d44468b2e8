use criterion::{black_box, criterion_group, criterion_main, Criterion};

use lexforge::corpus::{Sentence, Vocabulary};
use lexforge::eval::{bleu, EvalSet};
use lexforge::mixed::{relabel_sentence, restore, MarkerScheme};
use lexforge::smt::decoder::decode;
use lexforge::smt::model1::{em_step, initial_table};
use lexforge::synthesis::{synthesize, SynthesisOptions};

use lexforge_bench::setup;

fn bench_model1_em_step(c: &mut Criterion) {
    let s = setup();
    let table = initial_table(&s.fixture.bitext, false);
    c.bench_function("model1_em_step_500_pairs", |b| {
        b.iter(|| em_step(black_box(&table), black_box(&s.fixture.bitext)))
    });
}

fn bench_decode(c: &mut Criterion) {
    let s = setup();
    let source = s.index.sentence(0).clone();
    c.bench_function("decode_beam10", |b| {
        b.iter(|| {
            decode(
                black_box(&source),
                &s.translator.phrase_table,
                &s.translator.lm,
                &s.translator.decoder,
            )
        })
    });
}

fn bench_retrieve(c: &mut Criterion) {
    let s = setup();
    let phrase = s.rare.entries()[5].source_phrase.clone();
    c.bench_function("retrieve_k40_from_5000", |b| {
        b.iter(|| s.index.retrieve(black_box(&phrase), 40, 50))
    });
}

fn bench_synthesize(c: &mut Criterion) {
    let s = setup();
    let opts = SynthesisOptions {
        pairs_per_entry: 10,
        ..SynthesisOptions::default()
    };
    c.bench_function("synthesize_20_entries_k10", |b| {
        b.iter(|| synthesize(black_box(&s.rare), &s.index, &s.translator, &opts).unwrap())
    });
}

fn bench_relabel_restore(c: &mut Criterion) {
    let s = setup();
    let vocab = Vocabulary::build(s.fixture.bitext.source_sentences(), 50).unwrap();
    let scheme = MarkerScheme::default();
    let sentences: Vec<Sentence> = s
        .fixture
        .bitext
        .source_sentences()
        .take(200)
        .cloned()
        .collect();
    c.bench_function("relabel_restore_200_sentences", |b| {
        b.iter(|| {
            for sentence in &sentences {
                let mixed = relabel_sentence(black_box(sentence), &vocab, &scheme).unwrap();
                black_box(restore(&mixed, &scheme));
            }
        })
    });
}

fn bench_bleu(c: &mut Criterion) {
    let s = setup();
    let hyps: Vec<Sentence> = s.fixture.bitext.target_sentences().cloned().collect();
    let refs: Vec<Vec<Sentence>> = hyps.iter().map(|h| vec![h.clone()]).collect();
    let set = EvalSet::for_scoring(refs, hyps).unwrap();
    c.bench_function("bleu_500_sentences", |b| {
        b.iter(|| bleu(black_box(&set), 4, true).unwrap())
    });
}

criterion_group!(
    benches,
    bench_model1_em_step,
    bench_decode,
    bench_retrieve,
    bench_synthesize,
    bench_relabel_restore,
    bench_bleu
);
criterion_main!(benches);
