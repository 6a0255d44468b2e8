//! Monotone phrase-based beam search.
//!
//! Source positions are covered strictly left to right (no reordering). A
//! hypothesis scores
//!
//! ```text
//! lambda_tm * sum(rule log probs)
//!   + lambda_lm * sum(LM log scores, including the end-of-sentence token)
//!   + word_penalty * |output tokens|
//! ```
//!
//! accumulated in exactly that per-expansion, per-token order, so a search
//! with an unbounded beam reproduces exhaustive enumeration bit for bit.
//! All ties break toward the lexicographically smaller output, which makes
//! decoding deterministic across runs and thread counts.

use serde::Serialize;

use crate::corpus::{LexiconEntry, Sentence};

use super::lm::{NGramLM, SENT_BEGIN, SENT_END};
use super::phrase::PhraseTable;

#[derive(Debug, Clone, Serialize)]
pub struct DecoderConfig {
    pub beam_size: usize,
    pub lambda_tm: f64,
    pub lambda_lm: f64,
    pub word_penalty: f64,
    /// Copy source tokens with no rule through to the output. When disabled,
    /// such tokens are dropped instead; decoding never fails either way.
    pub copy_oov: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam_size: 10,
            lambda_tm: 1.0,
            lambda_lm: 1.0,
            word_penalty: 0.0,
            copy_oov: true,
        }
    }
}

#[derive(Debug, Clone)]
struct Expansion {
    span: usize,
    target: Vec<String>,
    tm_log_prob: f64,
}

#[derive(Debug, Clone)]
struct Hypothesis {
    /// Begin padding followed by output tokens; the LM history.
    history: Vec<String>,
    score: f64,
}

/// Greedy leftmost non-overlapping occurrences of `phrase`, as half-open
/// token spans.
fn occurrences(tokens: &[String], phrase: &[String]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    if phrase.is_empty() {
        return spans;
    }
    let mut i = 0;
    while i + phrase.len() <= tokens.len() {
        if &tokens[i..i + phrase.len()] == phrase {
            spans.push((i, i + phrase.len()));
            i += phrase.len();
        } else {
            i += 1;
        }
    }
    spans
}

fn overlaps(a: (usize, usize), spans: &[(usize, usize)]) -> bool {
    spans.iter().any(|&(s, e)| a.0 < e && s < a.1)
}

fn expansions_at(
    source: &[String],
    pos: usize,
    table: &PhraseTable,
    cfg: &DecoderConfig,
    forced: Option<&LexiconEntry>,
    forced_spans: &[(usize, usize)],
) -> Vec<Expansion> {
    if let Some(entry) = forced {
        if let Some(&(start, end)) = forced_spans.iter().find(|&&(s, _)| s == pos) {
            // a forced span may only be covered by the entry's own rule
            let tm = table
                .rule_log_prob(&entry.source_phrase, &entry.target_phrase)
                .unwrap_or(0.0);
            return vec![Expansion {
                span: end - start,
                target: entry.target_phrase.clone(),
                tm_log_prob: tm,
            }];
        }
    }
    let mut out = Vec::new();
    let longest = table.max_source_len().max(1).min(source.len() - pos);
    for len in 1..=longest {
        if overlaps((pos, pos + len), forced_spans) {
            continue;
        }
        let span = &source[pos..pos + len];
        for rule in table.options(span) {
            out.push(Expansion {
                span: len,
                target: rule.target.clone(),
                tm_log_prob: rule.log_prob,
            });
        }
    }
    if out.is_empty() {
        // no rule reaches this token: copy it through or drop it
        out.push(Expansion {
            span: 1,
            target: if cfg.copy_oov {
                vec![source[pos].clone()]
            } else {
                Vec::new()
            },
            tm_log_prob: 0.0,
        });
    }
    out
}

fn prune(stack: &mut Vec<Hypothesis>, beam: usize) {
    stack.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.history.cmp(&b.history))
    });
    stack.truncate(beam.max(1));
}

fn search(
    source: &Sentence,
    table: &PhraseTable,
    lm: &NGramLM,
    cfg: &DecoderConfig,
    forced: Option<&LexiconEntry>,
) -> (Vec<String>, f64) {
    let tokens = source.tokens();
    let pad = lm.order().saturating_sub(1);
    let forced_spans = forced
        .map(|entry| occurrences(tokens, &entry.source_phrase))
        .unwrap_or_default();

    let mut stacks: Vec<Vec<Hypothesis>> = vec![Vec::new(); tokens.len() + 1];
    stacks[0].push(Hypothesis {
        history: vec![SENT_BEGIN.to_string(); pad],
        score: 0.0,
    });

    for pos in 0..tokens.len() {
        prune(&mut stacks[pos], cfg.beam_size);
        let expansions = expansions_at(tokens, pos, table, cfg, forced, &forced_spans);
        let current = std::mem::take(&mut stacks[pos]);
        for hyp in &current {
            for exp in &expansions {
                let mut score = hyp.score + cfg.lambda_tm * exp.tm_log_prob;
                let mut history = hyp.history.clone();
                for tok in &exp.target {
                    score += cfg.lambda_lm * lm.log_score(tok, &history);
                    score += cfg.word_penalty;
                    history.push(tok.clone());
                }
                stacks[pos + exp.span].push(Hypothesis { history, score });
            }
        }
    }

    let finals = std::mem::take(&mut stacks[tokens.len()]);
    let mut best: Option<(Vec<String>, f64)> = None;
    for hyp in finals {
        let score = hyp.score + cfg.lambda_lm * lm.log_score(SENT_END, &hyp.history);
        let output = hyp.history[pad..].to_vec();
        let better = match &best {
            None => true,
            Some((best_out, best_score)) => {
                score > *best_score || (score == *best_score && output < *best_out)
            }
        };
        if better {
            best = Some((output, score));
        }
    }
    best.expect("decoder always reaches the final stack")
}

/// Translates `source`. Always produces an output.
pub fn decode(
    source: &Sentence,
    table: &PhraseTable,
    lm: &NGramLM,
    cfg: &DecoderConfig,
) -> Sentence {
    decode_with_score(source, table, lm, cfg).0
}

/// [`decode`] plus the winning hypothesis score.
pub fn decode_with_score(
    source: &Sentence,
    table: &PhraseTable,
    lm: &NGramLM,
    cfg: &DecoderConfig,
) -> (Sentence, f64) {
    let (tokens, score) = search(source, table, lm, cfg, None);
    (
        Sentence::new(tokens).expect("decoder output satisfies token invariants"),
        score,
    )
}

/// Decodes with the lexicon entry's rule forced over every occurrence of its
/// source phrase: those spans may only be covered by the entry's rule, and no
/// other phrase may straddle them. Guarantees the output contains the
/// entry's target phrase whenever the source contains its source phrase.
pub fn decode_forced(
    source: &Sentence,
    table: &PhraseTable,
    lm: &NGramLM,
    cfg: &DecoderConfig,
    entry: &LexiconEntry,
) -> (Sentence, f64) {
    let (tokens, score) = search(source, table, lm, cfg, Some(entry));
    (
        Sentence::new(tokens).expect("decoder output satisfies token invariants"),
        score,
    )
}
