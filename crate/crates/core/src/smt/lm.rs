//! N-gram language model scored with stupid backoff: the count ratio at the
//! longest matching level, times a constant `alpha` per backoff step, with a
//! uniform floor 1/(vocab+1) for unseen unigrams.
//!
//! Each order n counts n-grams over the sentence padded with n-1 begin
//! tokens and one end token, so begin tokens are never predicted and the end
//! token is. Counts are exact integers; the dump round-trips bit-exactly.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::corpus::Sentence;

use super::SmtError;

pub const SENT_BEGIN: &str = "<s>";
pub const SENT_END: &str = "</s>";

#[derive(Debug, Clone, PartialEq)]
pub struct NGramLM {
    order: usize,
    alpha: f64,
    /// `ngram_counts[k]` maps (k+1)-grams to counts.
    ngram_counts: Vec<BTreeMap<Vec<String>, u64>>,
    /// `context_counts[k]` maps k-token contexts to the number of times the
    /// context occurred with a continuation; derived from `ngram_counts`.
    context_counts: Vec<BTreeMap<Vec<String>, u64>>,
}

impl NGramLM {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distinct predicted tokens (unigram types, including the end token).
    pub fn vocab_size(&self) -> usize {
        self.ngram_counts[0].len()
    }

    pub fn ngram_count(&self, ngram: &[String]) -> u64 {
        self.ngram_counts
            .get(ngram.len().wrapping_sub(1))
            .and_then(|level| level.get(ngram))
            .copied()
            .unwrap_or(0)
    }

    /// Stupid-backoff probability of `word` after `history`. Only the last
    /// order-1 history tokens matter; callers wanting sentence-position
    /// semantics pad with [`SENT_BEGIN`] themselves or use
    /// [`NGramLM::sentence_log_score`].
    pub fn score(&self, word: &str, history: &[String]) -> f64 {
        let mut level = self.order.min(history.len() + 1);
        let mut penalty = 1.0;
        loop {
            let context = &history[history.len() - (level - 1)..];
            let mut ngram: Vec<String> = context.to_vec();
            ngram.push(word.to_string());
            let num = self.ngram_counts[level - 1]
                .get(&ngram)
                .copied()
                .unwrap_or(0);
            if num > 0 {
                let den = self.context_counts[level - 1][context];
                return penalty * (num as f64 / den as f64);
            }
            if level == 1 {
                return penalty / (self.vocab_size() + 1) as f64;
            }
            penalty *= self.alpha;
            level -= 1;
        }
    }

    pub fn log_score(&self, word: &str, history: &[String]) -> f64 {
        self.score(word, history).ln()
    }

    /// Sum of log scores over the sentence with begin padding, plus the end
    /// token score.
    pub fn sentence_log_score(&self, tokens: &[String]) -> f64 {
        let mut history: Vec<String> = vec![SENT_BEGIN.to_string(); self.order.saturating_sub(1)];
        let mut total = 0.0;
        for tok in tokens {
            total += self.log_score(tok, &history);
            history.push(tok.clone());
        }
        total + self.log_score(SENT_END, &history)
    }

    /// Dump: a header, then one block per order of `ngram<TAB>count` lines in
    /// lexicographic n-gram order.
    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "#ngram-lm v1")?;
        writeln!(w, "order\t{}", self.order)?;
        writeln!(w, "alpha\t{:?}", self.alpha)?;
        for (k, level) in self.ngram_counts.iter().enumerate() {
            writeln!(w, "#{}-grams", k + 1)?;
            for (ngram, count) in level {
                writeln!(w, "{}\t{count}", ngram.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn read_dump(r: impl BufRead) -> Result<Self, SmtError> {
        let mut lines = r.lines().enumerate();
        let bad = |line: usize, message: &str| SmtError::Malformed {
            line,
            message: message.to_string(),
        };
        match lines.next() {
            Some((_, Ok(header))) if header == "#ngram-lm v1" => {}
            _ => return Err(bad(1, "expected #ngram-lm v1 header")),
        }
        let order: usize = match lines.next() {
            Some((_, Ok(l))) => l
                .strip_prefix("order\t")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(2, "expected order line"))?,
            _ => return Err(bad(2, "expected order line")),
        };
        let alpha: f64 = match lines.next() {
            Some((_, Ok(l))) => l
                .strip_prefix("alpha\t")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(3, "expected alpha line"))?,
            _ => return Err(bad(3, "expected alpha line")),
        };
        if order == 0 {
            return Err(SmtError::ZeroOrder);
        }
        let mut ngram_counts: Vec<BTreeMap<Vec<String>, u64>> = vec![BTreeMap::new(); order];
        let mut current: Option<usize> = None;
        for (idx, line) in lines {
            let line = line?;
            if let Some(block) = line.strip_prefix('#') {
                let k: usize = block
                    .strip_suffix("-grams")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad(idx + 1, "bad block header"))?;
                if k == 0 || k > order {
                    return Err(bad(idx + 1, "block order out of range"));
                }
                current = Some(k - 1);
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let k = current.ok_or_else(|| bad(idx + 1, "entry before any block header"))?;
            let (ngram, count) = line
                .split_once('\t')
                .ok_or_else(|| bad(idx + 1, "expected ngram<TAB>count"))?;
            let ngram: Vec<String> = ngram.split_whitespace().map(str::to_string).collect();
            if ngram.len() != k + 1 {
                return Err(bad(idx + 1, "ngram length does not match block order"));
            }
            let count: u64 = count.parse().map_err(|_| bad(idx + 1, "bad count"))?;
            ngram_counts[k].insert(ngram, count);
        }
        let context_counts = derive_context_counts(&ngram_counts);
        Ok(NGramLM {
            order,
            alpha,
            ngram_counts,
            context_counts,
        })
    }
}

fn derive_context_counts(
    ngram_counts: &[BTreeMap<Vec<String>, u64>],
) -> Vec<BTreeMap<Vec<String>, u64>> {
    ngram_counts
        .iter()
        .map(|level| {
            let mut contexts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
            for (ngram, count) in level {
                *contexts
                    .entry(ngram[..ngram.len() - 1].to_vec())
                    .or_insert(0) += count;
            }
            contexts
        })
        .collect()
}

/// Counts n-grams of every order 1..=`order` over `sentences`.
pub fn train_lm<'a>(
    sentences: impl IntoIterator<Item = &'a Sentence>,
    order: usize,
    alpha: f64,
) -> Result<NGramLM, SmtError> {
    if order == 0 {
        return Err(SmtError::ZeroOrder);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SmtError::BadBackoffFactor(alpha));
    }
    let mut ngram_counts: Vec<BTreeMap<Vec<String>, u64>> = vec![BTreeMap::new(); order];
    for sentence in sentences {
        for k in 1..=order {
            let mut padded: Vec<String> = vec![SENT_BEGIN.to_string(); k - 1];
            padded.extend(sentence.tokens().iter().cloned());
            padded.push(SENT_END.to_string());
            for window in padded.windows(k) {
                *ngram_counts[k - 1].entry(window.to_vec()).or_insert(0) += 1;
            }
        }
    }
    let context_counts = derive_context_counts(&ngram_counts);
    Ok(NGramLM {
        order,
        alpha,
        ngram_counts,
        context_counts,
    })
}
