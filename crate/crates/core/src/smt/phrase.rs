//! Phrase pair extraction and the scored phrase table.
//!
//! Extraction works on the intersection of forward and backward Viterbi
//! links: for every source span up to the length cap, the minimal consistent
//! target box is taken when no link crosses its border. Unaligned-word
//! extension is deliberately not applied; the precision bias suits short
//! synthesized sentences.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::corpus::{BilingualDictionary, SentencePair};

use super::model1::Alignment;
use super::SmtError;

/// One scored translation option for a source phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseRule {
    pub target: Vec<String>,
    pub log_prob: f64,
}

/// Source phrase -> scored target options, options sorted by descending score
/// then lexicographic target, deduplicated keeping the best score.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseTable {
    rules: BTreeMap<String, Vec<PhraseRule>>,
    max_phrase_len: usize,
    max_source_len: usize,
}

fn phrase_key(tokens: &[String]) -> String {
    tokens.join(" ")
}

impl PhraseTable {
    pub fn new(max_phrase_len: usize) -> Self {
        PhraseTable {
            rules: BTreeMap::new(),
            max_phrase_len,
            max_source_len: 0,
        }
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    /// Longest source phrase with any rule; the decoder's span bound.
    /// Dictionary-injected rules may exceed `max_phrase_len`.
    pub fn max_source_len(&self) -> usize {
        self.max_source_len
    }

    pub fn len(&self) -> usize {
        self.rules.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Scored options for an exact source phrase; empty when none.
    pub fn options(&self, source: &[String]) -> &[PhraseRule] {
        self.rules
            .get(&phrase_key(source))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn rule_log_prob(&self, source: &[String], target: &[String]) -> Option<f64> {
        self.options(source)
            .iter()
            .find(|r| r.target == target)
            .map(|r| r.log_prob)
    }

    /// Inserts a rule, keeping the better score if the exact rule exists.
    pub fn insert_rule(&mut self, source: &[String], target: Vec<String>, log_prob: f64) {
        self.max_source_len = self.max_source_len.max(source.len());
        let options = self.rules.entry(phrase_key(source)).or_default();
        match options.iter_mut().find(|r| r.target == target) {
            Some(existing) => existing.log_prob = existing.log_prob.max(log_prob),
            None => options.push(PhraseRule { target, log_prob }),
        }
        options.sort_by(|a, b| {
            b.log_prob
                .total_cmp(&a.log_prob)
                .then_with(|| a.target.cmp(&b.target))
        });
    }

    /// Dumps `src ||| tgt ||| logprob` lines, sources sorted, options in
    /// table order. Log probabilities print in shortest round-trip form, so
    /// dump -> load -> dump is byte-identical.
    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        for (source, options) in &self.rules {
            for rule in options {
                writeln!(
                    w,
                    "{} ||| {} ||| {:?}",
                    source,
                    rule.target.join(" "),
                    rule.log_prob
                )?;
            }
        }
        Ok(())
    }

    /// Parses a dump produced by [`PhraseTable::write_dump`].
    pub fn read_dump(r: impl BufRead, max_phrase_len: usize) -> Result<Self, SmtError> {
        let mut table = PhraseTable::new(max_phrase_len);
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(" ||| ");
            let (src, tgt, lp) = match (fields.next(), fields.next(), fields.next()) {
                (Some(s), Some(t), Some(p)) if fields.next().is_none() => (s, t, p),
                _ => {
                    return Err(SmtError::Malformed {
                        line: idx + 1,
                        message: "expected src ||| tgt ||| logprob".to_string(),
                    })
                }
            };
            let source: Vec<String> = src.split_whitespace().map(str::to_string).collect();
            let target: Vec<String> = tgt.split_whitespace().map(str::to_string).collect();
            let log_prob: f64 = lp.parse().map_err(|_| SmtError::Malformed {
                line: idx + 1,
                message: format!("bad log probability {lp:?}"),
            })?;
            table.insert_rule(&source, target, log_prob);
        }
        Ok(table)
    }
}

/// Extracts consistent phrase pairs from the intersection of `forward` and
/// `backward` links, up to `max_len` tokens per side.
pub fn extract_phrases(
    pair: &SentencePair,
    forward: &Alignment,
    backward: &Alignment,
    max_len: usize,
) -> BTreeSet<(Vec<String>, Vec<String>)> {
    let links: Vec<(usize, usize)> = forward.intersect(backward).links.into_iter().collect();
    let mut phrases = BTreeSet::new();
    if links.is_empty() {
        return phrases;
    }
    let src_len = pair.source.len();
    for start in 0..src_len {
        for end in start..src_len.min(start + max_len) {
            // minimal target box covering all links inside the source span
            let mut t_min = usize::MAX;
            let mut t_max = 0usize;
            let mut any = false;
            for &(i, j) in &links {
                if i >= start && i <= end {
                    any = true;
                    t_min = t_min.min(j);
                    t_max = t_max.max(j);
                }
            }
            if !any || t_max - t_min + 1 > max_len {
                continue;
            }
            // consistency: no link from inside the target box may leave the
            // source span
            let consistent = links
                .iter()
                .all(|&(i, j)| j < t_min || j > t_max || (i >= start && i <= end));
            if consistent {
                phrases.insert((
                    pair.source.tokens()[start..=end].to_vec(),
                    pair.target.tokens()[t_min..=t_max].to_vec(),
                ));
            }
        }
    }
    phrases
}

/// Scores an extracted phrase-pair multiset by relative frequency:
/// p(target | source) = count(source, target) / count(source, *).
pub fn score_phrase_table(
    extracted: &[(Vec<String>, Vec<String>)],
    max_phrase_len: usize,
) -> PhraseTable {
    let mut pair_counts: BTreeMap<(Vec<String>, Vec<String>), u64> = BTreeMap::new();
    let mut source_counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for (src, tgt) in extracted {
        *pair_counts.entry((src.clone(), tgt.clone())).or_insert(0) += 1;
        *source_counts.entry(src.clone()).or_insert(0) += 1;
    }
    let mut table = PhraseTable::new(max_phrase_len);
    for ((src, tgt), count) in pair_counts {
        let total = source_counts[&src];
        let log_prob = (count as f64 / total as f64).ln();
        table.insert_rule(&src, tgt, log_prob);
    }
    table
}

/// Force-inserts every lexicon entry as a phrasal rule at probability at
/// least `floor_prob`. Existing higher-scoring identical rules are kept.
pub fn merge_dictionary(
    table: &mut PhraseTable,
    dic: &BilingualDictionary,
    floor_prob: f64,
) -> Result<(), SmtError> {
    if !(floor_prob > 0.0 && floor_prob <= 1.0) {
        return Err(SmtError::BadFloorProbability(floor_prob));
    }
    let floor_lp = floor_prob.ln();
    for entry in dic.entries() {
        table.insert_rule(&entry.source_phrase, entry.target_phrase.clone(), floor_lp);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LexiconEntry, Sentence};

    fn pair(src: &str, tgt: &str) -> SentencePair {
        SentencePair {
            source: Sentence::from_line(src),
            target: Sentence::from_line(tgt),
        }
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn extract_single_link() {
        let p = pair("a", "x");
        let a = Alignment::from_links([(0, 0)]);
        let phrases = extract_phrases(&p, &a, &a, 4);
        assert_eq!(phrases.len(), 1);
        assert!(phrases.contains(&(toks("a"), toks("x"))));
    }

    #[test]
    fn extract_empty_intersection() {
        let p = pair("a b", "x y");
        let fwd = Alignment::from_links([(0, 0)]);
        let bwd = Alignment::from_links([(1, 1)]);
        assert!(extract_phrases(&p, &fwd, &bwd, 4).is_empty());
    }

    #[test]
    fn extract_diagonal_enumerates_all_boxes() {
        // hand enumeration: spans {a}, {b}, {a b} each have a consistent box
        let p = pair("a b", "x y");
        let a = Alignment::from_links([(0, 0), (1, 1)]);
        let phrases = extract_phrases(&p, &a, &a, 2);
        let expected: BTreeSet<_> = [
            (toks("a"), toks("x")),
            (toks("b"), toks("y")),
            (toks("a b"), toks("x y")),
        ]
        .into_iter()
        .collect();
        assert_eq!(phrases, expected);
    }

    #[test]
    fn extract_crossing_link_blocks_subspans() {
        // x aligns to both a and b: neither single-source span is consistent
        let p = pair("a b", "x");
        let a = Alignment::from_links([(0, 0), (1, 0)]);
        let phrases = extract_phrases(&p, &a, &a, 2);
        let expected: BTreeSet<_> = [(toks("a b"), toks("x"))].into_iter().collect();
        assert_eq!(phrases, expected);
    }

    #[test]
    fn extract_respects_max_len() {
        let p = pair("a b c", "x y z");
        let a = Alignment::from_links([(0, 0), (1, 1), (2, 2)]);
        let phrases = extract_phrases(&p, &a, &a, 2);
        assert!(!phrases.contains(&(toks("a b c"), toks("x y z"))));
        assert!(phrases.contains(&(toks("a b"), toks("x y"))));
    }

    #[test]
    fn relative_frequency_symmetric_counts() {
        let extracted = vec![
            (toks("a"), toks("x")),
            (toks("a"), toks("x")),
            (toks("a"), toks("y")),
            (toks("a"), toks("y")),
        ];
        let table = score_phrase_table(&extracted, 4);
        assert!((table.rule_log_prob(&toks("a"), &toks("x")).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        assert!((table.rule_log_prob(&toks("a"), &toks("y")).unwrap() - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn relative_frequency_skewed_counts() {
        let mut extracted = vec![(toks("a"), toks("x")); 3];
        extracted.push((toks("a"), toks("y")));
        let table = score_phrase_table(&extracted, 4);
        assert!(
            (table.rule_log_prob(&toks("a"), &toks("x")).unwrap() - 0.75f64.ln()).abs() < 1e-12
        );
        assert!(
            (table.rule_log_prob(&toks("a"), &toks("y")).unwrap() - 0.25f64.ln()).abs() < 1e-12
        );
    }

    #[test]
    fn empty_extraction_gives_empty_table() {
        let table = score_phrase_table(&[], 4);
        assert!(table.is_empty());
    }

    #[test]
    fn merge_into_empty_table_at_unit_floor() {
        let mut table = PhraseTable::new(4);
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("c"), toks("C")).unwrap()]);
        merge_dictionary(&mut table, &dic, 1.0).unwrap();
        assert_eq!(table.rule_log_prob(&toks("c"), &toks("C")), Some(0.0));
    }

    #[test]
    fn merge_keeps_higher_scoring_existing_rule() {
        let mut table = PhraseTable::new(4);
        table.insert_rule(&toks("c"), toks("C"), 0.9f64.ln());
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("c"), toks("C")).unwrap()]);
        merge_dictionary(&mut table, &dic, 0.5).unwrap();
        assert!((table.rule_log_prob(&toks("c"), &toks("C")).unwrap() - 0.9f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn merge_adds_alternative_alongside_existing() {
        let mut table = PhraseTable::new(4);
        table.insert_rule(&toks("c"), toks("D"), 0.9f64.ln());
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("c"), toks("C")).unwrap()]);
        merge_dictionary(&mut table, &dic, 0.5).unwrap();
        assert_eq!(table.options(&toks("c")).len(), 2);
        assert_eq!(
            table.rule_log_prob(&toks("c"), &toks("C")),
            Some(0.5f64.ln())
        );
    }

    #[test]
    fn merge_rejects_bad_floor() {
        let mut table = PhraseTable::new(4);
        let dic = BilingualDictionary::new(vec![LexiconEntry::new(toks("c"), toks("C")).unwrap()]);
        assert!(merge_dictionary(&mut table, &dic, 0.0).is_err());
        assert!(merge_dictionary(&mut table, &dic, 1.5).is_err());
    }

    #[test]
    fn dictionary_rules_exempt_from_length_cap() {
        let mut table = PhraseTable::new(2);
        let dic =
            BilingualDictionary::new(vec![
                LexiconEntry::new(toks("one two three"), toks("x")).unwrap()
            ]);
        merge_dictionary(&mut table, &dic, 1.0).unwrap();
        assert_eq!(table.max_source_len(), 3);
    }

    #[test]
    fn dump_round_trips_bit_exactly() {
        let extracted = vec![
            (toks("a"), toks("x")),
            (toks("a"), toks("x")),
            (toks("a"), toks("y")),
            (toks("b c"), toks("z")),
        ];
        let table = score_phrase_table(&extracted, 4);
        let mut dump = Vec::new();
        table.write_dump(&mut dump).unwrap();
        let reread = PhraseTable::read_dump(std::io::Cursor::new(&dump), 4).unwrap();
        assert_eq!(reread, table);
        let mut dump2 = Vec::new();
        reread.write_dump(&mut dump2).unwrap();
        assert_eq!(dump, dump2);
    }
}
