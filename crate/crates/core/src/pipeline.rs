//! Declarative pipeline configuration and end-to-end orchestration.
//!
//! One TOML config drives everything. Validation is aggregate: every
//! violation is reported with its key path rather than stopping at the
//! first. A run writes all stage artifacts plus a self-describing summary
//! (every resolved default included) under the output directory, and two
//! runs with the same config and seed produce byte-identical trees.

use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    filter_dictionary, ingest_monolingual, ingest_parallel, BilingualDictionary, IngestStats,
    ParallelCorpus, Vocabulary,
};
use crate::eval::{vocab_report, VocabReportRow};
use crate::index::{build_index, InvertedIndex, SelectionPolicy};
use crate::mixed::{transform_training_data, MarkerScheme};
use crate::smt::decoder::DecoderConfig;
use crate::smt::SmtConfig;
use crate::synthesis::{
    build_pbmt, combine, synthesize, MixedSpec, PseudoCorpus, SynthError, SynthesisOptions,
    SynthesisReport,
};

/// The six system variants a run can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[serde(rename = "mixed")]
    Mixed,
    #[serde(rename = "mixed-dic")]
    MixedDic,
    #[serde(rename = "pseudo")]
    Pseudo,
    #[serde(rename = "pseudo-dic")]
    PseudoDic,
    #[serde(rename = "pseudo-mixed")]
    PseudoMixed,
    #[serde(rename = "pseudo-mixed-dic")]
    PseudoMixedDic,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Mixed,
        Mode::MixedDic,
        Mode::Pseudo,
        Mode::PseudoDic,
        Mode::PseudoMixed,
        Mode::PseudoMixedDic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Mixed => "mixed",
            Mode::MixedDic => "mixed-dic",
            Mode::Pseudo => "pseudo",
            Mode::PseudoDic => "pseudo-dic",
            Mode::PseudoMixed => "pseudo-mixed",
            Mode::PseudoMixedDic => "pseudo-mixed-dic",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// Synthesizes pseudo pairs from monolingual data.
    pub fn uses_monolingual(self) -> bool {
        !matches!(self, Mode::Mixed | Mode::MixedDic)
    }

    /// Uses dictionary rules inside the translator / as training pairs.
    pub fn uses_dictionary_rules(self) -> bool {
        matches!(
            self,
            Mode::MixedDic | Mode::PseudoDic | Mode::PseudoMixedDic
        )
    }

    /// Applies the mixed word/character transform to the final corpus.
    pub fn applies_mixed(self) -> bool {
        matches!(
            self,
            Mode::Mixed | Mode::MixedDic | Mode::PseudoMixed | Mode::PseudoMixedDic
        )
    }

    /// Needs a dictionary file at all (everything except plain mixed:
    /// synthesis retrieves per lexicon entry even without dictionary rules).
    pub fn needs_dictionary(self) -> bool {
        !matches!(self, Mode::Mixed)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fully validated pipeline settings with every default resolved. Plain
/// values precede the nested sections so the summary can echo the config as
/// TOML.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub seed: u64,
    pub max_len: usize,
    pub bitext_source: PathBuf,
    pub bitext_target: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monolingual: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub source_threshold: u64,
    pub target_threshold: u64,
    pub pairs_per_entry: usize,
    pub dedup_against_bitext: bool,
    pub selection: SelectionPolicy,
    pub smt: SmtConfig,
    pub markers: MarkerSchemeEcho,
}

/// Marker strings as plain fields so the summary can echo them.
#[derive(Debug, Clone, Serialize)]
pub struct MarkerSchemeEcho {
    pub begin: String,
    pub middle: String,
    pub end: String,
}

impl PipelineConfig {
    pub fn marker_scheme(&self) -> MarkerScheme {
        MarkerScheme::new(&self.markers.begin, &self.markers.middle, &self.markers.end)
            .expect("markers validated at config time")
    }
}

/// All collected validation problems, each with its key path.
#[derive(Debug)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problems):", self.0.len())?;
        for problem in &self.0 {
            writeln!(f, "  - {problem}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    seed: Option<i64>,
    max_len: Option<i64>,
    #[serde(default)]
    paths: RawPaths,
    #[serde(default)]
    vocab: RawVocab,
    #[serde(default)]
    synthesis: RawSynthesis,
    #[serde(default)]
    smt: RawSmt,
    #[serde(default)]
    decoder: RawDecoder,
    #[serde(default)]
    markers: RawMarkers,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaths {
    bitext_source: Option<String>,
    bitext_target: Option<String>,
    dictionary: Option<String>,
    monolingual: Option<String>,
    output_dir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVocab {
    source_threshold: Option<i64>,
    target_threshold: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthesis {
    pairs_per_entry: Option<i64>,
    selection: Option<String>,
    dedup_against_bitext: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSmt {
    em_iterations: Option<i64>,
    use_null: Option<bool>,
    max_phrase_len: Option<i64>,
    lm_order: Option<i64>,
    lm_alpha: Option<f64>,
    floor_prob: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecoder {
    beam_size: Option<i64>,
    lambda_tm: Option<f64>,
    lambda_lm: Option<f64>,
    word_penalty: Option<f64>,
    copy_oov: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarkers {
    begin: Option<String>,
    middle: Option<String>,
    end: Option<String>,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct ConfigOverrides {
    pub mode: Option<String>,
    pub pairs_per_entry: Option<i64>,
    pub seed: Option<i64>,
    pub output_dir: Option<String>,
}

/// Parses and validates a TOML pipeline config. Relative paths resolve
/// against `base_dir`. Every violation is reported; nothing is accepted
/// partially.
pub fn validate_config(text: &str, base_dir: &Path) -> Result<PipelineConfig, ConfigErrors> {
    validate_config_with_overrides(text, base_dir, &ConfigOverrides::default())
}

pub fn validate_config_with_overrides(
    text: &str,
    base_dir: &Path,
    overrides: &ConfigOverrides,
) -> Result<PipelineConfig, ConfigErrors> {
    let mut raw: RawConfig = toml::from_str(text)
        .map_err(|e| ConfigErrors(vec![format!("toml parse error: {}", e.message())]))?;
    if let Some(mode) = &overrides.mode {
        raw.mode = Some(mode.clone());
    }
    if let Some(k) = overrides.pairs_per_entry {
        raw.synthesis.pairs_per_entry = Some(k);
    }
    if let Some(seed) = overrides.seed {
        raw.seed = Some(seed);
    }
    if let Some(dir) = &overrides.output_dir {
        raw.paths.output_dir = Some(dir.clone());
    }

    let mut problems = Vec::new();

    let mode = match raw.mode.as_deref() {
        None => {
            problems.push("mode: required; one of mixed, mixed-dic, pseudo, pseudo-dic, pseudo-mixed, pseudo-mixed-dic".to_string());
            None
        }
        Some(name) => match Mode::parse(name) {
            Some(m) => Some(m),
            None => {
                problems.push(format!("mode: unknown mode {name:?}"));
                None
            }
        },
    };

    let seed = check_non_negative(&mut problems, "seed", raw.seed, 0) as u64;
    let max_len = check_positive(&mut problems, "max_len", raw.max_len, 50);

    let resolve = |p: &str| -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            base_dir.join(path)
        }
    };
    let existing_path =
        |problems: &mut Vec<String>, key: &str, value: &Option<String>| -> Option<PathBuf> {
            match value {
                None => None,
                Some(p) => {
                    let resolved = resolve(p);
                    if resolved.is_file() {
                        Some(resolved)
                    } else {
                        problems.push(format!("paths.{key}: file {p:?} does not exist"));
                        None
                    }
                }
            }
        };

    let bitext_source = existing_path(&mut problems, "bitext_source", &raw.paths.bitext_source);
    if raw.paths.bitext_source.is_none() {
        problems.push("paths.bitext_source: required".to_string());
    }
    let bitext_target = existing_path(&mut problems, "bitext_target", &raw.paths.bitext_target);
    if raw.paths.bitext_target.is_none() {
        problems.push("paths.bitext_target: required".to_string());
    }
    let dictionary = existing_path(&mut problems, "dictionary", &raw.paths.dictionary);
    let monolingual = existing_path(&mut problems, "monolingual", &raw.paths.monolingual);
    if let Some(mode) = mode {
        if mode.needs_dictionary() && raw.paths.dictionary.is_none() {
            problems.push(format!(
                "paths.dictionary: required for mode {mode} (only plain mixed runs without one)"
            ));
        }
        if mode.uses_monolingual() && raw.paths.monolingual.is_none() {
            problems.push(format!("paths.monolingual: required for mode {mode}"));
        }
    }
    let output_dir = match &raw.paths.output_dir {
        Some(p) => Some(resolve(p)),
        None => {
            problems.push("paths.output_dir: required".to_string());
            None
        }
    };

    let source_threshold = check_positive(
        &mut problems,
        "vocab.source_threshold",
        raw.vocab.source_threshold,
        10,
    ) as u64;
    let target_threshold = check_positive(
        &mut problems,
        "vocab.target_threshold",
        raw.vocab.target_threshold,
        8,
    ) as u64;

    let pairs_per_entry = check_non_negative(
        &mut problems,
        "synthesis.pairs_per_entry",
        raw.synthesis.pairs_per_entry,
        10,
    );
    let selection = match raw.synthesis.selection.as_deref() {
        None | Some("shortest") => SelectionPolicy::ShortestFirst,
        Some("sample") => SelectionPolicy::SeededSample { seed },
        Some(other) => {
            problems.push(format!(
                "synthesis.selection: expected \"shortest\" or \"sample\", got {other:?}"
            ));
            SelectionPolicy::ShortestFirst
        }
    };
    let dedup_against_bitext = raw.synthesis.dedup_against_bitext.unwrap_or(false);

    let em_iterations =
        check_non_negative(&mut problems, "smt.em_iterations", raw.smt.em_iterations, 5);
    let max_phrase_len = check_positive(
        &mut problems,
        "smt.max_phrase_len",
        raw.smt.max_phrase_len,
        4,
    );
    let lm_order = check_positive(&mut problems, "smt.lm_order", raw.smt.lm_order, 3);
    let lm_alpha = raw.smt.lm_alpha.unwrap_or(0.4);
    if !(lm_alpha > 0.0 && lm_alpha < 1.0) {
        problems.push(format!("smt.lm_alpha: must lie in (0, 1), got {lm_alpha}"));
    }
    let floor_prob = raw.smt.floor_prob.unwrap_or(1.0);
    if !(floor_prob > 0.0 && floor_prob <= 1.0) {
        problems.push(format!(
            "smt.floor_prob: must lie in (0, 1], got {floor_prob}"
        ));
    }
    let beam_size = check_positive(
        &mut problems,
        "decoder.beam_size",
        raw.decoder.beam_size,
        10,
    );

    let begin = raw.markers.begin.unwrap_or_else(|| "⟨B⟩".to_string());
    let middle = raw.markers.middle.unwrap_or_else(|| "⟨M⟩".to_string());
    let end = raw.markers.end.unwrap_or_else(|| "⟨E⟩".to_string());
    if let Err(e) = MarkerScheme::new(&begin, &middle, &end) {
        problems.push(format!("markers: {e}"));
    }

    if !problems.is_empty() {
        return Err(ConfigErrors(problems));
    }

    Ok(PipelineConfig {
        mode: mode.expect("mode validated"),
        seed,
        max_len,
        bitext_source: bitext_source.expect("path validated"),
        bitext_target: bitext_target.expect("path validated"),
        dictionary,
        monolingual,
        output_dir: output_dir.expect("path validated"),
        source_threshold,
        target_threshold,
        pairs_per_entry,
        selection,
        dedup_against_bitext,
        smt: SmtConfig {
            em_iterations,
            use_null: raw.smt.use_null.unwrap_or(false),
            max_phrase_len,
            lm_order,
            lm_alpha,
            floor_prob,
            decoder: DecoderConfig {
                beam_size,
                lambda_tm: raw.decoder.lambda_tm.unwrap_or(1.0),
                lambda_lm: raw.decoder.lambda_lm.unwrap_or(1.0),
                word_penalty: raw.decoder.word_penalty.unwrap_or(0.0),
                copy_oov: raw.decoder.copy_oov.unwrap_or(true),
            },
        },
        markers: MarkerSchemeEcho { begin, middle, end },
    })
}

fn check_positive(
    problems: &mut Vec<String>,
    key: &str,
    value: Option<i64>,
    default: usize,
) -> usize {
    match value {
        None => default,
        Some(v) if v >= 1 => v as usize,
        Some(v) => {
            problems.push(format!("{key}: must be >= 1, got {v}"));
            default
        }
    }
}

fn check_non_negative(
    problems: &mut Vec<String>,
    key: &str,
    value: Option<i64>,
    default: usize,
) -> usize {
    match value {
        None => default,
        Some(v) if v >= 0 => v as usize,
        Some(v) => {
            problems.push(format!("{key}: must be >= 0, got {v}"));
            default
        }
    }
}

/// Whether a failure came from the inputs or from a broken internal
/// guarantee; the CLI maps these onto distinct exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Internal,
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub kind: ErrorKind,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

fn input_err<E: fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        kind: ErrorKind::Input,
        message: e.to_string(),
    }
}

/// Per-entry synthesis outcome for the summary.
#[derive(Debug, Clone, Serialize)]
pub struct EntrySummary {
    pub source: String,
    pub target: String,
    pub pairs: usize,
    pub forced: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisSummary {
    pub pseudo_pairs: usize,
    pub forced_pairs: usize,
    pub zero_match_entries: usize,
    pub duplicates_dropped: usize,
    pub per_entry: Vec<EntrySummary>,
}

/// Everything a run reports; serialized as `summary.json`.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub config: PipelineConfig,
    pub bitext: IngestStats,
    pub dictionary_entries: usize,
    pub dictionary_rare_entries: usize,
    pub monolingual_sentences: usize,
    pub synthesis: Option<SynthesisSummary>,
    pub combined_pairs: usize,
    pub vocab_report: Vec<VocabReportRow>,
    pub artifacts: Vec<String>,
}

struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<String>,
    log: Vec<String>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> Self {
        ArtifactWriter {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            log: Vec::new(),
        }
    }

    fn write(
        &mut self,
        stage: &'static str,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        let result = (|| -> std::io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            body(&mut w)?;
            w.flush()
        })();
        result.map_err(|e| PipelineError {
            stage,
            kind: ErrorKind::Input,
            message: format!("writing {name}: {e}"),
        })?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn event(&mut self, stage: &str, event: &str, detail: impl fmt::Display) {
        self.log.push(format!("{stage}\t{event}\t{detail}"));
    }
}

/// Runs the configured pipeline end to end, writing artifacts under the
/// output directory and returning the summary that was also written there.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    fs::create_dir_all(&cfg.output_dir).map_err(input_err("setup"))?;
    let mut out = ArtifactWriter::new(&cfg.output_dir);
    let scheme = cfg.marker_scheme();

    // ingest
    let open = |stage: &'static str, path: &Path| -> Result<BufReader<File>, PipelineError> {
        File::open(path)
            .map(BufReader::new)
            .map_err(|e| PipelineError {
                stage,
                kind: ErrorKind::Input,
                message: format!("{}: {e}", path.display()),
            })
    };
    let (bitext, bitext_stats) = ingest_parallel(
        open("ingest", &cfg.bitext_source)?,
        open("ingest", &cfg.bitext_target)?,
        Some(cfg.max_len),
    )
    .map_err(input_err("ingest"))?;
    out.event("ingest", "bitext_pairs", bitext_stats.kept);
    out.event("ingest", "dropped_overlong", bitext_stats.dropped_overlong);
    out.event("ingest", "skipped_empty", bitext_stats.skipped_empty);

    // vocabularies over the bitext
    let src_vocab = Vocabulary::build(bitext.source_sentences(), cfg.source_threshold)
        .map_err(input_err("vocab"))?;
    let tgt_vocab = Vocabulary::build(bitext.target_sentences(), cfg.target_threshold)
        .map_err(input_err("vocab"))?;
    out.write("vocab", "vocab.src.tsv", |w| src_vocab.write_tsv(w))?;
    out.write("vocab", "vocab.tgt.tsv", |w| tgt_vocab.write_tsv(w))?;
    out.event("vocab", "source_kept", src_vocab.kept_len());
    out.event("vocab", "target_kept", tgt_vocab.kept_len());

    // dictionary
    let (dictionary, rare) = match &cfg.dictionary {
        Some(path) => {
            let dic = BilingualDictionary::read_tsv(open("dictionary", path)?)
                .map_err(input_err("dictionary"))?;
            let rare = filter_dictionary(&dic, &src_vocab);
            (dic, rare)
        }
        None => (BilingualDictionary::empty(), BilingualDictionary::empty()),
    };
    out.write("dictionary", "dict.filtered.tsv", |w| rare.write_tsv(w))?;
    out.event("dictionary", "entries", dictionary.len());
    out.event("dictionary", "rare_entries", rare.len());

    // synthesis stages for pseudo modes
    let mut mono_count = 0usize;
    let mut pseudo = PseudoCorpus::default();
    let mut synthesis_summary = None;
    if cfg.mode.uses_monolingual() {
        let mono_path = cfg
            .monolingual
            .as_ref()
            .expect("validated: pseudo modes have a monolingual path");
        let (mono, mono_stats) =
            ingest_monolingual(open("index", mono_path)?).map_err(input_err("index"))?;
        mono_count = mono.len();
        out.event("index", "sentences", mono_stats.kept);
        out.event("index", "skipped_empty", mono_stats.skipped_empty);
        let index: InvertedIndex = build_index(mono);
        out.write("index", "index.txt", |w| index.write_to(w))?;

        let rules_dic = if cfg.mode.uses_dictionary_rules() {
            rare.clone()
        } else {
            BilingualDictionary::empty()
        };
        let translator =
            build_pbmt(&bitext, &rules_dic, &cfg.smt).map_err(input_err("train-smt"))?;
        out.write("train-smt", "phrase-table.txt", |w| {
            translator.phrase_table.write_dump(w)
        })?;
        out.write("train-smt", "lm.txt", |w| translator.lm.write_dump(w))?;
        out.event("train-smt", "phrase_rules", translator.phrase_table.len());

        let opts = SynthesisOptions {
            pairs_per_entry: cfg.pairs_per_entry,
            max_len: cfg.max_len,
            policy: cfg.selection,
            enforce_targets: cfg.mode.uses_dictionary_rules(),
        };
        let (mut corpus, report): (PseudoCorpus, SynthesisReport) =
            synthesize(&rare, &index, &translator, &opts).map_err(|e| PipelineError {
                stage: "synthesize",
                kind: match e {
                    SynthError::GuaranteeViolated { .. } => ErrorKind::Internal,
                    _ => ErrorKind::Input,
                },
                message: e.to_string(),
            })?;

        let mut duplicates_dropped = 0usize;
        if cfg.dedup_against_bitext {
            let seen: HashSet<_> = bitext
                .pairs
                .iter()
                .map(|p| (p.source.clone(), p.target.clone()))
                .collect();
            let before = corpus.pairs.len();
            corpus.pairs.retain(|p| {
                let key = (p.source.clone(), p.target.clone());
                !seen.contains(&key)
            });
            duplicates_dropped = before - corpus.pairs.len();
            let mut counts = vec![0usize; rare.len()];
            for p in &corpus.pairs {
                counts[p.entry_index] += 1;
            }
            corpus.per_entry_counts = counts;
        }

        out.write("synthesize", "pseudo.src", |w| {
            for p in &corpus.pairs {
                writeln!(w, "{}", p.source)?;
            }
            Ok(())
        })?;
        out.write("synthesize", "pseudo.tgt", |w| {
            for p in &corpus.pairs {
                writeln!(w, "{}", p.target)?;
            }
            Ok(())
        })?;
        out.write("synthesize", "provenance.tsv", |w| {
            for (i, p) in corpus.pairs.iter().enumerate() {
                let entry = &rare.entries()[p.entry_index];
                writeln!(
                    w,
                    "{i}\t{}\t{}\t{}\t{}",
                    entry.source_phrase.join(" "),
                    entry.target_phrase.join(" "),
                    p.mono_id,
                    p.forced
                )?;
            }
            Ok(())
        })?;

        let per_entry: Vec<EntrySummary> = rare
            .entries()
            .iter()
            .enumerate()
            .map(|(i, entry)| EntrySummary {
                source: entry.source_phrase.join(" "),
                target: entry.target_phrase.join(" "),
                pairs: corpus.per_entry_counts[i],
                forced: corpus
                    .pairs
                    .iter()
                    .filter(|p| p.entry_index == i && p.forced)
                    .count(),
            })
            .collect();
        for e in &per_entry {
            out.event(
                "synthesize",
                "entry",
                format!("source={} pairs={} forced={}", e.source, e.pairs, e.forced),
            );
        }
        for &idx in &report.zero_match_entries {
            out.event(
                "synthesize",
                "zero_match",
                rare.entries()[idx].source_phrase.join(" "),
            );
        }
        synthesis_summary = Some(SynthesisSummary {
            pseudo_pairs: corpus.pairs.len(),
            forced_pairs: corpus.pairs.iter().filter(|p| p.forced).count(),
            zero_match_entries: report.zero_match_entries.len(),
            duplicates_dropped,
            per_entry,
        });
        pseudo = corpus;
    }

    // combine (+ mixed transform where the mode asks for it)
    let combined = match cfg.mode {
        Mode::Mixed | Mode::MixedDic => transform_training_data(
            &bitext,
            &rare,
            &src_vocab,
            &tgt_vocab,
            cfg.mode == Mode::MixedDic,
            &scheme,
        )
        .map_err(input_err("combine"))?,
        Mode::Pseudo | Mode::PseudoDic => {
            combine(&bitext, &pseudo, None).map_err(input_err("combine"))?
        }
        Mode::PseudoMixed | Mode::PseudoMixedDic => {
            let spec = MixedSpec {
                scheme: scheme.clone(),
                source_threshold: cfg.source_threshold,
                target_threshold: cfg.target_threshold,
            };
            combine(&bitext, &pseudo, Some(&spec)).map_err(input_err("combine"))?
        }
    };
    out.write("combine", "combined.src", |w| {
        for pair in &combined.pairs {
            writeln!(w, "{}", pair.source)?;
        }
        Ok(())
    })?;
    out.write("combine", "combined.tgt", |w| {
        for pair in &combined.pairs {
            writeln!(w, "{}", pair.target)?;
        }
        Ok(())
    })?;
    out.event("combine", "pairs", combined.len());

    // reports
    let pseudo_parallel = pseudo.as_parallel();
    let mut named: Vec<(&str, &ParallelCorpus)> = vec![("baseline", &bitext)];
    if !pseudo_parallel.is_empty() {
        named.push(("pseudo", &pseudo_parallel));
    }
    named.push(("combined", &combined));
    let report_rows = vocab_report(&named, cfg.source_threshold, cfg.target_threshold);
    for row in &report_rows {
        out.event(
            "report",
            "vocab",
            format!(
                "corpus={} source={} target={}",
                row.name, row.source_vocab, row.target_vocab
            ),
        );
    }

    let mut summary = RunSummary {
        config: cfg.clone(),
        bitext: bitext_stats,
        dictionary_entries: dictionary.len(),
        dictionary_rare_entries: rare.len(),
        monolingual_sentences: mono_count,
        synthesis: synthesis_summary,
        combined_pairs: combined.len(),
        vocab_report: report_rows,
        artifacts: Vec::new(),
    };

    let log_lines = out.log.clone();
    out.write("report", "run.log", |w| {
        for line in &log_lines {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })?;
    out.write("report", "report.txt", |w| write_report(w, &summary))?;
    summary.artifacts = out.written.clone();
    summary.artifacts.push("summary.json".to_string());
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    out.write("report", "summary.json", |w| {
        w.write_all(json.as_bytes())?;
        w.write_all(b"\n")
    })?;

    Ok(summary)
}

fn write_report(w: &mut impl Write, summary: &RunSummary) -> std::io::Result<()> {
    writeln!(w, "run summary")?;
    writeln!(w, "===========")?;
    writeln!(w, "mode: {}", summary.config.mode)?;
    writeln!(w, "seed: {}", summary.config.seed)?;
    writeln!(w)?;
    writeln!(
        w,
        "bitext pairs: {} (dropped overlong {}, skipped empty {})",
        summary.bitext.kept, summary.bitext.dropped_overlong, summary.bitext.skipped_empty
    )?;
    writeln!(
        w,
        "dictionary entries: {} ({} rare after filtering)",
        summary.dictionary_entries, summary.dictionary_rare_entries
    )?;
    if summary.config.mode.uses_monolingual() {
        writeln!(
            w,
            "monolingual sentences: {}",
            summary.monolingual_sentences
        )?;
    }
    if let Some(synth) = &summary.synthesis {
        writeln!(
            w,
            "pseudo pairs: {} (forced {}, zero-match entries {}, duplicates dropped {})",
            synth.pseudo_pairs,
            synth.forced_pairs,
            synth.zero_match_entries,
            synth.duplicates_dropped
        )?;
    }
    writeln!(w, "combined pairs: {}", summary.combined_pairs)?;
    writeln!(w)?;
    writeln!(
        w,
        "vocabulary sizes (source threshold {}, target threshold {}):",
        summary.config.source_threshold, summary.config.target_threshold
    )?;
    for row in &summary.vocab_report {
        writeln!(
            w,
            "  {:<10} |V_src|={:<8} |V_tgt|={}",
            row.name, row.source_vocab, row.target_vocab
        )?;
    }
    writeln!(w)?;
    writeln!(w, "resolved configuration:")?;
    let echo = toml::to_string_pretty(&summary.config).expect("config echoes as TOML");
    for line in echo.lines() {
        writeln!(w, "  {line}")?;
    }
    Ok(())
}
