use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lexforge::corpus::{
    ingest_monolingual, ingest_parallel, BilingualDictionary, ParallelCorpus, Sentence, Vocabulary,
};
use lexforge::eval::{bleu, hit_rate, EvalSet, HitMode};
use lexforge::index::{build_index, InvertedIndex, SelectionPolicy};
use lexforge::mixed::{relabel_sentence, restore, MarkerScheme, MixedSentence};
use lexforge::pipeline::{
    run_pipeline, validate_config_with_overrides, ConfigOverrides, ErrorKind, PipelineError,
};
use lexforge::smt::decoder::{decode, DecoderConfig};
use lexforge::smt::lm::NGramLM;
use lexforge::smt::model1::TranslationTable;
use lexforge::smt::phrase::PhraseTable;
use lexforge::smt::SmtConfig;
use lexforge::synthesis::{
    build_pbmt, combine, synthesize, MixedSpec, SynthError, SynthesisOptions, Translator,
};

/// Corpus engineering for rare-word bilingual dictionaries: mixed
/// word/character relabeling, pseudo parallel sentence synthesis via a
/// built-in miniature phrase-based translator, and evaluation metrics.
#[derive(Parser)]
#[command(name = "lexforge", version)]
struct Cli {
    /// Cap intra-stage parallelism. Outputs are identical at any setting.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Shortest,
    Sample,
}

#[derive(clap::Args)]
struct MarkerArgs {
    /// Marker prefixed to the first character of a relabeled word.
    #[arg(long, default_value = "⟨B⟩")]
    marker_begin: String,
    /// Marker prefixed to interior characters.
    #[arg(long, default_value = "⟨M⟩")]
    marker_middle: String,
    /// Marker prefixed to the last character.
    #[arg(long, default_value = "⟨E⟩")]
    marker_end: String,
}

impl MarkerArgs {
    fn scheme(&self) -> Result<MarkerScheme> {
        Ok(MarkerScheme::new(
            &self.marker_begin,
            &self.marker_middle,
            &self.marker_end,
        )?)
    }
}

#[derive(clap::Args)]
struct SmtArgs {
    #[arg(long, default_value_t = 5)]
    em_iterations: usize,
    /// Add an empty source word to alignment training.
    #[arg(long)]
    use_null: bool,
    #[arg(long, default_value_t = 4)]
    max_phrase_len: usize,
    #[arg(long, default_value_t = 3)]
    lm_order: usize,
    #[arg(long, default_value_t = 0.4)]
    lm_alpha: f64,
    /// Probability floor for dictionary rules merged into the phrase table.
    #[arg(long, default_value_t = 1.0)]
    floor_prob: f64,
}

#[derive(clap::Args)]
struct DecoderArgs {
    #[arg(long, default_value_t = 10)]
    beam_size: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda_tm: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_lm: f64,
    #[arg(long, default_value_t = 0.0)]
    word_penalty: f64,
    /// Drop source tokens with no rule instead of copying them through.
    #[arg(long)]
    no_copy_oov: bool,
}

impl DecoderArgs {
    fn config(&self) -> DecoderConfig {
        DecoderConfig {
            beam_size: self.beam_size,
            lambda_tm: self.lambda_tm,
            lambda_lm: self.lambda_lm,
            word_penalty: self.word_penalty,
            copy_oov: !self.no_copy_oov,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Count tokens and dump a frequency-thresholded vocabulary.
    Vocab {
        /// One or more corpus files, one sentence per line.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        threshold: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Apply the mixed word/character transform to a corpus file, or invert
    /// it with --restore.
    Mixedwc {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Vocabulary dump (word<TAB>count); required unless --restore.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Threshold to apply to the vocabulary dump.
        #[arg(long)]
        threshold: Option<u64>,
        /// Invert: merge marked character runs back into words.
        #[arg(long)]
        restore: bool,
        #[command(flatten)]
        markers: MarkerArgs,
    },
    /// Build an inverted index over a monolingual corpus.
    Index {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Query an index for sentences containing a phrase.
    Retrieve {
        #[arg(long)]
        index: PathBuf,
        /// Space-separated tokens to match contiguously.
        #[arg(long)]
        phrase: String,
        #[arg(short = 'k', long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        max_len: usize,
        #[arg(long, value_enum, default_value = "shortest")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the miniature translator and dump its phrase table and
    /// language model.
    TrainSmt {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Dictionary entries to merge as phrasal rules and training pairs.
        #[arg(long)]
        dictionary: Option<PathBuf>,
        #[arg(long)]
        output_dir: PathBuf,
        /// Drop training pairs where either side exceeds this length.
        #[arg(long, default_value_t = 50)]
        max_len: usize,
        #[command(flatten)]
        smt: SmtArgs,
    },
    /// Translate a source file with a dumped phrase table and language model.
    Decode {
        #[arg(long)]
        phrase_table: PathBuf,
        #[arg(long)]
        lm: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_phrase_len: usize,
        #[command(flatten)]
        decoder: DecoderArgs,
    },
    /// Synthesize pseudo parallel pairs for every dictionary entry.
    Synthesize {
        #[arg(long)]
        dictionary: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        phrase_table: PathBuf,
        #[arg(long)]
        lm: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
        /// Pseudo pairs per dictionary entry.
        #[arg(short = 'k', long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        max_len: usize,
        #[arg(long, value_enum, default_value = "shortest")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep free translations even when they lose the target phrase.
        #[arg(long)]
        no_enforce_targets: bool,
        #[arg(long, default_value_t = 4)]
        max_phrase_len: usize,
        #[command(flatten)]
        decoder: DecoderArgs,
    },
    /// Concatenate bitext and pseudo corpus, optionally applying the mixed
    /// transform with vocabularies recomputed over the concatenation.
    Combine {
        #[arg(long)]
        bitext_source: PathBuf,
        #[arg(long)]
        bitext_target: PathBuf,
        #[arg(long)]
        pseudo_source: Option<PathBuf>,
        #[arg(long)]
        pseudo_target: Option<PathBuf>,
        #[arg(long)]
        output_dir: PathBuf,
        /// Apply the mixed word/character transform to the concatenation.
        #[arg(long)]
        mixed: bool,
        #[arg(long, default_value_t = 10)]
        source_threshold: u64,
        #[arg(long, default_value_t = 8)]
        target_threshold: u64,
        #[command(flatten)]
        markers: MarkerArgs,
    },
    /// Corpus-level n-gram BLEU with brevity penalty.
    Bleu {
        #[arg(long)]
        hypotheses: PathBuf,
        /// One or more reference files, each line-aligned with the
        /// hypotheses.
        #[arg(long, required = true, num_args = 1..)]
        references: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
        /// Compare tokens without case folding.
        #[arg(long)]
        case_sensitive: bool,
    },
    /// Fraction of covered dictionary entries whose translation appears in
    /// the hypotheses.
    Hitrate {
        #[arg(long)]
        dictionary: PathBuf,
        #[arg(long)]
        sources: PathBuf,
        #[arg(long)]
        hypotheses: PathBuf,
        /// Count every covering sentence separately instead of per entry.
        #[arg(long)]
        token_level: bool,
        /// Write per-entry outcome rows to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the full configured pipeline.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured mode.
        #[arg(long)]
        mode: Option<String>,
        /// Override synthesis.pairs_per_entry.
        #[arg(short = 'k', long)]
        k: Option<i64>,
        #[arg(long)]
        seed: Option<i64>,
        #[arg(long)]
        output_dir: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 1 for input problems, 2 for a broken internal guarantee.
fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(p) = cause.downcast_ref::<PipelineError>() {
            if p.kind == ErrorKind::Internal {
                return 2;
            }
        }
        if let Some(SynthError::GuaranteeViolated { .. }) = cause.downcast_ref::<SynthError>() {
            return 2;
        }
    }
    1
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
}

fn read_sentences(path: &Path) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for line in open(path)?.lines() {
        out.push(Sentence::from_line(&line?));
    }
    Ok(out)
}

fn load_vocab(path: &Path, threshold: u64) -> Result<Vocabulary> {
    Vocabulary::read_tsv(open(path)?, threshold)
        .with_context(|| format!("reading vocabulary {}", path.display()))
}

fn policy_for(policy: PolicyArg, seed: u64) -> SelectionPolicy {
    match policy {
        PolicyArg::Shortest => SelectionPolicy::ShortestFirst,
        PolicyArg::Sample => SelectionPolicy::SeededSample { seed },
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Vocab {
            input,
            threshold,
            output,
        } => {
            let mut sentences = Vec::new();
            for path in &input {
                sentences.extend(read_sentences(path)?);
            }
            let vocab = Vocabulary::build(&sentences, threshold)?;
            let mut w = create(&output)?;
            vocab.write_tsv(&mut w)?;
            w.flush()?;
            println!(
                "kept {} of {} distinct words (threshold {threshold})",
                vocab.kept_len(),
                vocab.distinct_words()
            );
            Ok(())
        }
        Command::Mixedwc {
            input,
            output,
            vocab,
            threshold,
            restore: do_restore,
            markers,
        } => {
            let scheme = markers.scheme()?;
            let mut w = create(&output)?;
            if do_restore {
                let mut repairs = 0usize;
                for line in open(&input)?.lines() {
                    let restored = restore(&MixedSentence::from_line(&line?), &scheme);
                    repairs += restored.repaired_runs;
                    writeln!(w, "{}", restored.sentence)?;
                }
                w.flush()?;
                println!(
                    "restored {}; repaired {repairs} malformed runs",
                    output.display()
                );
            } else {
                let (vocab_path, threshold) = match (vocab, threshold) {
                    (Some(v), Some(t)) => (v, t),
                    _ => bail!("relabeling requires --vocab and --threshold (or pass --restore)"),
                };
                let vocab = load_vocab(&vocab_path, threshold)?;
                for (idx, line) in open(&input)?.lines().enumerate() {
                    let sentence = Sentence::from_line(&line?);
                    let mixed = relabel_sentence(&sentence, &vocab, &scheme)
                        .with_context(|| format!("line {}", idx + 1))?;
                    writeln!(w, "{mixed}")?;
                }
                w.flush()?;
                println!("relabeled {}", output.display());
            }
            Ok(())
        }
        Command::Index { input, output } => {
            let (corpus, stats) = ingest_monolingual(open(&input)?)?;
            let index = build_index(corpus);
            let mut w = create(&output)?;
            index.write_to(&mut w)?;
            w.flush()?;
            println!(
                "indexed {} sentences ({} empty lines skipped)",
                index.store().len(),
                stats.skipped_empty
            );
            Ok(())
        }
        Command::Retrieve {
            index,
            phrase,
            k,
            max_len,
            policy,
            seed,
        } => {
            let index = InvertedIndex::read_from(open(&index)?)?;
            let phrase: Vec<String> = phrase.split_whitespace().map(str::to_string).collect();
            let ids = index.retrieve_with_policy(&phrase, k, max_len, policy_for(policy, seed));
            for id in ids {
                println!("{id}\t{}", index.sentence(id));
            }
            Ok(())
        }
        Command::TrainSmt {
            source,
            target,
            dictionary,
            output_dir,
            max_len,
            smt,
        } => {
            let (bitext, stats) = ingest_parallel(open(&source)?, open(&target)?, Some(max_len))?;
            let dic = match &dictionary {
                Some(path) => BilingualDictionary::read_tsv(open(path)?)?,
                None => BilingualDictionary::empty(),
            };
            let cfg = SmtConfig {
                em_iterations: smt.em_iterations,
                use_null: smt.use_null,
                max_phrase_len: smt.max_phrase_len,
                lm_order: smt.lm_order,
                lm_alpha: smt.lm_alpha,
                floor_prob: smt.floor_prob,
                decoder: DecoderConfig::default(),
            };
            let translator = build_pbmt(&bitext, &dic, &cfg)?;
            fs::create_dir_all(&output_dir)?;
            let mut w = create(&output_dir.join("phrase-table.txt"))?;
            translator.phrase_table.write_dump(&mut w)?;
            w.flush()?;
            let mut w = create(&output_dir.join("lm.txt"))?;
            translator.lm.write_dump(&mut w)?;
            w.flush()?;
            println!(
                "trained on {} pairs (+{} dictionary entries): {} phrase rules",
                stats.kept,
                dic.len(),
                translator.phrase_table.len()
            );
            Ok(())
        }
        Command::Decode {
            phrase_table,
            lm,
            input,
            output,
            max_phrase_len,
            decoder,
        } => {
            let table = PhraseTable::read_dump(open(&phrase_table)?, max_phrase_len)?;
            let lm = NGramLM::read_dump(open(&lm)?)?;
            let cfg = decoder.config();
            let mut w = create(&output)?;
            let mut count = 0usize;
            for line in open(&input)?.lines() {
                let out = decode(&Sentence::from_line(&line?), &table, &lm, &cfg);
                writeln!(w, "{out}")?;
                count += 1;
            }
            w.flush()?;
            println!("decoded {count} sentences into {}", output.display());
            Ok(())
        }
        Command::Synthesize {
            dictionary,
            index,
            phrase_table,
            lm,
            output_dir,
            k,
            max_len,
            policy,
            seed,
            no_enforce_targets,
            max_phrase_len,
            decoder,
        } => {
            let dic = BilingualDictionary::read_tsv(open(&dictionary)?)?;
            let index = InvertedIndex::read_from(open(&index)?)?;
            // the lexical tables are training-time artifacts; decoding from
            // dumps only needs the phrase table and language model
            let translator = Translator {
                forward: TranslationTable::empty(false),
                backward: TranslationTable::empty(false),
                phrase_table: PhraseTable::read_dump(open(&phrase_table)?, max_phrase_len)?,
                lm: NGramLM::read_dump(open(&lm)?)?,
                decoder: decoder.config(),
            };
            let opts = SynthesisOptions {
                pairs_per_entry: k,
                max_len,
                policy: policy_for(policy, seed),
                enforce_targets: !no_enforce_targets,
            };
            let (pseudo, report) = synthesize(&dic, &index, &translator, &opts)?;
            fs::create_dir_all(&output_dir)?;
            let mut src = create(&output_dir.join("pseudo.src"))?;
            let mut tgt = create(&output_dir.join("pseudo.tgt"))?;
            let mut prov = create(&output_dir.join("provenance.tsv"))?;
            for (i, pair) in pseudo.pairs.iter().enumerate() {
                writeln!(src, "{}", pair.source)?;
                writeln!(tgt, "{}", pair.target)?;
                let entry = &dic.entries()[pair.entry_index];
                writeln!(
                    prov,
                    "{i}\t{}\t{}\t{}\t{}",
                    entry.source_phrase.join(" "),
                    entry.target_phrase.join(" "),
                    pair.mono_id,
                    pair.forced
                )?;
            }
            src.flush()?;
            tgt.flush()?;
            prov.flush()?;
            println!(
                "synthesized {} pairs ({} forced, {} entries without matches)",
                pseudo.len(),
                report.forced_pairs,
                report.zero_match_entries.len()
            );
            Ok(())
        }
        Command::Combine {
            bitext_source,
            bitext_target,
            pseudo_source,
            pseudo_target,
            output_dir,
            mixed,
            source_threshold,
            target_threshold,
            markers,
        } => {
            let (bitext, _) = ingest_parallel(open(&bitext_source)?, open(&bitext_target)?, None)?;
            let pseudo = match (&pseudo_source, &pseudo_target) {
                (Some(s), Some(t)) => ingest_parallel(open(s)?, open(t)?, None)?.0,
                (None, None) => ParallelCorpus::default(),
                _ => bail!("--pseudo-source and --pseudo-target must be given together"),
            };
            let mut combined = bitext.clone();
            combined.pairs.extend(pseudo.pairs);
            let combined = if mixed {
                let spec = MixedSpec {
                    scheme: markers.scheme()?,
                    source_threshold,
                    target_threshold,
                };
                // reuse the synthesis-side combine so vocabularies are
                // recomputed over the concatenation
                combine(
                    &combined,
                    &lexforge::synthesis::PseudoCorpus::default(),
                    Some(&spec),
                )?
            } else {
                combined
            };
            fs::create_dir_all(&output_dir)?;
            let mut src = create(&output_dir.join("combined.src"))?;
            let mut tgt = create(&output_dir.join("combined.tgt"))?;
            combined.write_files(&mut src, &mut tgt)?;
            src.flush()?;
            tgt.flush()?;
            println!("combined {} pairs", combined.len());
            Ok(())
        }
        Command::Bleu {
            hypotheses,
            references,
            max_order,
            case_sensitive,
        } => {
            let hyps = read_sentences(&hypotheses)?;
            let mut per_sentence: Vec<Vec<Sentence>> = vec![Vec::new(); hyps.len()];
            for path in &references {
                let lines = read_sentences(path)?;
                if lines.len() != hyps.len() {
                    bail!(
                        "reference {} has {} lines but hypotheses have {}",
                        path.display(),
                        lines.len(),
                        hyps.len()
                    );
                }
                for (row, sentence) in per_sentence.iter_mut().zip(lines) {
                    row.push(sentence);
                }
            }
            let set = EvalSet::for_scoring(per_sentence, hyps)?;
            let score = bleu(&set, max_order, !case_sensitive)?;
            println!("BLEU = {score:.4}");
            Ok(())
        }
        Command::Hitrate {
            dictionary,
            sources,
            hypotheses,
            token_level,
            report,
        } => {
            let dic = BilingualDictionary::read_tsv(open(&dictionary)?)?;
            let sources = read_sentences(&sources)?;
            let hyps = read_sentences(&hypotheses)?;
            let refs = vec![Vec::new(); hyps.len()];
            let set = EvalSet::new(sources, refs, hyps)?;
            let mode = if token_level {
                HitMode::TokenLevel
            } else {
                HitMode::TypeLevel
            };
            let result = hit_rate(&dic, &set, mode);
            println!(
                "covered {} | hits {} | rate {}",
                result.covered_entries,
                result.hits,
                match result.rate {
                    Some(rate) => format!("{rate:.4}"),
                    None => "undefined (nothing covered)".to_string(),
                }
            );
            if let Some(path) = report {
                let mut w = create(&path)?;
                writeln!(
                    w,
                    "# hit semantics: a hit means any dictionary target for the source \
                     occurs anywhere in the hypothesis (contiguous, case-insensitive); \
                     alignment to the source occurrence is not checked"
                )?;
                writeln!(
                    w,
                    "# source\ttarget\tcovered_sentences\thit_sentences\tcovered\thit"
                )?;
                for row in &result.rows {
                    writeln!(
                        w,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        row.source,
                        row.target,
                        row.covered_sentences,
                        row.hit_sentences,
                        row.covered,
                        row.hit
                    )?;
                }
                w.flush()?;
            }
            Ok(())
        }
        Command::Run {
            config,
            mode,
            k,
            seed,
            output_dir,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let base = config
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let overrides = ConfigOverrides {
                mode,
                pairs_per_entry: k,
                seed,
                output_dir,
            };
            let cfg = validate_config_with_overrides(&text, &base, &overrides)?;
            let summary = run_pipeline(&cfg)?;
            println!(
                "mode {} | bitext {} | pseudo {} | combined {} | artifacts in {}",
                summary.config.mode,
                summary.bitext.kept,
                summary
                    .synthesis
                    .as_ref()
                    .map(|s| s.pseudo_pairs)
                    .unwrap_or(0),
                summary.combined_pairs,
                cfg.output_dir.display()
            );
            Ok(())
        }
    }
}
