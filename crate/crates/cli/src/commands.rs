use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use codemix_core::cleaner::{Cleaner, HashtagMode};
use codemix_core::corpus::{self, BitextRecord, LanguageTag};
use codemix_core::embedding::{
    induce_lexicon, load_table, nearest_lg2, save_table, train_file, EmbeddingHyperparams, DEFAULT_TAU,
};
use codemix_core::generator::{self, Generator, GeneratorConfig, ScriptMode};
use codemix_core::metrics::{self, BleuConfig, MetricsReport};
use codemix_core::ngram::{build_shuffled_corpus, Vocabulary};
use codemix_core::translit::{romanize_target, TranslitScheme};
use codemix_core::Exec;

use crate::args::*;
use crate::config::{Flag, Resolver};

pub struct Ctx<'a> {
    pub r: Resolver<'a>,
    pub seed: u64,
    pub workers: usize,
}

impl Ctx<'_> {
    /// Logs every resolved setting. Called once all values are known and
    /// before any output is written.
    fn announce(&self, command: &str) {
        let entries: Vec<String> = self
            .r
            .resolved()
            .iter()
            .map(|(k, v, o)| format!("{k} = {v} ({o})"))
            .collect();
        log::info!("{command}: {}", entries.join(", "));
        log::info!("seed = {}", self.seed);
    }

    fn exec(&self) -> Result<Exec> {
        Ok(Exec::new(self.workers)?)
    }
}

enum CorpusSource {
    Single(PathBuf, Format),
    Parallel(PathBuf, PathBuf),
}

enum CorpusSink {
    Single(PathBuf, Format),
    Parallel(PathBuf, PathBuf),
}

#[derive(Clone, Copy)]
enum Format {
    Tsv,
    Jsonl,
}

fn format_of(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("tsv") => Ok(Format::Tsv),
        Some("jsonl") | Some("json") => Ok(Format::Jsonl),
        _ => bail!(
            "cannot tell the format of {} (use .tsv or .jsonl, or an aligned file pair)",
            path.display()
        ),
    }
}

fn corpus_source(r: &Resolver, a: &CorpusIn) -> Result<CorpusSource> {
    let input = r.path("input", a.input.as_deref())?;
    let source = r.path("source", a.source.as_deref())?;
    let target = r.path("target", a.target.as_deref())?;
    match (input, source, target) {
        (Some(p), None, None) => Ok(CorpusSource::Single(p.clone(), format_of(&p)?)),
        (None, Some(s), Some(t)) => Ok(CorpusSource::Parallel(s, t)),
        _ => bail!("give either --input, or both --source and --target"),
    }
}

fn corpus_sink(r: &Resolver, a: &CorpusOut) -> Result<CorpusSink> {
    let output = r.path("output", a.output.as_deref())?;
    let source = r.path("output_source", a.output_source.as_deref())?;
    let target = r.path("output_target", a.output_target.as_deref())?;
    match (output, source, target) {
        (Some(p), None, None) => Ok(CorpusSink::Single(p.clone(), format_of(&p)?)),
        (None, Some(s), Some(t)) => Ok(CorpusSink::Parallel(s, t)),
        _ => bail!("give either --output, or both --output-source and --output-target"),
    }
}

fn single_sink(r: &Resolver, key: &'static str, flag: Option<&str>) -> Result<CorpusSink> {
    let p: PathBuf = r.required(key, flag)?;
    Ok(CorpusSink::Single(p.clone(), format_of(&p)?))
}

fn load(source: &CorpusSource) -> Result<Vec<BitextRecord>> {
    let loaded = match source {
        CorpusSource::Single(p, Format::Tsv) => corpus::load_tsv(p)?,
        CorpusSource::Single(p, Format::Jsonl) => corpus::load_jsonl(p)?,
        CorpusSource::Parallel(s, t) => corpus::load_parallel(s, t)?,
    };
    if !loaded.skipped_lines.is_empty() {
        log::warn!("{} pair(s) with a blank side skipped", loaded.skipped_lines.len());
    }
    log::info!("{} pairs loaded", loaded.records.len());
    Ok(loaded.records)
}

fn store(sink: &CorpusSink, records: &[BitextRecord]) -> Result<()> {
    match sink {
        CorpusSink::Single(p, Format::Tsv) => corpus::write_tsv(records, p)?,
        CorpusSink::Single(p, Format::Jsonl) => corpus::write_jsonl(records, p)?,
        CorpusSink::Parallel(s, t) => corpus::write_parallel(records, s, t)?,
    }
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn print_json(value: serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &value)?;
    writeln!(out)?;
    Ok(())
}

fn scheme(r: &Resolver, flag: Option<&str>) -> Result<TranslitScheme> {
    Ok(match r.path("scheme", flag)? {
        Some(p) => TranslitScheme::load(&p)?,
        None => TranslitScheme::hindi(),
    })
}

pub fn build_shuffled(ctx: &Ctx, a: &BuildShuffled) -> Result<()> {
    let r = &ctx.r;
    let source = corpus_source(r, &a.corpus)?;
    let n: usize = r.or("n", a.n.as_deref(), 3)?;
    if n == 0 {
        bail!("n must be at least 1");
    }
    let output: PathBuf = r.required("output", a.output.as_deref())?;
    let vocab_path = r.path("vocab", a.vocab.as_deref())?.unwrap_or_else(|| sidecar(&output, ".vocab.tsv"));
    ctx.announce("build-shuffled");

    let records = load(&source)?;
    let exec = ctx.exec()?;
    let mut vocab = Vocabulary::default();
    corpus::write_atomic(&output, |w| {
        vocab = build_shuffled_corpus(&records, n, ctx.seed, &exec, w)?;
        Ok(())
    })?;
    vocab.save(&vocab_path)?;
    log::info!("{} shuffled sentences, {} units", records.len(), vocab.len());
    Ok(())
}

pub fn train_embed(ctx: &Ctx, a: &TrainEmbed) -> Result<()> {
    let r = &ctx.r;
    let d = EmbeddingHyperparams::default();
    let input: PathBuf = r.required("input", a.input.as_deref())?;
    let vocab_path = r.path("vocab", a.vocab.as_deref())?;
    let output: PathBuf = r.required("output", a.output.as_deref())?;
    let params = EmbeddingHyperparams {
        dim: r.or("dim", a.dim.as_deref(), d.dim)?,
        window: r.or("window", a.window.as_deref(), d.window)?,
        epochs: r.or("epochs", a.epochs.as_deref(), d.epochs)?,
        min_count: r.or("min_count", a.min_count.as_deref(), d.min_count)?,
        negatives: r.or("negatives", a.negatives.as_deref(), d.negatives)?,
        initial_lr: r.or("initial_lr", a.initial_lr.as_deref(), d.initial_lr)?,
        subsample_t: r.or("subsample_t", a.subsample_t.as_deref(), d.subsample_t)?,
        seed: ctx.seed,
    };
    params.validate()?;
    let vocab_path = match vocab_path {
        Some(p) => Some(p),
        None => Some(sidecar(&input, ".vocab.tsv")).filter(|p| p.exists()),
    };
    ctx.announce("train-embed");

    let vocab = match &vocab_path {
        Some(p) => Some(Vocabulary::load(p)?),
        None => {
            log::warn!("no vocabulary sidecar; provenance counts will be zero and no unit will count as LG1 or LG2");
            None
        }
    };
    let outcome = train_file(&input, vocab.as_ref(), &params, &ctx.exec()?)?;
    for (i, loss) in outcome.epoch_losses.iter().enumerate() {
        log::info!("epoch {}: mean loss {loss:.5}", i + 1);
    }
    save_table(&outcome.table, &output)?;
    log::info!("{} vectors of dimension {} written", outcome.table.len(), params.dim);
    Ok(())
}

pub fn nearest(ctx: &Ctx, a: &Nearest) -> Result<()> {
    let r = &ctx.r;
    let table_path: PathBuf = r.required("table", a.table.as_deref())?;
    let query: String = r.required("query", a.query.as_deref())?;
    let k: usize = r.or("k", a.k.as_deref(), 10)?;
    let tau: f64 = r.or("tau", a.tau.as_deref(), DEFAULT_TAU)?;
    ctx.announce("nearest");

    let table = load_table(&table_path)?;
    let mut out = std::io::stdout().lock();
    for n in nearest_lg2(&query, k, &table, tau)? {
        writeln!(out, "{}\t{:.6}", n.surface, n.similarity)?;
    }
    Ok(())
}

pub fn induce(ctx: &Ctx, a: &InduceLexicon) -> Result<()> {
    let r = &ctx.r;
    let table_path: PathBuf = r.required("table", a.table.as_deref())?;
    let top_m: usize = r.or("top_m", a.top_m.as_deref(), 100)?;
    let tau: f64 = r.or("tau", a.tau.as_deref(), DEFAULT_TAU)?;
    let output = r.path("output", a.output.as_deref())?;
    ctx.announce("induce-lexicon");

    let table = load_table(&table_path)?;
    let lexicon = induce_lexicon(&table, top_m, tau)?;
    let write = |w: &mut dyn Write| -> codemix_core::Result<()> {
        for e in &lexicon {
            writeln!(w, "{}\t{}\t{:.6}", e.source, e.target, e.similarity)?;
        }
        Ok(())
    };
    match output {
        Some(p) => corpus::write_atomic(&p, write)?,
        None => write(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn generate(ctx: &Ctx, a: &Generate) -> Result<()> {
    let r = &ctx.r;
    let source = corpus_source(r, &a.corpus)?;
    let table_path: PathBuf = r.required("table", a.table.as_deref())?;
    let base = match r.get::<String>("preset", a.preset.as_deref())? {
        Some(name) => GeneratorConfig::preset(&name)?,
        None => GeneratorConfig::default(),
    };
    let config = GeneratorConfig {
        max_order: r.or("max_order", a.max_order.as_deref(), base.max_order)?,
        num_substitutions: r.or("num_substitutions", a.num_substitutions.as_deref(), base.num_substitutions)?,
        min_similarity: r.or("min_similarity", a.min_similarity.as_deref(), base.min_similarity)?,
        script_mode: r.or("script_mode", a.script_mode.as_deref(), base.script_mode)?,
        tau: r.or("tau", a.tau.as_deref(), base.tau)?,
        seed: ctx.seed,
    };
    config.validate()?;
    let scheme = match config.script_mode {
        ScriptMode::Roman => Some(scheme(r, a.scheme.as_deref())?),
        ScriptMode::Native => None,
    };
    let output: PathBuf = r.required("output", a.output.as_deref())?;
    let jsonl = r.path("jsonl", a.jsonl.as_deref())?;
    ctx.announce("generate");

    let records = load(&source)?;
    let table = load_table(&table_path)?;
    let mut g = Generator::new(&table, config)?;
    if let Some(s) = scheme {
        g = g.with_scheme(s);
    }
    let pairs = g.generate_corpus(&records, &ctx.exec()?);
    let applied: usize = pairs.iter().map(|p| p.applied.len()).sum();
    log::info!("{} pairs generated, {applied} substitutions", pairs.len());
    generator::write_tsv(&pairs, &output)?;
    if let Some(p) = jsonl {
        generator::write_jsonl(&pairs, &p)?;
    }
    Ok(())
}

pub fn romanize(ctx: &Ctx, a: &Romanize) -> Result<()> {
    let r = &ctx.r;
    let source = corpus_source(r, &a.corpus)?;
    let sink = corpus_sink(r, &a.out)?;
    let scheme = scheme(r, a.scheme.as_deref())?;
    ctx.announce("romanize");

    let records = load(&source)?;
    let out = romanize_target(&records, &scheme, &ctx.exec()?);
    if out.unmapped > 0 {
        log::warn!("{} Devanagari codepoint(s) had no mapping and were kept", out.unmapped);
    }
    store(&sink, &out.records)
}

fn hashtag_mode(s: &str) -> Result<HashtagMode> {
    match s {
        "remove" => Ok(HashtagMode::Remove),
        "keep-word" | "keep_word" => Ok(HashtagMode::KeepWord),
        _ => bail!("invalid value {s:?} for hashtags: expected remove or keep-word"),
    }
}

pub fn clean(ctx: &Ctx, a: &Clean) -> Result<()> {
    let r = &ctx.r;
    let source = corpus_source(r, &a.corpus)?;
    let sink = corpus_sink(r, &a.out)?;
    let mode = hashtag_mode(&r.or("hashtags", a.hashtags.as_deref(), "remove".to_string())?)?;
    let emoticons = r.path("emoticons", a.emoticons.as_deref())?;
    let cleaner = match &emoticons {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            Cleaner::with_emoticons(text.lines())
        }
        None => Cleaner::default(),
    }
    .hashtag_mode(mode);
    ctx.announce("clean");

    let records = load(&source)?;
    let (cleaned, report) = cleaner.adapt_corpus(&records, &ctx.exec()?);
    store(&sink, &cleaned)?;
    print_json(serde_json::to_value(report)?)
}

pub fn dedup(ctx: &Ctx, a: &Dedup) -> Result<()> {
    let source = corpus_source(&ctx.r, &a.corpus)?;
    let sink = corpus_sink(&ctx.r, &a.out)?;
    ctx.announce("dedup");

    let records = load(&source)?;
    let before = records.len();
    let kept = corpus::dedup(records);
    store(&sink, &kept)?;
    print_json(serde_json::json!({ "input": before, "kept": kept.len(), "removed": before - kept.len() }))
}

pub fn split(ctx: &Ctx, a: &Split) -> Result<()> {
    let r = &ctx.r;
    let source = corpus_source(r, &a.corpus)?;
    let valid_size: usize = r.required("valid_size", a.valid_size.as_deref())?;
    let train_sink = single_sink(r, "train_output", a.train_output.as_deref())?;
    let valid_sink = single_sink(r, "valid_output", a.valid_output.as_deref())?;
    ctx.announce("split");

    let records = load(&source)?;
    let s = corpus::split(records, valid_size, ctx.seed)?;
    store(&train_sink, &s.train)?;
    store(&valid_sink, &s.valid)?;
    print_json(serde_json::json!({ "seed": s.seed, "train": s.counts.train, "valid": s.counts.valid }))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn finish_report(mut report: MetricsReport, per_sentence: bool) -> MetricsReport {
    if !per_sentence {
        report.per_sentence.clear();
    }
    report
}

pub fn score_bleu(ctx: &Ctx, a: &ScoreBleu) -> Result<()> {
    let r = &ctx.r;
    let hyp: PathBuf = r.required("hyp", a.hyp.as_deref())?;
    let reference: PathBuf = r.required("ref", a.reference.as_deref())?;
    let d = BleuConfig::default();
    let config = BleuConfig {
        max_order: r.or("bleu_order", a.bleu_order.as_deref(), d.max_order)?,
        case_sensitive: r.or("case_sensitive", a.case_sensitive.then_some("true"), Flag(d.case_sensitive))?.0,
        smoothing: r.or("smoothing", a.smoothing.as_deref(), d.smoothing)?,
    };
    let per_sentence = r.or("per_sentence", a.per_sentence.then_some("true"), Flag(false))?.0;
    ctx.announce("score-bleu");

    let hyps = read_lines(&hyp)?;
    let refs = read_lines(&reference)?;
    let score = metrics::bleu(&hyps, &refs, &config)?;
    log::info!(
        "BLEU {:.2} (precisions {:?}, brevity penalty {:.4})",
        score.score,
        score.precisions,
        score.brevity_penalty
    );
    let tags: Vec<Vec<LanguageTag>> = hyps.iter().map(|h| metrics::script_tags(&corpus::tokenize(h))).collect();
    let mut report = metrics::mixing_report(&tags);
    report.bleu = Some(score.score);
    print_json(serde_json::to_value(finish_report(report, per_sentence))?)
}

pub fn stats(ctx: &Ctx, a: &Stats) -> Result<()> {
    let r = &ctx.r;
    let input: PathBuf = r.required("input", a.input.as_deref())?;
    let per_sentence = r.or("per_sentence", a.per_sentence.then_some("true"), Flag(false))?.0;
    ctx.announce("stats");

    let is_jsonl = matches!(input.extension().and_then(|e| e.to_str()), Some("jsonl"));
    let tags: Vec<Vec<LanguageTag>> = if is_jsonl {
        let pairs = generator::read_jsonl(&input).map_err(|e| {
            anyhow!("{e} (stats expects the --jsonl output of generate; use a plain text file for script-based tags)")
        })?;
        pairs.iter().map(metrics::pair_tags).collect()
    } else {
        read_lines(&input)?
            .iter()
            .map(|l| metrics::script_tags(&corpus::tokenize(l)))
            .collect()
    };
    print_json(serde_json::to_value(finish_report(metrics::mixing_report(&tags), per_sentence))?)
}
