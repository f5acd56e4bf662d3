use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Synthetic code-mixed corpus generation from bilingual n-gram embeddings.
///
/// Every flag can also be set as `key = value` in the file given by
/// `--config` (flag name without dashes, `-` as `_`) or as a `CMF_<KEY>`
/// environment variable. Flags beat the environment, which beats the file.
#[derive(Debug, Parser)]
#[command(name = "codemix", version)]
pub struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every randomized step [default: 1].
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Worker threads; 0 uses every core [default: 1].
    #[arg(long, global = true)]
    pub workers: Option<String>,
    /// error, warn, info, debug or trace [default: info].
    #[arg(long, global = true, value_name = "LEVEL")]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one shuffled n-gram sentence per pair, plus a vocabulary sidecar.
    BuildShuffled(BuildShuffled),
    /// Train skip-gram embeddings on a shuffled corpus.
    TrainEmbed(TrainEmbed),
    /// Print the nearest target-language units of a source unit.
    Nearest(Nearest),
    /// Pair the most frequent source units with their nearest target units.
    InduceLexicon(InduceLexicon),
    /// Substitute source n-grams with their nearest target n-grams.
    Generate(Generate),
    /// Romanize the Devanagari target side of a corpus.
    Romanize(Romanize),
    /// Remove hashtags, mentions, URLs, emoji and emoticons.
    Clean(Clean),
    /// Drop repeated pairs, keeping the first.
    Dedup(Dedup),
    /// Split a corpus into training and validation parts.
    Split(Split),
    /// Corpus BLEU of hypotheses against references, one sentence per line.
    ScoreBleu(ScoreBleu),
    /// Code-mixing statistics (CMI, switch-point fraction) of a corpus.
    Stats(Stats),
}

/// A corpus is either one `.tsv`/`.jsonl` file or two aligned plain files.
#[derive(Debug, Args)]
pub struct CorpusIn {
    /// `.tsv` (source, target, optional id) or `.jsonl` corpus.
    #[arg(long, value_name = "PATH")]
    pub input: Option<String>,
    /// Source side of an aligned file pair.
    #[arg(long, value_name = "PATH")]
    pub source: Option<String>,
    /// Target side of an aligned file pair.
    #[arg(long, value_name = "PATH")]
    pub target: Option<String>,
}

#[derive(Debug, Args)]
pub struct CorpusOut {
    /// Output `.tsv` or `.jsonl` corpus.
    #[arg(long, value_name = "PATH")]
    pub output: Option<String>,
    /// Source side output, for aligned file pairs.
    #[arg(long, value_name = "PATH")]
    pub output_source: Option<String>,
    /// Target side output, for aligned file pairs.
    #[arg(long, value_name = "PATH")]
    pub output_target: Option<String>,
}

#[derive(Debug, Args)]
pub struct BuildShuffled {
    #[command(flatten)]
    pub corpus: CorpusIn,
    /// Highest n-gram order [default: 3].
    #[arg(short, long)]
    pub n: Option<String>,
    /// Shuffled corpus output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<String>,
    /// Vocabulary output [default: <output>.vocab.tsv].
    #[arg(long, value_name = "PATH")]
    pub vocab: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainEmbed {
    /// Shuffled corpus.
    #[arg(long, value_name = "PATH")]
    pub input: Option<String>,
    /// Vocabulary with provenance counts [default: <input>.vocab.tsv].
    #[arg(long, value_name = "PATH")]
    pub vocab: Option<String>,
    /// Embedding table output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<String>,
    /// Vector length [default: 100].
    #[arg(long)]
    pub dim: Option<String>,
    /// Context radius [default: 5].
    #[arg(long)]
    pub window: Option<String>,
    /// Passes over the corpus [default: 5].
    #[arg(long)]
    pub epochs: Option<String>,
    /// Units seen fewer times are dropped [default: 5].
    #[arg(long)]
    pub min_count: Option<String>,
    /// Negative samples per positive pair [default: 5].
    #[arg(long)]
    pub negatives: Option<String>,
    /// Starting learning rate [default: 0.025].
    #[arg(long)]
    pub initial_lr: Option<String>,
    /// Frequent-unit subsampling threshold, 0 disables [default: 0.0001].
    #[arg(long)]
    pub subsample_t: Option<String>,
}

#[derive(Debug, Args)]
pub struct Nearest {
    /// Embedding table.
    #[arg(long, value_name = "PATH")]
    pub table: Option<String>,
    /// Source unit; n-grams join tokens with `_`.
    #[arg(long)]
    pub query: Option<String>,
    /// Neighbours to print [default: 10].
    #[arg(short, long)]
    pub k: Option<String>,
    /// Target share needed to count as a target unit [default: 0.8].
    #[arg(long)]
    pub tau: Option<String>,
}

#[derive(Debug, Args)]
pub struct InduceLexicon {
    #[arg(long, value_name = "PATH")]
    pub table: Option<String>,
    /// Number of most frequent source units [default: 100].
    #[arg(long)]
    pub top_m: Option<String>,
    /// [default: 0.8]
    #[arg(long)]
    pub tau: Option<String>,
    /// Lexicon TSV output [default: stdout].
    #[arg(long, value_name = "PATH")]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct Generate {
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[arg(long, value_name = "PATH")]
    pub table: Option<String>,
    /// unigram, bigram, trigram or control, optionally with -native or -roman.
    #[arg(long)]
    pub preset: Option<String>,
    /// Longest n-gram considered [default: 3].
    #[arg(long)]
    pub max_order: Option<String>,
    /// Substitution budget per sentence [default: 3].
    #[arg(long)]
    pub num_substitutions: Option<String>,
    /// Candidates below this cosine are skipped [default: 0].
    #[arg(long)]
    pub min_similarity: Option<String>,
    /// native or roman [default: native].
    #[arg(long)]
    pub script_mode: Option<String>,
    /// [default: 0.8]
    #[arg(long)]
    pub tau: Option<String>,
    /// Romanization scheme TSV for roman mode [default: built-in Hindi].
    #[arg(long, value_name = "PATH")]
    pub scheme: Option<String>,
    /// `source<TAB>mixed` output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<String>,
    /// Also write every pair with its spans and substitutions as JSON lines.
    #[arg(long, value_name = "PATH")]
    pub jsonl: Option<String>,
}

#[derive(Debug, Args)]
pub struct Romanize {
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[command(flatten)]
    pub out: CorpusOut,
    /// Scheme TSV [default: built-in Hindi].
    #[arg(long, value_name = "PATH")]
    pub scheme: Option<String>,
}

#[derive(Debug, Args)]
pub struct Clean {
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[command(flatten)]
    pub out: CorpusOut,
    /// remove or keep-word [default: remove].
    #[arg(long)]
    pub hashtags: Option<String>,
    /// Emoticon list, one per line [default: built-in list].
    #[arg(long, value_name = "PATH")]
    pub emoticons: Option<String>,
}

#[derive(Debug, Args)]
pub struct Dedup {
    #[command(flatten)]
    pub corpus: CorpusIn,
    #[command(flatten)]
    pub out: CorpusOut,
}

#[derive(Debug, Args)]
pub struct Split {
    #[command(flatten)]
    pub corpus: CorpusIn,
    /// Records drawn for validation.
    #[arg(long)]
    pub valid_size: Option<String>,
    /// `.tsv` or `.jsonl` training output.
    #[arg(long, value_name = "PATH")]
    pub train_output: Option<String>,
    /// `.tsv` or `.jsonl` validation output.
    #[arg(long, value_name = "PATH")]
    pub valid_output: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScoreBleu {
    /// Hypotheses, one per line.
    #[arg(long, value_name = "PATH")]
    pub hyp: Option<String>,
    /// References, one per line.
    #[arg(long = "ref", value_name = "PATH")]
    pub reference: Option<String>,
    /// Highest n-gram order [default: 4].
    #[arg(long)]
    pub bleu_order: Option<String>,
    /// Compare tokens case-sensitively.
    #[arg(long)]
    pub case_sensitive: bool,
    /// none or epsilon [default: none].
    #[arg(long)]
    pub smoothing: Option<String>,
    /// Include per-sentence CMI and SPF.
    #[arg(long)]
    pub per_sentence: bool,
}

#[derive(Debug, Args)]
pub struct Stats {
    /// Generated `.jsonl` (exact tags) or plain text, one sentence per line
    /// (tags guessed from script).
    #[arg(long, value_name = "PATH")]
    pub input: Option<String>,
    /// Include per-sentence CMI and SPF.
    #[arg(long)]
    pub per_sentence: bool,
}
