//! Code-mixed sentence generation by ranked n-gram substitution.
//!
//! For a source (LG1) sentence, every contiguous n-gram of order
//! `1..=max_order` that the embedding table knows as an LG1-dominant unit
//! becomes a candidate, paired with its nearest LG2-dominant neighbour.
//! Candidates are ranked by that similarity, most similar first. They are then
//! taken one at a time and every occurrence is replaced by the LG2 n-gram,
//! until `num_substitutions` candidates have been used.
//!
//! Occurrences that overlap an earlier substitution are left alone, and a
//! candidate with no free occurrence is skipped without using budget.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader};
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::corpus::{write_atomic, BitextRecord, LanguageTag};
use crate::embedding::{check_tau, EmbeddingTable, Lg2Index, DEFAULT_TAU};
use crate::ngram::{join_surface, split_surface};
use crate::translit::TranslitScheme;
use crate::{Error, Exec, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptMode {
    /// Insert LG2 n-grams as they appear in the table.
    #[default]
    Native,
    /// Romanize every inserted LG2 token first.
    Roman,
}

impl std::str::FromStr for ScriptMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(ScriptMode::Native),
            "roman" => Ok(ScriptMode::Roman),
            _ => Err(Error::invalid(format!("unknown script mode {s:?} (native, roman)"))),
        }
    }
}

impl std::fmt::Display for ScriptMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScriptMode::Native => "native",
            ScriptMode::Roman => "roman",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorConfig {
    pub max_order: usize,
    pub num_substitutions: usize,
    pub min_similarity: f64,
    pub script_mode: ScriptMode,
    pub tau: f64,
    /// Recorded with the run. Generation itself draws no random numbers.
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_order: 3,
            num_substitutions: 3,
            min_similarity: 0.0,
            script_mode: ScriptMode::Native,
            tau: DEFAULT_TAU,
            seed: 1,
        }
    }
}

impl GeneratorConfig {
    /// Named presets: `unigram`, `bigram` and `trigram` set the budget to
    /// 1, 2 and 3 with `max_order` 3, optionally suffixed `-native` or
    /// `-roman`. `control` is the zero-budget identity run.
    pub fn preset(name: &str) -> Result<Self> {
        let (base, script) = match name.rsplit_once('-') {
            Some((b, s)) => (b, s.parse::<ScriptMode>()?),
            None => (name, ScriptMode::Native),
        };
        let budget = match base {
            "unigram" => 1,
            "bigram" => 2,
            "trigram" => 3,
            "control" => 0,
            _ => return Err(Error::invalid(format!("unknown preset {name:?}"))),
        };
        Ok(GeneratorConfig {
            max_order: 3,
            num_substitutions: budget,
            script_mode: script,
            ..Default::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 {
            return Err(Error::invalid("max_order must be at least 1"));
        }
        if !(-1.0..=1.0).contains(&self.min_similarity) {
            return Err(Error::invalid("min_similarity must lie in [-1, 1]"));
        }
        check_tau(self.tau)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    /// LG1 surface as found in the sentence.
    pub source: String,
    pub tokens: Vec<String>,
    /// Best LG2 surface.
    pub target: String,
    pub similarity: f64,
}

impl Candidate {
    pub fn order(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SubstitutionPlan {
    pub candidates: Vec<Candidate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub lang: LanguageTag,
    /// Index into [`GeneratedPair::applied`] for substituted spans.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub substitution: Option<usize>,
}

impl Span {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Applied {
    pub source: String,
    pub target: String,
    /// Tokens actually inserted (romanized in roman mode).
    pub inserted: Vec<String>,
    pub similarity: f64,
    /// Start offsets of the replaced occurrences in the source sentence.
    pub positions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedPair {
    pub id: String,
    pub source_tokens: Vec<String>,
    pub mixed_tokens: Vec<String>,
    pub spans: Vec<Span>,
    pub applied: Vec<Applied>,
}

impl GeneratedPair {
    pub fn mixed_text(&self) -> String {
        self.mixed_tokens.join(" ")
    }

    pub fn source_text(&self) -> String {
        self.source_tokens.join(" ")
    }

    /// LG2 for substituted tokens, LG1 for everything else.
    pub fn language_tags(&self) -> Vec<LanguageTag> {
        let mut tags = vec![LanguageTag::Lg1; self.mixed_tokens.len()];
        for span in &self.spans {
            for t in &mut tags[span.range()] {
                *t = span.lang;
            }
        }
        tags
    }

    /// Undoes every substitution using only the mixed tokens and the applied
    /// records.
    pub fn restore_source(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.source_tokens.len());
        for span in &self.spans {
            match span.substitution {
                Some(k) => out.extend(split_surface(&self.applied[k].source)),
                None => out.extend_from_slice(&self.mixed_tokens[span.range()]),
            }
        }
        out
    }
}

/// Ranks and applies substitutions against one embedding table. Nearest
/// neighbours are memoized per unit, so one generator should serve a whole
/// corpus.
pub struct Generator<'a> {
    index: Lg2Index<'a>,
    config: GeneratorConfig,
    scheme: Option<TranslitScheme>,
    best: Vec<OnceLock<Option<(usize, f64)>>>,
}

impl<'a> Generator<'a> {
    pub fn new(table: &'a EmbeddingTable, config: GeneratorConfig) -> Result<Self> {
        config.validate()?;
        let scheme = match config.script_mode {
            ScriptMode::Roman => Some(TranslitScheme::hindi()),
            ScriptMode::Native => None,
        };
        Ok(Generator {
            index: Lg2Index::new(table, config.tau)?,
            best: (0..table.len()).map(|_| OnceLock::new()).collect(),
            config,
            scheme,
        })
    }

    /// Replaces the romanization scheme used in roman mode.
    pub fn with_scheme(mut self, scheme: TranslitScheme) -> Self {
        if self.config.script_mode == ScriptMode::Roman {
            self.scheme = Some(scheme);
        }
        self
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    fn best_neighbor(&self, id: usize) -> Option<(usize, f64)> {
        *self.best[id].get_or_init(|| self.index.nearest_id(id, 1).first().copied())
    }

    pub fn plan(&self, tokens: &[String]) -> SubstitutionPlan {
        let table = self.index.table();
        let mut seen = HashSet::new();
        let mut candidates = Vec::new();
        for n in 1..=self.config.max_order.min(tokens.len()) {
            for window in tokens.windows(n) {
                let surface = join_surface(window);
                if !seen.insert(surface.clone()) {
                    continue;
                }
                let Some(id) = table.id(&surface) else { continue };
                if !table.is_lg1_dominant(id, self.config.tau) {
                    continue;
                }
                let Some((target, similarity)) = self.best_neighbor(id) else { continue };
                if similarity < self.config.min_similarity {
                    continue;
                }
                candidates.push(Candidate {
                    source: surface,
                    tokens: window.to_vec(),
                    target: table.surface(target).to_string(),
                    similarity,
                });
            }
        }
        candidates.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| b.order().cmp(&a.order()))
                .then_with(|| a.source.cmp(&b.source))
        });
        SubstitutionPlan { candidates }
    }

    fn insert_tokens(&self, target: &str) -> Vec<String> {
        let tokens = split_surface(target);
        match &self.scheme {
            Some(s) => tokens.iter().map(|t| s.transliterate(t).text).collect(),
            None => tokens,
        }
    }

    pub fn apply(&self, id: &str, tokens: &[String], plan: &SubstitutionPlan) -> GeneratedPair {
        let mut covered = vec![false; tokens.len()];
        // start offset -> (applied index, n-gram length)
        let mut starts: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut applied = Vec::new();

        for cand in &plan.candidates {
            if applied.len() >= self.config.num_substitutions {
                break;
            }
            let n = cand.order();
            let mut positions = Vec::new();
            let mut i = 0;
            while i + n <= tokens.len() {
                if tokens[i..i + n] == cand.tokens[..] && !covered[i..i + n].iter().any(|&c| c) {
                    positions.push(i);
                    i += n;
                } else {
                    i += 1;
                }
            }
            if positions.is_empty() {
                continue;
            }
            let k = applied.len();
            for &p in &positions {
                covered[p..p + n].iter_mut().for_each(|c| *c = true);
                starts.insert(p, (k, n));
            }
            applied.push(Applied {
                source: cand.source.clone(),
                target: cand.target.clone(),
                inserted: self.insert_tokens(&cand.target),
                similarity: cand.similarity,
                positions,
            });
        }

        let mut mixed = Vec::with_capacity(tokens.len());
        let mut spans = Vec::new();
        let mut run_start: Option<usize> = None;
        let mut i = 0;
        while i < tokens.len() {
            if let Some(&(k, n)) = starts.get(&i) {
                if let Some(s) = run_start.take() {
                    spans.push(Span { start: s, end: mixed.len(), lang: LanguageTag::Lg1, substitution: None });
                }
                let start = mixed.len();
                mixed.extend(applied[k].inserted.iter().cloned());
                spans.push(Span { start, end: mixed.len(), lang: LanguageTag::Lg2, substitution: Some(k) });
                i += n;
            } else {
                run_start.get_or_insert(mixed.len());
                mixed.push(tokens[i].clone());
                i += 1;
            }
        }
        if let Some(s) = run_start {
            spans.push(Span { start: s, end: mixed.len(), lang: LanguageTag::Lg1, substitution: None });
        }

        GeneratedPair {
            id: id.to_string(),
            source_tokens: tokens.to_vec(),
            mixed_tokens: mixed,
            spans,
            applied,
        }
    }

    pub fn generate(&self, id: &str, tokens: &[String]) -> GeneratedPair {
        self.apply(id, tokens, &self.plan(tokens))
    }

    /// One pair per record from its source side, in record order.
    pub fn generate_corpus(&self, records: &[BitextRecord], exec: &Exec) -> Vec<GeneratedPair> {
        exec.map(records, |_, r| self.generate(&r.id, &r.source_tokens))
    }
}

pub fn plan_substitutions(tokens: &[String], table: &EmbeddingTable, config: &GeneratorConfig) -> Result<SubstitutionPlan> {
    Ok(Generator::new(table, config.clone())?.plan(tokens))
}

pub fn apply_plan(
    tokens: &[String],
    plan: &SubstitutionPlan,
    table: &EmbeddingTable,
    config: &GeneratorConfig,
) -> Result<GeneratedPair> {
    Ok(Generator::new(table, config.clone())?.apply("", tokens, plan))
}

pub fn generate_corpus(
    records: &[BitextRecord],
    table: &EmbeddingTable,
    config: &GeneratorConfig,
    exec: &Exec,
) -> Result<Vec<GeneratedPair>> {
    Ok(Generator::new(table, config.clone())?.generate_corpus(records, exec))
}

/// Stage-1 finetuning file: `source<TAB>mixed`.
pub fn write_tsv(pairs: &[GeneratedPair], path: &Path) -> Result<()> {
    write_atomic(path, |w| {
        for p in pairs {
            writeln!(w, "{}\t{}", p.source_text(), p.mixed_text())?;
        }
        Ok(())
    })
}

pub fn write_jsonl(pairs: &[GeneratedPair], path: &Path) -> Result<()> {
    write_atomic(path, |w| {
        for p in pairs {
            serde_json::to_writer(&mut *w, p)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_jsonl(path: &Path) -> Result<Vec<GeneratedPair>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|_| Error::Encoding {
            path: path.to_path_buf(),
            line: i + 1,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::format(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}
