//! Cumulative n-gram sets and the shuffled mixed-language corpus.
//!
//! For an aligned pair `(x, y)` the cumulative set holds every unique
//! contiguous n-gram of orders `1..=n` drawn from either side. An n-gram that
//! occurs on both sides (shared punctuation, shared word forms) is kept once
//! and carries provenance counts for both sides.
//!
//! Multi-token n-grams are written as a single *surface* by joining tokens
//! with `_`. A literal `_` inside a token is escaped as `\_` and a literal `\`
//! as `\\`, so every surface splits back into exactly its tokens.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{write_atomic, BitextRecord};
use crate::{Error, Exec, Result};

pub const JOINER: char = '_';
const ESCAPE: char = '\\';

pub fn escape_token(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for c in token.chars() {
        if c == JOINER || c == ESCAPE {
            out.push(ESCAPE);
        }
        out.push(c);
    }
    out
}

pub fn join_surface<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(JOINER);
        }
        out.push_str(&escape_token(t.as_ref()));
    }
    out
}

/// Inverse of [`join_surface`]. A dangling trailing escape is kept literally.
pub fn split_surface(surface: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut chars = surface.chars();
    while let Some(c) = chars.next() {
        match c {
            ESCAPE => match chars.next() {
                Some(next) => cur.push(next),
                None => cur.push(ESCAPE),
            },
            JOINER => tokens.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    tokens.push(cur);
    tokens
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NGramUnit {
    pub tokens: Vec<String>,
    pub order: usize,
    pub surface: String,
    pub src_count: u64,
    pub tgt_count: u64,
}

impl NGramUnit {
    pub fn total(&self) -> u64 {
        self.src_count + self.tgt_count
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    Ok(())
}

/// Accumulates unique units in first-seen order.
#[derive(Default)]
struct UnitSet {
    index: HashMap<String, usize>,
    units: Vec<NGramUnit>,
}

impl UnitSet {
    fn add_side<S: AsRef<str>>(&mut self, n: usize, tokens: &[S], source_side: bool) {
        if tokens.len() < n {
            return;
        }
        for window in tokens.windows(n) {
            let surface = join_surface(window);
            let slot = match self.index.get(&surface) {
                Some(&i) => i,
                None => {
                    self.index.insert(surface.clone(), self.units.len());
                    self.units.push(NGramUnit {
                        tokens: window.iter().map(|t| t.as_ref().to_string()).collect(),
                        order: n,
                        surface,
                        src_count: 0,
                        tgt_count: 0,
                    });
                    self.units.len() - 1
                }
            };
            let unit = &mut self.units[slot];
            if source_side {
                unit.src_count += 1;
            } else {
                unit.tgt_count += 1;
            }
        }
    }
}

/// Unique order-`n` n-grams of `x` and `y`, `x`'s first, each in order of
/// first occurrence. Provenance counts are per occurrence.
pub fn ngrams<S: AsRef<str>>(n: usize, x: &[S], y: &[S]) -> Result<Vec<NGramUnit>> {
    check_order(n)?;
    let mut set = UnitSet::default();
    set.add_side(n, x, true);
    set.add_side(n, y, false);
    Ok(set.units)
}

/// Union of [`ngrams`] for orders `1..=n`, lower orders first.
pub fn cumulative_ngrams<S: AsRef<str>>(n: usize, x: &[S], y: &[S]) -> Result<Vec<NGramUnit>> {
    check_order(n)?;
    let mut set = UnitSet::default();
    for j in 1..=n {
        set.add_side(j, x, true);
        set.add_side(j, y, false);
    }
    Ok(set.units)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShuffledSentence {
    pub units: Vec<String>,
    pub origin_id: String,
}

impl ShuffledSentence {
    pub fn to_line(&self) -> String {
        self.units.join(" ")
    }
}

fn shuffle_units<R: Rng + ?Sized>(units: &[NGramUnit], rng: &mut R) -> Vec<String> {
    let mut surfaces: Vec<String> = units.iter().map(|u| u.surface.clone()).collect();
    surfaces.shuffle(rng);
    surfaces
}

/// Uniform random permutation of the record's cumulative n-gram set.
pub fn shuffled_sentence<R: Rng + ?Sized>(
    record: &BitextRecord,
    n: usize,
    rng: &mut R,
) -> Result<ShuffledSentence> {
    let units = cumulative_ngrams(n, &record.source_tokens, &record.target_tokens)?;
    Ok(ShuffledSentence {
        units: shuffle_units(&units, rng),
        origin_id: record.id.clone(),
    })
}

/// Generator used for record `index` under `seed`. Each record gets its own
/// ChaCha stream, so output does not depend on the worker count.
pub fn record_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VocabEntry {
    pub order: usize,
    pub src_count: u64,
    pub tgt_count: u64,
}

impl VocabEntry {
    pub fn total(&self) -> u64 {
        self.src_count + self.tgt_count
    }
}

/// Corpus-wide n-gram provenance: how often each unit occurred on the source
/// and on the target side.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    entries: HashMap<String, VocabEntry>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<&VocabEntry> {
        self.entries.get(surface)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &VocabEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn add_unit(&mut self, unit: &NGramUnit) {
        self.add(&unit.surface, unit.order, unit.src_count, unit.tgt_count);
    }

    fn add(&mut self, surface: &str, order: usize, src: u64, tgt: u64) {
        let e = self.entries.entry(surface.to_string()).or_insert(VocabEntry {
            order,
            src_count: 0,
            tgt_count: 0,
        });
        e.src_count += src;
        e.tgt_count += tgt;
    }

    /// Commutative merge of partial counts.
    pub fn merge(&mut self, other: Vocabulary) {
        for (surface, e) in other.entries {
            self.add(&surface, e.order, e.src_count, e.tgt_count);
        }
    }

    /// Entries by descending total count, then surface.
    pub fn sorted(&self) -> Vec<(&str, &VocabEntry)> {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_by(|a, b| b.1.total().cmp(&a.1.total()).then_with(|| a.0.cmp(b.0)));
        rows
    }

    /// TSV sidecar: `surface<TAB>order<TAB>src_count<TAB>tgt_count`.
    pub fn write_tsv(&self, out: &mut dyn Write) -> Result<()> {
        for (surface, e) in self.sorted() {
            writeln!(out, "{surface}\t{}\t{}\t{}", e.order, e.src_count, e.tgt_count)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| self.write_tsv(w))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut vocab = Vocabulary::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|_| Error::Encoding {
                path: path.to_path_buf(),
                line: lineno,
            })?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::format(path, lineno, "expected 4 tab-separated fields"));
            }
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|e| Error::format(path, lineno, format!("bad count {s:?}: {e}")))
            };
            let order = num(fields[1])? as usize;
            if order != split_surface(fields[0]).len() {
                return Err(Error::format(path, lineno, "order does not match surface"));
            }
            vocab.add(fields[0], order, num(fields[2])?, num(fields[3])?);
        }
        Ok(vocab)
    }
}

const CHUNK: usize = 4096;

/// Writes one shuffled sentence per record to `out`, in record order, and
/// returns the aggregated vocabulary. Records are processed in bounded chunks.
pub fn build_shuffled_corpus(
    records: &[BitextRecord],
    n: usize,
    seed: u64,
    exec: &Exec,
    out: &mut dyn Write,
) -> Result<Vocabulary> {
    check_order(n)?;
    if records.is_empty() {
        return Err(Error::invalid("cannot build a shuffled corpus from zero records"));
    }
    let mut vocab = Vocabulary::default();
    for (c, chunk) in records.chunks(CHUNK).enumerate() {
        let base = c * CHUNK;
        let parts = exec.map(chunk, |i, record| {
            let units = cumulative_ngrams(n, &record.source_tokens, &record.target_tokens)?;
            let mut rng = record_rng(seed, base + i);
            let line = shuffle_units(&units, &mut rng).join(" ");
            let mut partial = Vocabulary::default();
            units.iter().for_each(|u| partial.add_unit(u));
            Ok::<_, Error>((line, partial))
        });
        for part in parts {
            let (line, partial) = part?;
            writeln!(out, "{line}")?;
            vocab.merge(partial);
        }
    }
    Ok(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn surfaces(units: &[NGramUnit]) -> Vec<&str> {
        units.iter().map(|u| u.surface.as_str()).collect()
    }

    #[test]
    fn escape_round_trip() {
        for tokens in [vec!["a_b", "c"], vec!["\\", "_"], vec!["x\\_y"], vec!["", "z"]] {
            let s = join_surface(&tokens);
            assert_eq!(split_surface(&s), tokens, "{s}");
        }
        assert_eq!(join_surface(&["I've", "never"]), "I've_never");
        assert_eq!(join_surface(&["snake_case"]), "snake\\_case");
    }

    #[test]
    fn shorter_sentence_contributes_nothing() {
        let x = toks("I've never seen it");
        let y = toks("maine ye kabhi nah dekhi");
        let units = ngrams(5, &x, &y).unwrap();
        assert_eq!(surfaces(&units), ["maine_ye_kabhi_nah_dekhi"]);
    }

    #[test]
    fn uniqueness_and_occurrence_counts() {
        let units = ngrams(1, &toks("a a"), &toks("b")).unwrap();
        assert_eq!(surfaces(&units), ["a", "b"]);
        assert_eq!((units[0].src_count, units[0].tgt_count), (2, 0));
    }

    #[test]
    fn shared_unit_has_dual_provenance() {
        let units = ngrams(1, &toks("main road ."), &toks("main ghar .")).unwrap();
        let main = units.iter().find(|u| u.surface == "main").unwrap();
        assert_eq!((main.src_count, main.tgt_count), (1, 1));
        assert_eq!(units.len(), 4);
    }

    #[test]
    fn zero_order_rejected() {
        assert!(ngrams(0, &toks("a"), &toks("b")).is_err());
        assert!(cumulative_ngrams(0, &toks("a"), &toks("b")).is_err());
    }

    #[test]
    fn two_token_permutation() {
        let r = BitextRecord::new("1", "a", "b").unwrap();
        let mut seen = std::collections::HashSet::new();
        for seed in 0..64 {
            let s = shuffled_sentence(&r, 1, &mut record_rng(seed, 0)).unwrap();
            seen.insert(s.to_line());
        }
        assert_eq!(seen.len(), 2);
        assert!(seen.contains("a b") && seen.contains("b a"));
    }

    #[test]
    fn identical_records_double_counts() {
        let recs = vec![
            BitextRecord::new("1", "main road", "main ghar").unwrap(),
            BitextRecord::new("2", "main road", "main ghar").unwrap(),
        ];
        let mut out = Vec::new();
        let vocab = build_shuffled_corpus(&recs, 1, 7, &Exec::sequential(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 2);
        assert_eq!(vocab.get("road").unwrap().src_count, 2);
        let main = vocab.get("main").unwrap();
        assert!(main.src_count > 0 && main.tgt_count > 0);
    }

    #[test]
    fn empty_corpus_rejected() {
        let mut out = Vec::new();
        assert!(build_shuffled_corpus(&[], 1, 0, &Exec::sequential(), &mut out).is_err());
    }

    #[test]
    fn vocabulary_sidecar_round_trip() {
        let recs = vec![BitextRecord::new("1", "a_b c c", "d \\ e").unwrap()];
        let mut sink = Vec::new();
        let vocab = build_shuffled_corpus(&recs, 3, 1, &Exec::sequential(), &mut sink).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.tsv");
        vocab.save(&p).unwrap();
        assert_eq!(Vocabulary::load(&p).unwrap(), vocab);
    }
}
