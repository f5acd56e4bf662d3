//! Parallel corpus ingestion, deduplication, splitting and serialization.
//!
//! Three on-disk formats are supported:
//!
//! * Moses-style: two UTF-8 files, one sentence per line, aligned by line.
//! * TSV: `source<TAB>target[<TAB>id]`, no header.
//! * JSON Lines: one `{"id", "source", "target"}` object per line.
//!
//! Tokenization is Unicode whitespace splitting with no case or punctuation
//! normalization.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One aligned sentence pair. The source side is LG1, the target side LG2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitextRecord {
    pub id: String,
    pub source_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub source_raw: String,
    pub target_raw: String,
}

impl BitextRecord {
    /// Returns `None` when either side has no tokens.
    pub fn new(id: impl Into<String>, source: &str, target: &str) -> Option<Self> {
        let source_tokens = tokenize(source);
        let target_tokens = tokenize(target);
        if source_tokens.is_empty() || target_tokens.is_empty() {
            return None;
        }
        Some(BitextRecord {
            id: id.into(),
            source_tokens,
            target_tokens,
            source_raw: source.to_string(),
            target_raw: target.to_string(),
        })
    }

    pub fn source_text(&self) -> String {
        self.source_tokens.join(" ")
    }

    pub fn target_text(&self) -> String {
        self.target_tokens.join(" ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LanguageTag {
    #[serde(rename = "LG1")]
    Lg1,
    #[serde(rename = "LG2")]
    Lg2,
    #[serde(rename = "OTHER")]
    Other,
}

impl std::fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LanguageTag::Lg1 => "LG1",
            LanguageTag::Lg2 => "LG2",
            LanguageTag::Other => "OTHER",
        })
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// Records read from disk plus the 1-based line numbers that were skipped
/// because one side was blank.
#[derive(Clone, Debug, Default)]
pub struct Loaded {
    pub records: Vec<BitextRecord>,
    pub skipped_lines: Vec<usize>,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, line)| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            String::from_utf8(line.to_vec()).map_err(|_| Error::Encoding {
                path: path.to_path_buf(),
                line: i + 1,
            })
        })
        .collect()
}

fn push_or_skip(loaded: &mut Loaded, line: usize, id: String, source: &str, target: &str) {
    match BitextRecord::new(id, source, target) {
        Some(r) => loaded.records.push(r),
        None => {
            log::warn!("line {line}: blank source or target, pair dropped");
            loaded.skipped_lines.push(line);
        }
    }
}

/// Loads a Moses-style pair of aligned files. Record ids are `line-<k>`.
pub fn load_parallel(source_path: &Path, target_path: &Path) -> Result<Loaded> {
    let (src, tgt) = std::thread::scope(|s| {
        let src = s.spawn(|| read_lines(source_path));
        let tgt = read_lines(target_path);
        (src.join().expect("reader thread panicked"), tgt)
    });
    let (src, tgt) = (src?, tgt?);
    if src.len() != tgt.len() {
        return Err(Error::LineCountMismatch {
            source_path: source_path.to_path_buf(),
            source_lines: src.len(),
            target_path: target_path.to_path_buf(),
            target_lines: tgt.len(),
        });
    }
    let mut loaded = Loaded::default();
    for (k, (s, t)) in src.iter().zip(&tgt).enumerate() {
        push_or_skip(&mut loaded, k + 1, format!("line-{}", k + 1), s, t);
    }
    Ok(loaded)
}

/// Loads `source<TAB>target[<TAB>id]` rows. Blank lines are ignored; a
/// missing or empty id becomes `row-<lineno>`.
pub fn load_tsv(path: &Path) -> Result<Loaded> {
    let mut loaded = Loaded::default();
    let mut seen = HashSet::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::format(
                path,
                lineno,
                format!("expected 2 or 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let id = match fields.get(2).map(|s| s.trim()) {
            Some(id) if !id.is_empty() => id.to_string(),
            _ => format!("row-{lineno}"),
        };
        if !seen.insert(id.clone()) {
            return Err(Error::format(path, lineno, format!("duplicate id {id:?}")));
        }
        push_or_skip(&mut loaded, lineno, id, fields[0], fields[1]);
    }
    Ok(loaded)
}

#[derive(Serialize, Deserialize)]
struct JsonRecord<'a> {
    id: std::borrow::Cow<'a, str>,
    source: std::borrow::Cow<'a, str>,
    target: std::borrow::Cow<'a, str>,
}

pub fn load_jsonl(path: &Path) -> Result<Loaded> {
    let mut loaded = Loaded::default();
    let mut seen = HashSet::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(line)
            .map_err(|e| Error::format(path, lineno, e.to_string()))?;
        if !seen.insert(rec.id.to_string()) {
            return Err(Error::format(path, lineno, format!("duplicate id {:?}", rec.id)));
        }
        push_or_skip(&mut loaded, lineno, rec.id.into_owned(), &rec.source, &rec.target);
    }
    Ok(loaded)
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so a failed run never leaves a partial file behind.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir).map_err(wrap)?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write(&mut out)?;
        out.flush().map_err(wrap)?;
    }
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

pub fn write_parallel(records: &[BitextRecord], source_path: &Path, target_path: &Path) -> Result<()> {
    write_atomic(source_path, |w| {
        for r in records {
            writeln!(w, "{}", r.source_text())?;
        }
        Ok(())
    })?;
    write_atomic(target_path, |w| {
        for r in records {
            writeln!(w, "{}", r.target_text())?;
        }
        Ok(())
    })
}

pub fn write_tsv(records: &[BitextRecord], path: &Path) -> Result<()> {
    write_atomic(path, |w| {
        for r in records {
            writeln!(w, "{}\t{}\t{}", r.source_text(), r.target_text(), r.id)?;
        }
        Ok(())
    })
}

pub fn write_jsonl(records: &[BitextRecord], path: &Path) -> Result<()> {
    write_atomic(path, |w| {
        for r in records {
            let row = JsonRecord {
                id: r.id.as_str().into(),
                source: r.source_text().into(),
                target: r.target_text().into(),
            };
            serde_json::to_writer(&mut *w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Drops pairs whose trimmed raw source and target both match an earlier
/// pair. The first occurrence is kept and order is otherwise preserved.
pub fn dedup(records: Vec<BitextRecord>) -> Vec<BitextRecord> {
    let mut seen: HashSet<(String, String)> = HashSet::with_capacity(records.len());
    records
        .into_iter()
        .filter(|r| seen.insert((r.source_raw.trim().to_string(), r.target_raw.trim().to_string())))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
}

#[derive(Clone, Debug)]
pub struct CorpusSplit {
    pub train: Vec<BitextRecord>,
    pub valid: Vec<BitextRecord>,
    pub seed: u64,
    pub counts: SplitCounts,
}

/// Draws `valid_size` records for validation by a seeded shuffle of the ids
/// followed by a prefix cut; everything else is training data. Both halves
/// keep input order. Membership depends only on the id set, `valid_size` and
/// `seed`.
pub fn split(records: Vec<BitextRecord>, valid_size: usize, seed: u64) -> Result<CorpusSplit> {
    if valid_size > records.len() {
        return Err(Error::invalid(format!(
            "valid_size {valid_size} exceeds corpus size {}",
            records.len()
        )));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].id.cmp(&records[b].id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let valid_ids: HashMap<&str, ()> = order[..valid_size]
        .iter()
        .map(|&i| (records[i].id.as_str(), ()))
        .collect();
    let valid_mask: Vec<bool> = records
        .iter()
        .map(|r| valid_ids.contains_key(r.id.as_str()))
        .collect();
    let (mut train, mut valid) = (Vec::new(), Vec::new());
    for (r, is_valid) in records.into_iter().zip(valid_mask) {
        if is_valid {
            valid.push(r);
        } else {
            train.push(r);
        }
    }
    Ok(CorpusSplit {
        counts: SplitCounts {
            train: train.len(),
            valid: valid.len(),
        },
        train,
        valid,
        seed,
    })
}
