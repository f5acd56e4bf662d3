//! Cross-lingual n-gram embeddings and target-language neighbour search.
//!
//! Embeddings are trained with skip-gram negative sampling over the shuffled
//! corpus (see [`train`]). Because a shuffled sentence interleaves both sides
//! of a pair, translation-equivalent units share contexts and end up close in
//! the space; no explicit alignment step is involved.
//!
//! Every unit carries provenance counts. A unit is *LG2-dominant* under a
//! threshold `tau` when `tgt_count / (src_count + tgt_count) >= tau`, and
//! *LG1-dominant* symmetrically. Neighbour queries only ever return
//! LG2-dominant units that are not also LG1-dominant.

mod io;
mod sgns;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::{Error, Result};

pub use io::{load_table, read_table, save_table, write_table};
pub use sgns::{train, train_file, TrainOutcome};

pub const DEFAULT_TAU: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingHyperparams {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub initial_lr: f32,
    /// Frequent-unit subsampling threshold; `0` disables subsampling.
    pub subsample_t: f64,
    pub seed: u64,
}

impl Default for EmbeddingHyperparams {
    fn default() -> Self {
        EmbeddingHyperparams {
            dim: 100,
            window: 5,
            epochs: 5,
            min_count: 5,
            negatives: 5,
            initial_lr: 0.025,
            subsample_t: 1e-4,
            seed: 1,
        }
    }
}

impl EmbeddingHyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim as u64),
            ("window", self.window as u64),
            ("epochs", self.epochs as u64),
            ("min_count", self.min_count),
            ("negatives", self.negatives as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::invalid("initial_lr must be positive"));
        }
        if !(self.subsample_t >= 0.0 && self.subsample_t.is_finite()) {
            return Err(Error::invalid("subsample_t must be non-negative"));
        }
        Ok(())
    }
}

/// Unit surface to vector map with per-unit provenance counts.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    surfaces: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    provenance: Vec<(u64, u64)>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            surfaces: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn push(&mut self, surface: &str, vector: &[f32], src_count: u64, tgt_count: u64) -> Result<usize> {
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector for {surface:?} has length {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("vector for {surface:?} is not finite")));
        }
        if self.index.contains_key(surface) {
            return Err(Error::invalid(format!("duplicate unit {surface:?}")));
        }
        let id = self.surfaces.len();
        self.index.insert(surface.to_string(), id);
        self.surfaces.push(surface.to_string());
        self.vectors.extend_from_slice(vector);
        self.provenance.push((src_count, tgt_count));
        Ok(id)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn id(&self, surface: &str) -> Option<usize> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, id: usize) -> &str {
        &self.surfaces[id]
    }

    pub fn vector(&self, id: usize) -> &[f32] {
        &self.vectors[id * self.dim..(id + 1) * self.dim]
    }

    pub fn get(&self, surface: &str) -> Option<&[f32]> {
        self.id(surface).map(|id| self.vector(id))
    }

    pub fn provenance(&self, id: usize) -> (u64, u64) {
        self.provenance[id]
    }

    pub fn total_count(&self, id: usize) -> u64 {
        let (s, t) = self.provenance[id];
        s + t
    }

    pub fn is_lg1_dominant(&self, id: usize, tau: f64) -> bool {
        let (s, t) = self.provenance[id];
        s + t > 0 && s as f64 >= tau * (s + t) as f64
    }

    pub fn is_lg2_dominant(&self, id: usize, tau: f64) -> bool {
        let (s, t) = self.provenance[id];
        s + t > 0 && t as f64 >= tau * (s + t) as f64
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.surfaces.iter().map(String::as_str)
    }
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

fn cosine_with_norms(a: &[f32], na: f64, b: &[f32], nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity. A zero vector yields 0 and a logged warning.
///
/// Panics if the lengths differ.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine of vectors with different dimensions");
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        log::warn!("cosine with a zero vector (degenerate embedding), returning 0");
    }
    cosine_with_norms(a, na, b, nb)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub surface: String,
    pub similarity: f64,
}

pub fn check_tau(tau: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&tau) {
        return Err(Error::invalid(format!("tau must lie in [0.5, 1], got {tau}")));
    }
    Ok(())
}

/// The LG2-dominant candidate set of a table under a fixed `tau`, with norms
/// precomputed. Build once and query many times.
pub struct Lg2Index<'a> {
    table: &'a EmbeddingTable,
    candidates: Vec<(usize, f64)>,
}

impl<'a> Lg2Index<'a> {
    pub fn new(table: &'a EmbeddingTable, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let candidates = (0..table.len())
            .filter(|&id| table.is_lg2_dominant(id, tau) && !table.is_lg1_dominant(id, tau))
            .map(|id| (id, norm(table.vector(id))))
            .collect();
        Ok(Lg2Index { table, candidates })
    }

    pub fn table(&self) -> &'a EmbeddingTable {
        self.table
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    /// Descending similarity, then higher total count, then surface.
    fn rank(&self, a: &(usize, f64), b: &(usize, f64)) -> Ordering {
        let t = self.table;
        b.1.total_cmp(&a.1)
            .then_with(|| t.total_count(b.0).cmp(&t.total_count(a.0)))
            .then_with(|| t.surface(a.0).cmp(t.surface(b.0)))
    }

    fn scores(&self, query: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let q = self.table.vector(query);
        let nq = norm(q);
        self.candidates
            .iter()
            .filter(move |&&(id, _)| id != query)
            .map(move |&(id, n)| (id, cosine_with_norms(q, nq, self.table.vector(id), n)))
    }

    pub fn nearest_id(&self, query: usize, k: usize) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        if k == 1 {
            return self
                .scores(query)
                .min_by(|a, b| self.rank(a, b))
                .into_iter()
                .collect();
        }
        let mut all: Vec<_> = self.scores(query).collect();
        all.sort_by(|a, b| self.rank(a, b));
        all.truncate(k);
        all
    }

    pub fn nearest(&self, query: &str, k: usize) -> Result<Vec<Neighbor>> {
        let id = self
            .table
            .id(query)
            .ok_or_else(|| Error::UnknownUnit(query.to_string()))?;
        Ok(self
            .nearest_id(id, k)
            .into_iter()
            .map(|(id, similarity)| Neighbor {
                surface: self.table.surface(id).to_string(),
                similarity,
            })
            .collect())
    }
}

/// Up to `k` LG2-dominant neighbours of `query`, most similar first.
pub fn nearest_lg2(query: &str, k: usize, table: &EmbeddingTable, tau: f64) -> Result<Vec<Neighbor>> {
    Lg2Index::new(table, tau)?.nearest(query, k)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LexiconEntry {
    pub source: String,
    pub target: String,
    pub similarity: f64,
}

/// Best LG2 neighbour for each of the `top_m` most frequent LG1-dominant
/// units, sorted by similarity descending.
pub fn induce_lexicon(table: &EmbeddingTable, top_m: usize, tau: f64) -> Result<Vec<LexiconEntry>> {
    let index = Lg2Index::new(table, tau)?;
    let mut sources: Vec<usize> = (0..table.len())
        .filter(|&id| table.is_lg1_dominant(id, tau))
        .collect();
    sources.sort_by(|&a, &b| {
        table
            .total_count(b)
            .cmp(&table.total_count(a))
            .then_with(|| table.surface(a).cmp(table.surface(b)))
    });
    sources.truncate(top_m);
    let mut out: Vec<LexiconEntry> = sources
        .into_iter()
        .filter_map(|id| {
            index.nearest_id(id, 1).first().map(|&(t, similarity)| LexiconEntry {
                source: table.surface(id).to_string(),
                target: table.surface(t).to_string(),
                similarity,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.source.cmp(&b.source))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2);
        t.push("cat", &[1.0, 0.0], 10, 0).unwrap();
        t.push("dog", &[0.0, 1.0], 8, 0).unwrap();
        t.push("billi", &[0.9, 0.1], 0, 10).unwrap();
        t.push("kutta", &[0.1, 0.9], 0, 8).unwrap();
        t.push("main", &[0.95, 0.05], 5, 5).unwrap();
        t
    }

    #[test]
    fn cosine_fixtures() {
        let v = [0.3f32, -1.2, 2.5];
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-12);
        let neg: Vec<f32> = v.iter().map(|x| -x).collect();
        assert!((cosine(&v, &neg) + 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn nearest_excludes_shared_and_source_units() {
        let t = table();
        let n = nearest_lg2("cat", 5, &t, 0.8).unwrap();
        let names: Vec<_> = n.iter().map(|x| x.surface.as_str()).collect();
        assert_eq!(names, ["billi", "kutta"]);
        assert!(n[0].similarity > n[1].similarity);
    }

    #[test]
    fn unknown_query_is_typed() {
        assert!(matches!(nearest_lg2("zebra", 1, &table(), 0.8), Err(Error::UnknownUnit(_))));
    }

    #[test]
    fn tau_one_on_shared_only_vocab_is_empty() {
        let mut t = EmbeddingTable::new(2);
        t.push("a", &[1.0, 0.0], 3, 3).unwrap();
        t.push("b", &[0.0, 1.0], 1, 2).unwrap();
        assert!(nearest_lg2("a", 3, &t, 1.0).unwrap().is_empty());
        assert!(nearest_lg2("a", 3, &t, 0.4).is_err());
    }

    #[test]
    fn ties_prefer_frequent_then_lexicographic() {
        let mut t = EmbeddingTable::new(2);
        t.push("q", &[1.0, 0.0], 5, 0).unwrap();
        t.push("zz", &[2.0, 0.0], 0, 9).unwrap();
        t.push("bb", &[1.0, 0.0], 0, 3).unwrap();
        t.push("aa", &[3.0, 0.0], 0, 3).unwrap();
        let n = nearest_lg2("q", 3, &t, 0.8).unwrap();
        let names: Vec<_> = n.iter().map(|x| x.surface.as_str()).collect();
        assert_eq!(names, ["zz", "aa", "bb"]);
        assert_eq!(nearest_lg2("q", 1, &t, 0.8).unwrap()[0].surface, "zz");
    }

    #[test]
    fn lexicon_from_small_table() {
        let t = table();
        let lex = induce_lexicon(&t, 20, 0.8).unwrap();
        let pairs: Vec<_> = lex.iter().map(|e| (e.source.as_str(), e.target.as_str())).collect();
        assert_eq!(pairs.len(), 2);
        assert!(pairs.contains(&("cat", "billi")) && pairs.contains(&("dog", "kutta")));
        assert!(induce_lexicon(&t, 0, 0.8).unwrap().is_empty());

        let mut only_lg2 = EmbeddingTable::new(1);
        only_lg2.push("x", &[1.0], 0, 4).unwrap();
        assert!(induce_lexicon(&only_lg2, 5, 0.8).unwrap().is_empty());
    }

    #[test]
    fn push_rejects_bad_vectors() {
        let mut t = EmbeddingTable::new(2);
        assert!(t.push("a", &[1.0], 1, 0).is_err());
        assert!(t.push("a", &[f32::NAN, 1.0], 1, 0).is_err());
        t.push("a", &[1.0, 1.0], 1, 0).unwrap();
        assert!(t.push("a", &[1.0, 1.0], 1, 0).is_err());
    }

    #[test]
    fn hyperparam_validation() {
        assert!(EmbeddingHyperparams::default().validate().is_ok());
        let bad = EmbeddingHyperparams { window: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EmbeddingHyperparams { initial_lr: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
