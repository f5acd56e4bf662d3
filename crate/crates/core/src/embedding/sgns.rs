//! Skip-gram with negative sampling.
//!
//! Each unit in a shuffled sentence predicts the units inside a window whose
//! radius is drawn uniformly from `1..=window` per position. Negatives come
//! from the unigram distribution raised to 0.75. The learning rate decays
//! linearly towards zero over `epochs * corpus_tokens` processed tokens. The
//! input vectors are the published embeddings.
//!
//! With one worker the run is bit-deterministic for a given seed. With more
//! workers, all workers update the shared parameters without synchronization
//! (hogwild); lost updates are tolerated and results vary between runs.

use std::cell::Cell;
use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{EmbeddingHyperparams, EmbeddingTable};
use crate::ngram::{record_rng, Vocabulary};
use crate::{Error, Exec, Result};

const MIN_LR_FRACTION: f32 = 1e-4;

/// A trained table and the mean negative-sampling loss of every epoch.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub table: EmbeddingTable,
    pub epoch_losses: Vec<f64>,
}

/// Parameter storage. Plain cells for the single-worker path, relaxed atomics
/// for hogwild.
trait Store {
    fn get(&self, i: usize) -> f32;
    fn set(&self, i: usize, v: f32);
}

impl Store for [Cell<f32>] {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        self[i].get()
    }
    #[inline]
    fn set(&self, i: usize, v: f32) {
        self[i].set(v)
    }
}

impl Store for [AtomicU32] {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self[i].load(Ordering::Relaxed))
    }
    #[inline]
    fn set(&self, i: usize, v: f32) {
        self[i].store(v.to_bits(), Ordering::Relaxed)
    }
}

struct Vocab {
    surfaces: Vec<String>,
    counts: Vec<u64>,
}

fn build_vocab(sentences: &[Vec<String>], min_count: u64) -> Result<(Vocab, Vec<Vec<u32>>)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for u in s {
            *counts.entry(u.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let ids: HashMap<&str, u32> = kept.iter().enumerate().map(|(i, &(s, _))| (s, i as u32)).collect();
    let encoded = sentences
        .iter()
        .map(|s| s.iter().filter_map(|u| ids.get(u.as_str()).copied()).collect())
        .collect();
    let vocab = Vocab {
        surfaces: kept.iter().map(|&(s, _)| s.to_string()).collect(),
        counts: kept.iter().map(|&(_, c)| c).collect(),
    };
    Ok((vocab, encoded))
}

struct Shared<'a> {
    params: &'a EmbeddingHyperparams,
    corpus: &'a [Vec<u32>],
    negatives: WeightedIndex<f64>,
    keep_prob: Vec<f32>,
    total_updates: f64,
    progress: AtomicU64,
}

impl Shared<'_> {
    fn lr(&self) -> f32 {
        let done = self.progress.load(Ordering::Relaxed) as f64;
        let frac = (1.0 - done / (self.total_updates + 1.0)) as f32;
        self.params.initial_lr * frac.max(MIN_LR_FRACTION)
    }
}

/// `-ln(sigmoid(x))`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// One (center, context) pair with negatives. Returns the summed loss.
#[allow(clippy::too_many_arguments)]
fn train_pair<S: Store + ?Sized>(
    input: &S,
    output: &S,
    dim: usize,
    center: usize,
    context: usize,
    shared: &Shared,
    rng: &mut ChaCha8Rng,
    lr: f32,
    in_buf: &mut [f32],
    grad: &mut [f32],
) -> f64 {
    let in_off = center * dim;
    for (k, v) in in_buf.iter_mut().enumerate() {
        *v = input.get(in_off + k);
    }
    grad.fill(0.0);
    let mut loss = 0.0;
    for d in 0..=shared.params.negatives {
        let (target, label) = if d == 0 {
            (context, 1.0f32)
        } else {
            let t = shared.negatives.sample(rng);
            if t == context {
                continue;
            }
            (t, 0.0)
        };
        let out_off = target * dim;
        let mut f = 0.0f32;
        for (k, &x) in in_buf.iter().enumerate() {
            f += x * output.get(out_off + k);
        }
        loss += if label > 0.0 {
            neg_log_sigmoid(f as f64)
        } else {
            neg_log_sigmoid(-f as f64)
        };
        let sig = 1.0 / (1.0 + (-f).exp());
        let g = (label - sig) * lr;
        for k in 0..dim {
            let o = output.get(out_off + k);
            grad[k] += g * o;
            output.set(out_off + k, o + g * in_buf[k]);
        }
    }
    for (k, &g) in grad.iter().enumerate() {
        input.set(in_off + k, in_buf[k] + g);
    }
    loss
}

/// Runs all epochs over `sentences`; returns per-epoch (loss sum, pair count).
fn run_worker<S: Store + ?Sized>(
    input: &S,
    output: &S,
    shared: &Shared,
    sentences: &[Vec<u32>],
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, u64)> {
    let p = shared.params;
    let dim = p.dim;
    let mut in_buf = vec![0.0f32; dim];
    let mut grad = vec![0.0f32; dim];
    let mut kept: Vec<usize> = Vec::new();
    let mut epochs = Vec::with_capacity(p.epochs);
    for _ in 0..p.epochs {
        let (mut loss, mut pairs) = (0.0f64, 0u64);
        for sentence in sentences {
            let lr = shared.lr();
            kept.clear();
            for &u in sentence {
                let keep = shared.keep_prob[u as usize];
                if keep >= 1.0 || rng.gen::<f32>() < keep {
                    kept.push(u as usize);
                }
            }
            for pos in 0..kept.len() {
                let radius = rng.gen_range(1..=p.window);
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(kept.len() - 1);
                for ctx in lo..=hi {
                    if ctx == pos {
                        continue;
                    }
                    loss += train_pair(
                        input, output, dim, kept[pos], kept[ctx], shared, rng, lr, &mut in_buf, &mut grad,
                    );
                    pairs += 1;
                }
            }
            shared.progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
        }
        epochs.push((loss, pairs));
    }
    epochs
}

fn init_input(vocab_len: usize, dim: usize, seed: u64) -> Vec<f32> {
    let mut rng = record_rng(seed, 0);
    let scale = 1.0 / dim as f32;
    (0..vocab_len * dim).map(|_| (rng.gen::<f32>() - 0.5) * scale).collect()
}

/// Trains on in-memory shuffled sentences (each a list of unit surfaces).
/// `provenance` supplies the per-unit source/target counts copied into the
/// table; units missing from it get zero counts.
pub fn train(
    sentences: &[Vec<String>],
    provenance: Option<&Vocabulary>,
    params: &EmbeddingHyperparams,
    exec: &Exec,
) -> Result<TrainOutcome> {
    params.validate()?;
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(Error::invalid("training corpus is empty"));
    }
    let (vocab, corpus) = build_vocab(sentences, params.min_count)?;
    let dim = params.dim;
    let total_tokens: u64 = corpus.iter().map(|s| s.len() as u64).sum();

    let keep_prob = vocab
        .counts
        .iter()
        .map(|&c| {
            if params.subsample_t <= 0.0 {
                return 1.0;
            }
            let threshold = params.subsample_t * total_tokens as f64;
            let c = c as f64;
            (((c / threshold).sqrt() + 1.0) * threshold / c).min(1.0) as f32
        })
        .collect();
    let negatives = WeightedIndex::new(vocab.counts.iter().map(|&c| (c as f64).powf(0.75)))
        .map_err(|e| Error::invalid(format!("negative sampling table: {e}")))?;
    let shared = Shared {
        params,
        corpus: &corpus,
        negatives,
        keep_prob,
        total_updates: (params.epochs as u64 * total_tokens) as f64,
        progress: AtomicU64::new(0),
    };

    let init = init_input(vocab.surfaces.len(), dim, params.seed);
    let (vectors, per_epoch) = if exec.is_sequential() {
        let mut input = init;
        let mut output = vec![0.0f32; input.len()];
        let mut rng = record_rng(params.seed, 1);
        let epochs = run_worker(
            Cell::from_mut(input.as_mut_slice()).as_slice_of_cells(),
            Cell::from_mut(output.as_mut_slice()).as_slice_of_cells(),
            &shared,
            shared.corpus,
            &mut rng,
        );
        (input, epochs)
    } else {
        hogwild(init, &shared, exec)
    };

    let epoch_losses = per_epoch
        .iter()
        .map(|&(loss, pairs)| if pairs == 0 { 0.0 } else { loss / pairs as f64 })
        .collect::<Vec<_>>();
    log::info!("trained {} units, epoch losses {:?}", vocab.surfaces.len(), epoch_losses);

    let mut table = EmbeddingTable::new(dim);
    for (i, surface) in vocab.surfaces.iter().enumerate() {
        let (src, tgt) = provenance
            .and_then(|p| p.get(surface))
            .map_or((0, 0), |e| (e.src_count, e.tgt_count));
        table.push(surface, &vectors[i * dim..(i + 1) * dim], src, tgt)?;
    }
    Ok(TrainOutcome { table, epoch_losses })
}

fn hogwild(init: Vec<f32>, shared: &Shared, exec: &Exec) -> (Vec<f32>, Vec<(f64, u64)>) {
    let input: Vec<AtomicU32> = init.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect();
    let output: Vec<AtomicU32> = (0..input.len()).map(|_| AtomicU32::new(0)).collect();
    let workers = exec.workers();
    let n = shared.corpus.len();
    let results = std::sync::Mutex::new(vec![(0.0f64, 0u64); shared.params.epochs]);
    exec.for_each_worker(|w| {
        let chunk = &shared.corpus[w * n / workers..(w + 1) * n / workers];
        let mut rng = record_rng(shared.params.seed, w + 1);
        let epochs = run_worker(input.as_slice(), output.as_slice(), shared, chunk, &mut rng);
        let mut acc = results.lock().expect("loss accumulator poisoned");
        for (slot, (loss, pairs)) in acc.iter_mut().zip(epochs) {
            slot.0 += loss;
            slot.1 += pairs;
        }
    });
    let vectors = input.into_iter().map(|a| f32::from_bits(a.into_inner())).collect();
    (vectors, results.into_inner().expect("loss accumulator poisoned"))
}

/// Reads a shuffled corpus file (one sentence per line, space-separated
/// surfaces) and trains on it.
pub fn train_file(
    path: &Path,
    provenance: Option<&Vocabulary>,
    params: &EmbeddingHyperparams,
    exec: &Exec,
) -> Result<TrainOutcome> {
    params.validate()?;
    let file = fs::File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut sentences = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|_| Error::Encoding {
            path: path.to_path_buf(),
            line: i + 1,
        })?;
        sentences.push(line.split_whitespace().map(str::to_string).collect());
    }
    train(&sentences, provenance, params, exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(text: &[&str]) -> Vec<Vec<String>> {
        text.iter()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    fn small() -> EmbeddingHyperparams {
        EmbeddingHyperparams {
            dim: 8,
            epochs: 3,
            min_count: 1,
            subsample_t: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn stable_log_sigmoid() {
        assert!((neg_log_sigmoid(0.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(neg_log_sigmoid(800.0).is_finite());
        assert!((neg_log_sigmoid(-800.0) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn one_repeated_line_trains() {
        let corpus = lines(&["a b c d"; 20]);
        let out = train(&corpus, None, &small(), &Exec::sequential()).unwrap();
        assert_eq!(out.table.len(), 4);
        assert_eq!(out.epoch_losses.len(), 3);
        for s in ["a", "b", "c", "d"] {
            assert!(out.table.get(s).unwrap().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn min_count_above_every_count_errors() {
        let corpus = lines(&["a b", "a c"]);
        let params = EmbeddingHyperparams {
            min_count: 3,
            ..small()
        };
        match train(&corpus, None, &params, &Exec::sequential()) {
            Err(Error::EmptyVocabulary { min_count }) => assert_eq!(min_count, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(train(&lines(&["", ""]), None, &small(), &Exec::sequential()).is_err());
    }

    #[test]
    fn single_worker_is_bit_deterministic() {
        let corpus = lines(&["a b c d e", "b c x y", "e a y z q"]);
        let a = train(&corpus, None, &small(), &Exec::sequential()).unwrap();
        let b = train(&corpus, None, &small(), &Exec::sequential()).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.epoch_losses, b.epoch_losses);
    }

    #[test]
    fn hogwild_produces_finite_table() {
        let corpus = lines(&["a b c d e"; 64]);
        let out = train(&corpus, None, &small(), &Exec::new(4).unwrap()).unwrap();
        assert_eq!(out.table.len(), 5);
        assert!(out.epoch_losses.iter().all(|l| l.is_finite() && *l > 0.0));
    }
}
