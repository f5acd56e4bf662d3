use std::hint::black_box;

use codemix_core::cleaner::Cleaner;
use codemix_core::corpus::BitextRecord;
use codemix_core::embedding::{train, EmbeddingHyperparams};
use codemix_core::generator::{Generator, GeneratorConfig};
use codemix_core::ngram::{build_shuffled_corpus, Vocabulary};
use codemix_core::synthetic::{CorpusShape, DictionaryCorpus};
use codemix_core::translit::{romanize_target, TranslitScheme};
use codemix_core::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

/// The parallel arm uses every core, and at least two workers so the pool
/// path runs even on a single-core machine.
fn modes() -> [(&'static str, Exec); 2] {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    [("sequential", Exec::sequential()), ("parallel", Exec::new(cores.max(2)).expect("thread pool"))]
}

fn toy(pairs: usize) -> Vec<BitextRecord> {
    DictionaryCorpus::toy(CorpusShape { pairs, ..Default::default() }).records()
}

fn shuffled(records: &[BitextRecord], n: usize) -> (Vocabulary, Vec<Vec<String>>) {
    let mut buf = Vec::new();
    let vocab = build_shuffled_corpus(records, n, 1, &Exec::sequential(), &mut buf).unwrap();
    let sents = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| l.split(' ').map(String::from).collect())
        .collect();
    (vocab, sents)
}

fn shuffle(c: &mut Criterion) {
    let records = toy(20_000);
    let mut g = c.benchmark_group("build_shuffled_n3");
    g.throughput(Throughput::Elements(records.len() as u64));
    for (name, exec) in modes() {
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut out = Vec::with_capacity(8 << 20);
                build_shuffled_corpus(black_box(&records), 3, 1, &exec, &mut out).unwrap()
            })
        });
    }
    g.finish();
}

fn generate(c: &mut Criterion) {
    let records = toy(5_000);
    let params = EmbeddingHyperparams { dim: 32, epochs: 2, min_count: 2, subsample_t: 0.0, ..Default::default() };
    let (vocab, sents) = shuffled(&records, 3);
    let table = train(&sents, Some(&vocab), &params, &Exec::sequential()).unwrap().table;
    let config = GeneratorConfig::preset("trigram-roman").unwrap();

    let mut g = c.benchmark_group("generate_trigram_roman");
    g.throughput(Throughput::Elements(records.len() as u64));
    for (name, exec) in modes() {
        // a fresh generator per iteration, so neighbour memoization is part of the cost
        g.bench_function(name, |b| {
            b.iter(|| Generator::new(&table, config.clone()).unwrap().generate_corpus(black_box(&records), &exec))
        });
    }
    g.finish();
}

fn clean(c: &mut Criterion) {
    let noisy = ["#love this @you 😀😀 http://x.co/a", ":) yaar www.q.in 👍🏽 kya baat", "plain words only here"];
    let records: Vec<BitextRecord> = (0..20_000)
        .map(|i| BitextRecord::new(i.to_string(), noisy[i % 3], noisy[(i + 1) % 3]).unwrap())
        .collect();
    let cleaner = Cleaner::default();
    let mut g = c.benchmark_group("clean");
    g.throughput(Throughput::Elements(records.len() as u64));
    for (name, exec) in modes() {
        g.bench_function(name, |b| b.iter(|| cleaner.adapt_corpus(black_box(&records), &exec)));
    }
    g.finish();
}

fn romanize(c: &mut Criterion) {
    let records = DictionaryCorpus::native(CorpusShape { pairs: 20_000, ..Default::default() }).records();
    let scheme = TranslitScheme::hindi();
    let mut g = c.benchmark_group("romanize");
    g.throughput(Throughput::Elements(records.len() as u64));
    for (name, exec) in modes() {
        g.bench_function(name, |b| b.iter(|| romanize_target(black_box(&records), &scheme, &exec)));
    }
    g.finish();
}

fn embed(c: &mut Criterion) {
    let (_, sents) = shuffled(&toy(5_000), 2);
    let params = EmbeddingHyperparams { dim: 32, epochs: 1, min_count: 2, subsample_t: 0.0, ..Default::default() };
    let mut g = c.benchmark_group("train_sgns_one_epoch");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, exec.workers()), &sents, |b, s| {
            b.iter(|| train(s, None, &params, &exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, shuffle, generate, clean, romanize, embed);
criterion_main!(benches);
