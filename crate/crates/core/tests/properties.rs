use std::collections::HashSet;

use codemix_core::cleaner::{clean_text, Cleaner, HashtagMode};
use codemix_core::corpus::{BitextRecord, LanguageTag};
use codemix_core::embedding::{read_table, write_table, EmbeddingTable};
use codemix_core::generator::{Generator, GeneratorConfig};
use codemix_core::metrics::{bleu, cmi, spf, BleuConfig, Smoothing};
use codemix_core::ngram::{
    build_shuffled_corpus, cumulative_ngrams, join_surface, record_rng, shuffled_sentence, split_surface, Vocabulary,
};
use codemix_core::translit::{is_devanagari, romanize_target, TranslitScheme};
use codemix_core::Exec;
use proptest::prelude::*;

fn token() -> impl Strategy<Value = String> {
    prop_oneof!["[a-c]", "[a-c_\\\\]{1,3}"]
}

fn tokens(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(token(), 1..max)
}

fn tag() -> impl Strategy<Value = LanguageTag> {
    prop_oneof![Just(LanguageTag::Lg1), Just(LanguageTag::Lg2), Just(LanguageTag::Other)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn surfaces_split_back(toks in tokens(5)) {
        prop_assert_eq!(split_surface(&join_surface(&toks)), toks);
    }

    #[test]
    fn shuffle_is_a_permutation(x in tokens(9), y in tokens(9), n in 1usize..4, seed in any::<u64>()) {
        let rec = BitextRecord::new("r", &x.join(" "), &y.join(" ")).unwrap();
        let units = cumulative_ngrams(n, &x, &y).unwrap();
        let mut want: Vec<String> = units.iter().map(|u| u.surface.clone()).collect();
        let mut got = shuffled_sentence(&rec, n, &mut record_rng(seed, 0)).unwrap().units;
        want.sort();
        got.sort();
        prop_assert_eq!(got, want);
        for u in &units {
            let src = x.windows(u.order).filter(|w| *w == &u.tokens[..]).count() as u64;
            let tgt = y.windows(u.order).filter(|w| *w == &u.tokens[..]).count() as u64;
            prop_assert_eq!((u.src_count, u.tgt_count), (src, tgt));
        }
    }

    #[test]
    fn vocabulary_file_round_trips(x in tokens(9), y in tokens(9)) {
        let recs = vec![BitextRecord::new("r", &x.join(" "), &y.join(" ")).unwrap()];
        let vocab = build_shuffled_corpus(&recs, 3, 1, &Exec::sequential(), &mut Vec::new()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.tsv");
        vocab.save(&path).unwrap();
        prop_assert_eq!(Vocabulary::load(&path).unwrap(), vocab);
    }

    #[test]
    fn table_text_format_is_exact(rows in prop::collection::vec((any::<f32>(), any::<f32>(), 0u64..9, 0u64..9), 1..8)) {
        let mut t = EmbeddingTable::new(2);
        for (i, &(a, b, s, g)) in rows.iter().enumerate() {
            if a.is_finite() && b.is_finite() {
                t.push(&format!("u{i}_x"), &[a, b], s, g).unwrap();
            }
        }
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let back = read_table(&buf[..], std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn cleaner_is_idempotent(s in "(\\PC|[#@:)( ]|http://x|www\\.|😀|\u{200D}){0,30}") {
        for cleaner in [Cleaner::default(), Cleaner::default().hashtag_mode(HashtagMode::KeepWord)] {
            let once = cleaner.clean(&s).0;
            prop_assert_eq!(cleaner.clean(&once).0, once.clone());
            prop_assert!(!once.contains("  ") && once.trim() == once);
            prop_assert!(once.split(' ').all(|t| !t.starts_with('@') && (cleaner.clean(t).0 == t)));
        }
        let out = clean_text(&s).0;
        prop_assert!(out.split(' ').all(|t| !t.starts_with('#')));
    }

    #[test]
    fn romanization_leaves_no_devanagari(words in prop::collection::vec("[\u{0900}-\u{097F}]{1,6}", 1..6)) {
        let rec = BitextRecord::new("r", "source side", &words.join(" ")).unwrap();
        let out = romanize_target(std::slice::from_ref(&rec), &TranslitScheme::hindi(), &Exec::sequential());
        let r = &out.records[0];
        prop_assert_eq!(out.unmapped, 0);
        prop_assert_eq!(&r.source_raw, &rec.source_raw);
        prop_assert_eq!(r.target_tokens.len(), rec.target_tokens.len());
        prop_assert!(r.target_tokens.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)), "{:?}", r.target_tokens);
        prop_assert!(!r.target_raw.chars().any(is_devanagari), "{:?}", r.target_raw);
    }

    #[test]
    fn mixing_metrics_stay_in_range(tags in prop::collection::vec(tag(), 0..20)) {
        let c = cmi(&tags);
        let s = spf(&tags);
        prop_assert!((0.0..=50.0).contains(&c), "{}", c);
        prop_assert!((0.0..=1.0).contains(&s), "{}", s);
    }

    #[test]
    fn bleu_stays_in_range(h in tokens(8), r in tokens(8), eps in any::<bool>()) {
        let cfg = BleuConfig { smoothing: if eps { Smoothing::Epsilon } else { Smoothing::None }, ..Default::default() };
        let (h, r) = (h.join(" "), r.join(" "));
        let score = bleu(&[h.as_str()], &[r.as_str()], &cfg).unwrap().score;
        prop_assert!((0.0..=100.0).contains(&score), "{}", score);
        prop_assert_eq!(bleu(&[r.as_str()], &[r.as_str()], &cfg).unwrap().score, 100.0);
    }
}

/// LG1 units a, b, c and their bigrams and trigrams, LG2 units on random
/// directions.
fn random_table(seed: u64) -> EmbeddingTable {
    use rand::Rng;
    let mut rng = record_rng(seed, 99);
    let mut t = EmbeddingTable::new(4);
    let mut v = || -> Vec<f32> { (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let words = ["a", "b", "c"];
    let mut seen = HashSet::new();
    for x in words {
        for y in words {
            for z in words {
                for s in [vec![x], vec![x, y], vec![x, y, z]] {
                    let s = join_surface(&s);
                    if seen.insert(s.clone()) {
                        t.push(&s, &v(), 5, 0).unwrap();
                    }
                }
            }
        }
    }
    for k in 0..6 {
        t.push(&format!("H{k}"), &v(), 0, 5).unwrap();
        t.push(&format!("H{k}_J{k}"), &v(), 0, 5).unwrap();
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generator_respects_budget_and_spans(
        seed in 0u64..32,
        sentence in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 1..12),
        budget in 0usize..5,
        max_order in 1usize..4,
        roman in any::<bool>(),
    ) {
        let table = random_table(seed);
        let toks: Vec<String> = sentence.iter().map(|s| s.to_string()).collect();
        let config = GeneratorConfig {
            num_substitutions: budget,
            max_order,
            script_mode: if roman { "roman".parse().unwrap() } else { "native".parse().unwrap() },
            ..Default::default()
        };
        let g = Generator::new(&table, config).unwrap();
        let pair = g.generate("p", &toks);
        prop_assert!(pair.applied.len() <= budget);
        if budget == 0 {
            prop_assert_eq!(&pair.mixed_tokens, &toks);
        }
        prop_assert_eq!(pair.restore_source(), toks.clone());
        prop_assert!(pair.applied.iter().all(|a| split_surface(&a.source).len() <= max_order));

        let mut covered = vec![0u8; toks.len()];
        for a in &pair.applied {
            let n = split_surface(&a.source).len();
            prop_assert!(!a.positions.is_empty());
            for &p in &a.positions {
                for c in &mut covered[p..p + n] {
                    *c += 1;
                }
            }
        }
        prop_assert!(covered.iter().all(|&c| c <= 1));
        let lg2: usize = pair.language_tags().iter().filter(|&&t| t == LanguageTag::Lg2).count();
        let inserted: usize = pair.applied.iter().map(|a| a.inserted.len() * a.positions.len()).sum();
        prop_assert_eq!(lg2, inserted);
        prop_assert_eq!(g.generate("p", &toks), pair);
    }
}
