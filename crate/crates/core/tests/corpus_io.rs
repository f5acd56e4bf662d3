use std::collections::HashSet;

use codemix_core::corpus::{
    dedup, load_jsonl, load_parallel, load_tsv, split, write_jsonl, write_parallel, write_tsv, BitextRecord,
};
use proptest::prelude::*;

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec("[^\\s]{1,6}", 1..8).prop_map(|t| t.join(" "))
}

fn records() -> impl Strategy<Value = Vec<BitextRecord>> {
    prop::collection::vec((sentence(), sentence()), 0..20).prop_map(|pairs| {
        pairs
            .into_iter()
            .enumerate()
            .map(|(i, (s, t))| BitextRecord::new(format!("id-{i}"), &s, &t).unwrap())
            .collect()
    })
}

fn tokens(records: &[BitextRecord]) -> Vec<(Vec<String>, Vec<String>)> {
    records.iter().map(|r| (r.source_tokens.clone(), r.target_tokens.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_format_round_trips(recs in records()) {
        let dir = tempfile::tempdir().unwrap();
        let (src, tgt) = (dir.path().join("a.en"), dir.path().join("a.hi"));
        write_parallel(&recs, &src, &tgt).unwrap();
        let back = load_parallel(&src, &tgt).unwrap();
        prop_assert!(back.skipped_lines.is_empty());
        prop_assert_eq!(tokens(&back.records), tokens(&recs));

        let tsv = dir.path().join("a.tsv");
        write_tsv(&recs, &tsv).unwrap();
        let back = load_tsv(&tsv).unwrap().records;
        prop_assert_eq!(tokens(&back), tokens(&recs));
        prop_assert!(back.iter().zip(&recs).all(|(a, b)| a.id == b.id));

        let jsonl = dir.path().join("a.jsonl");
        write_jsonl(&recs, &jsonl).unwrap();
        let back = load_jsonl(&jsonl).unwrap().records;
        prop_assert_eq!(tokens(&back), tokens(&recs));
        prop_assert!(back.iter().zip(&recs).all(|(a, b)| a.id == b.id));
    }

    #[test]
    fn dedup_is_idempotent_and_keeps_first(recs in records(), copies in prop::collection::vec(any::<prop::sample::Index>(), 0..10)) {
        let mut input = recs.clone();
        for (k, c) in copies.iter().enumerate() {
            if !recs.is_empty() {
                let mut dup = c.get(&recs).clone();
                dup.id = format!("dup-{k}");
                input.push(dup);
            }
        }
        let once = dedup(input.clone());
        prop_assert_eq!(dedup(once.clone()), once.clone());
        let keys: HashSet<_> = once.iter().map(|r| (r.source_raw.trim(), r.target_raw.trim())).collect();
        prop_assert_eq!(keys.len(), once.len());
        let all: HashSet<_> = input.iter().map(|r| (r.source_raw.trim(), r.target_raw.trim())).collect();
        prop_assert_eq!(all.len(), once.len());
        prop_assert!(once.iter().all(|r| !r.id.starts_with("dup-") || !recs.iter().any(|o| o.source_raw.trim() == r.source_raw.trim() && o.target_raw.trim() == r.target_raw.trim())));
    }

    #[test]
    fn split_partitions_by_id(recs in records(), seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let valid_size = (recs.len() as f64 * frac) as usize;
        let s = split(recs.clone(), valid_size, seed).unwrap();
        prop_assert_eq!(s.valid.len(), valid_size);
        prop_assert_eq!(s.train.len() + s.valid.len(), recs.len());
        let mut merged: Vec<_> = s.train.iter().chain(&s.valid).map(|r| r.id.clone()).collect();
        merged.sort();
        let mut ids: Vec<_> = recs.iter().map(|r| r.id.clone()).collect();
        ids.sort();
        prop_assert_eq!(merged, ids);

        let mut reversed = recs.clone();
        reversed.reverse();
        let r = split(reversed, valid_size, seed).unwrap();
        let a: HashSet<_> = s.valid.iter().map(|r| &r.id).collect();
        let b: HashSet<_> = r.valid.iter().map(|r| &r.id).collect();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn oversized_valid_split_is_rejected() {
    let recs = vec![BitextRecord::new("a", "x", "y").unwrap()];
    assert!(split(recs, 2, 0).is_err());
}
