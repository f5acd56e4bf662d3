//! Synthetic bilingual corpora with a known word-level dictionary.
//!
//! Every dictionary word belongs to a few topics. A source sentence picks one
//! topic and draws its words from that topic's members, weighted by a
//! Zipf-like distribution over the dictionary rank. The target is the
//! word-for-word translation. Topic membership gives each word its own context
//! profile, shared only with its translation. Because the
//! dictionary is known, induced lexicons and generated text can be checked
//! against it exactly. Used by tests, benchmarks and demos.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::corpus::BitextRecord;
use crate::ngram::record_rng;

/// 50 English words and romanized Hindi translations, most frequent first.
pub const TOY_DICTIONARY: [(&str, &str); 50] = [
    ("the", "woh"),
    ("cat", "billi"),
    ("sat", "baitha"),
    ("dog", "kutta"),
    ("house", "ghar"),
    ("water", "paani"),
    ("food", "khaana"),
    ("book", "kitaab"),
    ("friend", "dost"),
    ("mother", "maa"),
    ("father", "pita"),
    ("brother", "bhai"),
    ("sister", "behen"),
    ("city", "shahar"),
    ("village", "gaon"),
    ("road", "sadak"),
    ("tree", "ped"),
    ("flower", "phool"),
    ("sun", "suraj"),
    ("moon", "chaand"),
    ("night", "raat"),
    ("day", "din"),
    ("time", "samay"),
    ("work", "kaam"),
    ("money", "paisa"),
    ("king", "raja"),
    ("queen", "rani"),
    ("river", "nadi"),
    ("mountain", "pahad"),
    ("sky", "aasmaan"),
    ("heart", "dil"),
    ("love", "pyaar"),
    ("song", "gaana"),
    ("school", "vidyalay"),
    ("teacher", "adhyapak"),
    ("child", "baccha"),
    ("girl", "ladki"),
    ("boy", "ladka"),
    ("eye", "aankh"),
    ("hand", "haath"),
    ("door", "darwaza"),
    ("window", "khidki"),
    ("fire", "aag"),
    ("wind", "hawa"),
    ("earth", "dharti"),
    ("year", "saal"),
    ("morning", "subah"),
    ("evening", "shaam"),
    ("milk", "doodh"),
    ("bird", "chidiya"),
];

/// Native-script Hindi vocabulary for romanization workloads.
pub const NATIVE_DICTIONARY: [(&str, &str); 20] = [
    ("I", "मैं"),
    ("never", "कभी"),
    ("not", "नहीं"),
    ("saw", "देखा"),
    ("house", "घर"),
    ("water", "पानी"),
    ("life", "ज़िंदगी"),
    ("what", "क्या"),
    ("is", "है"),
    ("friend", "दोस्त"),
    ("book", "किताब"),
    ("mother", "माँ"),
    ("night", "रात"),
    ("love", "प्यार"),
    ("heart", "दिल"),
    ("sky", "आसमान"),
    ("work", "काम"),
    ("good", "अच्छा"),
    ("year", "२०२१"),
    ("fast", "तेज़।"),
];

#[derive(Clone, Debug)]
pub struct DictionaryCorpus {
    pub shape: CorpusShape,
    pub dictionary: Vec<(String, String)>,
}

/// Size and length range of a generated corpus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusShape {
    pub pairs: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Zipf exponent of the word distribution.
    pub zipf: f64,
    pub topics: usize,
    /// Topics each word belongs to (capped at `topics`).
    pub topics_per_word: usize,
    pub seed: u64,
}

impl Default for CorpusShape {
    fn default() -> Self {
        CorpusShape {
            pairs: 5000,
            min_len: 5,
            max_len: 10,
            zipf: 1.0,
            topics: 20,
            topics_per_word: 3,
            seed: 7,
        }
    }
}

impl DictionaryCorpus {
    pub fn toy(shape: CorpusShape) -> Self {
        Self::new(&TOY_DICTIONARY, shape)
    }

    pub fn native(shape: CorpusShape) -> Self {
        Self::new(&NATIVE_DICTIONARY, shape)
    }

    pub fn new(dictionary: &[(&str, &str)], shape: CorpusShape) -> Self {
        DictionaryCorpus {
            shape,
            dictionary: dictionary.iter().map(|&(s, t)| (s.to_string(), t.to_string())).collect(),
        }
    }

    pub fn translation(&self, source: &str) -> Option<&str> {
        self.dictionary.iter().find(|(s, _)| s == source).map(|(_, t)| t.as_str())
    }

    pub fn records(&self) -> Vec<BitextRecord> {
        let s = self.shape;
        let n = self.dictionary.len();
        let mut rng = record_rng(s.seed, 0);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); s.topics.max(1)];
        for w in 0..n {
            for t in rand::seq::index::sample(&mut rng, members.len(), s.topics_per_word.clamp(1, members.len())) {
                members[t].push(w);
            }
        }
        members.retain(|m| !m.is_empty());
        let topics: Vec<WeightedIndex<f64>> = members
            .iter()
            .map(|m| WeightedIndex::new(m.iter().map(|&w| 1.0 / ((w + 1) as f64).powf(s.zipf))).expect("non-empty topic"))
            .collect();
        (0..s.pairs)
            .map(|i| {
                let len = rng.gen_range(s.min_len..=s.max_len);
                let t = rng.gen_range(0..members.len());
                let picks: Vec<usize> = (0..len).map(|_| members[t][topics[t].sample(&mut rng)]).collect();
                let src: Vec<&str> = picks.iter().map(|&w| self.dictionary[w].0.as_str()).collect();
                let tgt: Vec<&str> = picks.iter().map(|&w| self.dictionary[w].1.as_str()).collect();
                BitextRecord::new(format!("toy-{}", i + 1), &src.join(" "), &tgt.join(" "))
                    .expect("non-empty sentence")
            })
            .collect()
    }
}
