//! Corpus BLEU and code-mixing measures.
//!
//! BLEU here is single-reference corpus BLEU: the geometric mean of clipped
//! n-gram precisions for orders `1..=max_order` with uniform weights, times
//! the brevity penalty `exp(min(0, 1 - r/c))`. Tokens are whitespace-split,
//! lowercased unless `case_sensitive`. With epsilon smoothing a zero match
//! count at some order is replaced by [`BLEU_EPSILON`]. Orders for which the
//! hypotheses contain no n-grams at all are left out of the mean.
//!
//! CMI is `100 * (1 - m / (N - u))` where `m` is the larger of the LG1 and
//! LG2 token counts, `N` the token count and `u` the OTHER count (0 when
//! `N == u`). The switch-point fraction is the share of adjacent language
//! tagged tokens (OTHER removed) whose tags differ.

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::LanguageTag;
use crate::generator::GeneratedPair;
use crate::translit::is_devanagari;
use crate::{Error, Result};

pub const BLEU_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    #[default]
    None,
    Epsilon,
}

impl std::str::FromStr for Smoothing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Smoothing::None),
            "epsilon" => Ok(Smoothing::Epsilon),
            _ => Err(Error::invalid(format!("unknown smoothing {s:?} (none, epsilon)"))),
        }
    }
}

impl std::fmt::Display for Smoothing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Smoothing::None => "none",
            Smoothing::Epsilon => "epsilon",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BleuConfig {
    pub max_order: usize,
    pub case_sensitive: bool,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig {
            max_order: 4,
            case_sensitive: false,
            smoothing: Smoothing::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: Vec<f64>,
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

pub fn bleu<S: AsRef<str>>(hypotheses: &[S], references: &[S], config: &BleuConfig) -> Result<BleuScore> {
    if hypotheses.len() != references.len() {
        return Err(Error::invalid(format!(
            "{} hypotheses but {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    if hypotheses.is_empty() {
        return Err(Error::invalid("BLEU of an empty corpus"));
    }
    if config.max_order == 0 {
        return Err(Error::invalid("BLEU max_order must be at least 1"));
    }
    let tokenize = |s: &str| -> Vec<String> {
        if config.case_sensitive {
            s.split_whitespace().map(str::to_string).collect()
        } else {
            s.split_whitespace().map(str::to_lowercase).collect()
        }
    };
    let orders = config.max_order;
    let mut matches = vec![0u64; orders];
    let mut totals = vec![0u64; orders];
    let (mut hyp_len, mut ref_len) = (0u64, 0u64);
    for (h, r) in hypotheses.iter().zip(references) {
        let h = tokenize(h.as_ref());
        let r = tokenize(r.as_ref());
        hyp_len += h.len() as u64;
        ref_len += r.len() as u64;
        for n in 1..=orders {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            totals[n - 1] += h.len().saturating_sub(n - 1) as u64;
            matches[n - 1] += hc
                .iter()
                .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
                .sum::<u64>();
        }
    }

    let precisions: Vec<f64> = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| match (m, t, config.smoothing) {
            (_, 0, _) => 0.0,
            (0, t, Smoothing::Epsilon) => BLEU_EPSILON / t as f64,
            (m, t, _) => m as f64 / t as f64,
        })
        .collect();
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).min(0.0).exp()
    };
    let defined: Vec<f64> = precisions
        .iter()
        .zip(&totals)
        .filter(|(_, &t)| t > 0)
        .map(|(&p, _)| p)
        .collect();
    let score = if defined.is_empty() || defined.contains(&0.0) {
        0.0
    } else {
        let mean_log = defined.iter().map(|p| p.ln()).sum::<f64>() / defined.len() as f64;
        (100.0 * brevity_penalty * mean_log.exp()).min(100.0)
    };
    Ok(BleuScore {
        score,
        precisions,
        matches,
        totals,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}

fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c, 'A'..='Z' | 'a'..='z' | '\u{00C0}'..='\u{024F}' | '\u{1E00}'..='\u{1EFF}')
}

/// Script heuristic for text without provenance: any Devanagari makes a token
/// LG2, otherwise any Latin letter makes it LG1, otherwise OTHER.
pub fn script_tag(token: &str) -> LanguageTag {
    if token.chars().any(is_devanagari) {
        LanguageTag::Lg2
    } else if token.chars().any(is_latin_letter) {
        LanguageTag::Lg1
    } else {
        LanguageTag::Other
    }
}

pub fn script_tags<S: AsRef<str>>(tokens: &[S]) -> Vec<LanguageTag> {
    tokens.iter().map(|t| script_tag(t.as_ref())).collect()
}

/// Exact tags of a generated sentence, taken from its substitution spans.
pub fn pair_tags(pair: &GeneratedPair) -> Vec<LanguageTag> {
    pair.language_tags()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TagHistogram {
    #[serde(rename = "LG1")]
    pub lg1: u64,
    #[serde(rename = "LG2")]
    pub lg2: u64,
    #[serde(rename = "OTHER")]
    pub other: u64,
}

impl TagHistogram {
    pub fn of(tags: &[LanguageTag]) -> Self {
        let mut h = TagHistogram::default();
        for t in tags {
            match t {
                LanguageTag::Lg1 => h.lg1 += 1,
                LanguageTag::Lg2 => h.lg2 += 1,
                LanguageTag::Other => h.other += 1,
            }
        }
        h
    }

    pub fn merge(&mut self, o: &TagHistogram) {
        self.lg1 += o.lg1;
        self.lg2 += o.lg2;
        self.other += o.other;
    }
}

pub fn cmi(tags: &[LanguageTag]) -> f64 {
    let h = TagHistogram::of(tags);
    let tagged = h.lg1 + h.lg2;
    if tagged == 0 {
        return 0.0;
    }
    100.0 * (1.0 - h.lg1.max(h.lg2) as f64 / tagged as f64)
}

pub fn spf(tags: &[LanguageTag]) -> f64 {
    let tagged: Vec<LanguageTag> = tags.iter().copied().filter(|&t| t != LanguageTag::Other).collect();
    if tagged.len() < 2 {
        return 0.0;
    }
    let switches = tagged.windows(2).filter(|w| w[0] != w[1]).count();
    switches as f64 / (tagged.len() - 1) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SentenceMetrics {
    pub cmi: f64,
    pub spf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub bleu: Option<f64>,
    pub sentences: usize,
    pub cmi_mean: f64,
    pub spf_mean: f64,
    pub per_sentence: Vec<SentenceMetrics>,
    pub tag_histogram: TagHistogram,
}

/// Mean CMI and SPF over tagged sentences. An empty corpus reports zeros.
pub fn mixing_report(tagged: &[Vec<LanguageTag>]) -> MetricsReport {
    let per_sentence: Vec<SentenceMetrics> = tagged
        .iter()
        .map(|t| SentenceMetrics { cmi: cmi(t), spf: spf(t) })
        .collect();
    let mut tag_histogram = TagHistogram::default();
    for t in tagged {
        tag_histogram.merge(&TagHistogram::of(t));
    }
    let n = per_sentence.len().max(1) as f64;
    MetricsReport {
        bleu: None,
        sentences: per_sentence.len(),
        cmi_mean: per_sentence.iter().map(|s| s.cmi).sum::<f64>() / n,
        spf_mean: per_sentence.iter().map(|s| s.spf).sum::<f64>() / n,
        per_sentence,
        tag_histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LanguageTag::{Lg1, Lg2, Other};

    #[test]
    fn bleu_identity_and_disjoint() {
        let refs = ["the cat sat on the mat", "a b c d e"];
        assert_eq!(bleu(&refs, &refs, &BleuConfig::default()).unwrap().score, 100.0);
        let disjoint = ["x y z w v u", "p q r s t"];
        assert_eq!(bleu(&disjoint, &refs, &BleuConfig::default()).unwrap().score, 0.0);
    }

    #[test]
    fn bleu_short_identity() {
        let refs = ["ok", "fine then"];
        assert_eq!(bleu(&refs, &refs, &BleuConfig::default()).unwrap().score, 100.0);
    }

    #[test]
    fn bleu_case_folding() {
        let h = ["The Cat sat down"];
        let r = ["the cat sat down"];
        assert_eq!(bleu(&h, &r, &BleuConfig::default()).unwrap().score, 100.0);
        let cs = BleuConfig { case_sensitive: true, ..Default::default() };
        assert!(bleu(&h, &r, &cs).unwrap().score < 100.0);
    }

    #[test]
    fn bleu_errors() {
        assert!(bleu(&["a"], &["a", "b"], &BleuConfig::default()).is_err());
        let empty: [&str; 0] = [];
        assert!(bleu(&empty, &empty, &BleuConfig::default()).is_err());
    }

    #[test]
    fn brevity_penalty_applies_to_short_hypotheses() {
        let s = bleu(&["a b"], &["a b c d"], &BleuConfig::default()).unwrap();
        assert!((s.brevity_penalty - (-1.0f64).exp()).abs() < 1e-12);
        assert!((s.score - 100.0 * (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn script_heuristic() {
        assert_eq!(script_tags(&["मैं", "ok"]), [Lg2, Lg1]);
        assert_eq!(script_tags(&["123", "!!"]), [Other, Other]);
    }

    #[test]
    fn cmi_spf_fixtures() {
        assert_eq!(cmi(&[Lg1, Lg1, Lg1]), 0.0);
        assert_eq!(cmi(&[Lg1, Lg1, Lg1, Lg2, Lg2, Lg2]), 50.0);
        assert_eq!(cmi(&[Other, Other]), 0.0);
        assert_eq!(spf(&[Lg1, Lg2, Lg1, Lg2]), 1.0);
        assert_eq!(spf(&[Lg1, Lg1, Lg1]), 0.0);
        assert!((spf(&[Lg1, Lg1, Lg2, Lg2]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(spf(&[Lg1, Other]), 0.0);
        assert_eq!(spf(&[Lg1, Other, Lg2]), 1.0);
    }

    #[test]
    fn report_means() {
        let r = mixing_report(&[vec![Lg1, Lg2], vec![Lg1, Lg1]]);
        assert_eq!(r.cmi_mean, 25.0);
        assert_eq!(r.spf_mean, 0.5);
        assert_eq!(r.tag_histogram, TagHistogram { lg1: 3, lg2: 1, other: 0 });
        assert_eq!(mixing_report(&[]).cmi_mean, 0.0);
    }
}
