//! Removal of social-media artifacts from parallel text.
//!
//! One cleaning pass removes, in order: URLs, `@mentions`, `#hashtags`,
//! emoji (pictographs with their ZWJ joins, variation selectors, skin-tone
//! modifiers, flags and keycaps) and emoticons from a fixed list; then it
//! collapses whitespace. Removing one artifact can expose another (`😀#tag`
//! becomes `#tag`), so passes repeat until the text stops changing. That makes
//! [`Cleaner::clean`] idempotent.

use std::ops::AddAssign;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::corpus::BitextRecord;
use crate::Exec;

const SHIPPED_EMOTICONS: &str = include_str!("../data/emoticons.txt");

const URL_PATTERN: &str = r"(?i)(?:https?|ftp)://|^[^\p{L}\p{N}]*www\.";

const EMOJI_PATTERN: &str = concat!(
    r"[0-9#*]\x{FE0F}?\x{20E3}",
    r"|[\p{Extended_Pictographic}\p{Emoji_Presentation}\p{Emoji_Modifier}\p{Regional_Indicator}]",
    r"[\x{FE0E}\x{FE0F}\x{20E3}\x{200D}\x{E0020}-\x{E007F}",
    r"\p{Extended_Pictographic}\p{Emoji_Presentation}\p{Emoji_Modifier}\p{Regional_Indicator}]*",
);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HashtagMode {
    /// Drop the whole `#tag` token.
    #[default]
    Remove,
    /// Keep the word and drop only the leading `#`.
    KeepWord,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CleanCounts {
    pub hashtag: u64,
    pub mention: u64,
    pub url: u64,
    pub emoji: u64,
    pub emoticon: u64,
}

impl CleanCounts {
    pub fn total(&self) -> u64 {
        self.hashtag + self.mention + self.url + self.emoji + self.emoticon
    }
}

impl AddAssign for CleanCounts {
    fn add_assign(&mut self, o: Self) {
        self.hashtag += o.hashtag;
        self.mention += o.mention;
        self.url += o.url;
        self.emoji += o.emoji;
        self.emoticon += o.emoticon;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CleaningReport {
    #[serde(flatten)]
    pub removed: CleanCounts,
    pub records_dropped: u64,
}

impl AddAssign for CleaningReport {
    fn add_assign(&mut self, o: Self) {
        self.removed += o.removed;
        self.records_dropped += o.records_dropped;
    }
}

#[derive(Clone, Debug)]
pub struct Cleaner {
    emoticons: Vec<String>,
    hashtags: HashtagMode,
    url: Regex,
    emoji: Regex,
}

impl Default for Cleaner {
    fn default() -> Self {
        Cleaner::with_emoticons(SHIPPED_EMOTICONS.lines())
    }
}

impl Cleaner {
    /// Uses the given emoticon list (one per entry; blank entries ignored).
    pub fn with_emoticons<I, S>(emoticons: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list: Vec<String> = emoticons
            .into_iter()
            .map(|s| s.as_ref().trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        list.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        list.dedup();
        Cleaner {
            emoticons: list,
            hashtags: HashtagMode::Remove,
            url: Regex::new(URL_PATTERN).expect("valid URL pattern"),
            emoji: Regex::new(EMOJI_PATTERN).expect("valid emoji pattern"),
        }
    }

    pub fn hashtag_mode(mut self, mode: HashtagMode) -> Self {
        self.hashtags = mode;
        self
    }

    pub fn emoticons(&self) -> &[String] {
        &self.emoticons
    }

    /// Number of emoticons `token` splits into, if it consists of nothing
    /// else.
    fn emoticon_run(&self, token: &str) -> Option<u64> {
        let n = token.len();
        // best[i] = emoticon count of a full segmentation of token[i..]
        let mut best: Vec<Option<u64>> = vec![None; n + 1];
        best[n] = Some(0);
        for i in (0..n).rev() {
            if !token.is_char_boundary(i) {
                continue;
            }
            best[i] = self
                .emoticons
                .iter()
                .filter(|e| token[i..].starts_with(e.as_str()))
                .filter_map(|e| best[i + e.len()].map(|k| k + 1))
                .min();
        }
        best[0].filter(|&k| k > 0)
    }

    fn pass(&self, text: &str, counts: &mut CleanCounts) -> String {
        let mut kept: Vec<&str> = Vec::new();
        for tok in text.split_whitespace() {
            if self.url.is_match(tok) {
                counts.url += 1;
            } else if tok.starts_with('@') {
                counts.mention += 1;
            } else if tok.starts_with('#') {
                counts.hashtag += 1;
                if self.hashtags == HashtagMode::KeepWord {
                    let word = tok.trim_start_matches('#');
                    if !word.is_empty() {
                        kept.push(word);
                    }
                }
            } else {
                kept.push(tok);
            }
        }
        let joined = kept.join(" ");

        counts.emoji += self.emoji.find_iter(&joined).count() as u64;
        let no_emoji = self.emoji.replace_all(&joined, " ");

        let mut out: Vec<&str> = Vec::new();
        for tok in no_emoji.split_whitespace() {
            match self.emoticon_run(tok) {
                Some(k) => counts.emoticon += k,
                None => out.push(tok),
            }
        }
        out.join(" ")
    }

    pub fn clean(&self, text: &str) -> (String, CleanCounts) {
        let mut counts = CleanCounts::default();
        let mut cur = self.pass(text, &mut counts);
        loop {
            let next = self.pass(&cur, &mut counts);
            if next == cur {
                return (cur, counts);
            }
            cur = next;
        }
    }

    /// Cleans both sides of every record; pairs left with an empty side are
    /// dropped and counted.
    pub fn adapt_corpus(&self, records: &[BitextRecord], exec: &Exec) -> (Vec<BitextRecord>, CleaningReport) {
        let results = exec.map(records, |_, r| {
            let (src, cs) = self.clean(&r.source_raw);
            let (tgt, ct) = self.clean(&r.target_raw);
            let mut report = CleaningReport::default();
            report.removed += cs;
            report.removed += ct;
            let rec = BitextRecord::new(r.id.clone(), &src, &tgt);
            if rec.is_none() {
                report.records_dropped = 1;
            }
            (rec, report)
        });
        let mut report = CleaningReport::default();
        let mut out = Vec::with_capacity(records.len());
        for (rec, partial) in results {
            report += partial;
            out.extend(rec);
        }
        (out, report)
    }
}

fn shared() -> &'static Cleaner {
    static CLEANER: OnceLock<Cleaner> = OnceLock::new();
    CLEANER.get_or_init(Cleaner::default)
}

/// Cleans with the shipped emoticon list and hashtags removed whole.
pub fn clean_text(text: &str) -> (String, CleanCounts) {
    shared().clean(text)
}

pub fn adapt_corpus(records: &[BitextRecord], exec: &Exec) -> (Vec<BitextRecord>, CleaningReport) {
    shared().adapt_corpus(records, exec)
}
