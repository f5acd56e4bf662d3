//! Rule-table transliteration from Devanagari to Roman script.
//!
//! A scheme maps Devanagari codepoint sequences to Roman strings in five
//! classes. Consonants carry an inherent vowel that is written out unless a
//! vowel sign (matra) follows; the virama is a matra with an empty Roman
//! value, which is how it suppresses the inherent vowel. Signs with an empty
//! value are silent and do not touch the pending inherent vowel.
//!
//! Transliteration is word-level. Codepoints outside Devanagari pass through;
//! Devanagari codepoints missing from the scheme also pass through and are
//! counted.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::corpus::BitextRecord;
use crate::{Error, Exec, Result};

const SHIPPED_SCHEME: &str = include_str!("../data/hindi_itrans.tsv");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolClass {
    Consonant,
    Vowel,
    Matra,
    Digit,
    Sign,
}

impl SymbolClass {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "consonant" => SymbolClass::Consonant,
            "vowel" => SymbolClass::Vowel,
            "matra" => SymbolClass::Matra,
            "digit" => SymbolClass::Digit,
            "sign" => SymbolClass::Sign,
            _ => return None,
        })
    }
}

pub fn is_devanagari(c: char) -> bool {
    matches!(c, '\u{0900}'..='\u{097F}' | '\u{A8E0}'..='\u{A8FF}' | '\u{1CD0}'..='\u{1CFF}')
}

#[derive(Clone, Debug)]
pub struct TranslitScheme {
    pub name: String,
    entries: HashMap<String, (SymbolClass, String)>,
    max_key_chars: usize,
    pub inherent_vowel: String,
    /// Drop the inherent vowel of a word-final consonant in words of more
    /// than one syllable ("घर" → "ghar", but "न" → "na").
    pub drop_final_schwa: bool,
}

/// Per-word state of the table walk.
#[derive(Default)]
struct WordState {
    /// A consonant's inherent vowel is not yet written.
    pending: bool,
    syllables: usize,
    /// The last consonant came straight after a virama.
    conjunct: bool,
    after_virama: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transliterated {
    pub text: String,
    pub unmapped: usize,
}

impl TranslitScheme {
    /// The shipped simplified ITRANS-like Hindi scheme. Covers the whole
    /// U+0900..U+097F block.
    pub fn hindi() -> Self {
        Self::parse("hindi-itrans", SHIPPED_SCHEME, Path::new("<shipped scheme>"))
            .expect("shipped scheme is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path
            .file_stem()
            .map_or_else(|| "custom".to_string(), |s| s.to_string_lossy().into_owned());
        Self::parse(&name, &text, path)
    }

    /// Parses `class<TAB>devanagari<TAB>roman` rows. Lines starting with `#`
    /// and blank lines are ignored.
    pub fn parse(name: &str, text: &str, origin: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [class, key, roman] = fields[..] else {
                return Err(Error::format(origin, lineno, "expected 3 tab-separated fields"));
            };
            let class = SymbolClass::parse(class)
                .ok_or_else(|| Error::format(origin, lineno, format!("unknown class {class:?}")))?;
            if key.is_empty() {
                return Err(Error::format(origin, lineno, "empty Devanagari sequence"));
            }
            if roman.chars().any(char::is_whitespace) {
                return Err(Error::format(origin, lineno, "roman value contains whitespace"));
            }
            if entries.insert(key.to_string(), (class, roman.to_string())).is_some() {
                return Err(Error::format(origin, lineno, format!("duplicate entry {key:?}")));
            }
        }
        let max_key_chars = entries.keys().map(|k| k.chars().count()).max().unwrap_or(1);
        Ok(TranslitScheme {
            name: name.to_string(),
            entries,
            max_key_chars,
            inherent_vowel: "a".to_string(),
            drop_final_schwa: true,
        })
    }

    /// True when every codepoint of U+0900..U+097F has a single-codepoint entry.
    pub fn covers_block(&self) -> bool {
        ('\u{0900}'..='\u{097F}').all(|c| self.entries.contains_key(c.encode_utf8(&mut [0; 4]) as &str))
    }

    fn longest_match(&self, chars: &[char]) -> Option<(usize, SymbolClass, &str)> {
        let mut key = String::new();
        let mut best = None;
        for (len, &c) in chars.iter().take(self.max_key_chars).enumerate() {
            key.push(c);
            if let Some((class, roman)) = self.entries.get(&key) {
                best = Some((len + 1, *class, roman.as_str()));
            }
        }
        best
    }

    pub fn transliterate(&self, token: &str) -> Transliterated {
        let chars: Vec<char> = token.chars().collect();
        let mut out = String::with_capacity(token.len());
        let mut unmapped = 0;
        let mut w = WordState::default();

        let end_word = |out: &mut String, w: &mut WordState| {
            let drop = self.drop_final_schwa && w.syllables > 1 && !w.conjunct;
            if w.pending && !drop {
                out.push_str(&self.inherent_vowel);
            }
            *w = WordState::default();
        };

        let mut i = 0;
        while i < chars.len() {
            let Some((len, class, roman)) = self.longest_match(&chars[i..]) else {
                let c = chars[i];
                if is_devanagari(c) {
                    unmapped += 1;
                    if w.pending {
                        out.push_str(&self.inherent_vowel);
                        w.pending = false;
                    }
                } else {
                    end_word(&mut out, &mut w);
                }
                out.push(c);
                i += 1;
                continue;
            };
            i += len;
            match class {
                SymbolClass::Consonant => {
                    if w.pending {
                        out.push_str(&self.inherent_vowel);
                    }
                    out.push_str(roman);
                    w.conjunct = w.after_virama;
                    w.after_virama = false;
                    w.pending = true;
                    w.syllables += 1;
                }
                SymbolClass::Matra => {
                    out.push_str(roman);
                    w.after_virama = w.pending && roman.is_empty();
                    w.pending = false;
                }
                SymbolClass::Vowel => {
                    if w.pending {
                        out.push_str(&self.inherent_vowel);
                    }
                    out.push_str(roman);
                    w.pending = false;
                    w.after_virama = false;
                    w.syllables += 1;
                }
                SymbolClass::Sign if roman.is_empty() => {}
                SymbolClass::Sign if roman.chars().all(char::is_alphabetic) => {
                    if w.pending {
                        out.push_str(&self.inherent_vowel);
                        w.pending = false;
                    }
                    w.after_virama = false;
                    out.push_str(roman);
                }
                SymbolClass::Sign | SymbolClass::Digit => {
                    end_word(&mut out, &mut w);
                    out.push_str(roman);
                }
            }
        }
        end_word(&mut out, &mut w);
        if out.is_empty() && !token.is_empty() {
            // only silent signs: keep the token visible
            out.push('.');
        }
        if unmapped > 0 {
            log::warn!("{unmapped} unmapped Devanagari codepoint(s) in {token:?}");
        }
        Transliterated { text: out, unmapped }
    }
}

/// Result of romanizing a corpus: the records plus the number of unmapped
/// Devanagari codepoints met along the way.
#[derive(Clone, Debug)]
pub struct Romanized {
    pub records: Vec<BitextRecord>,
    pub unmapped: usize,
}

/// Transliterates the target side token by token; the source side is copied
/// unchanged.
pub fn romanize_target(records: &[BitextRecord], scheme: &TranslitScheme, exec: &Exec) -> Romanized {
    let out = exec.map(records, |_, r| {
        let mut unmapped = 0;
        let target_tokens: Vec<String> = r
            .target_tokens
            .iter()
            .map(|t| {
                let tr = scheme.transliterate(t);
                unmapped += tr.unmapped;
                tr.text
            })
            .collect();
        let rec = BitextRecord {
            id: r.id.clone(),
            source_tokens: r.source_tokens.clone(),
            source_raw: r.source_raw.clone(),
            target_raw: target_tokens.join(" "),
            target_tokens,
        };
        (rec, unmapped)
    });
    let unmapped = out.iter().map(|(_, u)| u).sum();
    Romanized {
        records: out.into_iter().map(|(r, _)| r).collect(),
        unmapped,
    }
}
