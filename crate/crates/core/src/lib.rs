//! Synthetic code-mixed parallel corpus generation.
//!
//! The pipeline turns monolingual bitext into code-mixed text in four steps:
//!
//! 1. every aligned pair contributes one *shuffled* sentence made of all unique
//!    n-grams (orders `1..=n`) of both sides, in random order ([`ngram`]);
//! 2. a skip-gram model with negative sampling is trained on those shuffled
//!    sentences, which places translation-equivalent n-grams close to each
//!    other ([`embedding`]);
//! 3. the n-grams of a source sentence are ranked by the cosine similarity to
//!    their nearest target-language neighbour, and the top ranked ones are
//!    substituted, all occurrences at a time, until the substitution budget is
//!    spent ([`generator`]);
//! 4. the output is scored with BLEU and code-mixing measures ([`metrics`]).
//!
//! Supporting data preparation lives in [`corpus`] (loading, deduplication,
//! splitting), [`translit`] (Devanagari romanization) and [`cleaner`]
//! (social-media artifact removal).

pub mod cleaner;
pub mod corpus;
pub mod embedding;
mod error;
pub mod exec;
pub mod generator;
pub mod metrics;
pub mod ngram;
pub mod synthetic;
pub mod translit;

pub use error::{Error, Result};
pub use exec::Exec;
