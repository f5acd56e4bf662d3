//! Layered run configuration: defaults < config file < `CMF_*` environment
//! < command-line flags.
//!
//! The config file is flat `key = value` lines; `#` starts a comment when it
//! begins a line or follows whitespace. Keys are shared by all subcommands, so
//! one file can drive a whole pipeline; a key that no subcommand knows is an
//! error.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const ENV_PREFIX: &str = "CMF_";

pub const KNOWN_KEYS: &[&str] = &[
    "bleu_order",
    "case_sensitive",
    "dim",
    "emoticons",
    "epochs",
    "hashtags",
    "hyp",
    "initial_lr",
    "input",
    "jsonl",
    "k",
    "log_level",
    "max_order",
    "min_count",
    "min_similarity",
    "n",
    "negatives",
    "num_substitutions",
    "output",
    "output_source",
    "output_target",
    "per_sentence",
    "preset",
    "query",
    "ref",
    "scheme",
    "script_mode",
    "seed",
    "smoothing",
    "source",
    "subsample_t",
    "table",
    "target",
    "tau",
    "top_m",
    "train_output",
    "valid_output",
    "valid_size",
    "vocab",
    "window",
    "workers",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    File,
    Env,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Default => "default",
            Origin::File => "file",
            Origin::Env => "env",
            Origin::Flag => "flag",
        })
    }
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn check_known(key: &str, place: impl FnOnce() -> String) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        bail!("unknown config key {key:?} ({})", place())
    }
}

fn strip_comment(line: &str) -> &str {
    let mut prev_space = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_space {
            return &line[..i];
        }
        prev_space = c.is_whitespace();
    }
    line
}

/// Parses config file text into key → (value, line).
pub fn parse_file(text: &str, path: &Path) -> Result<BTreeMap<String, (String, usize)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{lineno}: expected `key = value`", path.display()))?;
        let key = normalize(key);
        check_known(&key, || format!("{}:{lineno}", path.display()))?;
        if out.insert(key.clone(), (value.trim().to_string(), lineno)).is_some() {
            bail!("{}:{lineno}: key {key:?} set twice", path.display());
        }
    }
    Ok(out)
}

/// The file and environment layers.
#[derive(Debug, Default)]
pub struct Layers {
    file: BTreeMap<String, (String, usize)>,
    file_path: Option<PathBuf>,
    env: BTreeMap<String, String>,
}

impl Layers {
    pub fn load(config: Option<&Path>) -> Result<Self> {
        Self::from_parts(config, std::env::vars())
    }

    pub fn from_parts(config: Option<&Path>, vars: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut layers = Layers::default();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
            layers.file = parse_file(&text, path)?;
            layers.file_path = Some(path.to_path_buf());
        }
        for (name, value) in vars {
            if let Some(rest) = name.strip_prefix(ENV_PREFIX) {
                let key = normalize(rest);
                check_known(&key, || format!("environment variable {name}"))?;
                layers.env.insert(key, value);
            }
        }
        Ok(layers)
    }
}

/// Resolves typed values across layers and records where each came from.
pub struct Resolver<'a> {
    layers: &'a Layers,
    seen: RefCell<Vec<(&'static str, String, Origin)>>,
}

impl<'a> Resolver<'a> {
    pub fn new(layers: &'a Layers) -> Self {
        Resolver { layers, seen: RefCell::new(Vec::new()) }
    }

    fn raw(&self, key: &'static str, flag: Option<&str>) -> Option<(String, Origin, String)> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key} missing from KNOWN_KEYS");
        let flag_name = format!("--{}", key.replace('_', "-"));
        if let Some(v) = flag {
            return Some((v.to_string(), Origin::Flag, flag_name));
        }
        if let Some(v) = self.layers.env.get(key) {
            return Some((v.clone(), Origin::Env, format!("{ENV_PREFIX}{}", key.to_ascii_uppercase())));
        }
        self.layers.file.get(key).map(|(v, line)| {
            let path = self.layers.file_path.as_deref().unwrap_or(Path::new("config"));
            (v.clone(), Origin::File, format!("{}:{line}", path.display()))
        })
    }

    /// The value of `key`, if any layer sets it.
    pub fn get<T>(&self, key: &'static str, flag: Option<&str>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let Some((value, origin, place)) = self.raw(key, flag) else {
            return Ok(None);
        };
        let parsed = value
            .parse::<T>()
            .map_err(|e| anyhow!("invalid value {value:?} for {key} ({place}): {e}"))?;
        self.seen.borrow_mut().push((key, value, origin));
        Ok(Some(parsed))
    }

    pub fn or<T>(&self, key: &'static str, flag: Option<&str>, default: T) -> Result<T>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        match self.get(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.seen.borrow_mut().push((key, default.to_string(), Origin::Default));
                Ok(default)
            }
        }
    }

    pub fn required<T>(&self, key: &'static str, flag: Option<&str>) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.get(key, flag)?.ok_or_else(|| {
            anyhow!(
                "missing --{} (or `{key}` in the config file, or {ENV_PREFIX}{})",
                key.replace('_', "-"),
                key.to_ascii_uppercase()
            )
        })
    }

    pub fn path(&self, key: &'static str, flag: Option<&str>) -> Result<Option<PathBuf>> {
        self.get(key, flag)
    }

    /// Every value looked up so far, in lookup order.
    pub fn resolved(&self) -> Vec<(&'static str, String, Origin)> {
        self.seen.borrow().clone()
    }
}

/// Parses `true/false/yes/no/1/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flag(pub bool);

impl FromStr for Flag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok(Flag(true)),
            "false" | "no" | "0" | "off" => Ok(Flag(false)),
            _ => Err("expected true or false".into()),
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layers(file: &str, env: &[(&str, &str)]) -> Result<Layers> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, file).unwrap();
        Layers::from_parts(Some(&path), env.iter().map(|(k, v)| (k.to_string(), v.to_string())))
    }

    #[test]
    fn comments_and_spacing() {
        let m = parse_file("# header\n n = 3 # trailing\nscheme=a#b.tsv\n\n", Path::new("c")).unwrap();
        assert_eq!(m["n"].0, "3");
        assert_eq!(m["scheme"].0, "a#b.tsv");
    }

    #[test]
    fn unknown_and_duplicate_keys_fail() {
        assert!(parse_file("colour = red", Path::new("c")).is_err());
        assert!(parse_file("n = 1\nn = 2", Path::new("c")).is_err());
        assert!(parse_file("just words", Path::new("c")).is_err());
        assert!(layers("", &[("CMF_BOGUS", "1")]).is_err());
    }

    #[test]
    fn precedence() {
        let l = layers("n = 1\ndim = 7\nepochs = 2", &[("CMF_DIM", "8"), ("CMF_EPOCHS", "4"), ("OTHER", "x")]).unwrap();
        let r = Resolver::new(&l);
        assert_eq!(r.or::<usize>("n", None, 9).unwrap(), 1);
        assert_eq!(r.or::<usize>("dim", None, 9).unwrap(), 8);
        assert_eq!(r.or::<usize>("epochs", Some("5"), 9).unwrap(), 5);
        assert_eq!(r.or::<usize>("window", None, 9).unwrap(), 9);
        let origins: Vec<Origin> = r.resolved().iter().map(|e| e.2).collect();
        assert_eq!(origins, [Origin::File, Origin::Env, Origin::Flag, Origin::Default]);
    }

    #[test]
    fn bad_values_name_their_source() {
        let l = layers("dim = many", &[]).unwrap();
        let err = Resolver::new(&l).get::<usize>("dim", None).unwrap_err().to_string();
        assert!(err.contains("run.conf:1"), "{err}");
        let err = Resolver::new(&l).required::<usize>("window", None).unwrap_err().to_string();
        assert!(err.contains("--window"), "{err}");
    }
}
