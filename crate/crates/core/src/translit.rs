//! ISO 15919 romanization for Devanagari, Bengali and Tamil.
//!
//! Consonants carry an inherent `a` unless a vowel sign or virama follows.
//! Word-final `a` is kept (सूरज → sūraja). Input is NFC-normalized first and
//! ZWJ/ZWNJ are dropped; anything outside the script table passes through.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

const DEVANAGARI_TSV: &str = include_str!("../resources/translit/devanagari.tsv");
const BENGALI_TSV: &str = include_str!("../resources/translit/bengali.tsv");
const TAMIL_TSV: &str = include_str!("../resources/translit/tamil.tsv");

const ZWNJ: char = '\u{200C}';
const ZWJ: char = '\u{200D}';

#[derive(Debug, Error)]
pub enum TranslitError {
    #[error("{script} table line {line}: {reason}")]
    BadRow {
        script: Script,
        line: usize,
        reason: String,
    },
    #[error("{script} table maps `{key}` twice")]
    DuplicateKey { script: Script, key: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Devanagari,
    Bengali,
    Tamil,
}

impl Script {
    pub const ALL: [Script; 3] = [Script::Devanagari, Script::Bengali, Script::Tamil];

    pub fn name(self) -> &'static str {
        match self {
            Script::Devanagari => "devanagari",
            Script::Bengali => "bengali",
            Script::Tamil => "tamil",
        }
    }

    /// Unicode block of the script.
    pub fn contains(self, c: char) -> bool {
        let range = match self {
            Script::Devanagari => 0x0900..=0x097F,
            Script::Bengali => 0x0980..=0x09FF,
            Script::Tamil => 0x0B80..=0x0BFF,
        };
        range.contains(&(c as u32))
    }

    /// Script used by a locale such as `hi-IN`, `bn-BD` or `ta`.
    pub fn for_locale(locale: &str) -> Option<Script> {
        match locale.split(['-', '_']).next()? {
            "hi" | "mr" | "ne" => Some(Script::Devanagari),
            "bn" | "as" => Some(Script::Bengali),
            "ta" => Some(Script::Tamil),
            _ => None,
        }
    }

    fn bundled_tsv(self) -> &'static str {
        match self {
            Script::Devanagari => DEVANAGARI_TSV,
            Script::Bengali => BENGALI_TSV,
            Script::Tamil => TAMIL_TSV,
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Consonant,
    /// A consonant letter with no inherent vowel (Bengali khanda ta).
    DeadConsonant,
    IndependentVowel,
    VowelSign,
    /// Anusvara, visarga, candrabindu, avagraha and similar.
    Sign,
    Virama,
    Nukta,
    Digit,
    Punct,
}

impl Category {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "consonant" => Category::Consonant,
            "dead_consonant" => Category::DeadConsonant,
            "independent_vowel" => Category::IndependentVowel,
            "vowel_sign" => Category::VowelSign,
            "sign" => Category::Sign,
            "virama" => Category::Virama,
            "nukta" => Category::Nukta,
            "digit" => Category::Digit,
            "punct" => Category::Punct,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScriptTable {
    script: Script,
    entries: HashMap<String, (String, Category)>,
    longest_key: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transliteration {
    pub text: String,
    pub warnings: Vec<String>,
}

impl ScriptTable {
    /// Parses rows of `U+XXXX [U+XXXX ...] \t latin \t category`. `#` starts a comment line.
    pub fn parse_tsv(script: Script, tsv: &str) -> Result<Self, TranslitError> {
        let mut entries = HashMap::new();
        let mut longest_key = 0;
        for (idx, line) in tsv.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| TranslitError::BadRow {
                script,
                line: idx + 1,
                reason: reason.to_owned(),
            };
            let cols: Vec<&str> = line.split('\t').collect();
            let [cps, latin, cat] = cols[..] else {
                return Err(bad("expected three tab-separated columns"));
            };
            let key = cps
                .split_whitespace()
                .map(|cp| {
                    cp.strip_prefix("U+")
                        .and_then(|h| u32::from_str_radix(h, 16).ok())
                        .and_then(char::from_u32)
                })
                .collect::<Option<String>>()
                .filter(|k| !k.is_empty())
                .ok_or_else(|| bad("bad codepoint sequence"))?;
            let category = Category::parse(cat).ok_or_else(|| bad("unknown category"))?;
            longest_key = longest_key.max(key.chars().count());
            let latin: String = latin.nfc().collect();
            if entries.insert(key.clone(), (latin, category)).is_some() {
                return Err(TranslitError::DuplicateKey { script, key });
            }
        }
        Ok(Self {
            script,
            entries,
            longest_key,
        })
    }

    pub fn bundled(script: Script) -> &'static ScriptTable {
        static TABLES: OnceLock<[ScriptTable; 3]> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            Script::ALL.map(|s| Self::parse_tsv(s, s.bundled_tsv()).expect("bundled script table"))
        });
        &tables[Script::ALL.iter().position(|&s| s == script).expect("known script")]
    }

    /// Loads `<dir>/<script>.tsv`, e.g. `devanagari.tsv`.
    pub fn load_dir(dir: impl AsRef<Path>, script: Script) -> Result<Self, TranslitError> {
        let path = dir.as_ref().join(format!("{}.tsv", script.name()));
        let tsv = std::fs::read_to_string(&path).map_err(|source| TranslitError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_tsv(script, &tsv)
    }

    pub fn script(&self) -> Script {
        self.script
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<(&str, Category)> {
        self.entries.get(key).map(|(l, c)| (l.as_str(), *c))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, Category)> {
        self.entries.iter().map(|(k, (l, c))| (k.as_str(), l.as_str(), *c))
    }

    pub fn transliterate(&self, text: &str) -> Transliteration {
        let chars: Vec<char> = text.nfc().filter(|&c| c != ZWJ && c != ZWNJ).collect();
        let mut out = String::with_capacity(chars.len() * 2);
        let mut warnings = Vec::new();
        let mut pending_vowel = false;
        let mut key = String::new();
        let mut i = 0;
        while i < chars.len() {
            let found = (1..=self.longest_key.min(chars.len() - i)).rev().find_map(|len| {
                key.clear();
                key.extend(&chars[i..i + len]);
                self.entries.get(&key).map(|e| (len, e))
            });
            let Some((len, (latin, category))) = found else {
                let c = chars[i];
                if pending_vowel {
                    out.push('a');
                    pending_vowel = false;
                }
                if self.script.contains(c) {
                    warnings.push(format!("unmapped {} codepoint U+{:04X}", self.script, c as u32));
                }
                out.push(c);
                i += 1;
                continue;
            };
            match category {
                Category::Consonant => {
                    if pending_vowel {
                        out.push('a');
                    }
                    out.push_str(latin);
                    pending_vowel = true;
                }
                Category::VowelSign => {
                    out.push_str(latin);
                    pending_vowel = false;
                }
                Category::Virama => pending_vowel = false,
                Category::Nukta => {
                    warnings.push(format!("nukta at position {i} does not combine; dropped"));
                }
                Category::DeadConsonant
                | Category::IndependentVowel
                | Category::Sign
                | Category::Digit
                | Category::Punct => {
                    if pending_vowel {
                        out.push('a');
                    }
                    out.push_str(latin);
                    pending_vowel = false;
                }
            }
            i += len;
        }
        if pending_vowel {
            out.push('a');
        }
        Transliteration {
            text: out.nfc().collect(),
            warnings,
        }
    }
}

/// Romanizes `text` with the bundled table for `script`.
pub fn transliterate(text: &str, script: Script) -> String {
    ScriptTable::bundled(script).transliterate(text).text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hindi_examples() {
        assert_eq!(transliterate("सूरज", Script::Devanagari), "sūraja");
        assert_eq!(transliterate("रविवार", Script::Devanagari), "ravivāra");
        assert_eq!(transliterate("क्", Script::Devanagari), "k");
        assert_eq!(transliterate("हिन्दी", Script::Devanagari), "hindī");
        assert_eq!(transliterate("नमस्ते", Script::Devanagari), "namastē");
        assert_eq!(transliterate("संस्कृत", Script::Devanagari), "saṁskr̥ta");
        assert_eq!(transliterate("ज़रूर", Script::Devanagari), "zarūra");
        assert_eq!(transliterate("\u{095B}रूर", Script::Devanagari), "zarūra");
        assert_eq!(transliterate("२०२४।", Script::Devanagari), "2024.");
    }

    #[test]
    fn bengali_and_tamil() {
        assert_eq!(transliterate("বাংলা", Script::Bengali), "bāṁlā");
        assert_eq!(transliterate("উৎসব", Script::Bengali), "utsaba");
        assert_eq!(transliterate("তামিল", Script::Bengali), "tāmila");
        assert_eq!(transliterate("தமிழ்", Script::Tamil), "tamiḻ");
        assert_eq!(transliterate("கொடு", Script::Tamil), "koṭu");
        assert_eq!(transliterate("\u{0B95}\u{0BC6}\u{0BBE}", Script::Tamil), "ko");
        assert_eq!(transliterate("அஃது", Script::Tamil), "aḵtu");
    }

    #[test]
    fn passthrough_and_joiners() {
        assert_eq!(transliterate("hello 123", Script::Devanagari), "hello 123");
        assert_eq!(transliterate("क\u{200D}्ष", Script::Devanagari), "kṣa");
        let t = ScriptTable::bundled(Script::Devanagari).transliterate("क\u{0978}");
        assert_eq!(t.text, "ka\u{0978}");
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn locale_scripts() {
        assert_eq!(Script::for_locale("hi-IN"), Some(Script::Devanagari));
        assert_eq!(Script::for_locale("bn-BD"), Some(Script::Bengali));
        assert_eq!(Script::for_locale("ta"), Some(Script::Tamil));
        assert_eq!(Script::for_locale("en-US"), None);
    }

    #[test]
    fn table_rows_validated() {
        assert!(ScriptTable::parse_tsv(Script::Tamil, "U+0B95\tk\n").is_err());
        assert!(ScriptTable::parse_tsv(Script::Tamil, "X\tk\tconsonant\n").is_err());
        assert!(ScriptTable::parse_tsv(Script::Tamil, "U+0B95\tk\tletter\n").is_err());
        assert!(ScriptTable::parse_tsv(Script::Tamil, "U+0B95\tk\tconsonant\nU+0B95\tg\tconsonant\n").is_err());
    }
}
