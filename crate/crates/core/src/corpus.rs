//! Dataset ingestion: MASSIVE-style JSONL, CoNLL NER files, parallel pairing,
//! seeded splitting and test-set filtering.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, CodecError, LabelSet, LabeledSentence, ParseMode};
use crate::diagnostics::Diagnostic;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: annotated tokens {annotated:?} do not match utterance tokens {plain:?}")]
    TokenMismatch {
        line: usize,
        plain: Vec<String>,
        annotated: Vec<String>,
    },
    #[error("line {line}: malformed CoNLL line `{content}`")]
    MalformedLine { line: usize, content: String },
    #[error("example `{0}` has no gold labels")]
    MissingGold(String),
    #[error("split ratio parts must be positive")]
    InvalidRatio,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Upstream dataset partition, when the source file carries one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    #[serde(alias = "dev", alias = "valid")]
    Validation,
    Test,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Validation => "validation",
            Partition::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub locale: String,
    pub plain: LabeledSentence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<LabeledSentence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
}

impl Example {
    /// Builds an example from gold labels; the plain side is derived by stripping them.
    pub fn from_gold(id: impl Into<String>, locale: impl Into<String>, gold: LabeledSentence) -> Self {
        Self {
            id: id.into(),
            locale: locale.into(),
            plain: codec::strip_labels(&gold),
            gold: Some(gold),
            partition: None,
        }
    }

    pub fn tokens(&self) -> &[String] {
        self.plain.tokens()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelExample {
    pub id: String,
    pub source: Example,
    pub target: Example,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded<T> {
    pub items: Vec<T>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Deserialize)]
struct MassiveRecord {
    id: serde_json::Value,
    locale: String,
    utt: String,
    annot_utt: String,
    #[serde(default)]
    partition: Option<Partition>,
}

/// Reads MASSIVE-style JSONL (`id`, `locale`, `utt`, `annot_utt`, optional `partition`)
/// keeping records whose locale equals `locale`.
pub fn load_massive(
    path: impl AsRef<Path>,
    locale: &str,
    labels: &LabelSet,
) -> Result<Loaded<Example>, CorpusError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut items = Vec::new();
    let mut diagnostics = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MassiveRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRecord {
                line: line_no,
                reason: e.to_string(),
            })?;
        if rec.locale != locale {
            continue;
        }
        let id = match rec.id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(CorpusError::MalformedRecord {
                    line: line_no,
                    reason: format!("id must be a string or number, got {other}"),
                })
            }
        };
        let malformed = |e: CodecError| CorpusError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        };
        let plain = LabeledSentence::from_plain(&rec.utt).map_err(malformed)?;
        let parsed = codec::parse_annotated(&rec.annot_utt, labels, ParseMode::Lenient)
            .map_err(malformed)?;
        if parsed.sentence.tokens() != plain.tokens() {
            return Err(CorpusError::TokenMismatch {
                line: line_no,
                plain: plain.tokens().to_vec(),
                annotated: parsed.sentence.tokens().to_vec(),
            });
        }
        diagnostics.extend(
            parsed
                .warnings
                .into_iter()
                .map(|w| Diagnostic::new("load_massive", Some(&id), format!("line {line_no}: {w}"))),
        );
        items.push(Example {
            id,
            locale: rec.locale,
            plain,
            gold: Some(parsed.sentence),
            partition: rec.partition,
        });
    }
    Ok(Loaded { items, diagnostics })
}

/// Reads a two-column CoNLL file (token, BIO tag). Sentence ids are their 0-based position.
pub fn load_ner(path: impl AsRef<Path>, locale: &str) -> Result<Loaded<Example>, CorpusError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut items = Vec::new();
    let mut diagnostics = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<Option<String>> = Vec::new();

    let flush = |tokens: &mut Vec<String>, tags: &mut Vec<Option<String>>, items: &mut Vec<Example>| {
        if tokens.is_empty() {
            return;
        }
        let gold = LabeledSentence::new(std::mem::take(tokens), std::mem::take(tags))
            .expect("tokens validated per line");
        let id = items.len().to_string();
        items.push(Example::from_gold(id, locale, gold));
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            flush(&mut tokens, &mut tags, &mut items);
            continue;
        }
        let mut cols = trimmed.split_whitespace();
        let (Some(token), Some(tag), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(CorpusError::MalformedLine {
                line: line_no,
                content: line.clone(),
            });
        };
        if token.contains(['[', ']']) {
            return Err(CorpusError::MalformedLine {
                line: line_no,
                content: line.clone(),
            });
        }
        let label = match tag {
            "O" => None,
            _ => {
                let (prefix, name) = match tag.split_once('-') {
                    Some((p @ ("B" | "I"), n)) if matches!(n, "PER" | "ORG" | "LOC") => (p, n),
                    _ => {
                        return Err(CorpusError::MalformedLine {
                            line: line_no,
                            content: line.clone(),
                        })
                    }
                };
                if prefix == "I" {
                    let continues = matches!(tags.last(), Some(Some(prev)) if prev == name);
                    if !continues {
                        diagnostics.push(Diagnostic::new(
                            "load_ner",
                            Some(&items.len().to_string()),
                            format!("line {line_no}: dangling I-{name} treated as B-{name}"),
                        ));
                    }
                }
                Some(name.to_owned())
            }
        };
        tokens.push(token.to_owned());
        tags.push(label);
    }
    flush(&mut tokens, &mut tags, &mut items);
    Ok(Loaded { items, diagnostics })
}

/// Inner join on id, in target order. Unmatched ids on either side are reported.
pub fn pair_parallel(source: &[Example], target: &[Example]) -> Loaded<ParallelExample> {
    let by_id: HashMap<&str, &Example> = source.iter().map(|e| (e.id.as_str(), e)).collect();
    let target_ids: HashSet<&str> = target.iter().map(|e| e.id.as_str()).collect();
    let mut items = Vec::new();
    let mut diagnostics = Vec::new();
    for t in target {
        match by_id.get(t.id.as_str()) {
            Some(s) => items.push(ParallelExample {
                id: t.id.clone(),
                source: (*s).clone(),
                target: t.clone(),
            }),
            None => diagnostics.push(Diagnostic::new(
                "pair_parallel",
                Some(&t.id),
                "target example has no source counterpart",
            )),
        }
    }
    for s in source.iter().filter(|s| !target_ids.contains(s.id.as_str())) {
        diagnostics.push(Diagnostic::new(
            "pair_parallel",
            Some(&s.id),
            "source example has no target counterpart",
        ));
    }
    Loaded { items, diagnostics }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRatio {
    pub train: u32,
    pub validation: u32,
    pub test: u32,
}

impl Default for SplitRatio {
    fn default() -> Self {
        Self {
            train: 8,
            validation: 1,
            test: 1,
        }
    }
}

impl SplitRatio {
    /// Sizes for `n` items: validation and test take the floor of their share, train the rest.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize), CorpusError> {
        if self.train == 0 || self.validation == 0 || self.test == 0 {
            return Err(CorpusError::InvalidRatio);
        }
        let total = (self.train + self.validation + self.test) as usize;
        let validation = n * self.validation as usize / total;
        let test = n * self.test as usize / total;
        Ok((n - validation - test, validation, test))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

impl<T> DatasetSplit<T> {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    pub fn parts(&self) -> [(Partition, &[T]); 3] {
        [
            (Partition::Train, &self.train),
            (Partition::Validation, &self.validation),
            (Partition::Test, &self.test),
        ]
    }
}

/// Seeded shuffle followed by contiguous train/validation/test slicing.
pub fn split_dataset<T>(
    mut items: Vec<T>,
    ratio: SplitRatio,
    seed: u64,
) -> Result<DatasetSplit<T>, CorpusError> {
    let (n_train, n_val, _) = ratio.sizes(items.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    items.shuffle(&mut rng);
    let mut rest = items.split_off(n_train);
    let test = rest.split_off(n_val);
    Ok(DatasetSplit {
        train: items,
        validation: rest,
        test,
        seed,
    })
}

/// Groups items by their upstream partition; items without one are left out.
pub fn upstream_split<T, F>(items: Vec<T>, partition_of: F) -> DatasetSplit<T>
where
    F: Fn(&T) -> Option<Partition>,
{
    let mut split = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed: 0,
    };
    for item in items {
        match partition_of(&item) {
            Some(Partition::Train) => split.train.push(item),
            Some(Partition::Validation) => split.validation.push(item),
            Some(Partition::Test) => split.test.push(item),
            None => {}
        }
    }
    split
}

/// Keeps examples whose gold carries at least one label.
pub fn filter_test_labeled(examples: Vec<Example>) -> Result<Vec<Example>, CorpusError> {
    let mut out = Vec::with_capacity(examples.len());
    for e in examples {
        match &e.gold {
            None => return Err(CorpusError::MissingGold(e.id)),
            Some(g) if g.has_labels() => out.push(e),
            Some(_) => {}
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub id: String,
    pub split: Partition,
    pub seed: u64,
}

/// Writes one JSONL line per example recording its split and the seed.
pub fn write_split_manifest<T, W: Write>(
    split: &DatasetSplit<T>,
    id_of: impl Fn(&T) -> &str,
    mut out: W,
) -> Result<(), CorpusError> {
    for (partition, items) in split.parts() {
        for item in items {
            let rec = SplitAssignment {
                id: id_of(item).to_owned(),
                split: partition,
                seed: split.seed,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}
