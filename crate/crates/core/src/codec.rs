//! Bracketed annotation format: `will it be [weather_descriptor : sun] on [date : sunday]`.
//!
//! The in-memory form is a [`LabeledSentence`]: whitespace tokens with one
//! optional label per token. The surface form groups consecutive tokens that
//! share a label into `[label : tok tok]`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separator between the label name and the tokens of a group.
pub const GROUP_SEPARATOR: &str = " : ";

const MASSIVE_SLOTS: &str = include_str!("../labels/massive_slots.txt");
const NAAMAPADAM_NER: &str = include_str!("../labels/naamapadam_ner.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("annotated text is empty")]
    EmptyText,
    #[error("unbalanced brackets at byte {0}")]
    UnbalancedBrackets(usize),
    #[error("bracket group `{0}` has no ` : ` separator")]
    MissingSeparator(String),
    #[error("bracket group for label `{0}` contains no tokens")]
    EmptyGroup(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("{tokens} tokens but {labels} labels")]
    LengthMismatch { tokens: usize, labels: usize },
    #[error("invalid token `{0}`")]
    InvalidToken(String),
    #[error("invalid label name `{0}`")]
    InvalidLabelName(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("reading label table: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "slot_filling")]
    SlotFilling,
    #[serde(rename = "ner")]
    Ner,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::SlotFilling => "slot_filling",
            TaskKind::Ner => "ner",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered, duplicate-free set of label names for one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    kind: TaskKind,
    names: Vec<String>,
    lookup: HashSet<String>,
}

impl LabelSet {
    pub fn new<I, S>(kind: TaskKind, names: I) -> Result<Self, CodecError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        let mut lookup = HashSet::new();
        for name in names {
            let name = name.into();
            if !is_valid_label_name(&name) {
                return Err(CodecError::InvalidLabelName(name));
            }
            if !lookup.insert(name.clone()) {
                return Err(CodecError::DuplicateLabel(name));
            }
            out.push(name);
        }
        if out.is_empty() {
            return Err(CodecError::EmptyLabelSet);
        }
        Ok(Self {
            kind,
            names: out,
            lookup,
        })
    }

    /// Parses a table with one label name per line. Blank lines are ignored.
    pub fn parse_table(kind: TaskKind, table: &str) -> Result<Self, CodecError> {
        Self::new(
            kind,
            table.lines().map(str::trim).filter(|l| !l.is_empty()),
        )
    }

    pub fn from_file(kind: TaskKind, path: impl AsRef<Path>) -> Result<Self, CodecError> {
        let table =
            std::fs::read_to_string(path).map_err(|e| CodecError::Io(e.to_string()))?;
        Self::parse_table(kind, &table)
    }

    /// The 55 MASSIVE slot types.
    pub fn massive() -> Self {
        Self::parse_table(TaskKind::SlotFilling, MASSIVE_SLOTS).expect("bundled slot table")
    }

    /// PER, ORG, LOC.
    pub fn naamapadam() -> Self {
        Self::parse_table(TaskKind::Ner, NAAMAPADAM_NER).expect("bundled NER table")
    }

    pub fn bundled(kind: TaskKind) -> Self {
        match kind {
            TaskKind::SlotFilling => Self::massive(),
            TaskKind::Ner => Self::naamapadam(),
        }
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup.contains(name)
    }

    /// Checks that every label carried by `z` belongs to this set.
    pub fn validate(&self, z: &LabeledSentence) -> Result<(), CodecError> {
        match z.labels.iter().flatten().find(|l| !self.contains(l)) {
            Some(l) => Err(CodecError::UnknownLabel(l.clone())),
            None => Ok(()),
        }
    }
}

fn is_valid_label_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(|c: char| c.is_whitespace() || matches!(c, '[' | ']' | ':'))
}

fn is_valid_token(tok: &str) -> bool {
    !tok.is_empty() && !tok.contains(|c: char| c.is_whitespace() || c == '[' || c == ']')
}

/// Token sequence with one optional label per token (`None` is the absent label).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LabeledSentence {
    tokens: Vec<String>,
    labels: Vec<Option<String>>,
}

impl LabeledSentence {
    pub fn new(tokens: Vec<String>, labels: Vec<Option<String>>) -> Result<Self, CodecError> {
        if tokens.len() != labels.len() {
            return Err(CodecError::LengthMismatch {
                tokens: tokens.len(),
                labels: labels.len(),
            });
        }
        if let Some(bad) = tokens.iter().find(|t| !is_valid_token(t)) {
            return Err(CodecError::InvalidToken(bad.clone()));
        }
        if let Some(bad) = labels.iter().flatten().find(|l| !is_valid_label_name(l)) {
            return Err(CodecError::InvalidLabelName(bad.clone()));
        }
        Ok(Self { tokens, labels })
    }

    pub fn unlabeled(tokens: Vec<String>) -> Result<Self, CodecError> {
        let n = tokens.len();
        Self::new(tokens, vec![None; n])
    }

    /// Whitespace-tokenizes `text` with every label absent.
    pub fn from_plain(text: &str) -> Result<Self, CodecError> {
        Self::unlabeled(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, CodecError>
    where
        I: IntoIterator<Item = (&'a str, Option<&'a str>)>,
    {
        let (tokens, labels) = pairs
            .into_iter()
            .map(|(t, l)| (t.to_owned(), l.map(str::to_owned)))
            .unzip();
        Self::new(tokens, labels)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.tokens
            .iter()
            .zip(&self.labels)
            .map(|(t, l)| (t.as_str(), l.as_deref()))
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.iter().any(Option::is_some)
    }

    /// Tokens that carry a label, in sentence order.
    pub fn labeled_tokens(&self) -> Vec<&str> {
        self.iter()
            .filter(|(_, l)| l.is_some())
            .map(|(t, _)| t)
            .collect()
    }

    pub fn plain_text(&self) -> String {
        self.tokens.join(" ")
    }

    /// Rewrites every token while keeping its label.
    pub fn map_tokens<F>(&self, mut f: F) -> Result<Self, CodecError>
    where
        F: FnMut(&str) -> String,
    {
        Self::new(
            self.tokens.iter().map(|t| f(t)).collect(),
            self.labels.clone(),
        )
    }

    /// Reorders tokens (with their labels) so that position `i` holds old position `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            tokens: order.iter().map(|&i| self.tokens[i].clone()).collect(),
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ParseMode {
    Strict,
    /// Unknown labels become absent, malformed groups degrade instead of failing.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub sentence: LabeledSentence,
    pub warnings: Vec<String>,
}

pub fn parse_annotated(
    text: &str,
    labels: &LabelSet,
    mode: ParseMode,
) -> Result<Parsed, CodecError> {
    if text.trim().is_empty() {
        return Err(CodecError::EmptyText);
    }
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let mut warnings = Vec::new();

    let push_plain = |tokens: &mut Vec<String>, tags: &mut Vec<Option<String>>, s: &str| {
        for t in s.split_whitespace() {
            tokens.push(t.to_owned());
            tags.push(None);
        }
    };

    let mut offset = 0;
    let mut rest = text;
    while let Some(open) = rest.find(['[', ']']) {
        if rest.as_bytes()[open] == b']' {
            return Err(CodecError::UnbalancedBrackets(offset + open));
        }
        push_plain(&mut tokens, &mut tags, &rest[..open]);
        let after = &rest[open + 1..];
        let close = match after.find(['[', ']']) {
            Some(j) if after.as_bytes()[j] == b']' => j,
            Some(j) => return Err(CodecError::UnbalancedBrackets(offset + open + 1 + j)),
            None => return Err(CodecError::UnbalancedBrackets(offset + open)),
        };
        let content = &after[..close];

        let split = match content.find(GROUP_SEPARATOR) {
            Some(i) => Some((&content[..i], &content[i + GROUP_SEPARATOR.len()..])),
            None if mode == ParseMode::Lenient => content.split_once(':'),
            None => return Err(CodecError::MissingSeparator(content.to_owned())),
        };
        match split {
            None => {
                warnings.push(format!("group `[{content}]` has no separator; tokens left unlabeled"));
                push_plain(&mut tokens, &mut tags, content);
            }
            Some((label, body)) => {
                let label = label.trim();
                let group: Vec<&str> = body.split_whitespace().collect();
                if group.is_empty() {
                    if mode == ParseMode::Strict {
                        return Err(CodecError::EmptyGroup(label.to_owned()));
                    }
                    warnings.push(format!("empty group for label `{label}` skipped"));
                } else {
                    let tag = if labels.contains(label) {
                        Some(label.to_owned())
                    } else if mode == ParseMode::Strict {
                        return Err(CodecError::UnknownLabel(label.to_owned()));
                    } else {
                        warnings.push(format!("unknown label `{label}` mapped to absent"));
                        None
                    };
                    for t in group {
                        tokens.push(t.to_owned());
                        tags.push(tag.clone());
                    }
                }
            }
        }
        let consumed = open + 1 + close + 1;
        offset += consumed;
        rest = &rest[consumed..];
    }
    push_plain(&mut tokens, &mut tags, rest);

    Ok(Parsed {
        sentence: LabeledSentence {
            tokens,
            labels: tags,
        },
        warnings,
    })
}

/// Renders `z` in bracketed surface form, merging runs of the same label into one group.
pub fn render_annotated(z: &LabeledSentence) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < z.len() {
        if !out.is_empty() {
            out.push(' ');
        }
        match &z.labels[i] {
            None => {
                out.push_str(&z.tokens[i]);
                i += 1;
            }
            Some(label) => {
                let end = (i..z.len())
                    .find(|&j| z.labels[j].as_ref() != Some(label))
                    .unwrap_or(z.len());
                out.push('[');
                out.push_str(label);
                out.push_str(GROUP_SEPARATOR);
                out.push_str(&z.tokens[i..end].join(" "));
                out.push(']');
                i = end;
            }
        }
    }
    out
}

pub fn strip_labels(z: &LabeledSentence) -> LabeledSentence {
    LabeledSentence {
        tokens: z.tokens.clone(),
        labels: vec![None; z.len()],
    }
}
