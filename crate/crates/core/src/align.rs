//! Word alignment with IBM Model 1, alignment-driven reordering of the target
//! sentence, and label projection across links.
//!
//! Probabilities are `p(target word | source word)`; every source word's row
//! sums to one. When NULL is enabled, a reserved source word at position -1
//! absorbs target words with no good source counterpart and its links are
//! dropped at extraction time.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::LabeledSentence;

pub const NULL_WORD: &str = "<NULL>";

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("sentence pair {0} has an empty side")]
    EmptySentence(usize),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("at least one EM iteration is required")]
    NoIterations,
    #[error("link {0}-{1} out of range for a {2}x{3} sentence pair")]
    LinkOutOfRange(usize, usize, usize, usize),
    #[error("line {line}: malformed alignment `{content}`")]
    MalformedPharaoh { line: usize, content: String },
    #[error("line {line}: malformed translation-table row `{content}`")]
    MalformedTable { line: usize, content: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lexical translation probabilities `p(target | source)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    source_vocab: Vec<String>,
    target_vocab: Vec<String>,
    source_index: HashMap<String, u32>,
    target_index: HashMap<String, u32>,
    /// Per source word, `(target id, probability)` sorted by target id.
    rows: Vec<Vec<(u32, f64)>>,
    has_null: bool,
}

impl TranslationTable {
    pub fn has_null(&self) -> bool {
        self.has_null
    }

    /// `p(target | source)`; zero for pairs never seen together.
    pub fn prob(&self, target: &str, source: &str) -> f64 {
        match (self.source_index.get(source), self.target_index.get(target)) {
            (Some(&s), Some(&t)) => self.prob_ids(t, s),
            _ => 0.0,
        }
    }

    fn prob_ids(&self, target: u32, source: u32) -> f64 {
        let row = &self.rows[source as usize];
        match row.binary_search_by_key(&target, |&(t, _)| t) {
            Ok(pos) => row[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn source_words(&self) -> &[String] {
        &self.source_vocab
    }

    pub fn target_words(&self) -> &[String] {
        &self.target_vocab
    }

    /// Sum of each source word's row, in source-vocabulary order.
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, p)| p).sum())
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.rows.iter().enumerate().flat_map(move |(s, row)| {
            row.iter().map(move |&(t, p)| {
                (
                    self.target_vocab[t as usize].as_str(),
                    self.source_vocab[s].as_str(),
                    p,
                )
            })
        })
    }

    /// Writes `target_word \t source_word \t probability` rows.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (t, s, p) in self.entries() {
            writeln!(out, "{t}\t{s}\t{p}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self, AlignError> {
        let mut builder = TableBuilder::default();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let malformed = || AlignError::MalformedTable {
                line: idx + 1,
                content: line.clone(),
            };
            let mut cols = line.split('\t');
            let (Some(t), Some(s), Some(p), None) = (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(malformed());
            };
            let p: f64 = p.parse().map_err(|_| malformed())?;
            if p.is_nan() || p < 0.0 {
                return Err(malformed());
            }
            builder.insert(s, t, p);
        }
        Ok(builder.finish())
    }
}

#[derive(Default)]
struct TableBuilder {
    source_vocab: Vec<String>,
    target_vocab: Vec<String>,
    source_index: HashMap<String, u32>,
    target_index: HashMap<String, u32>,
    rows: Vec<Vec<(u32, f64)>>,
    has_null: bool,
}

impl TableBuilder {
    fn insert(&mut self, source: &str, target: &str, p: f64) {
        let s = intern(&mut self.source_vocab, &mut self.source_index, source);
        let t = intern(&mut self.target_vocab, &mut self.target_index, target);
        if s as usize == self.rows.len() {
            self.rows.push(Vec::new());
        }
        self.has_null |= source == NULL_WORD;
        self.rows[s as usize].push((t, p));
    }

    fn finish(mut self) -> TranslationTable {
        for row in &mut self.rows {
            row.sort_by_key(|&(t, _)| t);
            row.dedup_by_key(|&mut (t, _)| t);
        }
        TranslationTable {
            source_vocab: self.source_vocab,
            target_vocab: self.target_vocab,
            source_index: self.source_index,
            target_index: self.target_index,
            rows: self.rows,
            has_null: self.has_null,
        }
    }
}

fn intern(vocab: &mut Vec<String>, index: &mut HashMap<String, u32>, word: &str) -> u32 {
    if let Some(&i) = index.get(word) {
        return i;
    }
    let i = vocab.len() as u32;
    vocab.push(word.to_owned());
    index.insert(word.to_owned(), i);
    i
}

/// Interned corpus plus the current table; one call to [`Ibm1Trainer::step`] is one EM iteration.
pub struct Ibm1Trainer {
    table: TranslationTable,
    /// Source ids per pair, NULL first when enabled.
    sources: Vec<Vec<u32>>,
    targets: Vec<Vec<u32>>,
    parallel: bool,
}

impl Ibm1Trainer {
    pub fn new(pairs: &[(Vec<String>, Vec<String>)], use_null: bool) -> Result<Self, AlignError> {
        if pairs.is_empty() {
            return Err(AlignError::EmptyCorpus);
        }
        let mut source_vocab = Vec::new();
        let mut target_vocab = Vec::new();
        let mut source_index = HashMap::new();
        let mut target_index = HashMap::new();
        if use_null {
            intern(&mut source_vocab, &mut source_index, NULL_WORD);
        }
        let mut sources = Vec::with_capacity(pairs.len());
        let mut targets = Vec::with_capacity(pairs.len());
        for (n, (src, tgt)) in pairs.iter().enumerate() {
            if src.is_empty() || tgt.is_empty() {
                return Err(AlignError::EmptySentence(n));
            }
            let mut s: Vec<u32> = Vec::with_capacity(src.len() + 1);
            if use_null {
                s.push(0);
            }
            s.extend(src.iter().map(|w| intern(&mut source_vocab, &mut source_index, w)));
            sources.push(s);
            targets.push(
                tgt.iter()
                    .map(|w| intern(&mut target_vocab, &mut target_index, w))
                    .collect::<Vec<_>>(),
            );
        }

        // Uniform over the target words each source word co-occurs with.
        let mut cooc: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); source_vocab.len()];
        for (s, t) in sources.iter().zip(&targets) {
            for &e in s {
                cooc[e as usize].extend(t.iter().copied());
            }
        }
        let rows = cooc
            .into_iter()
            .map(|set| {
                let p = 1.0 / set.len() as f64;
                set.into_iter().map(|t| (t, p)).collect()
            })
            .collect();

        Ok(Self {
            table: TranslationTable {
                source_vocab,
                target_vocab,
                source_index,
                target_index,
                rows,
                has_null: use_null,
            },
            sources,
            targets,
            parallel: false,
        })
    }

    /// Parallelizes the E-step over sentence pairs. Results are bit-identical to the sequential run.
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn table(&self) -> &TranslationTable {
        &self.table
    }

    pub fn into_table(self) -> TranslationTable {
        self.table
    }

    fn pair_log_likelihood(&self, n: usize) -> f64 {
        let src = &self.sources[n];
        let norm = (src.len() as f64).ln();
        self.targets[n]
            .iter()
            .map(|&f| {
                let z: f64 = src.iter().map(|&e| self.table.prob_ids(f, e)).sum();
                z.ln() - norm
            })
            .sum()
    }

    /// `sum over pairs and target positions of ln(mean_i p(f_j | e_i))`.
    pub fn log_likelihood(&self) -> f64 {
        let per_pair: Vec<f64> = if self.parallel {
            (0..self.sources.len())
                .into_par_iter()
                .map(|n| self.pair_log_likelihood(n))
                .collect()
        } else {
            (0..self.sources.len())
                .map(|n| self.pair_log_likelihood(n))
                .collect()
        };
        per_pair.into_iter().sum()
    }

    /// Fractional counts for one pair, in (target position, source position) order.
    fn pair_counts(&self, n: usize) -> Vec<(u32, u32, f64)> {
        let src = &self.sources[n];
        let mut out = Vec::with_capacity(src.len() * self.targets[n].len());
        for &f in &self.targets[n] {
            let z: f64 = src.iter().map(|&e| self.table.prob_ids(f, e)).sum();
            for &e in src {
                out.push((e, f, self.table.prob_ids(f, e) / z));
            }
        }
        out
    }

    pub fn step(&mut self) {
        let mut counts: Vec<Vec<f64>> = self.table.rows.iter().map(|r| vec![0.0; r.len()]).collect();
        let mut add = |(e, f, c): (u32, u32, f64)| {
            let row = &self.table.rows[e as usize];
            let pos = row
                .binary_search_by_key(&f, |&(t, _)| t)
                .expect("co-occurring pair present in table");
            counts[e as usize][pos] += c;
        };
        if self.parallel {
            let per_pair: Vec<Vec<(u32, u32, f64)>> = (0..self.sources.len())
                .into_par_iter()
                .map(|n| self.pair_counts(n))
                .collect();
            per_pair.into_iter().flatten().for_each(&mut add);
        } else {
            for n in 0..self.sources.len() {
                self.pair_counts(n).into_iter().for_each(&mut add);
            }
        }
        for (row, c) in self.table.rows.iter_mut().zip(counts) {
            let total: f64 = c.iter().sum();
            if total > 0.0 {
                for (entry, v) in row.iter_mut().zip(c) {
                    entry.1 = v / total;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ibm1Model {
    pub table: TranslationTable,
    /// Corpus log-likelihood of the initial table and after every iteration.
    pub log_likelihoods: Vec<f64>,
}

pub fn train_ibm1(
    pairs: &[(Vec<String>, Vec<String>)],
    iterations: usize,
    use_null: bool,
) -> Result<Ibm1Model, AlignError> {
    if iterations == 0 {
        return Err(AlignError::NoIterations);
    }
    let mut trainer = Ibm1Trainer::new(pairs, use_null)?.parallel(true);
    let mut log_likelihoods = vec![trainer.log_likelihood()];
    for _ in 0..iterations {
        trainer.step();
        log_likelihoods.push(trainer.log_likelihood());
    }
    Ok(Ibm1Model {
        table: trainer.into_table(),
        log_likelihoods,
    })
}

/// Set of `(source index, target index)` links for one sentence pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alignment {
    links: BTreeSet<(usize, usize)>,
    n_source: usize,
    n_target: usize,
}

impl Alignment {
    pub fn new(
        n_source: usize,
        n_target: usize,
        links: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, AlignError> {
        let links: BTreeSet<_> = links.into_iter().collect();
        if let Some(&(s, t)) = links.iter().find(|&&(s, t)| s >= n_source || t >= n_target) {
            return Err(AlignError::LinkOutOfRange(s, t, n_source, n_target));
        }
        Ok(Self {
            links,
            n_source,
            n_target,
        })
    }

    pub fn empty(n_source: usize, n_target: usize) -> Self {
        Self {
            links: BTreeSet::new(),
            n_source,
            n_target,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            links: (0..n).map(|i| (i, i)).collect(),
            n_source: n,
            n_target: n,
        }
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn n_source(&self) -> usize {
        self.n_source
    }

    pub fn n_target(&self) -> usize {
        self.n_target
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Lowest source index linked to target position `j`.
    pub fn first_source_of(&self, j: usize) -> Option<usize> {
        self.links.iter().filter(|&&(_, t)| t == j).map(|&(s, _)| s).min()
    }

    pub fn intersection(&self, other: &Alignment) -> Alignment {
        Alignment {
            links: self.links.intersection(&other.links).copied().collect(),
            n_source: self.n_source,
            n_target: self.n_target,
        }
    }

    /// Swaps the roles of source and target.
    pub fn transposed(&self) -> Alignment {
        Alignment {
            links: self.links.iter().map(|&(s, t)| (t, s)).collect(),
            n_source: self.n_target,
            n_target: self.n_source,
        }
    }

    /// Pharaoh format: space-separated `src-tgt` pairs, 0-based.
    pub fn to_pharaoh(&self) -> String {
        let mut out = String::new();
        for (n, (s, t)) in self.links.iter().enumerate() {
            if n > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{s}-{t}");
        }
        out
    }

    pub fn from_pharaoh(line: &str, n_source: usize, n_target: usize) -> Result<Self, AlignError> {
        Self::new(n_source, n_target, parse_pharaoh_line(line, 1)?)
    }
}

fn parse_pharaoh_line(line: &str, line_no: usize) -> Result<Vec<(usize, usize)>, AlignError> {
    line.split_whitespace()
        .map(|item| {
            item.split_once('-')
                .and_then(|(s, t)| Some((s.parse().ok()?, t.parse().ok()?)))
                .ok_or_else(|| AlignError::MalformedPharaoh {
                    line: line_no,
                    content: line.to_owned(),
                })
        })
        .collect()
}

/// Reads a Pharaoh file: one line of links per sentence pair.
pub fn read_pharaoh<R: BufRead>(input: R) -> Result<Vec<Vec<(usize, usize)>>, AlignError> {
    input
        .lines()
        .enumerate()
        .map(|(idx, line)| parse_pharaoh_line(&line?, idx + 1))
        .collect()
}

pub fn write_pharaoh<'a, W: Write>(
    alignments: impl IntoIterator<Item = &'a Alignment>,
    mut out: W,
) -> std::io::Result<()> {
    for a in alignments {
        writeln!(out, "{}", a.to_pharaoh())?;
    }
    Ok(())
}

/// Links every target word to its most probable source word (lowest index on ties).
/// Words the table does not cover, or whose best source is NULL, stay unaligned.
pub fn extract_alignment(source: &[String], target: &[String], table: &TranslationTable) -> Alignment {
    let null_id = table
        .has_null
        .then(|| table.source_index.get(NULL_WORD).copied())
        .flatten();
    let source_ids: Vec<Option<u32>> = source
        .iter()
        .map(|w| table.source_index.get(w).copied())
        .collect();
    let mut links = BTreeSet::new();
    for (j, word) in target.iter().enumerate() {
        let Some(&f) = table.target_index.get(word) else {
            continue;
        };
        // NULL sits before position 0, so it wins ties.
        let mut best = null_id.map(|n| (None, table.prob_ids(f, n))).unwrap_or((None, 0.0));
        for (i, e) in source_ids.iter().enumerate() {
            if let Some(e) = *e {
                let p = table.prob_ids(f, e);
                if p > best.1 {
                    best = (Some(i), p);
                }
            }
        }
        if let (Some(i), p) = best {
            if p > 0.0 {
                links.insert((i, j));
            }
        }
    }
    Alignment {
        links,
        n_source: source.len(),
        n_target: target.len(),
    }
}

/// Intersection of the source→target and target→source argmax alignments.
/// `backward` must be trained with the languages swapped.
pub fn extract_symmetric(
    source: &[String],
    target: &[String],
    forward: &TranslationTable,
    backward: &TranslationTable,
) -> Alignment {
    let fwd = extract_alignment(source, target, forward);
    let bwd = extract_alignment(target, source, backward).transposed();
    fwd.intersection(&bwd)
}

/// Forward (and optionally backward) IBM-1 tables for a language pair.
#[derive(Debug, Clone)]
pub struct Ibm1Aligner {
    pub forward: TranslationTable,
    pub backward: Option<TranslationTable>,
}

impl Ibm1Aligner {
    pub fn train(
        pairs: &[(Vec<String>, Vec<String>)],
        iterations: usize,
        use_null: bool,
        symmetrize: bool,
    ) -> Result<Self, AlignError> {
        let forward = train_ibm1(pairs, iterations, use_null)?.table;
        let backward = if symmetrize {
            let swapped: Vec<_> = pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
            Some(train_ibm1(&swapped, iterations, use_null)?.table)
        } else {
            None
        };
        Ok(Self { forward, backward })
    }

    pub fn align(&self, source: &[String], target: &[String]) -> Alignment {
        match &self.backward {
            Some(b) => extract_symmetric(source, target, &self.forward, b),
            None => extract_alignment(source, target, &self.forward),
        }
    }
}

/// Permutation of target positions that follows source word order.
///
/// Aligned tokens are ordered by (lowest linked source index, target index).
/// Each unaligned token travels with the nearest aligned token before it;
/// unaligned tokens before the first aligned one stay at the front.
pub fn reorder_permutation(alignment: &Alignment) -> Vec<usize> {
    let n = alignment.n_target;
    let mut key: Vec<Option<usize>> = vec![None; n];
    for &(s, t) in &alignment.links {
        key[t] = Some(key[t].map_or(s, |k: usize| k.min(s)));
    }
    let mut head = Vec::new();
    let mut blocks: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (j, &k) in key.iter().enumerate() {
        match (k, blocks.last_mut()) {
            (Some(s), _) => blocks.push((s, j, vec![j])),
            (None, Some(block)) => block.2.push(j),
            (None, None) => head.push(j),
        }
    }
    blocks.sort_by_key(|&(s, j, _)| (s, j));
    head.into_iter()
        .chain(blocks.into_iter().flat_map(|(_, _, members)| members))
        .collect()
}

pub fn reorder_target(target: &[String], alignment: &Alignment) -> Vec<String> {
    reorder_permutation(alignment)
        .into_iter()
        .map(|j| target[j].clone())
        .collect()
}

/// Copies each source label onto the target tokens linked to it.
pub fn project_labels(
    source: &LabeledSentence,
    target: &[String],
    alignment: &Alignment,
) -> LabeledSentence {
    let labels = (0..target.len())
        .map(|j| {
            alignment
                .first_source_of(j)
                .and_then(|i| source.labels().get(i).cloned().flatten())
        })
        .collect();
    LabeledSentence::new(target.to_vec(), labels).expect("target tokens already validated")
}
