//! Scoring of generated annotations: token-level micro-F1, exact match,
//! chrF++ and MAUVE.
//!
//! Generated text may insert or drop tokens, so micro-F1 aligns prediction
//! and reference tokens by longest common subsequence before comparing labels.
//! A position-wise comparison would turn one dropped word into a cascade of
//! errors. This is a convention of this crate; other F1 implementations over
//! generated text will not be directly comparable.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::GenerationResult;
use crate::codec::{self, LabeledSentence};
use crate::prompting::EmbeddingStore;

pub const CHAR_ORDER: usize = 6;
pub const WORD_ORDER: usize = 2;
pub const CHRF_BETA: f64 = 2.0;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{points} points cannot fill {clusters} clusters")]
    TooFewPoints { points: usize, clusters: usize },
    #[error("MAUVE needs non-empty prediction and reference sets")]
    EmptyInput,
    #[error("results and references disagree on ids: {0}")]
    IdMismatch(String),
    #[error("no embedding for `{0}`")]
    MissingEmbedding(String),
    #[error("report line {line}: {reason}")]
    UnreadableReport { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct F1Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl F1Counts {
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            // Only reachable when neither side has any label.
            1.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

impl std::ops::Add for F1Counts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for F1Counts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Label confusion counts after LCS token matching.
///
/// The matching maximizes matched tokens first and label agreements second;
/// both criteria are symmetric, so swapping the arguments swaps `fp` and `fn`.
pub fn micro_f1(pred: &LabeledSentence, reference: &LabeledSentence) -> F1Counts {
    let (pt, pl) = (pred.tokens(), pred.labels());
    let (rt, rl) = (reference.tokens(), reference.labels());
    let w = rt.len() + 1;
    let mut dp = vec![(0usize, 0usize); (pt.len() + 1) * w];
    for i in 1..=pt.len() {
        for j in 1..=rt.len() {
            let mut best = dp[(i - 1) * w + j].max(dp[i * w + j - 1]);
            if pt[i - 1] == rt[j - 1] {
                let (m, t) = dp[(i - 1) * w + j - 1];
                let agree = pl[i - 1].is_some() && pl[i - 1] == rl[j - 1];
                best = best.max((m + 1, t + agree as usize));
            }
            dp[i * w + j] = best;
        }
    }
    let tp = dp[pt.len() * w + rt.len()].1;
    F1Counts {
        tp,
        fp: pred.labeled_count() - tp,
        fn_: reference.labeled_count() - tp,
    }
}

fn normalize_ws(s: &str) -> impl Iterator<Item = &str> {
    s.split_whitespace()
}

/// 1 when the strings are equal after trimming and collapsing whitespace runs.
pub fn exact_match(pred: &str, reference: &str) -> u8 {
    normalize_ws(pred).eq(normalize_ws(reference)) as u8
}

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut m = HashMap::new();
    for g in chars.windows(n) {
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

fn word_ngrams<'a>(words: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut m = HashMap::new();
    for g in words.windows(n) {
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

/// (hyp total, ref total, clipped matches)
fn overlap<K: Eq + std::hash::Hash>(h: &HashMap<K, usize>, r: &HashMap<K, usize>) -> (usize, usize, usize) {
    let matched = h
        .iter()
        .map(|(g, &c)| r.get(g).map_or(0, |&rc| c.min(rc)))
        .sum();
    (h.values().sum(), r.values().sum(), matched)
}

fn f_beta(hyp: usize, reference: usize, matched: usize, beta: f64) -> f64 {
    let p = ratio(matched, hyp);
    let r = ratio(matched, reference);
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / denom
    }
}

/// Sentence-level chrF++ in [0, 100].
///
/// Character orders 1..=6 (whitespace removed) and word orders 1..=2
/// (whitespace tokens) each contribute an F-beta score with beta 2; the result
/// is their mean. Orders with no n-grams on either side are left out of the mean.
pub fn chrf_pp(pred: &str, reference: &str) -> f64 {
    let hc: Vec<char> = pred.chars().filter(|c| !c.is_whitespace()).collect();
    let rc: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let hw: Vec<&str> = pred.split_whitespace().collect();
    let rw: Vec<&str> = reference.split_whitespace().collect();
    match (hc.is_empty(), rc.is_empty()) {
        (true, true) => return 100.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let mut stats = Vec::with_capacity(CHAR_ORDER + WORD_ORDER);
    for n in 1..=CHAR_ORDER {
        stats.push(overlap(&char_ngrams(&hc, n), &char_ngrams(&rc, n)));
    }
    for n in 1..=WORD_ORDER {
        stats.push(overlap(&word_ngrams(&hw, n), &word_ngrams(&rw, n)));
    }
    let (sum, orders) = stats
        .into_iter()
        .filter(|&(h, r, _)| h + r > 0)
        .fold((0.0, 0usize), |(s, k), (h, r, m)| (s + f_beta(h, r, m, CHRF_BETA), k + 1));
    100.0 * sum / orders as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MauveConfig {
    /// Defaults to max(2, (|P| + |Q|) / 20).
    pub n_clusters: Option<usize>,
    pub c: f64,
    pub n_lambda: usize,
    pub seed: u64,
    pub max_kmeans_iter: usize,
}

impl Default for MauveConfig {
    fn default() -> Self {
        Self {
            n_clusters: None,
            c: 5.0,
            n_lambda: 25,
            seed: 0,
            max_kmeans_iter: 300,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(i, c)| (i, sq_dist(p, c)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Seeded k-means++ initialization followed by Lloyd iterations. Returns the cluster of each point.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            d2.iter()
                .position(|&d| {
                    target -= d;
                    target < 0.0
                })
                .unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("positive total"))
        } else {
            rng.gen_range(0..points.len())
        };
        centers.push(points[idx].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }

    let dim = points[0].len();
    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == assign {
            break;
        }
        assign = next;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((c, s), &n) in centers.iter_mut().zip(sums).zip(&counts) {
            // An empty cluster keeps its previous center.
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
    }
    assign
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Area under a curve given as points; sorted by x, trapezoid rule.
fn area(mut pts: Vec<(f64, f64)>) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// MAUVE divergence-frontier area between predicted and reference embeddings.
pub fn mauve_score(pred: &[Vec<f64>], reference: &[Vec<f64>], cfg: &MauveConfig) -> Result<f64, MetricsError> {
    if pred.is_empty() || reference.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let dim = pred[0].len();
    if let Some(bad) = pred.iter().chain(reference).find(|v| v.len() != dim) {
        return Err(MetricsError::DimensionMismatch(dim, bad.len()));
    }
    let n = pred.len() + reference.len();
    let k = cfg.n_clusters.unwrap_or((n / 20).max(2));
    if n < k {
        return Err(MetricsError::TooFewPoints { points: n, clusters: k });
    }
    let joint: Vec<Vec<f64>> = pred.iter().chain(reference).cloned().collect();
    let assign = kmeans(&joint, k, cfg.seed, cfg.max_kmeans_iter);
    let histogram = |labels: &[usize]| {
        let mut h = vec![1.0; k];
        for &a in labels {
            h[a] += 1.0;
        }
        let total: f64 = h.iter().sum();
        h.into_iter().map(|x| x / total).collect::<Vec<_>>()
    };
    let p = histogram(&assign[..pred.len()]);
    let q = histogram(&assign[pred.len()..]);

    let mut curve = vec![(0.0, 1.0), (1.0, 0.0)];
    for i in 1..=cfg.n_lambda {
        let lambda = i as f64 / (cfg.n_lambda + 1) as f64;
        let r: Vec<f64> = p.iter().zip(&q).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        curve.push(((-cfg.c * kl(&q, &r)).exp(), (-cfg.c * kl(&p, &r)).exp()));
    }
    Ok(area(curve).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub id: String,
    pub f1_counts: F1Counts,
    pub em: u8,
    pub chrf: f64,
    #[serde(default)]
    pub parse_failure: bool,
}

/// Scores one generation against its reference. Unparsed or failed
/// generations count as empty predictions.
pub fn score_pair(result: &GenerationResult, reference: &LabeledSentence) -> PairScore {
    let ref_text = codec::render_annotated(reference);
    let (pred, pred_text) = match &result.parsed {
        Some(p) if !result.failed => (p.clone(), result.raw_text.as_str()),
        _ => (LabeledSentence::default(), ""),
    };
    PairScore {
        id: result.id.clone(),
        f1_counts: micro_f1(&pred, reference),
        em: exact_match(pred_text, &ref_text),
        chrf: chrf_pp(pred_text, &ref_text),
        parse_failure: result.parsed.is_none() || result.failed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub mauve_sample: usize,
    pub seed: u64,
    pub mauve: MauveConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mauve_sample: 500,
            seed: 0,
            mauve: MauveConfig::default(),
        }
    }
}

/// Embeddings of generated and reference texts, keyed by example id.
#[derive(Debug, Clone)]
pub struct MauveEmbeddings<'a> {
    pub predictions: &'a EmbeddingStore,
    pub references: &'a EmbeddingStore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub micro_f1: f64,
    pub em_rate: f64,
    pub chrf_mean: f64,
    pub mauve: Option<f64>,
    pub n_examples: usize,
    pub n_parse_failures: usize,
    pub counts: F1Counts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(skip)]
    pub pairs: Vec<PairScore>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportLine {
    Pair(PairScore),
    Summary(RunReport),
}

impl RunReport {
    /// One line per example followed by a summary line.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<(), MetricsError> {
        for p in &self.pairs {
            serde_json::to_writer(&mut w, &ReportLine::Pair(p.clone()))?;
            w.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut w, &ReportLine::Summary(self.clone()))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self, MetricsError> {
        let mut pairs = Vec::new();
        let mut summary = None;
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| MetricsError::UnreadableReport { line: idx + 1, reason };
            match serde_json::from_str(&line).map_err(|e| bad(e.to_string()))? {
                ReportLine::Pair(p) => pairs.push(p),
                ReportLine::Summary(s) => summary = Some(s),
            }
        }
        let mut s = summary.ok_or(MetricsError::UnreadableReport {
            line: 0,
            reason: "no summary record".into(),
        })?;
        s.pairs = pairs;
        Ok(s)
    }
}

/// Aggregates per-example scores; `refs` must hold exactly the ids of `results`.
pub fn evaluate_run(
    results: &[GenerationResult],
    refs: &BTreeMap<String, LabeledSentence>,
    embeddings: Option<MauveEmbeddings<'_>>,
    cfg: &EvalConfig,
) -> Result<RunReport, MetricsError> {
    if results.len() != refs.len() {
        return Err(MetricsError::IdMismatch(format!(
            "{} results vs {} references",
            results.len(),
            refs.len()
        )));
    }
    let refs_in_order = results
        .iter()
        .map(|r| {
            refs.get(&r.id)
                .ok_or_else(|| MetricsError::IdMismatch(format!("no reference for `{}`", r.id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pairs: Vec<PairScore> = results
        .par_iter()
        .zip(refs_in_order.par_iter())
        .map(|(res, reference)| score_pair(res, reference))
        .collect();

    let n = pairs.len();
    let counts: F1Counts = pairs.iter().map(|p| p.f1_counts).sum();
    let mean = |f: &dyn Fn(&PairScore) -> f64| {
        if n == 0 {
            0.0
        } else {
            pairs.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let mauve = match embeddings {
        Some(emb) if n > 0 => {
            let mut ids: Vec<&str> = results.iter().map(|r| r.id.as_str()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            ids.shuffle(&mut rng);
            ids.truncate(cfg.mauve_sample.min(n));
            let lookup = |store: &EmbeddingStore, id: &str| {
                store
                    .get(id)
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| MetricsError::MissingEmbedding(id.to_owned()))
            };
            let p = ids.iter().map(|id| lookup(emb.predictions, id)).collect::<Result<Vec<_>, _>>()?;
            let q = ids.iter().map(|id| lookup(emb.references, id)).collect::<Result<Vec<_>, _>>()?;
            Some(mauve_score(&p, &q, &cfg.mauve)?)
        }
        _ => None,
    };
    Ok(RunReport {
        micro_f1: counts.f1(),
        em_rate: mean(&|p| p.em as f64),
        chrf_mean: mean(&|p| p.chrf),
        mauve,
        n_examples: n,
        n_parse_failures: pairs.iter().filter(|p| p.parse_failure).count(),
        counts,
        config_digest: None,
        pairs,
    })
}

/// One line of the consolidated results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: String,
    pub language: String,
    pub configuration: String,
    pub micro_f1: Option<f64>,
    pub em: Option<f64>,
    pub chrf: Option<f64>,
    pub mauve: Option<f64>,
}

impl ReportRow {
    pub fn from_report(task: &str, language: &str, configuration: &str, r: &RunReport) -> Self {
        Self {
            task: task.to_owned(),
            language: language.to_owned(),
            configuration: configuration.to_owned(),
            micro_f1: Some(r.micro_f1),
            em: Some(r.em_rate),
            chrf: Some(r.chrf_mean),
            mauve: r.mauve,
        }
    }
}

const DASH: &str = "—";

/// Fixed decimals with trailing zeros trimmed, keeping at least `min_decimals`.
fn fmt_num(x: Option<f64>, decimals: usize, min_decimals: usize) -> String {
    let Some(x) = x else { return DASH.to_owned() };
    let s = format!("{x:.decimals$}");
    let Some(dot) = s.find('.') else { return s };
    let keep = dot + 1 + min_decimals;
    let trimmed = s.trim_end_matches('0');
    let end = trimmed.len().max(keep);
    let out = &s[..end];
    out.strip_suffix('.').unwrap_or(out).to_owned()
}

/// Plain-text table with F1, EM, chrF++ and MAUVE columns, rows sorted by (task, language, configuration).
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| {
        (&a.task, &a.language, &a.configuration).cmp(&(&b.task, &b.language, &b.configuration))
    });
    let header = ["Task", "Language", "Configuration", "F1", "EM", "chrF++", "MAUVE"].map(String::from);
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.task.clone(),
                r.language.clone(),
                r.configuration.clone(),
                fmt_num(r.micro_f1, 4, 1),
                fmt_num(r.em, 4, 1),
                fmt_num(r.chrf, 2, 0),
                fmt_num(r.mauve, 4, 1),
            ]
        })
        .collect();
    let mut widths = header.clone().map(|h| h.chars().count());
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String; 7]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i < 3 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "| {} |", parts.join(" | "));
    };
    line(&header);
    let rule: [String; 7] = widths.map(|w| "-".repeat(w));
    line(&rule);
    for row in &body {
        line(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(pairs: &[(&str, Option<&str>)]) -> LabeledSentence {
        LabeledSentence::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn f1_fixtures() {
        let reference = sent(&[("a", Some("date")), ("b", Some("time")), ("c", None)]);
        let c = micro_f1(&reference, &reference);
        assert_eq!((c.tp, c.fp, c.fn_), (2, 0, 0));
        assert_eq!(c.f1(), 1.0);

        // One correct, one wrong label, one spurious label.
        let pred = sent(&[("a", Some("date")), ("b", Some("place_name")), ("c", Some("time"))]);
        let c = micro_f1(&pred, &reference);
        assert_eq!((c.tp, c.fp, c.fn_), (1, 2, 1));
        assert!((c.precision() - 1.0 / 3.0).abs() < 1e-12);
        assert!((c.recall() - 0.5).abs() < 1e-12);
        assert!((c.f1() - 0.4).abs() < 1e-12);

        let c = micro_f1(&LabeledSentence::default(), &reference);
        assert_eq!((c.tp, c.fp, c.fn_), (0, 0, 2));
        assert_eq!(c.f1(), 0.0);
    }

    #[test]
    fn f1_survives_insertions() {
        let reference = sent(&[("wake", None), ("me", None), ("at", None), ("five", Some("time"))]);
        let pred = sent(&[("please", None), ("wake", None), ("me", None), ("at", None), ("five", Some("time"))]);
        let c = micro_f1(&pred, &reference);
        assert_eq!((c.tp, c.fp, c.fn_), (1, 0, 0));
    }

    #[test]
    fn exact_match_normalizes_whitespace() {
        assert_eq!(exact_match("a  b ", "a b"), 1);
        assert_eq!(exact_match("a b", "a c"), 0);
        assert_eq!(exact_match("", "  "), 1);
    }

    #[test]
    fn chrf_edges() {
        assert_eq!(chrf_pp("cat sat", "cat sat"), 100.0);
        assert_eq!(chrf_pp("", "abc"), 0.0);
        assert_eq!(chrf_pp("abc", ""), 0.0);
        assert_eq!(chrf_pp("", ""), 100.0);
        let s = chrf_pp("cat sat", "cat mat");
        assert!(s > 0.0 && s < 100.0);
    }

    #[test]
    fn chrf_hand_value() {
        // "ab" vs "ac": char unigrams give F = 0.5, the char bigram and the
        // word unigram give 0, the remaining orders are empty and skipped.
        let s = chrf_pp("ab", "ac");
        assert!((s - 100.0 * 0.5 / 3.0).abs() < 1e-9, "{s}");
    }

    fn grid(center: f64, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| vec![center + (i % 10) as f64 * 0.01, center - (i / 10) as f64 * 0.01])
            .collect()
    }

    #[test]
    fn mauve_identical_and_separated() {
        let a = grid(0.0, 100);
        let s = mauve_score(&a, &a, &MauveConfig::default()).unwrap();
        assert!((s - 1.0).abs() < 1e-6);
        let b = grid(100.0, 100);
        let s = mauve_score(&a, &b, &MauveConfig::default()).unwrap();
        assert!(s < 0.1, "{s}");
    }

    #[test]
    fn mauve_errors() {
        let a = grid(0.0, 3);
        let cfg = MauveConfig {
            n_clusters: Some(10),
            ..MauveConfig::default()
        };
        assert!(matches!(mauve_score(&a, &a, &cfg), Err(MetricsError::TooFewPoints { .. })));
        assert!(matches!(
            mauve_score(&a, &[vec![1.0]], &MauveConfig::default()),
            Err(MetricsError::DimensionMismatch(2, 1))
        ));
    }

    #[test]
    fn kmeans_separates_blobs() {
        let mut pts = grid(0.0, 20);
        pts.extend(grid(50.0, 20));
        let a = kmeans(&pts, 2, 7, 100);
        assert!(a[..20].iter().all(|&x| x == a[0]));
        assert!(a[20..].iter().all(|&x| x == a[20]));
        assert_ne!(a[0], a[20]);
    }

    #[test]
    fn table_sorting_and_dashes() {
        let row = |lang: &str, mauve| ReportRow {
            task: "slot_filling".into(),
            language: lang.into(),
            configuration: "handholding".into(),
            micro_f1: Some(1.0),
            em: Some(1.0),
            chrf: Some(100.0),
            mauve,
        };
        let t = render_table(&[row("ta", None), row("bn", Some(0.9123))]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[2].contains("bn") && lines[2].contains("0.9123"));
        assert!(lines[3].contains("ta") && lines[3].contains(DASH));
        let cells: Vec<&str> = lines[3].split('|').map(str::trim).filter(|c| !c.is_empty()).collect();
        assert_eq!(cells[3..], ["1.0", "1.0", "100", DASH]);
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(Some(1.0), 4, 1), "1.0");
        assert_eq!(fmt_num(Some(0.4), 4, 1), "0.4");
        assert_eq!(fmt_num(Some(100.0), 2, 0), "100");
        assert_eq!(fmt_num(Some(54.72), 2, 0), "54.72");
        assert_eq!(fmt_num(None, 2, 0), DASH);
    }
}
