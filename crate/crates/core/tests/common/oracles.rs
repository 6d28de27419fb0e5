//! Independent reference implementations used to check the crate's results.

use xltransfer::codec::LabeledSentence;

/// Exhaustive search over monotone token matchings; best by (matches, agreements).
pub fn brute_force_tp(p: &LabeledSentence, r: &LabeledSentence) -> usize {
    fn go(p: &LabeledSentence, r: &LabeledSentence, i: usize, j: usize) -> (usize, usize) {
        let mut best = (0, 0);
        for a in i..p.len() {
            for b in j..r.len() {
                if p.tokens()[a] == r.tokens()[b] {
                    let (m, t) = go(p, r, a + 1, b + 1);
                    let agree = p.labels()[a].is_some() && p.labels()[a] == r.labels()[b];
                    best = best.max((m + 1, t + agree as usize));
                }
            }
        }
        best
    }
    go(p, r, 0, 0).1
}

/// chrF++ from scratch: sorted n-gram lists and a merge for clipped matches.
pub fn chrf_oracle(hyp: &str, reference: &str) -> f64 {
    fn grams<T: Clone + Ord>(items: &[T], n: usize) -> Vec<Vec<T>> {
        let mut g: Vec<Vec<T>> = if items.len() >= n {
            (0..=items.len() - n).map(|i| items[i..i + n].to_vec()).collect()
        } else {
            Vec::new()
        };
        g.sort();
        g
    }
    fn clipped<T: Ord>(a: &[T], b: &[T]) -> usize {
        let (mut i, mut j, mut m) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    m += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        m
    }
    let hc: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let rc: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if hc.is_empty() && rc.is_empty() {
        return 100.0;
    }
    if hc.is_empty() || rc.is_empty() {
        return 0.0;
    }
    let hw: Vec<String> = hyp.split_whitespace().map(str::to_owned).collect();
    let rw: Vec<String> = reference.split_whitespace().map(str::to_owned).collect();
    let mut scores = Vec::new();
    let mut push = |h: usize, r: usize, m: usize| {
        if h + r == 0 {
            return;
        }
        let p = if h == 0 { 0.0 } else { m as f64 / h as f64 };
        let rec = if r == 0 { 0.0 } else { m as f64 / r as f64 };
        let f = if p + rec == 0.0 { 0.0 } else { 5.0 * p * rec / (4.0 * p + rec) };
        scores.push(f);
    };
    for n in 1..=6 {
        let (a, b) = (grams(&hc, n), grams(&rc, n));
        push(a.len(), b.len(), clipped(&a, &b));
    }
    for n in 1..=2 {
        let (a, b) = (grams(&hw, n), grams(&rw, n));
        push(a.len(), b.len(), clipped(&a, &b));
    }
    100.0 * scores.iter().sum::<f64>() / scores.len() as f64
}

/// Ids ranked by cosine similarity to `query` (descending, ties by id), query excluded.
pub fn cosine_ranking(query: usize, ids: &[String], vectors: &[Vec<f64>]) -> Vec<(f64, String)> {
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let n = (a.iter().map(|x| x * x).sum::<f64>() * b.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if n == 0.0 {
            0.0
        } else {
            dot / n
        }
    };
    let mut all: Vec<(f64, String)> = ids
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != query)
        .map(|(i, id)| (cos(&vectors[query], &vectors[i]), id.clone()))
        .collect();
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    all
}
