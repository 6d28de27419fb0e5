mod common;

use common::oracles::{brute_force_tp, chrf_oracle, cosine_ranking};
use proptest::collection::vec;
use proptest::prelude::*;

use xltransfer::align::{reorder_permutation, reorder_target, train_ibm1, Alignment};
use xltransfer::codec::{parse_annotated, render_annotated, LabelSet, LabeledSentence, ParseMode};
use xltransfer::corpus::{split_dataset, SplitRatio};
use xltransfer::metrics::{chrf_pp, exact_match, micro_f1};
use xltransfer::prompting::{retrieve_exemplars, EmbeddingStore, RetrievalConfig};
use xltransfer::translit::{transliterate, Script};

fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,6}",
        "[0-9]{1,3}",
        "[क-ह]{1,3}",
        "[à-ÿ]{1,4}",
        Just("'s".to_owned()),
        Just("o'clock".to_owned()),
    ]
}

fn sentence(labels: Vec<String>) -> impl Strategy<Value = LabeledSentence> {
    vec((token(), proptest::option::weighted(0.4, proptest::sample::select(labels))), 1..12).prop_map(
        |pairs| {
            let (t, l): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            LabeledSentence::new(t, l).unwrap()
        },
    )
}

/// Pairs of small sentences over a tiny vocabulary so that tokens collide often.
fn small_sentence() -> impl Strategy<Value = LabeledSentence> {
    vec(
        (
            proptest::sample::select(vec!["a", "b", "c"]),
            proptest::option::of(proptest::sample::select(vec!["x", "y"])),
        ),
        0..6,
    )
    .prop_map(|pairs| {
        let (t, l): (Vec<_>, Vec<_>) = pairs
            .into_iter()
            .map(|(t, l)| (t.to_owned(), l.map(str::to_owned)))
            .unzip();
        LabeledSentence::new(t, l).unwrap()
    })
}

fn alignment() -> impl Strategy<Value = Alignment> {
    (1usize..10, 1usize..10).prop_flat_map(|(ns, nt)| {
        vec((0..ns, 0..nt), 0..(ns * nt).min(20))
            .prop_map(move |links| Alignment::new(ns, nt, links).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn codec_round_trip(z in sentence(LabelSet::massive().names().to_vec())) {
        let text = render_annotated(&z);
        let back = parse_annotated(&text, &LabelSet::massive(), ParseMode::Strict).unwrap();
        prop_assert!(back.warnings.is_empty());
        prop_assert_eq!(&back.sentence, &z);
        prop_assert_eq!(render_annotated(&back.sentence), text);
    }

    #[test]
    fn ner_round_trip(z in sentence(LabelSet::naamapadam().names().to_vec())) {
        let back = parse_annotated(&render_annotated(&z), &LabelSet::naamapadam(), ParseMode::Lenient).unwrap();
        prop_assert_eq!(back.sentence, z);
    }

    #[test]
    fn split_partitions_items(n in 0usize..400, seed in any::<u64>()) {
        let items: Vec<usize> = (0..n).collect();
        let split = split_dataset(items.clone(), SplitRatio::default(), seed).unwrap();
        let (tr, va, te) = split.sizes();
        prop_assert_eq!((va, te), (n / 10, n / 10));
        prop_assert_eq!(tr + va + te, n);
        let mut all: Vec<usize> = split.train.iter().chain(&split.validation).chain(&split.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, items.clone());
        prop_assert_eq!(split_dataset(items, SplitRatio::default(), seed).unwrap(), split);
    }

    #[test]
    fn reorder_is_a_permutation(a in alignment()) {
        let mut p = reorder_permutation(&a);
        p.sort_unstable();
        prop_assert_eq!(p, (0..a.n_target()).collect::<Vec<_>>());
    }

    #[test]
    fn reorder_keeps_token_label_multiset(a in alignment(), seed in any::<u64>()) {
        let n = a.n_target();
        let tokens: Vec<String> = (0..n).map(|j| format!("t{}", (j as u64 ^ seed) % 5)).collect();
        let labels: Vec<Option<String>> = (0..n).map(|j| (j % 3 == 0).then(|| "date".to_owned())).collect();
        let z = LabeledSentence::new(tokens.clone(), labels).unwrap();
        let moved = z.permuted(&reorder_permutation(&a));
        let mut before: Vec<_> = z.iter().collect();
        let mut after: Vec<_> = moved.iter().collect();
        before.sort();
        after.sort();
        prop_assert_eq!(before, after);
        let expected = reorder_target(&tokens, &a);
        prop_assert_eq!(moved.tokens(), expected.as_slice());
    }

    #[test]
    fn pharaoh_round_trip(a in alignment()) {
        let line = a.to_pharaoh();
        prop_assert_eq!(Alignment::from_pharaoh(&line, a.n_source(), a.n_target()).unwrap(), a);
    }

    #[test]
    fn chrf_matches_oracle(h in "[a-c ]{0,14}", r in "[a-c ]{0,14}") {
        let got = chrf_pp(&h, &r);
        let want = chrf_oracle(&h, &r);
        prop_assert!((got - want).abs() < 1e-9, "{} vs {}", got, want);
        prop_assert!((0.0..=100.0).contains(&got));
    }

    #[test]
    fn chrf_identity_is_100(s in "[a-zक-ह ]{1,20}") {
        prop_assume!(!s.trim().is_empty());
        prop_assert!((chrf_pp(&s, &s) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn exact_match_is_normalized_equality(a in "[ab \t\n]{0,8}", b in "[ab \t\n]{0,8}") {
        let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
        prop_assert_eq!(exact_match(&a, &b) == 1, norm(&a) == norm(&b));
    }

    #[test]
    fn micro_f1_matches_exhaustive_search(p in small_sentence(), r in small_sentence()) {
        let c = micro_f1(&p, &r);
        prop_assert_eq!(c.tp, brute_force_tp(&p, &r));
        prop_assert_eq!(c.tp + c.fp, p.labeled_count());
        prop_assert_eq!(c.tp + c.fn_, r.labeled_count());
    }

    #[test]
    fn micro_f1_is_symmetric(p in small_sentence(), r in small_sentence()) {
        let (a, b) = (micro_f1(&p, &r), micro_f1(&r, &p));
        prop_assert_eq!(a.tp, b.tp);
        prop_assert_eq!(a.fp, b.fn_);
        prop_assert!((a.f1() - b.f1()).abs() < 1e-12);
    }

    #[test]
    fn retrieval_matches_brute_force(
        vectors in vec(vec(-3i8..=3, 3), 2..30),
        k in 1usize..10,
        q in any::<prop::sample::Index>(),
    ) {
        let mut store = EmbeddingStore::new();
        let ids: Vec<String> = (0..vectors.len()).map(|i| format!("e{i:02}")).collect();
        let as_f64: Vec<Vec<f64>> = vectors.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
        for (id, v) in ids.iter().zip(&as_f64) {
            store.insert(id.clone(), v.clone()).unwrap();
        }
        let qi = q.index(ids.len());
        let got = retrieve_exemplars(&ids[qi], &ids, &store, &RetrievalConfig { k }).unwrap();

        let all = cosine_ranking(qi, &ids, &as_f64);
        prop_assert_eq!(got.len(), k.min(ids.len() - 1));
        prop_assert!(!got.contains(&ids[qi]));
        // Scores must agree position by position; ids may differ only among exact-score ties.
        let score: std::collections::HashMap<&String, f64> = all.iter().map(|(s, id)| (id, *s)).collect();
        for (g, (s, _)) in got.iter().zip(&all) {
            prop_assert!((score[g] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn ibm1_likelihood_never_decreases(
        corpus in vec((vec(0u8..5, 1..5), vec(0u8..5, 1..5)), 1..6),
        use_null in any::<bool>(),
    ) {
        let pairs: Vec<(Vec<String>, Vec<String>)> = corpus
            .iter()
            .map(|(s, t)| (
                s.iter().map(|w| format!("s{w}")).collect(),
                t.iter().map(|w| format!("t{w}")).collect(),
            ))
            .collect();
        let model = train_ibm1(&pairs, 8, use_null).unwrap();
        for w in model.log_likelihoods.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "{:?}", model.log_likelihoods);
        }
        for s in model.table.row_sums() {
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn translit_leaves_latin_alone(s in "[A-Za-z0-9 .,'-]{0,30}", script in proptest::sample::select(Script::ALL.to_vec())) {
        prop_assert_eq!(transliterate(&s, script), s);
    }

    #[test]
    fn translit_keeps_token_count(words in vec("[क-ह][ािीुूेैोौ्]?[क-ह]?", 1..8)) {
        let text = words.join(" ");
        let out = transliterate(&text, Script::Devanagari);
        prop_assert_eq!(out.split(' ').count(), words.len());
        prop_assert!(out.chars().all(|c| !('\u{0900}'..='\u{097F}').contains(&c)), "{}", out);
    }
}

#[test]
fn split_is_seed_dependent() {
    let items: Vec<u32> = (0..100).collect();
    let a = split_dataset(items.clone(), SplitRatio::default(), 1).unwrap();
    let b = split_dataset(items, SplitRatio::default(), 2).unwrap();
    assert_ne!(a.train, b.train);
}

#[test]
fn micro_f1_worked_example() {
    let z = |s: &[(&str, Option<&str>)]| LabeledSentence::from_pairs(s.iter().copied()).unwrap();
    let pred = z(&[("a", Some("x")), ("b", Some("y")), ("c", None)]);
    let gold = z(&[("a", Some("x")), ("b", None), ("c", Some("y")), ("d", Some("x"))]);
    let c = micro_f1(&pred, &gold);
    assert_eq!((c.tp, c.fp, c.fn_), (1, 1, 2));
    assert!((c.f1() - 0.4).abs() < 1e-12);
}
