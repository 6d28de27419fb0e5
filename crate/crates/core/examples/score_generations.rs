// Score generated annotations with micro-F1, exact match, chrF++ and MAUVE.

use std::collections::BTreeMap;
use std::error::Error;

use xltransfer::backend::GenerationResult;
use xltransfer::codec::{parse_annotated, LabelSet, ParseMode};
use xltransfer::metrics::{chrf_pp, evaluate_run, exact_match, mauve_score, micro_f1, EvalConfig, MauveConfig};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let labels = LabelSet::massive();
    let gold = parse_annotated("wake me up at [time : five am]", &labels, ParseMode::Strict)?.sentence;
    let pred_text = "wake me up at [time : five] am";
    let pred = parse_annotated(pred_text, &labels, ParseMode::Lenient)?.sentence;
    let c = micro_f1(&pred, &gold);
    let mut out = format!("tp {} fp {} fn {} -> F1 {:.3}\n", c.tp, c.fp, c.fn_, c.f1());
    out.push_str(&format!("EM {}\n", exact_match(pred_text, "wake me up at [time : five am]")));
    out.push_str(&format!("chrF++ {:.2}\n", chrf_pp(pred_text, "wake me up at [time : five am]")));

    let results = vec![
        GenerationResult::from_text("1", pred_text.into(), &labels),
        GenerationResult::from_text("2", "[date : today] is fine".into(), &labels),
    ];
    let mut refs = BTreeMap::new();
    refs.insert("1".to_owned(), gold);
    refs.insert("2".to_owned(), parse_annotated("[date : today] is fine", &labels, ParseMode::Strict)?.sentence);
    let report = evaluate_run(&results, &refs, None, &EvalConfig::default())?;
    out.push_str(&format!(
        "run: micro-F1 {:.3}, EM rate {:.2}, chrF++ mean {:.2}\n",
        report.micro_f1, report.em_rate, report.chrf_mean
    ));

    let a: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 5) as f64]).collect();
    let b: Vec<Vec<f64>> = a.iter().map(|v| vec![v[0] + 50.0, v[1] + 50.0]).collect();
    let cfg = MauveConfig::default();
    out.push_str(&format!("MAUVE same {:.3}, shifted {:.3}\n", mauve_score(&a, &a, &cfg)?, mauve_score(&a, &b, &cfg)?));
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
