// Seeded 8:1:1 split of a corpus, then the labeled-test filter.

use std::error::Error;

use xltransfer::codec::LabeledSentence;
use xltransfer::corpus::{filter_test_labeled, split_dataset, Example, SplitRatio};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let ids: Vec<u32> = (0..16_000).collect();
    let split = split_dataset(ids, SplitRatio::default(), 42)?;
    let mut out = format!("16000 items -> {:?} (train, validation, test)\n", split.sizes());
    out.push_str(&format!("first test ids: {:?}\n", &split.test[..5]));

    let labeled = Example::from_gold(
        "1",
        "hi-IN",
        LabeledSentence::from_pairs([("कल", Some("date")), ("मिलो", None)])?,
    );
    let bare = Example::from_gold("2", "hi-IN", LabeledSentence::from_plain("नमस्ते दोस्त")?);
    let kept = filter_test_labeled(vec![labeled, bare])?;
    out.push_str(&format!("labeled test examples kept: {}\n", kept.len()));
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
