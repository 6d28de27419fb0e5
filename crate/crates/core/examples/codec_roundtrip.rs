// Parse a bracketed MASSIVE utterance, inspect the labels, and render it back.

use std::error::Error;

use xltransfer::codec::{parse_annotated, render_annotated, LabelSet, ParseMode};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let labels = LabelSet::massive();
    let text = "wake me up at [time : five am] [date : tomorrow]";
    let parsed = parse_annotated(text, &labels, ParseMode::Strict)?;
    let mut out = String::new();
    for (tok, label) in parsed.sentence.iter() {
        out.push_str(&format!("{tok}\t{}\n", label.unwrap_or("-")));
    }
    let rendered = render_annotated(&parsed.sentence);
    assert_eq!(rendered, text);
    out.push_str(&format!("round trip: {rendered}\n"));

    // Lenient mode keeps going on labels outside the inventory.
    let loose = parse_annotated("play [genre : jazz] now", &labels, ParseMode::Lenient)?;
    out.push_str(&format!("lenient: {} ({} warning)\n", render_annotated(&loose.sentence), loose.warnings.len()));
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
