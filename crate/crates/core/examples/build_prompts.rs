// Render SFT and ICL prompts for one Hindi pair, with and without masquerading.

use std::error::Error;

use xltransfer::align::Alignment;
use xltransfer::codec::{parse_annotated, LabelSet, ParseMode, TaskKind};
use xltransfer::corpus::{Example, ParallelExample};
use xltransfer::prompting::{prepare, PromptBuilder, Variant, VariantTags};
use xltransfer::translit::{Script, ScriptTable};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let labels = LabelSet::massive();
    let parse = |s: &str| parse_annotated(s, &labels, ParseMode::Strict).map(|p| p.sentence);
    let pair = |id: &str, src: &str, tgt: &str| -> Result<ParallelExample, Box<dyn Error>> {
        Ok(ParallelExample {
            id: id.into(),
            source: Example::from_gold(id, "en-US", parse(src)?),
            target: Example::from_gold(id, "hi-IN", parse(tgt)?),
        })
    };
    let query = pair(
        "q",
        "will it be [weather_descriptor : sun] on [date : sunday]",
        "क्या [date : रविवार] को [weather_descriptor : सूरज] निकलेगा",
    )?;
    let demo = pair("d", "wake me up at [time : five am]", "मुझे [time : सुबह पाँच] बजे उठाना")?;
    let builder = PromptBuilder::new(TaskKind::SlotFilling, "Hindi", "English");

    let hh = VariantTags::new().with(Variant::Handholding);
    let sft = builder.sft_record(&prepare(&query, &hh, None, None)?)?;
    let mut out = format!("--- SFT handholding\n{}\n", sft.prompt_text);

    let icl = builder.icl_prompt(&prepare(&query, &hh, None, None)?, &[prepare(&demo, &hh, None, None)?])?;
    out.push_str(&format!("--- ICL, one demonstration\n{}\n", icl.prompt_text));

    // Reordered + transliterated target, links from "will it be sun on sunday".
    let links = Alignment::new(6, 5, [(0, 0), (5, 1), (4, 2), (3, 3), (2, 4)])?;
    let tags = hh.clone().with(Variant::Reordered).with(Variant::Transliterated);
    let table = ScriptTable::bundled(Script::Devanagari);
    let masked = prepare(&query, &tags, Some(&links), Some(table))?;
    out.push_str(&format!("--- masquerade target line: {}\n", masked.target_view.join(" ")));
    out.push_str(&format!("expected completion: {}\n", builder.sft_record(&masked)?.expected_completion.unwrap_or_default()));
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
