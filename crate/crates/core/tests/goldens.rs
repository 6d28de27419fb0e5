mod common;

use xltransfer::codec::{parse_annotated, LabelSet, ParseMode, TaskKind};
use xltransfer::corpus::{Example, ParallelExample};
use xltransfer::prompting::{prepare, PromptBuilder, PreparedPair, Variant, VariantTags};

fn pair(id: &str, source: &str, target: &str, tags: &VariantTags) -> PreparedPair {
    let labels = LabelSet::massive();
    let parse = |s: &str| parse_annotated(s, &labels, ParseMode::Strict).unwrap().sentence;
    let p = ParallelExample {
        id: id.into(),
        source: Example::from_gold(id, "en-US", parse(source)),
        target: Example::from_gold(id, "xx", parse(target)),
    };
    prepare(&p, tags, None, None).unwrap()
}

fn hindi(tags: &VariantTags) -> PreparedPair {
    pair(
        "hi-1",
        "will it be [weather_descriptor : sun] on [date : sunday]",
        "क्या [date : रविवार] को [weather_descriptor : सूरज] निकलेगा",
        tags,
    )
}

#[test]
fn sft_handholding_matches_golden() {
    let tags = VariantTags::new().with(Variant::Handholding);
    let r = PromptBuilder::new(TaskKind::SlotFilling, "Hindi", "English").sft_record(&hindi(&tags)).unwrap();
    assert_eq!(r.prompt_text, common::golden("sft_handholding.txt"));
    assert_eq!(
        r.expected_completion.as_deref(),
        Some("क्या [date : रविवार] को [weather_descriptor : सूरज] निकलेगा")
    );
}

#[test]
fn sft_monolingual_matches_golden() {
    let r = PromptBuilder::new(TaskKind::SlotFilling, "Hindi", "English")
        .sft_record(&hindi(&VariantTags::new()))
        .unwrap();
    assert_eq!(r.prompt_text, common::golden("sft_monolingual.txt"));
}

#[test]
fn icl_handholding_matches_golden() {
    let tags = VariantTags::new().with(Variant::Handholding);
    let demo = pair(
        "ta-1",
        "wake me up at [time : five am]",
        "[time : காலை ஐந்து மணிக்கு] என்னை எழுப்பு",
        &tags,
    );
    let query = pair(
        "ta-2",
        "will it be [weather_descriptor : sunny] on [date : sunday]",
        "[date : ஞாயிற்றுக்கிழமை] [weather_descriptor : வெயில்] இருக்குமா",
        &tags,
    );
    let r = PromptBuilder::new(TaskKind::SlotFilling, "Tamil", "English")
        .icl_prompt(&query, &[demo])
        .unwrap();
    assert_eq!(r.prompt_text, common::golden("icl_handholding.txt"));
    assert!(r.expected_completion.is_none());
}

#[test]
fn ner_prompts_swap_only_the_task_phrase() {
    let tags = VariantTags::new().with(Variant::Handholding);
    let slot = PromptBuilder::new(TaskKind::SlotFilling, "Hindi", "English").sft_record(&hindi(&tags)).unwrap();
    let ner = PromptBuilder::new(TaskKind::Ner, "Hindi", "English").sft_record(&hindi(&tags)).unwrap();
    assert_eq!(ner.prompt_text, slot.prompt_text.replace("slot annotations", "named entity annotations"));
    assert!(!ner.notes.is_empty());
}
