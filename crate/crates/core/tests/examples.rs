// Every example under examples/ runs and prints what it claims to.

mod codec_roundtrip {
    #![allow(dead_code)]
    include!("../examples/codec_roundtrip.rs");
}

mod split_corpus {
    #![allow(dead_code)]
    include!("../examples/split_corpus.rs");
}

mod ibm1_alignment {
    #![allow(dead_code)]
    include!("../examples/ibm1_alignment.rs");
}

mod transliterate {
    #![allow(dead_code)]
    include!("../examples/transliterate.rs");
}

mod build_prompts {
    #![allow(dead_code)]
    include!("../examples/build_prompts.rs");
}

mod retrieve_exemplars {
    #![allow(dead_code)]
    include!("../examples/retrieve_exemplars.rs");
}

mod score_generations {
    #![allow(dead_code)]
    include!("../examples/score_generations.rs");
}

mod mock_pipeline {
    #![allow(dead_code)]
    include!("../examples/mock_pipeline.rs");
}

mod http_backend {
    #![allow(dead_code)]
    include!("../examples/http_backend.rs");
}

#[test]
fn example_codec_roundtrip() {
    let out = codec_roundtrip::run_example().unwrap();
    assert!(out.contains("round trip: wake me up at [time : five am] [date : tomorrow]"), "{out}");
}

#[test]
fn example_split_corpus() {
    let out = split_corpus::run_example().unwrap();
    assert!(out.contains("(12800, 1600, 1600)") && out.contains("kept: 1"), "{out}");
}

#[test]
fn example_ibm1_alignment() {
    let out = ibm1_alignment::run_example().unwrap();
    assert!(out.contains("projected: [object : buch] das"), "{out}");
}

#[test]
fn example_transliterate() {
    let out = transliterate::run_example().unwrap();
    assert!(out.contains("sūraja") && out.contains("U+0970"), "{out}");
}

#[test]
fn example_build_prompts() {
    let out = build_prompts::run_example().unwrap();
    assert!(out.contains("masquerade target line: kyā nikalēgā sūraja kō ravivāra"), "{out}");
}

#[test]
fn example_retrieve_exemplars() {
    let out = retrieve_exemplars::run_example().unwrap();
    assert!(out.contains("k = 8"), "{out}");
}

#[test]
fn example_score_generations() {
    let out = score_generations::run_example().unwrap();
    assert!(out.contains("MAUVE same 1.000"), "{out}");
}

#[test]
fn example_mock_pipeline() {
    let out = mock_pipeline::run_example().unwrap();
    assert!(out.contains("50 test pairs") && out.contains("| 1.0 | 1.0 |"), "{out}");
}

#[test]
fn example_http_backend() {
    let out = http_backend::run_example().unwrap();
    assert!(out.contains("3 requests sent") && out.contains("(2 labeled tokens)"), "{out}");
}
