mod common;

use std::sync::atomic::Ordering;

use common::{Behavior, StubServer};
use xltransfer::backend::{
    generate_batch, pseudo_label_batch, BackendError, GenerationConfig, HttpCompletionBackend, LabelerConfig,
    LabelerEndpoint, RequestError,
};
use xltransfer::codec::{LabelSet, LabeledSentence, TaskKind};
use xltransfer::corpus::Example;
use xltransfer::prompting::{PromptRecord, VariantTags};

fn records(n: usize) -> Vec<PromptRecord> {
    (0..n)
        .map(|i| PromptRecord {
            id: format!("r{i:03}"),
            prompt_text: format!("Output:\nreply{i}"),
            expected_completion: None,
            variant_tags: VariantTags::new(),
            notes: Vec::new(),
        })
        .collect()
}

fn config(url: &str, max_in_flight: usize) -> GenerationConfig {
    GenerationConfig {
        endpoint: xltransfer::backend::Endpoint::Http(url.to_owned()),
        max_in_flight,
        retry_backoff_ms: 0,
        timeout_secs: 5.0,
        ..GenerationConfig::for_task(TaskKind::SlotFilling)
    }
}

fn run_ordered(max_in_flight: usize) {
    let server = StubServer::start(Behavior::Echo { max_delay_ms: 30 });
    let cfg = config(&server.url, max_in_flight);
    let backend = HttpCompletionBackend::new(&server.url, &cfg);
    let recs = records(24);
    let out = generate_batch(&recs, &cfg, &backend, &LabelSet::massive()).unwrap();
    assert_eq!(out.attempts, 24);
    for (i, r) in out.results.iter().enumerate() {
        assert_eq!(r.id, recs[i].id);
        assert_eq!(r.raw_text, format!("reply{i}"));
        assert!(!r.failed);
    }
    let peak = server.max_in_flight.load(Ordering::SeqCst);
    assert!(peak <= max_in_flight, "peak {peak} > {max_in_flight}");
}

#[test]
fn results_keep_input_order_sequential() {
    run_ordered(1);
}

#[test]
fn results_keep_input_order_two_in_flight() {
    run_ordered(2);
}

#[test]
fn results_keep_input_order_eight_in_flight() {
    run_ordered(8);
}

#[test]
fn request_carries_decoding_parameters() {
    let server = StubServer::start(Behavior::Echo { max_delay_ms: 0 });
    let cfg = GenerationConfig {
        model: Some("mt0-xxl".into()),
        bearer_token: Some("secret".into()),
        ..config(&server.url, 1)
    };
    let backend = HttpCompletionBackend::new(&server.url, &cfg);
    generate_batch(&records(1), &cfg, &backend, &LabelSet::massive()).unwrap();
    let reqs = server.requests.lock().unwrap();
    let body = &reqs[0];
    assert_eq!(body["prompt"], "Output:\nreply0");
    assert_eq!(body["penalty_alpha"], 0.6);
    assert_eq!(body["top_k"], 4);
    assert_eq!(body["max_new_tokens"], 512);
    assert_eq!(body["model"], "mt0-xxl");
    assert!(body.get("bearer_token").is_none());
}

#[test]
fn ner_requests_allow_longer_outputs() {
    assert_eq!(GenerationConfig::for_task(TaskKind::Ner).max_new_tokens, 768);
}

#[test]
fn server_errors_are_retried() {
    let server = StubServer::start(Behavior::FailFirst { n: 2 });
    let cfg = config(&server.url, 1);
    let backend = HttpCompletionBackend::new(&server.url, &cfg);
    let out = generate_batch(&records(3), &cfg, &backend, &LabelSet::massive()).unwrap();
    assert_eq!(out.attempts, 5);
    assert_eq!(out.results[0].raw_text, "reply0");
}

#[test]
fn persistent_errors_abort_with_partial_results() {
    let server = StubServer::start(Behavior::FailFirst { n: 1000 });
    let cfg = GenerationConfig {
        max_retries: 1,
        ..config(&server.url, 1)
    };
    let backend = HttpCompletionBackend::new(&server.url, &cfg);
    let err = generate_batch(&records(3), &cfg, &backend, &LabelSet::massive()).unwrap_err();
    match err {
        BackendError::Endpoint {
            id,
            attempts,
            source: RequestError::Status(500, _),
            completed,
        } => {
            assert_eq!(id, "r000");
            assert_eq!(attempts, 2);
            assert!(completed.is_empty());
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn timeouts_mark_the_record_failed() {
    let server = StubServer::start(Behavior::SlowOn { ms: 1500 });
    let cfg = GenerationConfig {
        timeout_secs: 0.3,
        max_retries: 1,
        ..config(&server.url, 2)
    };
    let backend = HttpCompletionBackend::new(&server.url, &cfg);
    let mut recs = records(3);
    recs[1].prompt_text = "Output:\nslow".into();
    let out = generate_batch(&recs, &cfg, &backend, &LabelSet::massive()).unwrap();
    assert!(!out.results[0].failed);
    assert!(out.results[1].failed);
    assert!(out.results[1].parsed.is_none());
    assert!(!out.results[2].failed);
    assert_eq!(out.attempts, 4);
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let cfg = config("http://127.0.0.1:9/v1/completions", 1);
    let cfg = GenerationConfig { max_retries: 0, ..cfg };
    let backend = HttpCompletionBackend::new("http://127.0.0.1:9/v1/completions", &cfg);
    let err = generate_batch(&records(2), &cfg, &backend, &LabelSet::massive()).unwrap_err();
    assert!(matches!(err, BackendError::Endpoint { source: RequestError::Transport(_), .. }), "{err:?}");
}

fn example(id: &str, text: &str) -> Example {
    let mut e = Example::from_gold(id, "en-US", LabeledSentence::from_plain(text).unwrap());
    e.gold = None;
    e
}

#[test]
fn classifier_labels_are_normalized_and_mismatches_dropped() {
    let server = StubServer::start(Behavior::Classifier);
    let cfg = LabelerConfig {
        endpoint: LabelerEndpoint::Http(server.url.clone()),
        timeout_secs: 5.0,
        max_retries: 0,
    };
    let input = vec![example("a", "Ravi flew to Delhi"), example("b", "a short one")];
    let out = pseudo_label_batch(&input, &cfg, &LabelSet::naamapadam()).unwrap();
    assert_eq!(out.examples.len(), 1);
    let gold = out.examples[0].gold.as_ref().unwrap();
    let labels: Vec<Option<&str>> = gold.labels().iter().map(Option::as_deref).collect();
    assert_eq!(labels, [Some("PER"), None, None, Some("PER")]);
    assert_eq!(out.diagnostics.len(), 1);
    assert_eq!(out.diagnostics[0].id.as_deref(), Some("b"));
    assert!(out.diagnostics[0].message.starts_with("LengthMismatch"));
    let reqs = server.requests.lock().unwrap();
    assert_eq!(reqs[0]["tokens"], serde_json::json!(["Ravi", "flew", "to", "Delhi"]));
}
