//! Text generation against an OpenAI-style completion endpoint (or the
//! deterministic projection mock), and pseudo-labelling of source sentences
//! through a token-classifier endpoint.

use std::collections::HashMap;
use std::error::Error as _;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::align::{project_labels, Alignment};
use crate::codec::{self, LabelSet, LabeledSentence, ParseMode, TaskKind};
use crate::corpus::Example;
use crate::diagnostics::Diagnostic;
use crate::prompting::PromptRecord;

/// Endpoint value that selects the projection mock.
pub const MOCK_ENDPOINT: &str = "mock:project";
/// Labeler endpoint value that returns gold labels unchanged.
pub const ORACLE_ENDPOINT: &str = "oracle";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("request for `{id}` failed after {attempts} attempts: {source}")]
    Endpoint {
        id: String,
        attempts: usize,
        source: RequestError,
        /// Results that completed before the batch aborted, in input order.
        completed: Vec<GenerationResult>,
    },
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("oracle labeler needs gold labels on `{0}`")]
    MissingGold(String),
    #[error("mock backend has no entry for `{0}`")]
    UnknownMockId(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RequestError {
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {0}: {1}")]
    Status(u16, String),
    #[error("unexpected response: {0}")]
    BadResponse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Mock,
    Http(String),
}

impl Endpoint {
    pub fn parse(s: &str) -> Self {
        if s == MOCK_ENDPOINT {
            Endpoint::Mock
        } else {
            Endpoint::Http(s.to_owned())
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Mock => f.write_str(MOCK_ENDPOINT),
            Endpoint::Http(url) => f.write_str(url),
        }
    }
}

impl Serialize for Endpoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Endpoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Endpoint::parse(&String::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub endpoint: Endpoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub penalty_alpha: f64,
    pub top_k: u32,
    pub max_new_tokens: u32,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub max_in_flight: usize,
    pub retry_backoff_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bearer_token: Option<String>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self::for_task(TaskKind::SlotFilling)
    }
}

impl GenerationConfig {
    /// Contrastive-search defaults: alpha 0.6, top-k 4, 512 new tokens for slot filling, 768 for NER.
    pub fn for_task(task: TaskKind) -> Self {
        Self {
            endpoint: Endpoint::Mock,
            model: None,
            penalty_alpha: 0.6,
            top_k: 4,
            max_new_tokens: match task {
                TaskKind::SlotFilling => 512,
                TaskKind::Ner => 768,
            },
            timeout_secs: 120.0,
            max_retries: 3,
            max_in_flight: 4,
            retry_backoff_ms: 250,
            bearer_token: None,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(0.0..=1.0).contains(&self.penalty_alpha) {
            return Err(BackendError::InvalidConfig(format!(
                "penalty_alpha {} outside [0, 1]",
                self.penalty_alpha
            )));
        }
        if self.top_k == 0 || self.max_new_tokens == 0 || self.max_in_flight == 0 {
            return Err(BackendError::InvalidConfig(
                "top_k, max_new_tokens and max_in_flight must be positive".into(),
            ));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(BackendError::InvalidConfig("timeout_secs must be positive".into()));
        }
        Ok(())
    }

    pub fn request(&self, prompt: &str) -> CompletionRequest {
        CompletionRequest {
            model: self.model.clone(),
            prompt: prompt.to_owned(),
            max_new_tokens: self.max_new_tokens,
            penalty_alpha: self.penalty_alpha,
            top_k: self.top_k,
        }
    }
}

/// Request body sent to the completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub prompt: String,
    pub max_new_tokens: u32,
    pub penalty_alpha: f64,
    pub top_k: u32,
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Debug, Deserialize)]
struct CompletionChoice {
    text: String,
}

pub trait CompletionBackend: Sync {
    fn complete(&self, id: &str, request: &CompletionRequest) -> Result<String, RequestError>;
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::AgentBuilder::new().timeout(timeout).build()
}

fn classify_ureq_error(e: ureq::Error) -> RequestError {
    match e {
        ureq::Error::Status(code, resp) => {
            RequestError::Status(code, resp.into_string().unwrap_or_default())
        }
        ureq::Error::Transport(t) => {
            let timed_out = t
                .source()
                .and_then(|s| s.downcast_ref::<std::io::Error>())
                .is_some_and(|io| {
                    matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock)
                });
            if timed_out {
                RequestError::Timeout
            } else {
                RequestError::Transport(t.to_string())
            }
        }
    }
}

fn post_json<T: serde::de::DeserializeOwned>(
    agent: &ureq::Agent,
    url: &str,
    bearer: Option<&str>,
    body: &impl Serialize,
) -> Result<T, RequestError> {
    let mut req = agent.post(url).set("Content-Type", "application/json");
    if let Some(token) = bearer {
        req = req.set("Authorization", &format!("Bearer {token}"));
    }
    let body = serde_json::to_string(body).map_err(|e| RequestError::BadResponse(e.to_string()))?;
    let resp = req.send_string(&body).map_err(classify_ureq_error)?;
    let text = resp.into_string().map_err(|e| {
        if matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
            RequestError::Timeout
        } else {
            RequestError::Transport(e.to_string())
        }
    })?;
    serde_json::from_str(&text).map_err(|e| RequestError::BadResponse(e.to_string()))
}

/// Blocking HTTP client for an OpenAI-style `/completions` endpoint.
pub struct HttpCompletionBackend {
    agent: ureq::Agent,
    url: String,
    bearer: Option<String>,
}

impl HttpCompletionBackend {
    pub fn new(url: impl Into<String>, cfg: &GenerationConfig) -> Self {
        Self {
            agent: agent(Duration::from_secs_f64(cfg.timeout_secs)),
            url: url.into(),
            bearer: cfg.bearer_token.clone(),
        }
    }
}

impl CompletionBackend for HttpCompletionBackend {
    fn complete(&self, _id: &str, request: &CompletionRequest) -> Result<String, RequestError> {
        let resp: CompletionResponse = post_json(&self.agent, &self.url, self.bearer.as_deref(), request)?;
        resp.choices
            .into_iter()
            .next()
            .map(|c| c.text)
            .ok_or_else(|| RequestError::BadResponse("no choices in response".into()))
    }
}

/// Annotated target text obtained by projecting source labels through `alignment`.
pub fn mock_transfer(source: &LabeledSentence, target: &[String], alignment: &Alignment) -> String {
    codec::render_annotated(&project_labels(source, target, alignment))
}

#[derive(Debug, Clone)]
pub struct MockEntry {
    pub source: LabeledSentence,
    pub target: Vec<String>,
    pub alignment: Alignment,
}

/// Deterministic backend answering each record id with [`mock_transfer`].
#[derive(Debug, Clone, Default)]
pub struct MockProjector {
    entries: HashMap<String, MockEntry>,
}

impl MockProjector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, entry: MockEntry) {
        self.entries.insert(id.into(), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl CompletionBackend for MockProjector {
    fn complete(&self, id: &str, _request: &CompletionRequest) -> Result<String, RequestError> {
        let e = self
            .entries
            .get(id)
            .ok_or_else(|| RequestError::BadResponse(format!("mock has no entry for `{id}`")))?;
        Ok(mock_transfer(&e.source, &e.target, &e.alignment))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub id: String,
    pub raw_text: String,
    /// Lenient parse of `raw_text`; absent when it could not be parsed.
    pub parsed: Option<LabeledSentence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// The request timed out on every attempt.
    #[serde(default)]
    pub failed: bool,
}

impl GenerationResult {
    pub fn from_text(id: &str, raw_text: String, labels: &LabelSet) -> Self {
        match codec::parse_annotated(&raw_text, labels, ParseMode::Lenient) {
            Ok(p) => Self {
                id: id.to_owned(),
                raw_text,
                parsed: Some(p.sentence),
                warnings: p.warnings,
                failed: false,
            },
            Err(e) => Self {
                id: id.to_owned(),
                raw_text,
                parsed: None,
                warnings: vec![format!("unparsable output: {e}")],
                failed: false,
            },
        }
    }

    fn timed_out(id: &str, attempts: usize) -> Self {
        Self {
            id: id.to_owned(),
            raw_text: String::new(),
            parsed: None,
            warnings: vec![format!("timed out on all {attempts} attempts")],
            failed: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchOutcome {
    /// One result per record, in input order.
    pub results: Vec<GenerationResult>,
    /// Total requests sent, retries included.
    pub attempts: usize,
}

/// Sends every record to `backend` with at most `cfg.max_in_flight` requests outstanding.
///
/// Results come back in input order. A request that keeps timing out is marked
/// failed and the batch continues; any other error that survives
/// `cfg.max_retries` retries aborts the batch.
pub fn generate_batch(
    records: &[PromptRecord],
    cfg: &GenerationConfig,
    backend: &dyn CompletionBackend,
    labels: &LabelSet,
) -> Result<BatchOutcome, BackendError> {
    cfg.validate()?;
    let next = AtomicUsize::new(0);
    let attempts = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<GenerationResult>>> = Mutex::new(vec![None; records.len()]);
    let failure: Mutex<Option<(usize, String, usize, RequestError)>> = Mutex::new(None);
    let workers = cfg.max_in_flight.min(records.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(record) = records.get(i) else { break };
                let request = cfg.request(&record.prompt_text);
                let mut last = None;
                let mut tries = 0;
                for attempt in 0..=cfg.max_retries {
                    if attempt > 0 && cfg.retry_backoff_ms > 0 {
                        std::thread::sleep(Duration::from_millis(cfg.retry_backoff_ms * attempt as u64));
                    }
                    tries += 1;
                    attempts.fetch_add(1, Ordering::SeqCst);
                    match backend.complete(&record.id, &request) {
                        Ok(text) => {
                            last = None;
                            let result = GenerationResult::from_text(&record.id, text, labels);
                            slots.lock().expect("result slots poisoned")[i] = Some(result);
                            break;
                        }
                        Err(e) => last = Some(e),
                    }
                }
                match last {
                    None => {}
                    Some(RequestError::Timeout) => {
                        slots.lock().expect("result slots poisoned")[i] =
                            Some(GenerationResult::timed_out(&record.id, tries));
                    }
                    Some(e) => {
                        abort.store(true, Ordering::SeqCst);
                        let mut f = failure.lock().expect("failure slot poisoned");
                        // Keep the earliest failing record so the report is deterministic.
                        if f.as_ref().is_none_or(|(j, ..)| i < *j) {
                            *f = Some((i, record.id.clone(), tries, e));
                        }
                        break;
                    }
                }
            });
        }
    });

    let slots = slots.into_inner().expect("result slots poisoned");
    let attempts = attempts.into_inner();
    if let Some((_, id, tries, source)) = failure.into_inner().expect("failure slot poisoned") {
        return Err(BackendError::Endpoint {
            id,
            attempts: tries,
            source,
            completed: slots.into_iter().flatten().collect(),
        });
    }
    Ok(BatchOutcome {
        results: slots
            .into_iter()
            .map(|s| s.expect("every record processed"))
            .collect(),
        attempts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelerEndpoint {
    Oracle,
    Http(String),
}

impl Serialize for LabelerEndpoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LabelerEndpoint::Oracle => s.serialize_str(ORACLE_ENDPOINT),
            LabelerEndpoint::Http(url) => s.serialize_str(url),
        }
    }
}

impl<'de> Deserialize<'de> for LabelerEndpoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == ORACLE_ENDPOINT {
            LabelerEndpoint::Oracle
        } else {
            LabelerEndpoint::Http(s)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelerConfig {
    pub endpoint: LabelerEndpoint,
    pub timeout_secs: f64,
    pub max_retries: u32,
}

impl Default for LabelerConfig {
    fn default() -> Self {
        Self {
            endpoint: LabelerEndpoint::Oracle,
            timeout_secs: 60.0,
            max_retries: 3,
        }
    }
}

/// Per-token label predictions for a whitespace-tokenized sentence.
pub trait TokenClassifier: Sync {
    /// Returns one entry per token; `None`, `"O"` and BIO prefixes are normalized by the caller.
    fn classify(&self, tokens: &[String]) -> Result<Vec<Option<String>>, RequestError>;
}

#[derive(Serialize)]
struct ClassifyRequest<'a> {
    tokens: &'a [String],
}

#[derive(Deserialize)]
struct ClassifyResponse {
    labels: Vec<Option<String>>,
}

pub struct HttpTokenClassifier {
    agent: ureq::Agent,
    url: String,
}

impl HttpTokenClassifier {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        Self {
            agent: agent(timeout),
            url: url.into(),
        }
    }
}

impl TokenClassifier for HttpTokenClassifier {
    fn classify(&self, tokens: &[String]) -> Result<Vec<Option<String>>, RequestError> {
        let resp: ClassifyResponse = post_json(&self.agent, &self.url, None, &ClassifyRequest { tokens })?;
        Ok(resp.labels)
    }
}

/// `O`/empty → absent, `B-X`/`I-X` → `X`.
fn normalize_label(raw: Option<String>) -> Option<String> {
    let raw = raw?;
    let raw = raw.trim();
    if raw.is_empty() || raw == "O" {
        return None;
    }
    let name = raw
        .strip_prefix("B-")
        .or_else(|| raw.strip_prefix("I-"))
        .unwrap_or(raw);
    Some(name.to_owned())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoLabeled {
    /// Input examples whose `gold` now holds the predicted labels; dropped examples are absent.
    pub examples: Vec<Example>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Labels source sentences with the configured classifier (or returns gold unchanged in oracle mode).
pub fn pseudo_label_batch(
    sentences: &[Example],
    cfg: &LabelerConfig,
    labels: &LabelSet,
) -> Result<PseudoLabeled, BackendError> {
    match &cfg.endpoint {
        LabelerEndpoint::Oracle => {
            let examples = sentences
                .iter()
                .map(|e| match &e.gold {
                    Some(_) => Ok(e.clone()),
                    None => Err(BackendError::MissingGold(e.id.clone())),
                })
                .collect::<Result<_, _>>()?;
            Ok(PseudoLabeled {
                examples,
                diagnostics: Vec::new(),
            })
        }
        LabelerEndpoint::Http(url) => {
            let classifier = HttpTokenClassifier::new(url.clone(), Duration::from_secs_f64(cfg.timeout_secs));
            pseudo_label_with(sentences, &classifier, cfg.max_retries, labels)
        }
    }
}

pub fn pseudo_label_with(
    sentences: &[Example],
    classifier: &dyn TokenClassifier,
    max_retries: u32,
    labels: &LabelSet,
) -> Result<PseudoLabeled, BackendError> {
    let mut examples = Vec::with_capacity(sentences.len());
    let mut diagnostics = Vec::new();
    for e in sentences {
        let tokens = e.tokens();
        let mut tries = 0;
        let predicted = loop {
            tries += 1;
            match classifier.classify(tokens) {
                Ok(p) => break p,
                Err(err) if tries > max_retries as usize => {
                    return Err(BackendError::Endpoint {
                        id: e.id.clone(),
                        attempts: tries,
                        source: err,
                        completed: Vec::new(),
                    })
                }
                Err(_) => {}
            }
        };
        if predicted.len() != tokens.len() {
            diagnostics.push(Diagnostic::new(
                "pseudo_label",
                Some(&e.id),
                format!(
                    "LengthMismatch: classifier returned {} labels for {} tokens; example dropped",
                    predicted.len(),
                    tokens.len()
                ),
            ));
            continue;
        }
        let tags = predicted
            .into_iter()
            .map(normalize_label)
            .map(|l| match l {
                Some(name) if !labels.contains(&name) => {
                    diagnostics.push(Diagnostic::new(
                        "pseudo_label",
                        Some(&e.id),
                        format!("unknown label `{name}` mapped to absent"),
                    ));
                    None
                }
                other => other,
            })
            .collect();
        let gold = LabeledSentence::new(tokens.to_vec(), tags).expect("tokens already valid");
        examples.push(Example {
            gold: Some(gold),
            ..e.clone()
        });
    }
    Ok(PseudoLabeled {
        examples,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::LabelSet;
    use crate::prompting::VariantTags;
    use std::sync::atomic::AtomicU32;

    fn record(id: &str) -> PromptRecord {
        PromptRecord {
            id: id.to_owned(),
            prompt_text: format!("prompt {id}"),
            expected_completion: None,
            variant_tags: VariantTags::new(),
            notes: Vec::new(),
        }
    }

    struct Echo;
    impl CompletionBackend for Echo {
        fn complete(&self, id: &str, _r: &CompletionRequest) -> Result<String, RequestError> {
            Ok(format!("[date : {id}]"))
        }
    }

    struct Flaky {
        calls: AtomicU32,
        fail_first: u32,
        error: RequestError,
    }
    impl CompletionBackend for Flaky {
        fn complete(&self, _id: &str, _r: &CompletionRequest) -> Result<String, RequestError> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.fail_first {
                Err(self.error.clone())
            } else {
                Ok("ok".into())
            }
        }
    }

    fn cfg() -> GenerationConfig {
        GenerationConfig {
            retry_backoff_ms: 0,
            ..GenerationConfig::default()
        }
    }

    #[test]
    fn defaults_per_task() {
        let s = GenerationConfig::for_task(TaskKind::SlotFilling);
        assert_eq!((s.penalty_alpha, s.top_k, s.max_new_tokens), (0.6, 4, 512));
        assert_eq!(GenerationConfig::for_task(TaskKind::Ner).max_new_tokens, 768);
        let body = serde_json::to_value(s.request("p")).unwrap();
        assert_eq!(body["penalty_alpha"], 0.6);
        assert_eq!(body["top_k"], 4);
        assert_eq!(body["max_new_tokens"], 512);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.penalty_alpha = 1.5;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.max_in_flight = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn endpoint_strings() {
        assert_eq!(Endpoint::parse("mock:project"), Endpoint::Mock);
        let e: Endpoint = serde_json::from_str("\"http://x/v1/completions\"").unwrap();
        assert_eq!(e, Endpoint::Http("http://x/v1/completions".into()));
        let l: LabelerEndpoint = serde_json::from_str("\"oracle\"").unwrap();
        assert_eq!(l, LabelerEndpoint::Oracle);
    }

    #[test]
    fn batch_preserves_order() {
        let recs: Vec<_> = ["1", "2", "3"].map(record).into();
        let mut c = cfg();
        c.max_in_flight = 2;
        let out = generate_batch(&recs, &c, &Echo, &LabelSet::massive()).unwrap();
        let ids: Vec<_> = out.results.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "3"]);
        assert_eq!(out.attempts, 3);
        assert!(out.results[0].parsed.as_ref().unwrap().has_labels());
    }

    #[test]
    fn retries_then_succeeds() {
        let b = Flaky {
            calls: AtomicU32::new(0),
            fail_first: 2,
            error: RequestError::Status(503, String::new()),
        };
        let mut c = cfg();
        c.max_in_flight = 1;
        let out = generate_batch(&[record("a")], &c, &b, &LabelSet::massive()).unwrap();
        assert_eq!(out.attempts, 3);
        assert_eq!(out.results[0].raw_text, "ok");
    }

    #[test]
    fn persistent_error_aborts() {
        let b = Flaky {
            calls: AtomicU32::new(0),
            fail_first: u32::MAX,
            error: RequestError::Transport("refused".into()),
        };
        let mut c = cfg();
        c.max_retries = 2;
        c.max_in_flight = 1;
        let err = generate_batch(&[record("a"), record("b")], &c, &b, &LabelSet::massive()).unwrap_err();
        match err {
            BackendError::Endpoint { id, attempts, completed, .. } => {
                assert_eq!(id, "a");
                assert_eq!(attempts, 3);
                assert!(completed.is_empty());
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn timeouts_mark_failed_and_continue() {
        let b = Flaky {
            calls: AtomicU32::new(0),
            fail_first: 2,
            error: RequestError::Timeout,
        };
        let mut c = cfg();
        c.max_retries = 1;
        c.max_in_flight = 1;
        let out = generate_batch(&[record("a"), record("b")], &c, &b, &LabelSet::massive()).unwrap();
        assert!(out.results[0].failed);
        assert!(out.results[0].parsed.is_none());
        assert_eq!(out.results[1].raw_text, "ok");
        assert_eq!(out.attempts, 3);
    }

    #[test]
    fn mock_transfer_cases() {
        let src = LabeledSentence::from_pairs([("a", Some("date")), ("b", None)]).unwrap();
        let tgt: Vec<String> = vec!["x".into(), "y".into()];
        assert_eq!(mock_transfer(&src, &tgt, &Alignment::identity(2)), "[date : x] y");
        assert_eq!(mock_transfer(&src, &tgt, &Alignment::empty(2, 2)), "x y");
    }

    struct Fixed(Vec<Option<String>>);
    impl TokenClassifier for Fixed {
        fn classify(&self, _tokens: &[String]) -> Result<Vec<Option<String>>, RequestError> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn pseudo_labels() {
        let gold = LabeledSentence::from_pairs([("john", Some("PER")), ("ran", None)]).unwrap();
        let e = Example::from_gold("0", "en", gold.clone());
        let ner = LabelSet::naamapadam();

        let oracle = pseudo_label_batch(std::slice::from_ref(&e), &LabelerConfig::default(), &ner).unwrap();
        assert_eq!(oracle.examples[0].gold.as_ref(), Some(&gold));

        let c = Fixed(vec![Some("B-PER".into()), Some("O".into())]);
        let out = pseudo_label_with(std::slice::from_ref(&e), &c, 0, &ner).unwrap();
        assert_eq!(out.examples[0].gold.as_ref(), Some(&gold));

        let short = Fixed(vec![Some("B-PER".into())]);
        let out = pseudo_label_with(std::slice::from_ref(&e), &short, 0, &ner).unwrap();
        assert!(out.examples.is_empty());
        assert!(out.diagnostics[0].message.starts_with("LengthMismatch"));

        let mut no_gold = e;
        no_gold.gold = None;
        assert!(matches!(
            pseudo_label_batch(&[no_gold], &LabelerConfig::default(), &ner),
            Err(BackendError::MissingGold(_))
        ));
    }
}
