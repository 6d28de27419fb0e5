use std::sync::Mutex;

use serde::{Deserialize, Serialize};

/// A non-fatal event recorded by one pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(stage: &str, id: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            stage: stage.to_owned(),
            id: id.map(str::to_owned),
            message: message.into(),
        }
    }
}

/// Append-only log shared between worker threads.
#[derive(Debug, Default)]
pub struct DiagnosticLog {
    entries: Mutex<Vec<Diagnostic>>,
}

impl DiagnosticLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, d: Diagnostic) {
        self.entries.lock().expect("diagnostic log poisoned").push(d);
    }

    pub fn extend(&self, ds: impl IntoIterator<Item = Diagnostic>) {
        self.entries.lock().expect("diagnostic log poisoned").extend(ds);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("diagnostic log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<Diagnostic> {
        self.entries.lock().expect("diagnostic log poisoned").clone()
    }

    pub fn into_inner(self) -> Vec<Diagnostic> {
        self.entries.into_inner().expect("diagnostic log poisoned")
    }
}
