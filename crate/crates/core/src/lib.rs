//! Cross-lingual annotation transfer for slot filling and NER framed as text generation.
//!
//! The pipeline pairs an annotated source sentence (usually English) with an
//! unannotated target sentence, optionally reshapes the target (word reordering
//! through alignments, or romanization), renders prompts, sends them to a
//! completion endpoint, parses the bracketed output and scores it.
//!
//! Modules, bottom-up:
//! - [`codec`]: bracketed annotation format and label sets
//! - [`corpus`]: dataset loading, pairing, splitting
//! - [`align`]: IBM Model 1, reordering, label projection
//! - [`translit`]: ISO 15919 romanization
//! - [`prompting`]: prompt templates and exemplar retrieval
//! - [`backend`]: completion / token-classifier clients and the projection mock
//! - [`metrics`]: micro-F1, exact match, chrF++, MAUVE
//! - [`runner`]: experiment configuration, stage orchestration, reports

pub mod align;
pub mod backend;
pub mod codec;
pub mod corpus;
pub mod diagnostics;
pub mod metrics;
pub mod prompting;
pub mod runner;
pub mod translit;

pub use codec::{LabelSet, LabeledSentence, ParseMode, TaskKind};
pub use corpus::{Example, ParallelExample};
