//! Prompt rendering for supervised fine-tuning records and few-shot ICL, plus
//! nearest-neighbour exemplar retrieval over externally supplied embeddings.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{self, Alignment};
use crate::codec::{render_annotated, LabeledSentence, TaskKind};
use crate::corpus::ParallelExample;
use crate::translit::ScriptTable;

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("example `{0}`: handholding needs labels on the source sentence")]
    MissingSourceLabels(String),
    #[error("example `{0}`: target gold labels are missing")]
    MissingTargetGold(String),
    #[error("example `{0}`: reordering needs an alignment")]
    MissingAlignment(String),
    #[error("example `{0}`: alignment does not fit the sentence pair")]
    AlignmentShape(String),
    #[error("example `{0}`: transliteration needs a script table")]
    MissingScript(String),
    #[error("demonstration `{demo}` has tags {demo_tags} but the query has {query_tags}")]
    VariantMismatch {
        demo: String,
        demo_tags: VariantTags,
        query_tags: VariantTags,
    },
    #[error("example `{0}` is used as its own demonstration")]
    DemoIsQuery(String),
    #[error("the ICL template requires the handholding variant")]
    IclNeedsHandholding,
    #[error("no embedding for `{0}`")]
    MissingEmbedding(String),
    #[error("embedding `{id}` has dimension {got}, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("line {line}: {reason}")]
    MalformedEmbedding { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Handholding,
    Reordered,
    Transliterated,
    PseudoSource,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Handholding => "handholding",
            Variant::Reordered => "reordered",
            Variant::Transliterated => "transliterated",
            Variant::PseudoSource => "pseudo_source",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariantTags(BTreeSet<Variant>);

impl VariantTags {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: Variant) -> Self {
        self.0.insert(v);
        self
    }

    pub fn insert(&mut self, v: Variant) {
        self.0.insert(v);
    }

    pub fn remove(&mut self, v: Variant) {
        self.0.remove(&v);
    }

    pub fn contains(&self, v: Variant) -> bool {
        self.0.contains(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = Variant> + '_ {
        self.0.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Variant> for VariantTags {
    fn from_iter<I: IntoIterator<Item = Variant>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for VariantTags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("monolingual");
        }
        let names: Vec<_> = self.iter().map(Variant::as_str).collect();
        f.write_str(&names.join("+"))
    }
}

/// Display name for a locale, as used in the prompt (`hi-IN` → `Hindi`).
pub fn language_name(locale: &str) -> Option<&'static str> {
    Some(match locale.split(['-', '_']).next()? {
        "en" => "English",
        "hi" => "Hindi",
        "bn" => "Bengali",
        "ta" => "Tamil",
        "te" => "Telugu",
        "mr" => "Marathi",
        "kn" => "Kannada",
        "ml" => "Malayalam",
        "gu" => "Gujarati",
        "pa" => "Punjabi",
        "ur" => "Urdu",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptFamily {
    SftHandholding,
    SftMonolingual,
    IclHandholding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub family: PromptFamily,
    pub target_language_name: String,
    pub source_language_name: String,
    pub task_phrase: String,
}

impl PromptTemplate {
    pub fn new(family: PromptFamily, target_language: &str, source_language: &str, task: TaskKind) -> Self {
        Self {
            family,
            target_language_name: target_language.to_owned(),
            source_language_name: source_language.to_owned(),
            task_phrase: task_phrase(task).to_owned(),
        }
    }

    /// SFT prompt; `annotated_source` is required for the handholding family and ignored otherwise.
    pub fn render_sft(&self, target_line: &str, annotated_source: Option<&str>) -> String {
        let tgt = &self.target_language_name;
        let phrase = &self.task_phrase;
        match (self.family, annotated_source) {
            (PromptFamily::SftHandholding | PromptFamily::IclHandholding, Some(src)) => {
                let src_lang = &self.source_language_name;
                format!(
                    "Reinsert the {phrase} into the following {tgt} sentence using the information in the {src_lang} sentence.\n\
                     \n\
                     ### {tgt}: {target_line}\n\
                     ### {src_lang}: {src}\n\
                     ### Output:"
                )
            }
            _ => format!(
                "Reinsert the {phrase} into the following {tgt} sentence.\n\
                 \n\
                 ### {tgt}: {target_line}\n\
                 ### Output:"
            ),
        }
    }

    pub fn render_icl_system(&self) -> String {
        let tgt = &self.target_language_name;
        let src = &self.source_language_name;
        format!(
            "<<SYS>> Add annotations for the corresponding tokens in {tgt} sentences using the annotation information given in the {src} sentence. The annotations are marked in the format [annotation_type : token/value]\n\
             Input will be provided in the following format\n\
             ### {tgt}: {tgt} sentence\n\
             ### {src}: {src} sentence\n\
             Output should be printed after the string \"### Output:\"\n\
             The final output should be the {tgt} sentence with annotations inserted corresponding to the annotations of the {src} sentence. Do not add any extra annotations to the {tgt} sentence, which are not present in the {src} sentence input.<</SYS>>"
        )
    }

    /// One ICL block; `completion` is `None` for the open query block.
    pub fn render_icl_block(
        &self,
        given_tokens: &str,
        target_line: &str,
        annotated_source: &str,
        completion: Option<&str>,
    ) -> String {
        let tgt = &self.target_language_name;
        let src = &self.source_language_name;
        let output = match completion {
            Some(c) => format!("### Output: {c}"),
            None => "### Output:".to_owned(),
        };
        format!(
            "Add annotations for the given tokens {given_tokens} in {tgt} sentence using the annotation information given in the {src} sentence\n\
             ### {tgt}: {target_line}\n\
             ### {src}: {annotated_source}\n\
             {output}"
        )
    }
}

pub fn task_phrase(task: TaskKind) -> &'static str {
    match task {
        TaskKind::SlotFilling => "slot annotations",
        TaskKind::Ner => "named entity annotations",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub prompt_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_completion: Option<String>,
    pub variant_tags: VariantTags,
    /// Deviations from the reference templates, e.g. NER wording.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A parallel pair with its target side shaped for the model according to `tags`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedPair {
    pub pair: ParallelExample,
    pub tags: VariantTags,
    /// Tokens shown on the target-language line.
    pub target_view: Vec<String>,
    /// Labels the model should produce, over the (possibly romanized) target tokens in original order.
    pub completion_gold: Option<LabeledSentence>,
}

impl PreparedPair {
    pub fn id(&self) -> &str {
        &self.pair.id
    }

    /// Source labels used for handholding (gold or pseudo, whichever the pair carries).
    pub fn source_labels(&self) -> Option<&LabeledSentence> {
        self.pair.source.gold.as_ref()
    }
}

/// Applies the masquerading variants: reordering by `alignment` and/or romanization with `script`.
pub fn prepare(
    pair: &ParallelExample,
    tags: &VariantTags,
    alignment: Option<&Alignment>,
    script: Option<&ScriptTable>,
) -> Result<PreparedPair, PromptError> {
    let target = pair.target.tokens();
    let mut view = target.to_vec();
    if tags.contains(Variant::Reordered) {
        let a = alignment.ok_or_else(|| PromptError::MissingAlignment(pair.id.clone()))?;
        if a.n_target() != target.len() || a.n_source() != pair.source.tokens().len() {
            return Err(PromptError::AlignmentShape(pair.id.clone()));
        }
        view = align::reorder_target(&view, a);
    }
    let mut completion_gold = pair.target.gold.clone();
    if tags.contains(Variant::Transliterated) {
        let table = script.ok_or_else(|| PromptError::MissingScript(pair.id.clone()))?;
        let romanize = |t: &str| table.transliterate(t).text;
        view = view.iter().map(|t| romanize(t)).collect();
        completion_gold = completion_gold
            .map(|g| g.map_tokens(romanize))
            .transpose()
            .map_err(|_| PromptError::MissingScript(pair.id.clone()))?;
    }
    Ok(PreparedPair {
        pair: pair.clone(),
        tags: tags.clone(),
        target_view: view,
        completion_gold,
    })
}

/// Renders prompts for one (source, target) language pair and task.
#[derive(Debug, Clone)]
pub struct PromptBuilder {
    pub task: TaskKind,
    pub target_language: String,
    pub source_language: String,
}

impl PromptBuilder {
    pub fn new(task: TaskKind, target_language: impl Into<String>, source_language: impl Into<String>) -> Self {
        Self {
            task,
            target_language: target_language.into(),
            source_language: source_language.into(),
        }
    }

    pub fn template(&self, family: PromptFamily) -> PromptTemplate {
        PromptTemplate::new(family, &self.target_language, &self.source_language, self.task)
    }

    fn notes(&self) -> Vec<String> {
        match self.task {
            TaskKind::SlotFilling => Vec::new(),
            TaskKind::Ner => vec!["ner wording: slot-filling template with task phrase `named entity annotations`".to_owned()],
        }
    }

    fn annotated_source(p: &PreparedPair) -> Result<String, PromptError> {
        p.source_labels()
            .map(render_annotated)
            .ok_or_else(|| PromptError::MissingSourceLabels(p.id().to_owned()))
    }

    pub fn sft_record(&self, p: &PreparedPair) -> Result<PromptRecord, PromptError> {
        let completion = p
            .completion_gold
            .as_ref()
            .map(render_annotated)
            .ok_or_else(|| PromptError::MissingTargetGold(p.id().to_owned()))?;
        let target_line = p.target_view.join(" ");
        let prompt_text = if p.tags.contains(Variant::Handholding) {
            let src = Self::annotated_source(p)?;
            self.template(PromptFamily::SftHandholding)
                .render_sft(&target_line, Some(&src))
        } else {
            self.template(PromptFamily::SftMonolingual)
                .render_sft(&target_line, None)
        };
        Ok(PromptRecord {
            id: p.id().to_owned(),
            prompt_text,
            expected_completion: Some(completion),
            variant_tags: p.tags.clone(),
            notes: self.notes(),
        })
    }

    fn icl_block(&self, t: &PromptTemplate, p: &PreparedPair, completion: Option<&str>) -> Result<String, PromptError> {
        let source = p
            .source_labels()
            .ok_or_else(|| PromptError::MissingSourceLabels(p.id().to_owned()))?;
        let given = source.labeled_tokens().join(", ");
        Ok(t.render_icl_block(&given, &p.target_view.join(" "), &render_annotated(source), completion))
    }

    /// System block, one completed block per demonstration, then the open query block.
    pub fn icl_prompt(&self, query: &PreparedPair, demos: &[PreparedPair]) -> Result<PromptRecord, PromptError> {
        if !query.tags.contains(Variant::Handholding) {
            return Err(PromptError::IclNeedsHandholding);
        }
        let template = self.template(PromptFamily::IclHandholding);
        let mut blocks = vec![template.render_icl_system()];
        for d in demos {
            if d.id() == query.id() {
                return Err(PromptError::DemoIsQuery(d.id().to_owned()));
            }
            if d.tags != query.tags {
                return Err(PromptError::VariantMismatch {
                    demo: d.id().to_owned(),
                    demo_tags: d.tags.clone(),
                    query_tags: query.tags.clone(),
                });
            }
            let completion = d
                .completion_gold
                .as_ref()
                .map(render_annotated)
                .ok_or_else(|| PromptError::MissingTargetGold(d.id().to_owned()))?;
            blocks.push(self.icl_block(&template, d, Some(&completion))?);
        }
        blocks.push(self.icl_block(&template, query, None)?);
        Ok(PromptRecord {
            id: query.id().to_owned(),
            prompt_text: blocks.join("\n\n"),
            expected_completion: None,
            variant_tags: query.tags.clone(),
            notes: self.notes(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub k: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self { k: 8 }
    }
}

/// Sentence embeddings keyed by example id, all of one dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dim: Option<usize>,
    vectors: HashMap<String, Vec<f64>>,
}

#[derive(Deserialize)]
struct EmbeddingRecord {
    id: String,
    vector: Vec<f64>,
}

impl EmbeddingStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<(), PromptError> {
        let id = id.into();
        match self.dim {
            Some(d) if d != vector.len() => {
                return Err(PromptError::DimensionMismatch {
                    id,
                    expected: d,
                    got: vector.len(),
                })
            }
            None => self.dim = Some(vector.len()),
            _ => {}
        }
        self.vectors.insert(id, vector);
        Ok(())
    }

    /// Reads JSONL lines of `{"id": ..., "vector": [...]}`.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, PromptError> {
        let mut store = Self::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: EmbeddingRecord =
                serde_json::from_str(&line).map_err(|e| PromptError::MalformedEmbedding {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            store.insert(rec.id, rec.vector)?;
        }
        Ok(store)
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Top-k pool ids by cosine similarity to the query (descending, ties by ascending id).
/// The query itself is never returned.
pub fn retrieve_exemplars<S: AsRef<str>>(
    query_id: &str,
    pool: &[S],
    store: &EmbeddingStore,
    cfg: &RetrievalConfig,
) -> Result<Vec<String>, PromptError> {
    if cfg.k == 0 {
        return Err(PromptError::ZeroK);
    }
    let q = store
        .get(query_id)
        .ok_or_else(|| PromptError::MissingEmbedding(query_id.to_owned()))?;
    let mut ids: Vec<&str> = pool.iter().map(AsRef::as_ref).filter(|&id| id != query_id).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut scored = ids
        .into_iter()
        .map(|id| {
            store
                .get(id)
                .map(|v| (cosine(q, v), id))
                .ok_or_else(|| PromptError::MissingEmbedding(id.to_owned()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(scored
        .into_iter()
        .take(cfg.k)
        .map(|(_, id)| id.to_owned())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftLine {
    pub id: String,
    pub prompt: String,
    pub completion: String,
    pub variant_tags: VariantTags,
}

/// Writes JSONL with `id`, `prompt`, `completion`, `variant_tags`.
pub fn write_sft_jsonl<'a, W: Write>(
    records: impl IntoIterator<Item = &'a PromptRecord>,
    mut out: W,
) -> Result<usize, PromptError> {
    let mut n = 0;
    for r in records {
        let line = SftLine {
            id: r.id.clone(),
            prompt: r.prompt_text.clone(),
            completion: r.expected_completion.clone().unwrap_or_default(),
            variant_tags: r.variant_tags.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
        n += 1;
    }
    Ok(n)
}

/// PEFT / inference hyperparameters for the external fine-tuning stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeftHyperparameters {
    pub dataset: String,
    pub lora_rank: u32,
    pub lora_alpha: u32,
    pub batch_size_training: u32,
    pub batch_size_inference: u32,
    pub gradient_checkpointing: bool,
    pub gradient_accumulation_steps: u32,
    pub max_gradient_norm: f64,
    /// Both values are recorded when the epoch count is not fixed.
    pub epochs: Vec<u32>,
    pub learning_rate: f64,
    pub optimizer: String,
    pub precision: String,
    pub lr_scheduler: String,
    pub train_batch_size: u32,
    pub warmup_ratio: f64,
    pub max_sequence_length_training: u32,
    pub stopping_criteria_inference: u32,
    pub penalty_alpha_inference: f64,
    pub top_k_inference: u32,
}

impl PeftHyperparameters {
    pub fn for_task(task: TaskKind) -> Self {
        let slot = task == TaskKind::SlotFilling;
        Self {
            dataset: if slot { "Massive" } else { "Naamapadam" }.to_owned(),
            lora_rank: 8,
            lora_alpha: 16,
            batch_size_training: if slot { 32 } else { 16 },
            batch_size_inference: 4,
            gradient_checkpointing: true,
            gradient_accumulation_steps: 4,
            max_gradient_norm: 0.3,
            epochs: if slot { vec![2, 3] } else { vec![3] },
            learning_rate: 1e-3,
            optimizer: if slot { "32-bit AdamW (paged)" } else { "32-bit Adam (paged)" }.to_owned(),
            precision: "bf16".to_owned(),
            lr_scheduler: "cosine".to_owned(),
            train_batch_size: if slot { 32 } else { 16 },
            warmup_ratio: 0.05,
            max_sequence_length_training: if slot { 512 } else { 1024 },
            stopping_criteria_inference: if slot { 512 } else { 768 },
            penalty_alpha_inference: 0.6,
            top_k_inference: 4,
        }
    }
}
