//! Experiment orchestration: configuration, the stage pipeline
//! (ingest → pseudo-label → align → masquerade → prompts → generate → score),
//! artifact persistence and the consolidated results table.
//!
//! Every run writes its artifacts under `output_dir` and finishes with a
//! `manifest.json`. A failing stage still leaves a manifest behind, marked
//! `failed`, listing whatever was produced before the failure.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::align::{self, Alignment, Ibm1Aligner};
use crate::backend::{
    self, CompletionBackend, Endpoint, GenerationConfig, GenerationResult, HttpCompletionBackend,
    LabelerConfig, LabelerEndpoint, MockEntry, MockProjector,
};
use crate::codec::{LabelSet, LabeledSentence, TaskKind};
use crate::corpus::{self, Example, ParallelExample, Partition, SplitRatio};
use crate::diagnostics::Diagnostic;
use crate::metrics::{self, EvalConfig, MauveEmbeddings, ReportRow, RunReport};
use crate::prompting::{
    self, EmbeddingStore, PeftHyperparameters, PreparedPair, PromptBuilder, PromptRecord, RetrievalConfig,
    Variant, VariantTags,
};
use crate::translit::{Script, ScriptTable};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("unreadable report {path}: {reason}")]
    UnreadableReport { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Few-shot prompting of a base model on the test split.
    Icl,
    /// Emit SFT datasets for train and validation, then stop.
    SftEmit,
    /// Query a fine-tuned endpoint with SFT-format prompts on the test split.
    Score,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Icl => "icl",
            Mode::SftEmit => "sft_emit",
            Mode::Score => "score",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Ingest,
    PseudoLabel,
    Align,
    Masquerade,
    BuildPrompts,
    Generate,
    Score,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::PseudoLabel => "pseudo-label",
            Stage::Align => "align",
            Stage::Masquerade => "masquerade",
            Stage::BuildPrompts => "build-prompts",
            Stage::Generate => "generate",
            Stage::Score => "score",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    /// JSONL with `id`, `locale`, `utt`, `annot_utt`.
    Massive,
    /// Two-column BIO files; sentence ids are positions.
    Conll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub format: CorpusFormat,
    pub source: PathBuf,
    pub target: PathBuf,
    /// Label table overriding the bundled one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMethod {
    Ibm1,
    /// Import links from a Pharaoh file, one line per pair in pairing order.
    Pharaoh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    pub method: AlignMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub iterations: usize,
    pub use_null: bool,
    pub symmetrize: bool,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            method: AlignMethod::Ibm1,
            path: None,
            iterations: 10,
            use_null: true,
            symmetrize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: SplitRatio,
    /// Use the corpus' own partitions when every target example has one.
    pub upstream: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            ratio: SplitRatio::default(),
            upstream: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MauvePaths {
    pub predictions: PathBuf,
    pub references: PathBuf,
}

/// A full experiment description, read from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub source_locale: String,
    pub target_locale: String,
    #[serde(default)]
    pub variant_tags: VariantTags,
    pub mode: Mode,
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub alignment: AlignConfig,
    /// Sentence embeddings (JSONL `id`, `vector`) used for exemplar retrieval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mauve_embeddings: Option<MauvePaths>,
    /// Directory of script tables overriding the bundled ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translit_dir: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub generation: GenerationConfig,
    #[serde(default)]
    pub retrieval: RetrievalConfig,
    #[serde(default)]
    pub labeler: LabelerConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    /// Condition inference prompts on gold source labels instead of pseudo labels.
    #[serde(default)]
    pub oracle_source: bool,
    #[serde(default)]
    pub allow_deviation: bool,
    #[serde(default)]
    pub seed: u64,
    /// Row label in the results table; defaults to `<mode> <tags>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configuration: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_language_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_language_name: Option<String>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Overlays `user` onto `base`, recursing into objects.
fn merge_json(base: &mut serde_json::Value, user: serde_json::Value) {
    match (base, user) {
        (serde_json::Value::Object(b), serde_json::Value::Object(u)) => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl ExperimentConfig {
    /// Parses a config; `generation` fields left out take the per-task defaults.
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let bad = |e: serde_json::Error| RunError::Config(e.to_string());
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        let task: TaskKind = value
            .get("task")
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(bad)?
            .ok_or_else(|| RunError::Config("missing field `task`".into()))?;
        let mut generation = serde_json::to_value(GenerationConfig::for_task(task)).map_err(bad)?;
        if let Some(user) = value.get_mut("generation").map(serde_json::Value::take) {
            merge_json(&mut generation, user);
        }
        value["generation"] = generation;
        serde_json::from_value(value).map_err(bad)
    }

    /// Loads a config file; relative paths inside resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("reading {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    /// Minimal config with defaults for everything but the corpus.
    pub fn new(task: TaskKind, source_locale: &str, target_locale: &str, mode: Mode, corpus: CorpusConfig) -> Self {
        Self {
            task,
            source_locale: source_locale.to_owned(),
            target_locale: target_locale.to_owned(),
            variant_tags: VariantTags::new(),
            mode,
            corpus,
            alignment: AlignConfig::default(),
            embeddings: None,
            mauve_embeddings: None,
            translit_dir: None,
            output_dir: default_output_dir(),
            generation: GenerationConfig::for_task(task),
            retrieval: RetrievalConfig::default(),
            labeler: LabelerConfig::default(),
            split: SplitConfig::default(),
            eval: EvalConfig::default(),
            oracle_source: false,
            allow_deviation: false,
            seed: 0,
            configuration: None,
            target_language_name: None,
            source_language_name: None,
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus.source);
        fix(&mut self.corpus.target);
        self.corpus.labels.as_mut().map(fix);
        self.alignment.path.as_mut().map(fix);
        self.embeddings.as_mut().map(fix);
        self.translit_dir.as_mut().map(fix);
        if let Some(m) = &mut self.mauve_embeddings {
            fix(&mut m.predictions);
            fix(&mut m.references);
        }
        fix(&mut self.output_dir);
    }

    /// Tags actually used: inference-time handholding implies pseudo source labels
    /// unless `oracle_source` is set.
    pub fn effective_tags(&self) -> VariantTags {
        let mut tags = self.variant_tags.clone();
        if self.mode != Mode::SftEmit && tags.contains(Variant::Handholding) && !self.oracle_source {
            tags.insert(Variant::PseudoSource);
        }
        tags
    }

    pub fn configuration_label(&self) -> String {
        self.configuration
            .clone()
            .unwrap_or_else(|| format!("{} {}", self.mode, self.effective_tags()))
    }

    /// SHA-256 of the experiment-defining fields (output location and credentials excluded).
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.generation.bearer_token = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let err = |m: String| Err(RunError::Config(m));
        let tags = self.effective_tags();
        let mut paths = vec![&self.corpus.source, &self.corpus.target];
        paths.extend(&self.corpus.labels);
        paths.extend(&self.embeddings);
        paths.extend(&self.translit_dir);
        if let Some(m) = &self.mauve_embeddings {
            paths.extend([&m.predictions, &m.references]);
        }
        if self.alignment.method == AlignMethod::Pharaoh {
            match &self.alignment.path {
                Some(p) => paths.push(p),
                None => return err("alignment method `pharaoh` needs `alignment.path`".into()),
            }
        }
        if let Some(missing) = paths.iter().find(|p| !p.exists()) {
            return err(format!("{} does not exist", missing.display()));
        }
        if self.source_locale == self.target_locale {
            return err("source and target locales must differ".into());
        }
        if self.mode == Mode::SftEmit && tags.contains(Variant::Transliterated) && !self.allow_deviation {
            return err(
                "transliterated SFT data is excluded from default recipes; pass --allow-deviation to emit it".into(),
            );
        }
        if self.mode == Mode::Icl && !tags.contains(Variant::Handholding) {
            return err("ICL prompts need the handholding tag".into());
        }
        if tags.contains(Variant::PseudoSource) && self.oracle_source {
            return err("pseudo_source conflicts with oracle_source".into());
        }
        if tags.contains(Variant::PseudoSource) && self.labeler.endpoint == LabelerEndpoint::Oracle {
            return err(
                "pseudo source labels need a classifier endpoint in `labeler.endpoint`; set `oracle_source` for gold labels"
                    .into(),
            );
        }
        if tags.contains(Variant::Transliterated)
            && self.translit_dir.is_none()
            && Script::for_locale(&self.target_locale).is_none()
        {
            return err(format!("no script table for locale `{}`", self.target_locale));
        }
        if self.mode == Mode::Icl && self.retrieval.k > 0 && self.embeddings.is_none() {
            return err("ICL retrieval needs `embeddings` (or retrieval.k = 0)".into());
        }
        if self.alignment.method == AlignMethod::Ibm1 && self.alignment.iterations == 0 {
            return err("alignment.iterations must be at least 1".into());
        }
        self.generation
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        Ok(())
    }

    fn label_set(&self) -> Result<LabelSet, RunError> {
        match &self.corpus.labels {
            Some(p) => LabelSet::from_file(self.task, p).map_err(|e| RunError::Config(e.to_string())),
            None => Ok(LabelSet::bundled(self.task)),
        }
    }

    fn language_names(&self) -> Result<(String, String), RunError> {
        let name = |over: &Option<String>, locale: &str| {
            over.clone()
                .or_else(|| prompting::language_name(locale).map(str::to_owned))
                .ok_or_else(|| RunError::Config(format!("no display name for locale `{locale}`")))
        };
        Ok((
            name(&self.target_language_name, &self.target_locale)?,
            name(&self.source_language_name, &self.source_locale)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub pairs: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub prompts: usize,
    pub generation_failures: usize,
    pub parse_failures: usize,
    pub diagnostics: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_digest: String,
    pub task: TaskKind,
    pub source_locale: String,
    pub target_locale: String,
    pub mode: Mode,
    pub configuration: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub stages: Vec<Stage>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// Artifact name → path relative to the manifest's directory.
    pub artifacts: BTreeMap<String, PathBuf>,
    pub counts: RunCounts,
}

impl RunManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| RunError::UnreadableReport {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| RunError::UnreadableReport {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

/// Which part of the pipeline to run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Stop after this stage and force it to run even when the recipe would skip it.
    pub stop_after: Option<Stage>,
    /// Score these generations (JSONL of results) instead of querying the backend.
    pub generations: Option<PathBuf>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn stage_err<E>(stage: Stage) -> impl FnOnce(E) -> RunError
where
    E: Into<Box<dyn std::error::Error + Send + Sync>>,
{
    move |e| RunError::Stage { stage, source: e.into() }
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> io::Result<Vec<T>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct MasqueradeLine<'a> {
    id: &'a str,
    variant_tags: &'a VariantTags,
    target_view: &'a [String],
}

#[derive(Serialize)]
struct PseudoLabelLine<'a> {
    id: &'a str,
    labels: &'a LabeledSentence,
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    out: PathBuf,
    manifest: RunManifest,
    diagnostics: Vec<Diagnostic>,
}

impl Run<'_> {
    fn artifact(&mut self, name: &str, rel: &str) -> PathBuf {
        self.manifest.artifacts.insert(name.to_owned(), PathBuf::from(rel));
        let p = self.out.join(rel);
        if let Some(dir) = p.parent() {
            let _ = fs::create_dir_all(dir);
        }
        p
    }

    fn wants(&self, stage: Stage) -> bool {
        self.opts.stop_after.is_none_or(|s| stage <= s)
    }

    fn done(&mut self, stage: Stage) -> bool {
        self.manifest.stages.push(stage);
        self.opts.stop_after == Some(stage)
    }

    fn write_manifest(&self) -> io::Result<()> {
        let tmp = self.out.join(format!("{MANIFEST_FILE}.tmp"));
        let mut json = serde_json::to_string_pretty(&self.manifest)?;
        json.push('\n');
        fs::write(&tmp, json)?;
        fs::rename(tmp, self.out.join(MANIFEST_FILE))
    }
}

/// Runs the full recipe for `config.mode`.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    run_with(config, &RunOptions::default())
}

pub fn run_with(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest, RunError> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let mut run = Run {
        cfg: config,
        opts,
        out: config.output_dir.clone(),
        manifest: RunManifest {
            tool_version: TOOL_VERSION.to_owned(),
            config_digest: config.digest(),
            task: config.task,
            source_locale: config.source_locale.clone(),
            target_locale: config.target_locale.clone(),
            mode: config.mode,
            configuration: config.configuration_label(),
            status: RunStatus::Failed,
            error: None,
            stages: Vec::new(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            artifacts: BTreeMap::new(),
            counts: RunCounts::default(),
        },
        diagnostics: Vec::new(),
    };
    let result = execute(&mut run);
    if !run.diagnostics.is_empty() {
        let path = run.artifact("diagnostics", "diagnostics.jsonl");
        write_jsonl(&path, &run.diagnostics)?;
    }
    run.manifest.counts.diagnostics = run.diagnostics.len();
    run.manifest.finished_unix_ms = now_ms();
    match result {
        Ok(()) => {
            run.manifest.status = RunStatus::Completed;
            run.write_manifest()?;
            Ok(run.manifest)
        }
        Err(e) => {
            run.manifest.error = Some(e.to_string());
            run.write_manifest()?;
            Err(e)
        }
    }
}

fn load_side(cfg: &ExperimentConfig, path: &Path, locale: &str, labels: &LabelSet) -> Result<corpus::Loaded<Example>, RunError> {
    match cfg.corpus.format {
        CorpusFormat::Massive => corpus::load_massive(path, locale, labels),
        CorpusFormat::Conll => corpus::load_ner(path, locale),
    }
    .map_err(stage_err(Stage::Ingest))
}

fn execute(run: &mut Run<'_>) -> Result<(), RunError> {
    let cfg = run.cfg;
    let tags = cfg.effective_tags();
    let labels = cfg.label_set()?;

    // ingest
    let src = load_side(cfg, &cfg.corpus.source, &cfg.source_locale, &labels)?;
    let tgt = load_side(cfg, &cfg.corpus.target, &cfg.target_locale, &labels)?;
    run.diagnostics.extend(src.diagnostics);
    run.diagnostics.extend(tgt.diagnostics);
    let paired = corpus::pair_parallel(&src.items, &tgt.items);
    run.diagnostics.extend(paired.diagnostics);
    let mut pairs = paired.items;
    write_jsonl(&run.artifact("pairs", "ingest/pairs.jsonl"), &pairs)?;
    run.manifest.counts.pairs = pairs.len();
    // Assign partitions now so later filtering cannot move examples between them.
    let split = if cfg.split.upstream && !pairs.is_empty() && pairs.iter().all(|p| p.target.partition.is_some()) {
        corpus::upstream_split(pairs.clone(), |p| p.target.partition)
    } else {
        corpus::split_dataset(pairs.clone(), cfg.split.ratio, cfg.seed).map_err(stage_err(Stage::Ingest))?
    };
    let mut file = BufWriter::new(File::create(run.artifact("split", "ingest/split.jsonl"))?);
    corpus::write_split_manifest(&split, |p| p.id.as_str(), &mut file).map_err(stage_err(Stage::Ingest))?;
    file.flush()?;
    let assignment: HashMap<String, Partition> = split
        .parts()
        .into_iter()
        .flat_map(|(part, items)| items.iter().map(move |p| (p.id.clone(), part)))
        .collect();
    drop(split);
    if run.done(Stage::Ingest) {
        return Ok(());
    }

    // pseudo-label
    let force_pseudo = run.opts.stop_after == Some(Stage::PseudoLabel);
    if tags.contains(Variant::PseudoSource) || force_pseudo {
        let sources: Vec<Example> = pairs.iter().map(|p| p.source.clone()).collect();
        let out = backend::pseudo_label_batch(&sources, &cfg.labeler, &labels).map_err(stage_err(Stage::PseudoLabel))?;
        run.diagnostics.extend(out.diagnostics);
        let predicted: HashMap<String, LabeledSentence> = out
            .examples
            .into_iter()
            .filter_map(|e| Some((e.id, e.gold?)))
            .collect();
        write_jsonl(
            &run.artifact("pseudo_labels", "pseudo_labels.jsonl"),
            pairs.iter().filter_map(|p| {
                predicted.get(&p.id).map(|l| PseudoLabelLine { id: &p.id, labels: l })
            }),
        )?;
        if tags.contains(Variant::PseudoSource) {
            pairs.retain(|p| predicted.contains_key(&p.id));
            for p in &mut pairs {
                p.source.gold = predicted.get(&p.id).cloned();
            }
        }
        run.done(Stage::PseudoLabel);
    }
    if force_pseudo {
        return Ok(());
    }

    // align
    let needs_alignment = tags.contains(Variant::Reordered)
        || (cfg.mode != Mode::SftEmit && cfg.generation.endpoint == Endpoint::Mock && run.opts.generations.is_none())
        || run.opts.stop_after == Some(Stage::Align);
    let mut alignments: HashMap<String, Alignment> = HashMap::new();
    if needs_alignment && run.wants(Stage::Align) {
        let aligned = align_pairs(run, &pairs)?;
        write_pharaoh_file(run, &pairs, &aligned)?;
        alignments = pairs.iter().map(|p| p.id.clone()).zip(aligned).collect();
        if run.done(Stage::Align) {
            return Ok(());
        }
    }

    // split
    let split = corpus::upstream_split(pairs, |p| assignment.get(&p.id).copied());
    let mut test = Vec::with_capacity(split.test.len());
    for p in split.test {
        match &p.target.gold {
            None => return Err(stage_err(Stage::Ingest)(corpus::CorpusError::MissingGold(p.id))),
            Some(g) if g.has_labels() => test.push(p),
            Some(_) => {}
        }
    }
    let (train, validation) = (split.train, split.validation);
    run.manifest.counts.train = train.len();
    run.manifest.counts.validation = validation.len();
    run.manifest.counts.test = test.len();

    // masquerade
    let script_table;
    let script = if tags.contains(Variant::Transliterated) {
        let s = Script::for_locale(&cfg.target_locale)
            .ok_or_else(|| RunError::Config(format!("no script for `{}`", cfg.target_locale)))?;
        script_table = match &cfg.translit_dir {
            Some(dir) => ScriptTable::load_dir(dir, s).map_err(stage_err(Stage::Masquerade))?,
            None => ScriptTable::bundled(s).clone(),
        };
        Some(&script_table)
    } else {
        None
    };
    let prepare_all = |ps: &[ParallelExample]| -> Result<Vec<PreparedPair>, RunError> {
        ps.iter()
            .map(|p| prompting::prepare(p, &tags, alignments.get(&p.id), script))
            .collect::<Result<_, _>>()
            .map_err(stage_err(Stage::Masquerade))
    };
    let (train_p, validation_p, test_p) = (prepare_all(&train)?, prepare_all(&validation)?, prepare_all(&test)?);
    write_jsonl(
        &run.artifact("masquerade", "masquerade.jsonl"),
        train_p.iter().chain(&validation_p).chain(&test_p).map(|p| MasqueradeLine {
            id: p.id(),
            variant_tags: &p.tags,
            target_view: &p.target_view,
        }),
    )?;
    if run.done(Stage::Masquerade) {
        return Ok(());
    }

    // build-prompts
    let (target_name, source_name) = cfg.language_names()?;
    let builder = PromptBuilder::new(cfg.task, target_name, source_name);
    if cfg.mode == Mode::SftEmit {
        let sft = |ps: &[PreparedPair]| -> Result<Vec<PromptRecord>, RunError> {
            ps.iter()
                .map(|p| builder.sft_record(p))
                .collect::<Result<_, _>>()
                .map_err(stage_err(Stage::BuildPrompts))
        };
        let (tr, va) = (sft(&train_p)?, sft(&validation_p)?);
        for (name, records) in [("sft_train", &tr), ("sft_validation", &va)] {
            let rel = format!("sft/{}.jsonl", name.trim_start_matches("sft_"));
            let mut w = BufWriter::new(File::create(run.artifact(name, &rel))?);
            prompting::write_sft_jsonl(records.iter(), &mut w).map_err(stage_err(Stage::BuildPrompts))?;
            w.flush()?;
        }
        let mut hp = serde_json::to_string_pretty(&PeftHyperparameters::for_task(cfg.task))
            .map_err(stage_err(Stage::BuildPrompts))?;
        hp.push('\n');
        fs::write(run.artifact("peft_config", "sft/peft_config.json"), hp)?;
        run.manifest.counts.prompts = tr.len() + va.len();
        run.done(Stage::BuildPrompts);
        return Ok(());
    }

    let records: Vec<PromptRecord> = match cfg.mode {
        Mode::Icl => build_icl(run, &builder, &train_p, &test_p)?,
        _ => test_p
            .iter()
            .map(|p| {
                let mut r = builder.sft_record(p)?;
                r.expected_completion = None;
                Ok(r)
            })
            .collect::<Result<_, prompting::PromptError>>()
            .map_err(stage_err(Stage::BuildPrompts))?,
    };
    write_jsonl(&run.artifact("prompts", "prompts.jsonl"), &records)?;
    run.manifest.counts.prompts = records.len();
    if run.done(Stage::BuildPrompts) {
        return Ok(());
    }

    // generate
    let results: Vec<GenerationResult> = match &run.opts.generations {
        Some(path) => {
            let rs: Vec<GenerationResult> = read_jsonl(path).map_err(stage_err(Stage::Generate))?;
            // Re-parse so the scored view does not depend on how the file was produced.
            rs.into_iter()
                .map(|r| {
                    if r.failed {
                        r
                    } else {
                        GenerationResult::from_text(&r.id, r.raw_text, &labels)
                    }
                })
                .collect()
        }
        None => {
            let outcome = match &cfg.generation.endpoint {
                Endpoint::Mock => {
                    let mut mock = MockProjector::new();
                    for p in &test_p {
                        let alignment = alignments
                            .get(p.id())
                            .ok_or_else(|| stage_err(Stage::Generate)(format!("no alignment for `{}`", p.id())))?;
                        let target = p
                            .completion_gold
                            .as_ref()
                            .map(|g| g.tokens().to_vec())
                            .unwrap_or_else(|| p.pair.target.tokens().to_vec());
                        let source = p
                            .source_labels()
                            .or(p.pair.source.gold.as_ref())
                            .cloned()
                            .unwrap_or_else(|| p.pair.source.plain.clone());
                        mock.insert(
                            p.id(),
                            MockEntry {
                                source,
                                target,
                                alignment: alignment.clone(),
                            },
                        );
                    }
                    generate(run, &records, &mock, &labels)?
                }
                Endpoint::Http(url) => {
                    let http = HttpCompletionBackend::new(url.clone(), &cfg.generation);
                    generate(run, &records, &http, &labels)?
                }
            };
            outcome
        }
    };
    write_jsonl(&run.artifact("generations", "generations.jsonl"), &results)?;
    run.manifest.counts.generation_failures = results.iter().filter(|r| r.failed).count();
    for r in &results {
        for w in &r.warnings {
            run.diagnostics.push(Diagnostic::new("generate", Some(&r.id), w.clone()));
        }
    }
    if run.done(Stage::Generate) {
        return Ok(());
    }

    // score
    let refs: BTreeMap<String, LabeledSentence> = test_p
        .iter()
        .map(|p| (p.id().to_owned(), p.completion_gold.clone().expect("test gold checked at split")))
        .collect();
    let stores = match &cfg.mauve_embeddings {
        Some(m) => Some((read_store(&m.predictions)?, read_store(&m.references)?)),
        None => None,
    };
    let emb = stores.as_ref().map(|(p, r)| MauveEmbeddings {
        predictions: p,
        references: r,
    });
    let mut eval = cfg.eval.clone();
    eval.seed = cfg.seed;
    eval.mauve.seed = cfg.seed;
    let mut report = metrics::evaluate_run(&results, &refs, emb, &eval).map_err(stage_err(Stage::Score))?;
    report.config_digest = Some(run.manifest.config_digest.clone());
    run.manifest.counts.parse_failures = report.n_parse_failures;
    let mut w = BufWriter::new(File::create(run.artifact("report", "report.jsonl"))?);
    report.write_jsonl(&mut w).map_err(stage_err(Stage::Score))?;
    w.flush()?;
    let row = ReportRow::from_report(
        cfg.task.as_str(),
        &cfg.target_locale,
        &run.manifest.configuration,
        &report,
    );
    fs::write(run.artifact("report_table", "report.txt"), metrics::render_table(&[row]))?;
    run.done(Stage::Score);
    Ok(())
}

fn read_store(path: &Path) -> Result<EmbeddingStore, RunError> {
    let file = File::open(path)?;
    EmbeddingStore::read_jsonl(BufReader::new(file)).map_err(stage_err(Stage::Score))
}

fn align_pairs(run: &mut Run<'_>, pairs: &[ParallelExample]) -> Result<Vec<Alignment>, RunError> {
    let ac = &run.cfg.alignment;
    match ac.method {
        AlignMethod::Pharaoh => {
            let path = ac.path.as_ref().expect("validated");
            let lines = align::read_pharaoh(BufReader::new(File::open(path)?)).map_err(stage_err(Stage::Align))?;
            if lines.len() != pairs.len() {
                return Err(stage_err(Stage::Align)(format!(
                    "{} has {} lines for {} pairs",
                    path.display(),
                    lines.len(),
                    pairs.len()
                )));
            }
            pairs
                .iter()
                .zip(lines)
                .map(|(p, links)| Alignment::new(p.source.tokens().len(), p.target.tokens().len(), links))
                .collect::<Result<_, _>>()
                .map_err(stage_err(Stage::Align))
        }
        AlignMethod::Ibm1 => {
            if pairs.is_empty() {
                return Ok(Vec::new());
            }
            let corpus: Vec<(Vec<String>, Vec<String>)> = pairs
                .iter()
                .map(|p| (p.source.tokens().to_vec(), p.target.tokens().to_vec()))
                .collect();
            let aligner = Ibm1Aligner::train(&corpus, ac.iterations, ac.use_null, ac.symmetrize)
                .map_err(stage_err(Stage::Align))?;
            let mut w = BufWriter::new(File::create(run.artifact("ttable", "align/ttable.tsv"))?);
            aligner.forward.write_tsv(&mut w)?;
            w.flush()?;
            if let Some(bwd) = &aligner.backward {
                let mut w = BufWriter::new(File::create(run.artifact("ttable_backward", "align/ttable_backward.tsv"))?);
                bwd.write_tsv(&mut w)?;
                w.flush()?;
            }
            Ok(corpus.iter().map(|(s, t)| aligner.align(s, t)).collect())
        }
    }
}

fn write_pharaoh_file(run: &mut Run<'_>, pairs: &[ParallelExample], aligned: &[Alignment]) -> Result<(), RunError> {
    debug_assert_eq!(pairs.len(), aligned.len());
    let mut w = BufWriter::new(File::create(run.artifact("alignments", "align/alignments.pharaoh"))?);
    align::write_pharaoh(aligned, &mut w)?;
    w.flush()?;
    Ok(())
}

fn build_icl(
    run: &mut Run<'_>,
    builder: &PromptBuilder,
    train: &[PreparedPair],
    test: &[PreparedPair],
) -> Result<Vec<PromptRecord>, RunError> {
    let cfg = run.cfg;
    let pool: Vec<&PreparedPair> = train
        .iter()
        .filter(|p| p.completion_gold.is_some() && p.source_labels().is_some())
        .collect();
    let by_id: HashMap<&str, &PreparedPair> = pool.iter().map(|p| (p.id(), *p)).collect();
    let pool_ids: Vec<&str> = pool.iter().map(|p| p.id()).collect();
    let store = match &cfg.embeddings {
        Some(path) if cfg.retrieval.k > 0 => Some(
            EmbeddingStore::read_jsonl(BufReader::new(File::open(path)?)).map_err(stage_err(Stage::BuildPrompts))?,
        ),
        _ => None,
    };
    let mut records = Vec::with_capacity(test.len());
    for q in test {
        let demos: Vec<PreparedPair> = match &store {
            Some(store) => prompting::retrieve_exemplars(q.id(), &pool_ids, store, &cfg.retrieval)
                .map_err(stage_err(Stage::BuildPrompts))?
                .iter()
                .map(|id| by_id[id.as_str()].clone())
                .collect(),
            None => Vec::new(),
        };
        if demos.len() < cfg.retrieval.k {
            run.diagnostics.push(Diagnostic::new(
                "build-prompts",
                Some(q.id()),
                format!("only {} of {} demonstrations available", demos.len(), cfg.retrieval.k),
            ));
        }
        records.push(builder.icl_prompt(q, &demos).map_err(stage_err(Stage::BuildPrompts))?);
    }
    Ok(records)
}

fn generate(
    run: &mut Run<'_>,
    records: &[PromptRecord],
    backend: &dyn CompletionBackend,
    labels: &LabelSet,
) -> Result<Vec<GenerationResult>, RunError> {
    match backend::generate_batch(records, &run.cfg.generation, backend, labels) {
        Ok(outcome) => Ok(outcome.results),
        Err(backend::BackendError::Endpoint {
            id,
            attempts,
            source,
            completed,
        }) => {
            write_jsonl(&run.artifact("generations_partial", "generations.partial.jsonl"), &completed)?;
            Err(stage_err(Stage::Generate)(backend::BackendError::Endpoint {
                id,
                attempts,
                source,
                completed: Vec::new(),
            }))
        }
        Err(e) => Err(stage_err(Stage::Generate)(e)),
    }
}

/// Consolidated results table over finished runs, one row per manifest.
pub fn report(manifests: &[PathBuf]) -> Result<(String, Vec<ReportRow>), RunError> {
    let mut rows = Vec::with_capacity(manifests.len());
    for path in manifests {
        let m = RunManifest::read(path)?;
        let rel = m.artifacts.get("report").ok_or_else(|| RunError::UnreadableReport {
            path: path.display().to_string(),
            reason: "manifest lists no report".into(),
        })?;
        let report_path = path.parent().unwrap_or(Path::new(".")).join(rel);
        let file = File::open(&report_path).map_err(|e| RunError::UnreadableReport {
            path: report_path.display().to_string(),
            reason: e.to_string(),
        })?;
        let r = RunReport::read_jsonl(BufReader::new(file)).map_err(|e| RunError::UnreadableReport {
            path: report_path.display().to_string(),
            reason: e.to_string(),
        })?;
        rows.push(ReportRow::from_report(m.task.as_str(), &m.target_locale, &m.configuration, &r));
    }
    Ok((metrics::render_table(&rows), rows))
}
