use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xltransfer::backend::Endpoint;
use xltransfer::runner::{self, ExperimentConfig, Mode, RunOptions, Stage};

#[derive(Parser)]
#[command(name = "xlt", version, about = "Cross-lingual annotation transfer harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Completion endpoint URL, or `mock:project`.
    #[arg(long)]
    endpoint: Option<String>,
    /// Permit recipes that are off by default (e.g. transliterated SFT data).
    #[arg(long)]
    allow_deviation: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load and pair the corpora, write pairs and the split manifest.
    Ingest(Common),
    /// Label source sentences with the configured classifier.
    PseudoLabel(Common),
    /// Train or import word alignments.
    Align(Common),
    /// Apply reordering and transliteration to target sentences.
    Masquerade(Common),
    /// Render prompts for the configured mode.
    BuildPrompts(Common),
    /// Few-shot prompting on the test split, then score.
    RunIcl(Common),
    /// Write SFT datasets and the PEFT hyperparameter sidecar.
    EmitSft(Common),
    /// Query a fine-tuned endpoint (or read generations) and score.
    Score {
        #[command(flatten)]
        common: Common,
        /// Score an existing generations JSONL instead of querying the endpoint.
        #[arg(long)]
        generations: Option<PathBuf>,
    },
    /// Consolidated results table over run manifests.
    Report {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Also write `report.txt` and `report_rows.jsonl` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common, mode: Option<Mode>) -> Result<ExperimentConfig, runner::RunError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(e) = &common.endpoint {
        cfg.generation.endpoint = Endpoint::parse(e);
    }
    cfg.allow_deviation |= common.allow_deviation;
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    Ok(cfg)
}

fn stage_run(common: &Common, mode: Option<Mode>, opts: RunOptions) -> Result<(), runner::RunError> {
    let cfg = load(common, mode)?;
    let manifest = runner::run_with(&cfg, &opts)?;
    let last = manifest.stages.last().map_or("none".to_owned(), ToString::to_string);
    println!(
        "{} ({} pairs, {} test, {} prompts; last stage: {last})",
        cfg.output_dir.join(runner::MANIFEST_FILE).display(),
        manifest.counts.pairs,
        manifest.counts.test,
        manifest.counts.prompts,
    );
    if let Some(rel) = manifest.artifacts.get("report_table") {
        print!("{}", std::fs::read_to_string(cfg.output_dir.join(rel))?);
    }
    Ok(())
}

fn until(stage: Stage) -> RunOptions {
    RunOptions {
        stop_after: Some(stage),
        generations: None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(c) => stage_run(c, None, until(Stage::Ingest)),
        Command::PseudoLabel(c) => stage_run(c, None, until(Stage::PseudoLabel)),
        Command::Align(c) => stage_run(c, None, until(Stage::Align)),
        Command::Masquerade(c) => stage_run(c, None, until(Stage::Masquerade)),
        Command::BuildPrompts(c) => stage_run(c, None, until(Stage::BuildPrompts)),
        Command::RunIcl(c) => stage_run(c, Some(Mode::Icl), RunOptions::default()),
        Command::EmitSft(c) => stage_run(c, Some(Mode::SftEmit), RunOptions::default()),
        Command::Score { common, generations } => {
            let opts = RunOptions {
                stop_after: None,
                generations: generations.clone(),
            };
            let mode = match load(common, None) {
                Ok(cfg) if cfg.mode == Mode::Icl => None,
                _ => Some(Mode::Score),
            };
            stage_run(common, mode, opts)
        }
        Command::Report { manifests, out } => runner::report(manifests).and_then(|(table, rows)| {
            print!("{table}");
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("report.txt"), &table)?;
                runner::write_jsonl(&dir.join("report_rows.jsonl"), &rows)?;
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Stage errors already embed their causes in the message.
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
