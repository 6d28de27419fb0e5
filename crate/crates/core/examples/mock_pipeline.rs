// Full ICL run on the bundled English/Hindi fixture with the projection mock.

use std::error::Error;
use std::path::Path;

use xltransfer::runner::{self, ExperimentConfig};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    let dir = tempfile::tempdir()?;
    for name in ["massive.jsonl", "alignments.pharaoh", "embeddings.jsonl", "config.json"] {
        std::fs::copy(fixture.join(name), dir.path().join(name))?;
    }
    let cfg = ExperimentConfig::load(dir.path().join("config.json"))?;
    let manifest = runner::run(&cfg)?;
    let mut out = format!(
        "{} test pairs, {} prompts, stages {:?}\n",
        manifest.counts.test, manifest.counts.prompts, manifest.stages
    );
    out.push_str(&std::fs::read_to_string(cfg.output_dir.join(&manifest.artifacts["report_table"]))?);
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
