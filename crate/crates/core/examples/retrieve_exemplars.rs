// Cosine top-k exemplar retrieval from a small embedding pool.

use std::error::Error;

use xltransfer::prompting::{retrieve_exemplars, EmbeddingStore, RetrievalConfig};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let mut store = EmbeddingStore::new();
    let pool: Vec<String> = (0..12).map(|i| format!("train-{i:02}")).collect();
    for (i, id) in pool.iter().enumerate() {
        let angle = i as f64 * 0.3;
        store.insert(id.clone(), vec![angle.cos(), angle.sin(), 0.1])?;
    }
    store.insert("query", vec![1.0, 0.2, 0.1])?;
    let top = retrieve_exemplars("query", &pool, &store, &RetrievalConfig::default())?;
    let mut out = format!("k = {} neighbours of `query`:\n", top.len());
    for id in &top {
        out.push_str(&format!("  {id}\n"));
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
