// Send prompts to an OpenAI-style completions endpoint (a tiny local stub here).

use std::error::Error;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use xltransfer::backend::{generate_batch, Endpoint, GenerationConfig, HttpCompletionBackend};
use xltransfer::codec::{LabelSet, TaskKind};
use xltransfer::prompting::{PromptRecord, VariantTags};

/// Answers `n` requests with a fixed annotated sentence, then exits.
fn serve(listener: TcpListener, n: usize) {
    for conn in listener.incoming().take(n) {
        let Ok(mut conn) = conn else { continue };
        let mut reader = BufReader::new(conn.try_clone().unwrap());
        let mut len = 0;
        let mut line = String::new();
        while reader.read_line(&mut line).unwrap_or(0) > 0 && line.trim() != "" {
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap_or(0);
            }
            line.clear();
        }
        let mut body = vec![0; len];
        let _ = reader.read_exact(&mut body);
        let reply = r#"{"choices":[{"text":"[time : सुबह पाँच] बजे उठाना"}]}"#;
        let _ = write!(
            conn,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
            reply.len()
        );
    }
}

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}/v1/completions", listener.local_addr()?);
    let server = std::thread::spawn(move || serve(listener, 3));

    let cfg = GenerationConfig {
        endpoint: Endpoint::Http(url.clone()),
        max_in_flight: 2,
        ..GenerationConfig::for_task(TaskKind::SlotFilling)
    };
    let records: Vec<PromptRecord> = (0..3)
        .map(|i| PromptRecord {
            id: format!("p{i}"),
            prompt_text: format!("prompt {i}\n### Output:"),
            expected_completion: None,
            variant_tags: VariantTags::new(),
            notes: Vec::new(),
        })
        .collect();
    let backend = HttpCompletionBackend::new(url, &cfg);
    let outcome = generate_batch(&records, &cfg, &backend, &LabelSet::massive())?;
    server.join().map_err(|_| "stub server panicked")?;

    let mut out = format!("{} requests sent\n", outcome.attempts);
    for r in &outcome.results {
        let labeled = r.parsed.as_ref().map_or(0, |z| z.labeled_count());
        out.push_str(&format!("{}: {} ({labeled} labeled tokens)\n", r.id, r.raw_text));
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
