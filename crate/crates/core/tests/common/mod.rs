#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub mod oracles;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("prompts/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

/// `(input, expected)` rows of a transliteration fixture table.
pub fn translit_rows(script: &str) -> Vec<(String, String)> {
    let text = std::fs::read_to_string(fixture(&format!("translit/{script}.tsv"))).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let (i, e) = l.split_once('\t').unwrap();
            (i.to_owned(), e.to_owned())
        })
        .collect()
}

/// Copies the end-to-end fixture into a fresh directory and returns (tempdir, config path).
pub fn e2e_workspace() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    for name in ["massive.jsonl", "alignments.pharaoh", "embeddings.jsonl", "config.json"] {
        std::fs::copy(fixture(&format!("e2e/{name}")), dir.path().join(name)).unwrap();
    }
    let cfg = dir.path().join("config.json");
    (dir, cfg)
}

/// How the stub answers a completion request.
#[derive(Clone)]
pub enum Behavior {
    /// `choices[0].text` = last whitespace token of the prompt, after a random delay.
    Echo { max_delay_ms: u64 },
    /// HTTP 500 for the first `n` requests, then echo.
    FailFirst { n: usize },
    /// Sleep `ms` before answering prompts containing `slow`.
    SlowOn { ms: u64 },
    /// Token classifier: `B-PER` for capitalized tokens, `O` otherwise; drops one
    /// label when the sentence contains `short`.
    Classifier,
}

pub struct StubServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Value>>>,
    pub max_in_flight: Arc<AtomicUsize>,
    stop: Arc<AtomicBool>,
    addr: String,
}

impl StubServer {
    pub fn start(behavior: Behavior) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let max_in_flight = Arc::new(AtomicUsize::new(0));
        let in_flight = Arc::new(AtomicUsize::new(0));
        let served = Arc::new(AtomicUsize::new(0));
        let stop = Arc::new(AtomicBool::new(false));
        {
            let (requests, max_in_flight, stop) = (requests.clone(), max_in_flight.clone(), stop.clone());
            std::thread::spawn(move || {
                for (n, conn) in listener.incoming().enumerate() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(conn) = conn else { continue };
                    let (requests, max_in_flight, in_flight, served, behavior) = (
                        requests.clone(),
                        max_in_flight.clone(),
                        in_flight.clone(),
                        served.clone(),
                        behavior.clone(),
                    );
                    std::thread::spawn(move || {
                        let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                        max_in_flight.fetch_max(now, Ordering::SeqCst);
                        handle(conn, &behavior, &requests, &served, n as u64);
                        in_flight.fetch_sub(1, Ordering::SeqCst);
                    });
                }
            });
        }
        Self {
            url: format!("http://{addr}/v1/completions"),
            requests,
            max_in_flight,
            stop,
            addr,
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop so it sees the flag.
        let _ = TcpStream::connect(&self.addr);
    }
}

fn handle(mut conn: TcpStream, behavior: &Behavior, log: &Mutex<Vec<Value>>, served: &AtomicUsize, seed: u64) {
    let mut reader = BufReader::new(conn.try_clone().unwrap());
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; len];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let req: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    log.lock().unwrap().push(req.clone());
    let index = served.fetch_add(1, Ordering::SeqCst);
    let prompt = req["prompt"].as_str().unwrap_or("").to_owned();
    let echo = || json!({"choices": [{"text": prompt.split_whitespace().last().unwrap_or("")}]});
    let (status, payload) = match behavior {
        Behavior::Echo { max_delay_ms } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            std::thread::sleep(Duration::from_millis(rng.gen_range(0..=*max_delay_ms)));
            (200, echo())
        }
        Behavior::FailFirst { n } if index < *n => (500, json!({"error": "unavailable"})),
        Behavior::FailFirst { .. } => (200, echo()),
        Behavior::SlowOn { ms } => {
            if prompt.contains("slow") {
                std::thread::sleep(Duration::from_millis(*ms));
            }
            (200, echo())
        }
        Behavior::Classifier => {
            let tokens: Vec<&str> = req["tokens"]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            let mut labels: Vec<Value> = tokens
                .iter()
                .map(|t| {
                    if t.chars().next().is_some_and(char::is_uppercase) {
                        json!("B-PER")
                    } else {
                        json!("O")
                    }
                })
                .collect();
            if tokens.contains(&"short") {
                labels.pop();
            }
            (200, json!({ "labels": labels }))
        }
    };
    let body = payload.to_string();
    let reason = if status == 200 { "OK" } else { "Internal Server Error" };
    let _ = write!(
        conn,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    let _ = conn.flush();
}

/// Every file under `dir` (relative path → bytes), except the run manifest.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut std::collections::BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if p.file_name().is_some_and(|n| n != "manifest.json") {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Manifest JSON with the wall-clock fields zeroed.
pub fn manifest_sans_time(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["started_unix_ms"] = json!(0);
    v["finished_unix_ms"] = json!(0);
    v
}
