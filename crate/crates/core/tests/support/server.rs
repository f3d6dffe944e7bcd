//! Minimal HTTP chat-completion server for fault-injection tests.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};
use valuegraph::harness::{judged_text, stub_judge};

/// Answer phrasings the server cycles through; some need the judge.
const ANSWERS: [&str; 6] = [
    "Yes, definitely.",
    "No, not at all.",
    "for sure",
    "the answer is no",
    "Unsure, hard to say.",
    "It depends entirely on context.",
];

/// FNV-1a, independent of the crate's own hashing.
pub fn fnv(text: &str) -> u64 {
    text.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100000001b3))
}

/// What the server replies to a prompt once it stops failing.
pub fn reply_for(prompt: &str) -> String {
    if let Some(text) = judged_text(prompt).filter(|_| prompt.starts_with("A judgment is")) {
        return stub_judge(text).as_str().to_string();
    }
    let h = fnv(prompt);
    format!("Thought: reasoning {}.\nAnswer: {}", h % 1000, ANSWERS[(h % ANSWERS.len() as u64) as usize])
}

pub struct FaultServer {
    pub base_url: String,
    /// Every HTTP request received, failed ones included.
    pub hits: Arc<AtomicU64>,
    pub failures_injected: Arc<AtomicU64>,
}

struct State {
    failures_per_prompt: u64,
    seen: Mutex<HashMap<String, u64>>,
    judge_override: Option<String>,
}

impl FaultServer {
    /// Fails the first `failures_per_prompt` attempts of every distinct
    /// prompt, alternating 429 and 503, then answers with [`reply_for`].
    pub fn start(failures_per_prompt: u64) -> Self {
        Self::start_with(failures_per_prompt, None)
    }

    /// Like [`FaultServer::start`], but every judge request gets `judge_reply`.
    pub fn start_with(failures_per_prompt: u64, judge_reply: Option<&str>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind fixture server");
        let base_url = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicU64::new(0));
        let failures = Arc::new(AtomicU64::new(0));
        let state = Arc::new(State {
            failures_per_prompt,
            seen: Mutex::new(HashMap::new()),
            judge_override: judge_reply.map(str::to_string),
        });
        let (h, f) = (hits.clone(), failures.clone());
        std::thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let (state, h, f) = (state.clone(), h.clone(), f.clone());
                std::thread::spawn(move || {
                    let _ = serve(stream, &state, &h, &f);
                });
            }
        });
        FaultServer { base_url, hits, failures_injected: failures }
    }
}

fn respond(stream: &mut TcpStream, status: &str, body: &str) -> std::io::Result<()> {
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}

fn serve(mut stream: TcpStream, state: &State, hits: &AtomicU64, failures: &AtomicU64) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut length = 0usize;
    let mut line = String::new();
    reader.read_line(&mut line)?;
    loop {
        line.clear();
        reader.read_line(&mut line)?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            break;
        }
        if let Some((k, v)) = trimmed.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; length];
    reader.read_exact(&mut body)?;
    hits.fetch_add(1, Ordering::SeqCst);
    let request: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let Some(prompt) = request["messages"][0]["content"].as_str() else {
        return respond(&mut stream, "400 Bad Request", r#"{"error":"no prompt"}"#);
    };
    let attempt = {
        let mut seen = state.seen.lock().unwrap();
        let n = seen.entry(prompt.to_string()).or_insert(0);
        *n += 1;
        *n
    };
    if attempt <= state.failures_per_prompt {
        failures.fetch_add(1, Ordering::SeqCst);
        let status = if attempt % 2 == 1 { "429 Too Many Requests" } else { "503 Service Unavailable" };
        return respond(&mut stream, status, r#"{"error":"try again"}"#);
    }
    let content = match (&state.judge_override, prompt.starts_with("A judgment is")) {
        (Some(r), true) => r.clone(),
        _ => reply_for(prompt),
    };
    let reply = json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]});
    respond(&mut stream, "200 OK", &reply.to_string())
}
