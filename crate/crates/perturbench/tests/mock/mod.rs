//! Minimal in-process chat-completions server for exercising the runner
//! and scorer without a real model behind them.

// Shared between test targets; not every target uses every constructor.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use perturbench::benchgen::BenchmarkManifest;
use perturbench::transform::{self, TransformOutput};

/// What a mock sends back: a normal chat completion or a bare HTTP status.
pub enum Reply {
    Chat {
        content: String,
        finish_reason: &'static str,
    },
    Status(u16),
}

impl Reply {
    fn chat(content: impl Into<String>, finish_reason: &'static str) -> Self {
        Reply::Chat {
            content: content.into(),
            finish_reason,
        }
    }
}

type Handler = dyn Fn(&str) -> Reply + Send + Sync;

pub struct MockServer {
    addr: std::net::SocketAddr,
    hits: Arc<AtomicUsize>,
}

impl MockServer {
    /// Decodes the matched item's payload with the real inverter and boxes
    /// the expected answer, after a decoy intermediate box. Requests that
    /// match nothing or fail to invert get a wrong answer so the failure
    /// shows up in scoring.
    pub fn perfect_decoder(manifest: &BenchmarkManifest) -> Self {
        let items: Vec<_> = manifest.items.clone();
        Self::spawn(Arc::new(move |user: &str| {
            let matched = items
                .iter()
                .filter_map(|item| user.rfind(&item.payload).map(|pos| (pos, item)))
                .max_by_key(|(pos, _)| *pos);
            let Some((_, item)) = matched else {
                return Reply::chat("no item matched \\boxed{888888}", "stop");
            };
            let output = TransformOutput {
                payload: item.payload.clone(),
                rule_text: item.rule_text.clone(),
                aux: item.aux.clone(),
            };
            match transform::invert(&item.spec, &output) {
                Ok(decoded) => Reply::chat(
                    format!(
                        "Reversing the transformation gives: {decoded}\n\
                         An intermediate check value: \\boxed{{1000000}}.\n\
                         Solving the problem, the final answer is \\boxed{{{}}}.",
                        item.expected_answer
                    ),
                    "stop",
                ),
                Err(e) => Reply::chat(format!("decode failed ({e}) \\boxed{{999999}}"), "stop"),
            }
        }))
    }

    /// Always declines, completing normally with no boxed answer.
    pub fn refuser() -> Self {
        Self::spawn(Arc::new(|_| {
            Reply::chat("I cannot process this request.", "stop")
        }))
    }

    /// Always truncates at the token limit without reaching an answer.
    pub fn length_cutoff() -> Self {
        Self::spawn(Arc::new(|_| {
            Reply::chat(
                "Let me think about the first problem step by step, carefully",
                "length",
            )
        }))
    }

    /// Replies 429 to the first `failures` requests, then answers normally.
    pub fn rate_limited_then_ok(failures: usize, answer: u32) -> Self {
        let remaining = AtomicUsize::new(failures);
        Self::spawn(Arc::new(move |_| {
            if remaining
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
                .is_ok()
            {
                Reply::Status(429)
            } else {
                Reply::chat(format!("recovered; \\boxed{{{answer}}}"), "stop")
            }
        }))
    }

    fn spawn(handler: Arc<Handler>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock listener");
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let hit_counter = Arc::clone(&hits);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let handler = Arc::clone(&handler);
                hit_counter.fetch_add(1, Ordering::SeqCst);
                // One thread per connection keeps concurrent runner workers
                // from serializing on slow peers.
                std::thread::spawn(move || {
                    let _ = serve_connection(stream, handler.as_ref());
                });
            }
        });
        Self { addr, hits }
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Requests served so far.
    pub fn hit_count(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

fn serve_connection(stream: TcpStream, handler: &Handler) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?; // request line
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let trimmed = header.trim();
        if trimmed.is_empty() {
            break;
        }
        if let Some((name, value)) = trimmed.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    let user = serde_json::from_slice::<serde_json::Value>(&body)
        .ok()
        .and_then(|v| {
            v["messages"].as_array().and_then(|messages| {
                messages
                    .iter()
                    .rev()
                    .find(|m| m["role"] == "user")
                    .and_then(|m| m["content"].as_str().map(str::to_string))
            })
        })
        .unwrap_or_default();

    let mut stream = stream;
    match handler(&user) {
        Reply::Status(code) => {
            write!(
                stream,
                "HTTP/1.1 {code} Mock Error\r\ncontent-length: 0\r\nconnection: close\r\n\r\n"
            )?;
        }
        Reply::Chat {
            content,
            finish_reason,
        } => {
            let completion_tokens = (content.len() / 4).max(1);
            let response_body = serde_json::json!({
                "choices": [{
                    "index": 0,
                    "message": {"role": "assistant", "content": content},
                    "finish_reason": finish_reason,
                }],
                "usage": {
                    "prompt_tokens": (user.len() / 4).max(1),
                    "completion_tokens": completion_tokens,
                    "total_tokens": (user.len() / 4).max(1) + completion_tokens,
                }
            })
            .to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                response_body.len(),
                response_body
            )?;
        }
    }
    stream.flush()
}
