//! Request execution against chat-completions endpoints: bounded
//! concurrency, retries with backoff, and a file-backed response cache
//! keyed by prompt bytes for free resumability.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompt::{Protocol, PromptBundle};
use crate::rng::to_hex;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("cache directory '{0}' is not writable: {1}")]
    CacheUnwritable(PathBuf, std::io::Error),
    #[error("endpoint '{endpoint}' requires environment variable {var}")]
    MissingApiKey { endpoint: String, var: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpointConfig {
    pub name: String,
    pub base_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key; empty means
    /// no auth header.
    #[serde(default)]
    pub api_key_env: String,
    pub max_context_tokens: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reasoning_effort: Option<String>,
    /// Per-endpoint sample-count override.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u32>,
    /// Per-endpoint max_tokens override for the sequential protocol.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens_sequential: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub n_samples: u32,
}

impl SamplingParams {
    /// Perturbation-protocol defaults.
    pub fn transform_default() -> Self {
        Self {
            temperature: 0.7,
            top_p: 1.0,
            max_tokens: 32_000,
            n_samples: 8,
        }
    }

    /// Sequential-overload defaults; max_tokens is usually overridden per
    /// model.
    pub fn sequential_default() -> Self {
        Self {
            temperature: 0.6,
            top_p: 0.95,
            max_tokens: 65_536,
            n_samples: 8,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.temperature < 0.0 {
            problems.push(format!("temperature {} is negative", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            problems.push(format!("top_p {} is outside (0, 1]", self.top_p));
        }
        if self.max_tokens == 0 {
            problems.push("max_tokens must be positive".into());
        }
        if self.n_samples == 0 {
            problems.push("n_samples must be at least 1".into());
        }
        problems
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Stop,
    Length,
    RefusalFilter,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    pub finish_reason: FinishReason,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
}

/// One request/response pair of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResult {
    pub item_id: String,
    pub sample_index: u32,
    pub endpoint: String,
    pub model_id: String,
    pub protocol: Protocol,
    #[serde(flatten)]
    pub response: ModelResponse,
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 5,
            base_delay_ms: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunnerOptions {
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub request_timeout: Duration,
}

impl Default for RunnerOptions {
    fn default() -> Self {
        Self {
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            request_timeout: Duration::from_secs(600),
        }
    }
}

/// A single unit of work: one bundle sampled once against one endpoint.
#[derive(Debug, Clone)]
pub struct RunJob {
    pub endpoint: ModelEndpointConfig,
    pub bundle: PromptBundle,
    pub params: SamplingParams,
    pub sample_index: u32,
}

/// Expand bundles into jobs: endpoint-major, then bundle, then sample
/// index. Output order of [`run_jobs`] matches this order exactly.
pub fn expand_jobs(
    bundles: &[PromptBundle],
    endpoints: &[ModelEndpointConfig],
    params: SamplingParams,
) -> Vec<RunJob> {
    let mut jobs = Vec::new();
    for endpoint in endpoints {
        let n = endpoint.n_samples.unwrap_or(params.n_samples);
        for bundle in bundles {
            for sample_index in 0..n {
                jobs.push(RunJob {
                    endpoint: endpoint.clone(),
                    bundle: bundle.clone(),
                    params,
                    sample_index,
                });
            }
        }
    }
    jobs
}

/// Cache key over everything that determines a response: endpoint, model,
/// prompt bytes, sampling parameters, and the sample index.
pub fn cache_key(job: &RunJob) -> String {
    let mut hasher = Sha256::new();
    for part in [
        job.endpoint.name.as_str(),
        job.endpoint.model_id.as_str(),
        job.bundle.system.as_str(),
        job.bundle.user.as_str(),
    ] {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    hasher.update(job.params.temperature.to_le_bytes());
    hasher.update(job.params.top_p.to_le_bytes());
    hasher.update(job.params.max_tokens.to_le_bytes());
    hasher.update(job.sample_index.to_le_bytes());
    to_hex(&hasher.finalize())
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    reasoning_effort: Option<&'a str>,
}

#[derive(Deserialize)]
struct ChatResponse {
    #[serde(default)]
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: Option<String>,
}

#[derive(Deserialize, Default)]
struct ChatUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

fn parse_finish_reason(reason: Option<&str>) -> FinishReason {
    match reason {
        Some("length") => FinishReason::Length,
        Some("content_filter") | Some("refusal") => FinishReason::RefusalFilter,
        _ => FinishReason::Stop,
    }
}

/// Execute the jobs with at most `max_in_flight` requests outstanding.
/// Results come back in job order regardless of completion order; cached
/// keys are served from disk and never re-requested.
pub fn run_jobs(
    jobs: &[RunJob],
    cache_dir: &Path,
    options: &RunnerOptions,
) -> Result<Vec<RawResult>, RunnerError> {
    std::fs::create_dir_all(cache_dir)
        .map_err(|e| RunnerError::CacheUnwritable(cache_dir.to_path_buf(), e))?;
    let probe = cache_dir.join(".write-probe");
    std::fs::write(&probe, b"ok")
        .map_err(|e| RunnerError::CacheUnwritable(cache_dir.to_path_buf(), e))?;
    std::fs::remove_file(&probe).ok();

    for job in jobs {
        if !job.endpoint.api_key_env.is_empty()
            && std::env::var(&job.endpoint.api_key_env).is_err()
        {
            return Err(RunnerError::MissingApiKey {
                endpoint: job.endpoint.name.clone(),
                var: job.endpoint.api_key_env.clone(),
            });
        }
    }

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(options.request_timeout))
        .http_status_as_error(false)
        .build()
        .into();

    let results: Mutex<Vec<Option<RawResult>>> = Mutex::new(vec![None; jobs.len()]);
    let next_job = AtomicUsize::new(0);
    let workers = options.max_in_flight.max(1).min(jobs.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next_job.fetch_add(1, Ordering::SeqCst);
                if index >= jobs.len() {
                    break;
                }
                let job = &jobs[index];
                let result = execute_job(&agent, job, cache_dir, &options.retry);
                results.lock().unwrap()[index] = Some(result);
            });
        }
    });

    Ok(results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job index filled"))
        .collect())
}

fn execute_job(
    agent: &ureq::Agent,
    job: &RunJob,
    cache_dir: &Path,
    retry: &RetryPolicy,
) -> RawResult {
    let key = cache_key(job);
    let cache_path = cache_dir.join(format!("{key}.json"));
    if let Ok(bytes) = std::fs::read(&cache_path) {
        if let Ok(response) = serde_json::from_slice::<ModelResponse>(&bytes) {
            return assemble(job, response);
        }
    }

    let response = request_with_retry(agent, job, retry);
    // Do not cache transport errors; a rerun should try again.
    if response.finish_reason != FinishReason::Error {
        if let Ok(bytes) = serde_json::to_vec(&response) {
            let tmp = cache_dir.join(format!("{key}.tmp"));
            if std::fs::write(&tmp, &bytes).is_ok() {
                std::fs::rename(&tmp, &cache_path).ok();
            }
        }
    }
    assemble(job, response)
}

fn assemble(job: &RunJob, response: ModelResponse) -> RawResult {
    RawResult {
        item_id: job.bundle.item_ref.clone(),
        sample_index: job.sample_index,
        endpoint: job.endpoint.name.clone(),
        model_id: job.endpoint.model_id.clone(),
        protocol: job.bundle.protocol,
        response,
    }
}

fn request_with_retry(agent: &ureq::Agent, job: &RunJob, retry: &RetryPolicy) -> ModelResponse {
    let started = Instant::now();
    let mut attempt = 0u32;
    loop {
        match request_once(agent, job) {
            Ok(mut response) => {
                response.latency_ms = started.elapsed().as_millis() as u64;
                return response;
            }
            Err(retriable) => {
                if attempt >= retry.max_retries || !retriable {
                    return ModelResponse {
                        text: String::new(),
                        finish_reason: FinishReason::Error,
                        prompt_tokens: 0,
                        completion_tokens: 0,
                        latency_ms: started.elapsed().as_millis() as u64,
                    };
                }
                let backoff = retry.base_delay_ms.saturating_mul(1 << attempt.min(16));
                std::thread::sleep(Duration::from_millis(backoff));
                attempt += 1;
            }
        }
    }
}

/// One POST to the chat-completions endpoint. The error carries whether
/// the failure is worth retrying.
fn request_once(agent: &ureq::Agent, job: &RunJob) -> Result<ModelResponse, bool> {
    let url = format!(
        "{}/chat/completions",
        job.endpoint.base_url.trim_end_matches('/')
    );
    let body = ChatRequest {
        model: &job.endpoint.model_id,
        messages: vec![
            ChatMessage {
                role: "system",
                content: &job.bundle.system,
            },
            ChatMessage {
                role: "user",
                content: &job.bundle.user,
            },
        ],
        temperature: job.params.temperature,
        top_p: job.params.top_p,
        max_tokens: job.params.max_tokens,
        n: 1,
        reasoning_effort: job.endpoint.reasoning_effort.as_deref(),
    };

    let mut request = agent.post(&url);
    if !job.endpoint.api_key_env.is_empty() {
        if let Ok(key) = std::env::var(&job.endpoint.api_key_env) {
            request = request.header("authorization", &format!("Bearer {key}"));
        }
    }

    let mut response = request.send_json(&body).map_err(|_| true)?;
    let status = response.status().as_u16();
    if status == 429 || status >= 500 {
        return Err(true);
    }
    if status >= 400 {
        return Err(false);
    }
    let parsed: ChatResponse = response.body_mut().read_json().map_err(|_| false)?;
    let choice = parsed.choices.into_iter().next().ok_or(false)?;
    let usage = parsed.usage.unwrap_or_default();
    Ok(ModelResponse {
        text: choice.message.content.unwrap_or_default(),
        finish_reason: parse_finish_reason(choice.finish_reason.as_deref()),
        prompt_tokens: usage.prompt_tokens,
        completion_tokens: usage.completion_tokens,
        latency_ms: 0,
    })
}

pub fn write_raw_results<W: Write>(results: &[RawResult], mut writer: W) -> std::io::Result<()> {
    for result in results {
        serde_json::to_writer(&mut writer, result)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_raw_results(path: &Path) -> std::io::Result<Vec<RawResult>> {
    let content = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let result: RawResult = serde_json::from_str(line)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        out.push(result);
    }
    Ok(out)
}
