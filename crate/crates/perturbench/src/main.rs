//! Command-line front end for the whole pipeline: sanitize, build, verify,
//! run, score, report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use perturbench::benchgen::{
    self, build_benchmark, build_saturation_prefix, build_sequences, ingest_dataset,
    ingest_distractors, read_manifest, read_sequences, saturation_budget, write_manifest,
    write_sequences, HeuristicCounter, TokenCounter,
};
use perturbench::prompt::{
    build_baseline_item_prompt, build_saturation_prompt, build_sequential_prompt,
    build_transform_prompt, PromptBundle,
};
use perturbench::runner::{
    expand_jobs, read_raw_results, run_jobs, write_raw_results, FinishReason,
    ModelEndpointConfig, RunnerOptions, SamplingParams,
};
use perturbench::scoring::{score_sequential_run, score_transform_run, VerdictRecord};
use perturbench::transform::{self, Params, TransformId, TransformSpec};
use perturbench::{report, sanitize};

#[derive(Parser)]
#[command(name = "perturbench", version, about = "Reversible text-perturbation benchmarks for math problem sets")]
struct Cli {
    /// Override the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sanitize a raw dataset into single-line, reversal-safe statements.
    Sanitize { input: PathBuf, output: PathBuf },
    /// Apply one transform to one statement and print the payload and rule.
    Transform {
        #[arg(long)]
        id: String,
        #[arg(long)]
        text: String,
        /// Problem B for the interleave transforms.
        #[arg(long)]
        distractor: Option<String>,
    },
    /// Re-run the decoder over every item of a manifest.
    Verify {
        manifest: PathBuf,
        /// Re-check decoded statements against the original dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Build a verified benchmark manifest from a config.
    BuildBench { config: PathBuf },
    /// Build sequential-overload problem sets from a config.
    BuildSequences { config: PathBuf },
    /// Execute prompts against the configured endpoints.
    Run {
        config: PathBuf,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
    },
    /// Score raw results against the manifest or sequence set they came
    /// from.
    Score {
        raw: PathBuf,
        manifest: PathBuf,
        #[arg(long, default_value = "verdicts.jsonl")]
        out: PathBuf,
    },
    /// Aggregate verdicts into CSV tables and a JSON report.
    Report { verdicts: PathBuf, out_dir: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Transforms,
    Sequential,
    Saturation,
}

// Exit codes: 0 success, 2 config, 3 verification, 4 transport, 5 I/O.
#[derive(Debug)]
enum CliError {
    Config(Vec<String>),
    Verification(String),
    Transport(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Transport(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    fn config_one(message: impl Into<String>) -> Self {
        CliError::Config(vec![message.into()])
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(violations) => {
                write!(f, "config: {}", violations.join("; "))
            }
            CliError::Verification(m) => write!(f, "verification: {m}"),
            CliError::Transport(m) => write!(f, "transport: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<benchgen::BenchError> for CliError {
    fn from(e: benchgen::BenchError) -> Self {
        match e {
            benchgen::BenchError::RoundTripFailure(item) => {
                CliError::Verification(format!("round-trip failed for {item}"))
            }
            benchgen::BenchError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::config_one(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sanitize { input, output } => cmd_sanitize(&input, &output),
        Command::Transform {
            id,
            text,
            distractor,
        } => cmd_transform(&id, &text, distractor.as_deref(), cli.seed.unwrap_or(0)),
        Command::Verify { manifest, dataset } => cmd_verify(&manifest, dataset.as_deref()),
        Command::BuildBench { config } => cmd_build_bench(&config, cli.seed),
        Command::BuildSequences { config } => cmd_build_sequences(&config, cli.seed),
        Command::Run { config, protocol } => cmd_run(&config, protocol, cli.seed),
        Command::Score { raw, manifest, out } => cmd_score(&raw, &manifest, &out),
        Command::Report { verdicts, out_dir } => cmd_report(&verdicts, &out_dir),
    }
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
struct TransformEntry {
    id: String,
    #[serde(flatten, default)]
    params: Params,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
struct RunConfig {
    dataset: PathBuf,
    #[serde(default)]
    global_seed: u64,
    #[serde(default)]
    transforms: Option<Vec<TransformEntry>>,
    #[serde(default = "default_manifest_path")]
    manifest: PathBuf,
    #[serde(default = "default_sequences_path")]
    sequences: PathBuf,
    #[serde(default = "default_sequence_lengths")]
    sequence_lengths: Vec<usize>,
    #[serde(default)]
    distractor_corpus: Option<PathBuf>,
    #[serde(default)]
    endpoints: Vec<ModelEndpointConfig>,
    #[serde(default)]
    sampling: SamplingConfig,
    #[serde(default = "default_cache_dir")]
    cache_dir: PathBuf,
    #[serde(default = "default_raw_results_path")]
    raw_results: PathBuf,
    #[serde(default = "default_max_in_flight")]
    max_in_flight: usize,
    /// Antonym table file (original<TAB>replacement per line) applied to
    /// opposites specs that carry no inline table.
    #[serde(default)]
    antonyms_file: Option<PathBuf>,
    /// Trigger-word file (one word per line) applied to not_not specs that
    /// carry no inline lexicon.
    #[serde(default)]
    lexicon_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
struct SamplingConfig {
    transform: SamplingParams,
    sequential: SamplingParams,
    saturation: SamplingParams,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            transform: SamplingParams::transform_default(),
            sequential: SamplingParams::sequential_default(),
            saturation: SamplingParams {
                n_samples: 8,
                ..SamplingParams::transform_default()
            },
        }
    }
}

fn default_manifest_path() -> PathBuf {
    PathBuf::from("manifest.jsonl")
}

fn default_sequences_path() -> PathBuf {
    PathBuf::from("sequences.jsonl")
}

fn default_sequence_lengths() -> Vec<usize> {
    vec![1, 2, 3, 4]
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from("cache")
}

fn default_raw_results_path() -> PathBuf {
    PathBuf::from("raw_results.jsonl")
}

fn default_max_in_flight() -> usize {
    4
}

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<RunConfig, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config_one(format!("cannot read config {}: {e}", path.display())))?;
    let mut config: RunConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::config_one(format!("invalid config: {e}")))?;
    if let Some(seed) = seed_override {
        config.global_seed = seed;
    }
    Ok(config)
}

/// All violations, not just the first.
fn validate_config(config: &RunConfig, for_run: bool) -> Vec<String> {
    let mut violations = Vec::new();
    if !config.dataset.exists() {
        violations.push(format!("dataset '{}' does not exist", config.dataset.display()));
    }
    if let Some(entries) = &config.transforms {
        if entries.is_empty() {
            violations.push("transforms list is empty".into());
        }
        for entry in entries {
            match TransformId::parse(&entry.id) {
                Ok(id) => {
                    let spec = TransformSpec::new(id, entry.params.clone(), entry.seed);
                    if let Err(e) = spec.validate() {
                        violations.push(e.to_string());
                    }
                }
                Err(_) => violations.push(format!("unknown transform '{}'", entry.id)),
            }
        }
    }
    if config.max_in_flight == 0 {
        violations.push("max_in_flight must be at least 1".into());
    }
    for (label, params) in [
        ("sampling.transform", &config.sampling.transform),
        ("sampling.sequential", &config.sampling.sequential),
        ("sampling.saturation", &config.sampling.saturation),
    ] {
        for problem in params.validate() {
            violations.push(format!("{label}: {problem}"));
        }
    }
    if for_run {
        if config.endpoints.is_empty() {
            violations.push("no endpoints configured".into());
        }
        for ep in &config.endpoints {
            if !ep.base_url.starts_with("http") {
                violations.push(format!(
                    "endpoint '{}': base_url '{}' is not an http(s) URL",
                    ep.name, ep.base_url
                ));
            }
            if ep.max_context_tokens == 0 {
                violations.push(format!(
                    "endpoint '{}': max_context_tokens must be positive",
                    ep.name
                ));
            }
            if !ep.api_key_env.is_empty() && std::env::var(&ep.api_key_env).is_err() {
                violations.push(format!(
                    "endpoint '{}': environment variable {} is not set",
                    ep.name, ep.api_key_env
                ));
            }
        }
    }
    violations
}

fn config_specs(config: &RunConfig) -> Result<Vec<TransformSpec>, CliError> {
    let antonyms = config
        .antonyms_file
        .as_ref()
        .map(|path| -> Result<_, CliError> {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config_one(format!("antonyms_file: {e}")))?;
            Ok(transform::parse_antonyms(&text))
        })
        .transpose()?;
    let lexicon = config
        .lexicon_file
        .as_ref()
        .map(|path| -> Result<_, CliError> {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config_one(format!("lexicon_file: {e}")))?;
            Ok(transform::parse_lexicon(&text))
        })
        .transpose()?;

    let mut specs = match &config.transforms {
        None => TransformId::ALL
            .iter()
            .map(|&id| TransformSpec::with_defaults(id))
            .collect(),
        Some(entries) => entries
            .iter()
            .map(|entry| {
                let id = TransformId::parse(&entry.id)
                    .map_err(|e| CliError::config_one(e.to_string()))?;
                Ok(TransformSpec::new(id, entry.params.clone(), entry.seed))
            })
            .collect::<Result<Vec<_>, CliError>>()?,
    };
    for spec in &mut specs {
        if spec.id == TransformId::Opposites && spec.params.antonyms.is_none() {
            spec.params.antonyms = antonyms.clone();
        }
        if spec.id == TransformId::NotNot && spec.params.lexicon.is_none() {
            spec.params.lexicon = lexicon.clone();
        }
    }
    Ok(specs)
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_sanitize(input: &Path, output: &Path) -> Result<(), CliError> {
    let records = ingest_dataset(input)?;
    let mut file = std::fs::File::create(output)?;
    for record in &records {
        let row = serde_json::json!({
            "id": record.id,
            "problem": record.statement.as_str(),
            "answer": record.answer,
        });
        writeln!(file, "{row}")?;
    }
    println!("sanitized {} problems -> {}", records.len(), output.display());
    Ok(())
}

fn cmd_transform(
    id: &str,
    text: &str,
    distractor: Option<&str>,
    seed: u64,
) -> Result<(), CliError> {
    let id = TransformId::parse(id).map_err(|e| CliError::config_one(e.to_string()))?;
    let spec = TransformSpec::new(id, Params::default(), seed);
    let statement = sanitize::sanitize_text(text);
    let problem_b = distractor.map(sanitize::sanitize_text);
    let output = transform::encode(&spec, &statement, problem_b.as_ref())
        .map_err(|e| CliError::config_one(e.to_string()))?;
    println!("{}", output.payload);
    if !output.rule_text.is_empty() {
        println!();
        println!("{}", output.rule_text);
    }
    Ok(())
}

fn cmd_verify(manifest_path: &Path, dataset: Option<&Path>) -> Result<(), CliError> {
    let manifest = read_manifest(manifest_path)?;
    let total = manifest.items.len();
    let mut failures = benchgen::verify_manifest(&manifest);

    if let Some(dataset) = dataset {
        let records = ingest_dataset(dataset)?;
        let by_id: std::collections::HashMap<&str, &sanitize::ProblemRecord> =
            records.iter().map(|r| (r.id.as_str(), r)).collect();
        for item in &manifest.items {
            let Some(record) = by_id.get(item.problem_id.as_str()) else {
                failures.push(item.item_id.clone());
                continue;
            };
            let output = transform::TransformOutput {
                payload: item.payload.clone(),
                rule_text: item.rule_text.clone(),
                aux: item.aux.clone(),
            };
            match transform::invert(&item.spec, &output) {
                Ok(decoded) if decoded == record.statement.as_str() => {}
                _ => failures.push(item.item_id.clone()),
            }
        }
        failures.sort();
        failures.dedup();
    }

    if failures.is_empty() {
        println!("{total}/{total} round-trips OK");
        Ok(())
    } else {
        for item in &failures {
            eprintln!("round-trip failed: {item}");
        }
        Err(CliError::Verification(format!(
            "{}/{total} items failed",
            failures.len()
        )))
    }
}

fn cmd_build_bench(config_path: &Path, seed_override: Option<u64>) -> Result<(), CliError> {
    let config = load_config(config_path, seed_override)?;
    let violations = validate_config(&config, false);
    if !violations.is_empty() {
        return Err(CliError::Config(violations));
    }
    let records = ingest_dataset(&config.dataset)?;
    let specs = config_specs(&config)?;
    let manifest = build_benchmark(&records, &specs, config.global_seed)?;
    let file = std::fs::File::create(&config.manifest)?;
    write_manifest(&manifest, std::io::BufWriter::new(file))?;
    println!(
        "built {} items (seed {}) -> {}",
        manifest.items.len(),
        config.global_seed,
        config.manifest.display()
    );
    Ok(())
}

fn cmd_build_sequences(config_path: &Path, seed_override: Option<u64>) -> Result<(), CliError> {
    let config = load_config(config_path, seed_override)?;
    let violations = validate_config(&config, false);
    if !violations.is_empty() {
        return Err(CliError::Config(violations));
    }
    let records = ingest_dataset(&config.dataset)?;
    let set = build_sequences(&records, &config.sequence_lengths, config.global_seed)?;
    let file = std::fs::File::create(&config.sequences)?;
    write_sequences(&set, std::io::BufWriter::new(file))?;
    println!(
        "built {} sequences (seed {}) -> {}",
        set.items.len(),
        config.global_seed,
        config.sequences.display()
    );
    Ok(())
}

fn cmd_run(
    config_path: &Path,
    protocol: ProtocolArg,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed_override)?;
    let violations = validate_config(&config, true);
    if !violations.is_empty() {
        return Err(CliError::Config(violations));
    }

    let options = RunnerOptions {
        max_in_flight: config.max_in_flight,
        ..RunnerOptions::default()
    };

    let jobs = match protocol {
        ProtocolArg::Transforms => {
            let manifest = read_manifest(&config.manifest)?;
            let mut bundles = Vec::new();
            for item in &manifest.items {
                match item.spec.id {
                    TransformId::Baseline => bundles.push(build_baseline_item_prompt(item)),
                    TransformId::Saturation => {} // runs under its own protocol
                    _ => bundles.push(
                        build_transform_prompt(item)
                            .map_err(|e| CliError::config_one(e.to_string()))?,
                    ),
                }
            }
            expand_jobs(&bundles, &config.endpoints, config.sampling.transform)
        }
        ProtocolArg::Sequential => {
            let set = read_sequences(&config.sequences)?;
            let bundles: Vec<PromptBundle> =
                set.items.iter().map(build_sequential_prompt).collect();
            let mut jobs = Vec::new();
            for ep in &config.endpoints {
                let mut params = config.sampling.sequential;
                if let Some(max_tokens) = ep.max_tokens_sequential {
                    params.max_tokens = max_tokens;
                }
                jobs.extend(expand_jobs(&bundles, std::slice::from_ref(ep), params));
            }
            jobs
        }
        ProtocolArg::Saturation => {
            let corpus_path = config.distractor_corpus.as_ref().ok_or_else(|| {
                CliError::config_one("saturation run needs a distractor_corpus path")
            })?;
            let counter = HeuristicCounter;
            let corpus = ingest_distractors(corpus_path, &counter)?;
            let records = ingest_dataset(&config.dataset)?;
            let mut jobs = Vec::new();
            for ep in &config.endpoints {
                let budget = saturation_budget(ep.max_context_tokens);
                let prefix = build_saturation_prefix(&corpus, budget, &counter)?;
                eprintln!(
                    "endpoint {}: saturation prefix of {} tokens (budget {budget})",
                    ep.name,
                    counter.count(&prefix)
                );
                let saturation_spec =
                    TransformSpec::with_defaults(TransformId::Saturation);
                let bundles: Vec<PromptBundle> = records
                    .iter()
                    .map(|r| {
                        let mut bundle = build_saturation_prompt(&prefix, r);
                        // Align with the manifest's item ids so scoring can
                        // join expected answers.
                        bundle.item_ref = benchgen::item_id(&r.id, &saturation_spec);
                        bundle
                    })
                    .collect();
                jobs.extend(expand_jobs(
                    &bundles,
                    std::slice::from_ref(ep),
                    config.sampling.saturation,
                ));
            }
            jobs
        }
    };

    eprintln!("running {} requests (cache: {})", jobs.len(), config.cache_dir.display());
    let results = run_jobs(&jobs, &config.cache_dir, &options)
        .map_err(|e| CliError::Transport(e.to_string()))?;

    let errors = results
        .iter()
        .filter(|r| r.response.finish_reason == FinishReason::Error)
        .count();
    let file = std::fs::File::create(&config.raw_results)?;
    write_raw_results(&results, std::io::BufWriter::new(file))?;
    println!(
        "{} results ({} transport failures) -> {}",
        results.len(),
        errors,
        config.raw_results.display()
    );
    if !results.is_empty() && errors == results.len() {
        return Err(CliError::Transport(
            "every request failed; check endpoints and keys".into(),
        ));
    }
    Ok(())
}

fn cmd_score(raw_path: &Path, manifest_path: &Path, out: &Path) -> Result<(), CliError> {
    let raw = read_raw_results(raw_path)?;
    let first_line = std::fs::read_to_string(manifest_path)?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    let header: benchgen::ManifestHeader = serde_json::from_str(&first_line)
        .map_err(|e| CliError::config_one(format!("unreadable manifest header: {e}")))?;

    let verdicts = match header.kind.as_str() {
        "benchmark" => {
            let manifest = read_manifest(manifest_path)?;
            score_transform_run(&raw, &manifest)
                .map_err(|e| CliError::Verification(e.to_string()))?
        }
        "sequences" => {
            let set = read_sequences(manifest_path)?;
            score_sequential_run(&raw, &set)
                .map_err(|e| CliError::Verification(e.to_string()))?
        }
        other => {
            return Err(CliError::config_one(format!(
                "unknown manifest kind '{other}'"
            )))
        }
    };

    let mut file = std::fs::File::create(out)?;
    for verdict in &verdicts {
        let line = serde_json::to_string(verdict)
            .map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(file, "{line}")?;
    }
    println!("scored {} samples -> {}", verdicts.len(), out.display());
    Ok(())
}

fn cmd_report(verdicts_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let content = std::fs::read_to_string(verdicts_path)?;
    let mut verdicts: Vec<VerdictRecord> = Vec::new();
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        verdicts.push(
            serde_json::from_str(line)
                .map_err(|e| CliError::config_one(format!("bad verdict record: {e}")))?,
        );
    }
    let report = report::aggregate(&verdicts)
        .map_err(|e| CliError::config_one(e.to_string()))?;
    report::emit(&report, out_dir).map_err(|e| CliError::Io(e.to_string()))?;
    println!(
        "report over {} samples -> {}",
        report.metadata.samples,
        out_dir.display()
    );
    Ok(())
}
