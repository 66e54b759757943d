//! Benchmark assembly: dataset ingestion, distractor pairing, manifest
//! construction with built-in round-trip verification, saturation prefixes,
//! and sequential problem sets.
//!
//! Manifests rebuild byte-identically from the same dataset bytes and
//! global seed. Every item is verified by running the exact decoder at
//! build time; any mismatch aborts the build rather than shipping a broken
//! item.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::rng::{derive_seed, sha256_hex, SplitMix64};
use crate::sanitize::{sanitize, ProblemRecord, RawProblem, SanitizeError};
use crate::transform::{self, TransformError, TransformSpec};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("duplicate problem id '{0}'")]
    DuplicateId(String),
    #[error(transparent)]
    Sanitize(#[from] SanitizeError),
    #[error("need at least {needed} problems, have {have}")]
    InsufficientProblems { needed: usize, have: usize },
    #[error("round-trip verification failed for item '{0}'")]
    RoundTripFailure(String),
    #[error("transform '{item}' failed to encode: {source}")]
    Encode {
        item: String,
        source: TransformError,
    },
    #[error("distractor corpus cannot reach 99% of a {budget}-token budget (got {got})")]
    CorpusExhausted { budget: usize, got: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("manifest format error: {0}")]
    ManifestFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One benchmark task: a transformed problem plus everything needed to
/// decode and score it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub item_id: String,
    pub problem_id: String,
    pub spec: TransformSpec,
    pub payload: String,
    pub rule_text: String,
    #[serde(default)]
    pub aux: transform::Aux,
    pub expected_answer: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub version: u32,
    pub kind: String,
    pub digest_algo: String,
    pub dataset_digest: String,
    pub global_seed: u64,
    /// Unix timestamp, populated only on request; manifests are byte
    /// deterministic by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub header: ManifestHeader,
    pub items: Vec<BenchmarkItem>,
}

/// Read a line-delimited dataset of `{"id", "problem", "answer"}` records,
/// sanitizing every statement. Order is preserved; duplicate ids are
/// rejected.
pub fn ingest_dataset(path: &Path) -> Result<Vec<ProblemRecord>, BenchError> {
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawProblem =
            serde_json::from_str(&line).map_err(|e| BenchError::ParseError {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if raw.id.is_empty() {
            return Err(BenchError::ParseError {
                line: idx + 1,
                message: "empty id".into(),
            });
        }
        if !seen.insert(raw.id.clone()) {
            return Err(BenchError::DuplicateId(raw.id));
        }
        records.push(sanitize(&raw, &source)?);
    }
    Ok(records)
}

/// Problem B for record `i` is the next record, wrapping around; a problem
/// never pairs with itself.
pub fn pair_distractor(records: &[ProblemRecord], i: usize) -> Result<&ProblemRecord, BenchError> {
    if records.len() < 2 {
        return Err(BenchError::InsufficientProblems {
            needed: 2,
            have: records.len(),
        });
    }
    Ok(&records[(i + 1) % records.len()])
}

/// Content hash of a sanitized problem set, independent of the source
/// file's formatting.
pub fn dataset_digest(records: &[ProblemRecord]) -> String {
    let mut canonical = String::new();
    for r in records {
        canonical.push_str(&r.id);
        canonical.push('\t');
        canonical.push_str(r.statement.as_str());
        canonical.push('\t');
        canonical.push_str(&r.answer.to_string());
        canonical.push('\n');
    }
    sha256_hex(canonical.as_bytes())
}

pub fn item_id(problem_id: &str, spec: &TransformSpec) -> String {
    format!("{problem_id}::{}", spec.id)
}

/// Build one verified item for every `(record, spec)` pair, in (problem,
/// spec) order. Each item gets its own seed derived from the global seed,
/// and the build aborts on the first decode mismatch.
pub fn build_benchmark(
    records: &[ProblemRecord],
    specs: &[TransformSpec],
    global_seed: u64,
) -> Result<BenchmarkManifest, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyInput("no problem records".into()));
    }
    if specs.is_empty() {
        return Err(BenchError::EmptyInput("no transform specs".into()));
    }
    if specs.iter().any(|s| s.id.needs_distractor()) && records.len() < 2 {
        return Err(BenchError::InsufficientProblems {
            needed: 2,
            have: records.len(),
        });
    }

    let tasks: Vec<(usize, &TransformSpec)> = records
        .iter()
        .enumerate()
        .flat_map(|(i, _)| specs.iter().map(move |s| (i, s)))
        .collect();

    let items: Vec<Result<BenchmarkItem, BenchError>> = exec::map_ordered(&tasks, |&(i, spec)| {
        build_item(records, i, spec, global_seed)
    });
    let items = items.into_iter().collect::<Result<Vec<_>, _>>()?;

    Ok(BenchmarkManifest {
        header: ManifestHeader {
            version: MANIFEST_VERSION,
            kind: "benchmark".into(),
            digest_algo: "sha256".into(),
            dataset_digest: dataset_digest(records),
            global_seed,
            created_unix: None,
        },
        items,
    })
}

fn build_item(
    records: &[ProblemRecord],
    index: usize,
    spec: &TransformSpec,
    global_seed: u64,
) -> Result<BenchmarkItem, BenchError> {
    let record = &records[index];
    let seeded = spec.with_seed(derive_seed(global_seed, &[&record.id, spec.id.as_str()]));
    let id = item_id(&record.id, &seeded);

    let distractor = if seeded.id.needs_distractor() {
        Some(pair_distractor(records, index)?)
    } else {
        None
    };
    let mut output = transform::encode(&seeded, &record.statement, distractor.map(|d| &d.statement))
        .map_err(|source| BenchError::Encode {
            item: id.clone(),
            source,
        })?;
    if let Some(d) = distractor {
        output.aux.distractor_id = Some(d.id.clone());
    }

    check_round_trip(&seeded, &output, record.statement.as_str(), &id)?;

    Ok(BenchmarkItem {
        item_id: id,
        problem_id: record.id.clone(),
        spec: seeded,
        payload: output.payload,
        rule_text: output.rule_text,
        aux: output.aux,
        expected_answer: record.answer,
    })
}

/// Verification firewall: the decoder must reproduce the statement exactly,
/// or the item (and with it the whole build) is rejected.
fn check_round_trip(
    spec: &TransformSpec,
    output: &transform::TransformOutput,
    statement: &str,
    id: &str,
) -> Result<(), BenchError> {
    let decoded = transform::invert(spec, output)
        .map_err(|_| BenchError::RoundTripFailure(id.to_string()))?;
    if decoded != statement {
        return Err(BenchError::RoundTripFailure(id.to_string()));
    }
    Ok(())
}

/// Re-run the decoder over every item of an existing manifest. Returns the
/// ids of items that fail structural decoding or re-encode consistency.
pub fn verify_manifest(manifest: &BenchmarkManifest) -> Vec<String> {
    let failures: Vec<Option<String>> = exec::map_ordered(&manifest.items, |item| {
        if verify_item(item) {
            None
        } else {
            Some(item.item_id.clone())
        }
    });
    failures.into_iter().flatten().collect()
}

fn verify_item(item: &BenchmarkItem) -> bool {
    if item.spec.validate().is_err() {
        return false;
    }
    let output = transform::TransformOutput {
        payload: item.payload.clone(),
        rule_text: item.rule_text.clone(),
        aux: item.aux.clone(),
    };
    let Ok(decoded) = transform::invert(&item.spec, &output) else {
        return false;
    };
    // The decoded statement must be sanitize-stable.
    let statement = crate::sanitize::sanitize_text(&decoded);
    if statement.as_str() != decoded || statement.is_empty() {
        return false;
    }
    if item.spec.id.needs_distractor() {
        // The distractor text is not stored, so the decode itself (tag
        // structure, unit counts) is the verifiable part.
        return item.aux.distractor_id.is_some();
    }
    // Without a distractor the encoder is fully replayable: the payload and
    // companion data must reproduce exactly.
    match transform::encode(&item.spec, &statement, None) {
        Ok(again) => again.payload == item.payload && again.aux == item.aux,
        Err(_) => false,
    }
}

pub fn write_manifest<W: Write>(manifest: &BenchmarkManifest, mut writer: W) -> Result<(), BenchError> {
    serde_json::to_writer(&mut writer, &manifest.header)
        .map_err(|e| BenchError::ManifestFormat(e.to_string()))?;
    writer.write_all(b"\n")?;
    for item in &manifest.items {
        serde_json::to_writer(&mut writer, item)
            .map_err(|e| BenchError::ManifestFormat(e.to_string()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<BenchmarkManifest, BenchError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| BenchError::ManifestFormat("empty manifest".into()))??;
    let header: ManifestHeader = serde_json::from_str(&header_line)
        .map_err(|e| BenchError::ManifestFormat(format!("bad header: {e}")))?;
    if header.kind != "benchmark" {
        return Err(BenchError::ManifestFormat(format!(
            "expected a benchmark manifest, found kind '{}'",
            header.kind
        )));
    }
    let mut items = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: BenchmarkItem = serde_json::from_str(&line).map_err(|e| BenchError::ParseError {
            line: idx + 2,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(BenchmarkManifest { header, items })
}

// ---------------------------------------------------------------------------
// Distractor corpus and saturation prefixes
// ---------------------------------------------------------------------------

/// Estimates token counts for budget accounting. The default heuristic is
/// four characters per token; an exact tokenizer can be plugged in without
/// changing any assembled text.
pub trait TokenCounter: Sync {
    fn count(&self, text: &str) -> usize;
}

/// Four characters per token.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicCounter;

impl TokenCounter for HeuristicCounter {
    fn count(&self, text: &str) -> usize {
        text.chars().count() / 4
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistractorEntry {
    pub question: String,
    #[serde(rename = "solution")]
    pub solution_text: String,
    #[serde(default)]
    pub token_estimate: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistractorCorpus {
    pub entries: Vec<DistractorEntry>,
    pub source: String,
}

/// Remove every `<think>...</think>` region; an unterminated `<think>`
/// drops the rest of the string.
pub fn strip_think_regions(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    loop {
        match rest.find("<think>") {
            None => {
                out.push_str(rest);
                return out;
            }
            Some(start) => {
                out.push_str(&rest[..start]);
                let after = &rest[start + "<think>".len()..];
                match after.find("</think>") {
                    Some(end) => rest = &after[end + "</think>".len()..],
                    None => return out,
                }
            }
        }
    }
}

pub fn ingest_distractors(path: &Path, counter: &dyn TokenCounter) -> Result<DistractorCorpus, BenchError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut entry: DistractorEntry =
            serde_json::from_str(&line).map_err(|e| BenchError::ParseError {
                line: idx + 1,
                message: e.to_string(),
            })?;
        entry.question = strip_think_regions(&entry.question);
        entry.solution_text = strip_think_regions(&entry.solution_text);
        entry.token_estimate =
            counter.count(&entry.question) + counter.count(&entry.solution_text);
        entries.push(entry);
    }
    Ok(DistractorCorpus {
        entries,
        source: path.to_string_lossy().into_owned(),
    })
}

fn format_entry(entry: &DistractorEntry) -> String {
    format!(
        "Question: {}\nSolution: {}\n\n",
        entry.question, entry.solution_text
    )
}

/// The token budget that fills 75% of a model's context window.
pub fn saturation_budget(max_context_tokens: usize) -> usize {
    max_context_tokens * 3 / 4
}

/// Greedily concatenate formatted Q/A entries until the next one would
/// exceed the budget. The returned prefix counts into `[0.99 * budget,
/// budget]` or the corpus is declared exhausted.
pub fn build_saturation_prefix(
    corpus: &DistractorCorpus,
    budget_tokens: usize,
    counter: &dyn TokenCounter,
) -> Result<String, BenchError> {
    if budget_tokens == 0 {
        return Err(BenchError::EmptyInput("budget_tokens must be positive".into()));
    }
    let mut blocks: Vec<String> = Vec::new();
    let mut running = 0usize;
    for entry in &corpus.entries {
        let block = format_entry(entry);
        let cost = counter.count(&block);
        if running + cost > budget_tokens {
            break;
        }
        running += cost;
        blocks.push(block);
    }
    // The additive running total can drift from a whole-string count, so
    // settle against the real measurement and trim if needed.
    let mut prefix: String = blocks.concat();
    let mut measured = counter.count(&prefix);
    while measured > budget_tokens {
        let block = blocks.pop().ok_or(BenchError::CorpusExhausted {
            budget: budget_tokens,
            got: 0,
        })?;
        prefix.truncate(prefix.len() - block.len());
        measured = counter.count(&prefix);
    }
    let floor = (budget_tokens as f64 * 0.99).ceil() as usize;
    if measured < floor {
        return Err(BenchError::CorpusExhausted {
            budget: budget_tokens,
            got: measured,
        });
    }
    Ok(prefix)
}

// ---------------------------------------------------------------------------
// Sequential overload problem sets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceProblem {
    pub id: String,
    pub statement: String,
}

/// One sequential-overload task: distractor problems followed by the
/// target, which is always last and is the only one scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceItem {
    pub sequence_id: String,
    pub length: usize,
    pub target_id: String,
    pub expected_answer: u32,
    pub problems: Vec<SequenceProblem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSet {
    pub header: ManifestHeader,
    pub items: Vec<SequenceItem>,
}

/// For every requested length `k` and every target problem, pick `k - 1`
/// seeded distinct distractors (never the target) and order them before it.
pub fn build_sequences(
    records: &[ProblemRecord],
    lengths: &[usize],
    global_seed: u64,
) -> Result<SequenceSet, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyInput("no problem records".into()));
    }
    if lengths.is_empty() {
        return Err(BenchError::EmptyInput("no sequence lengths".into()));
    }
    let mut items = Vec::new();
    for &k in lengths {
        if k < 1 || k > records.len() {
            return Err(BenchError::InsufficientProblems {
                needed: k.max(1),
                have: records.len(),
            });
        }
        for (t, target) in records.iter().enumerate() {
            let mut rng = SplitMix64::new(derive_seed(
                global_seed,
                &[&target.id, &format!("seq{k}")],
            ));
            let mut pool: Vec<usize> = (0..records.len()).filter(|&i| i != t).collect();
            rng.shuffle(&mut pool);
            let mut problems: Vec<SequenceProblem> = pool[..k - 1]
                .iter()
                .map(|&i| SequenceProblem {
                    id: records[i].id.clone(),
                    statement: records[i].statement.as_str().to_string(),
                })
                .collect();
            problems.push(SequenceProblem {
                id: target.id.clone(),
                statement: target.statement.as_str().to_string(),
            });
            items.push(SequenceItem {
                sequence_id: format!("{}::k{}", target.id, k),
                length: k,
                target_id: target.id.clone(),
                expected_answer: target.answer,
                problems,
            });
        }
    }
    Ok(SequenceSet {
        header: ManifestHeader {
            version: MANIFEST_VERSION,
            kind: "sequences".into(),
            digest_algo: "sha256".into(),
            dataset_digest: dataset_digest(records),
            global_seed,
            created_unix: None,
        },
        items,
    })
}

pub fn write_sequences<W: Write>(set: &SequenceSet, mut writer: W) -> Result<(), BenchError> {
    serde_json::to_writer(&mut writer, &set.header)
        .map_err(|e| BenchError::ManifestFormat(e.to_string()))?;
    writer.write_all(b"\n")?;
    for item in &set.items {
        serde_json::to_writer(&mut writer, item)
            .map_err(|e| BenchError::ManifestFormat(e.to_string()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_sequences(path: &Path) -> Result<SequenceSet, BenchError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| BenchError::ManifestFormat("empty sequence set".into()))??;
    let header: ManifestHeader = serde_json::from_str(&header_line)
        .map_err(|e| BenchError::ManifestFormat(format!("bad header: {e}")))?;
    if header.kind != "sequences" {
        return Err(BenchError::ManifestFormat(format!(
            "expected a sequence set, found kind '{}'",
            header.kind
        )));
    }
    let mut items = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).map_err(|e| BenchError::ParseError {
            line: idx + 2,
            message: e.to_string(),
        })?);
    }
    Ok(SequenceSet { header, items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sanitize::sanitize_text;
    use crate::transform::TransformId;

    fn records(n: usize) -> Vec<ProblemRecord> {
        (0..n)
            .map(|i| ProblemRecord {
                id: format!("q{i}"),
                statement: sanitize_text(&format!(
                    "Let $x_{{{i}}}$ be the least prime number plus {i}. Find the value of $x_{{{i}}}$."
                )),
                answer: (i as u32 * 37) % 1000,
                source: "test".into(),
            })
            .collect()
    }

    #[test]
    fn distractor_pairing_wraps_around() {
        let recs = records(30);
        assert_eq!(pair_distractor(&recs, 0).unwrap().id, "q1");
        assert_eq!(pair_distractor(&recs, 29).unwrap().id, "q0");
    }

    #[test]
    fn pairing_needs_two_problems() {
        let recs = records(1);
        assert!(matches!(
            pair_distractor(&recs, 0),
            Err(BenchError::InsufficientProblems { .. })
        ));
    }

    #[test]
    fn build_produces_the_cartesian_product() {
        let recs = records(5);
        let specs: Vec<TransformSpec> = TransformId::ALL
            .iter()
            .map(|&id| TransformSpec::with_defaults(id))
            .collect();
        let manifest = build_benchmark(&recs, &specs, 7).unwrap();
        assert_eq!(manifest.items.len(), 5 * 16);
    }

    #[test]
    fn baseline_items_carry_the_statement_verbatim() {
        let recs = records(2);
        let specs = vec![TransformSpec::with_defaults(TransformId::Baseline)];
        let manifest = build_benchmark(&recs, &specs, 7).unwrap();
        assert_eq!(manifest.items[0].payload, recs[0].statement.as_str());
        assert!(manifest.items[0].rule_text.is_empty());
    }

    #[test]
    fn manifests_are_deterministic() {
        let recs = records(6);
        let specs: Vec<TransformSpec> = [
            TransformId::Wrappers,
            TransformId::RailFence,
            TransformId::InterleaveWord,
        ]
        .iter()
        .map(|&id| TransformSpec::with_defaults(id))
        .collect();
        let a = build_benchmark(&recs, &specs, 99).unwrap();
        let b = build_benchmark(&recs, &specs, 99).unwrap();
        let mut bytes_a = Vec::new();
        let mut bytes_b = Vec::new();
        write_manifest(&a, &mut bytes_a).unwrap();
        write_manifest(&b, &mut bytes_b).unwrap();
        assert_eq!(bytes_a, bytes_b);

        let c = build_benchmark(&recs, &specs, 100).unwrap();
        let mut bytes_c = Vec::new();
        write_manifest(&c, &mut bytes_c).unwrap();
        assert_ne!(bytes_a, bytes_c, "different seed, different bytes");
    }

    #[test]
    fn manifest_round_trips_through_the_file_format() {
        let recs = records(3);
        let specs = vec![
            TransformSpec::with_defaults(TransformId::SymbolReversal),
            TransformSpec::with_defaults(TransformId::SnakeVertical),
        ];
        let manifest = build_benchmark(&recs, &specs, 5).unwrap();
        let mut bytes = Vec::new();
        write_manifest(&manifest, &mut bytes).unwrap();
        let dir = std::env::temp_dir().join(format!("pb-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.jsonl");
        std::fs::write(&path, &bytes).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back, manifest);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn verify_catches_a_corrupted_item() {
        let recs = records(3);
        let specs = vec![
            TransformSpec::with_defaults(TransformId::RailFence),
            TransformSpec::with_defaults(TransformId::NotNot),
        ];
        let mut manifest = build_benchmark(&recs, &specs, 5).unwrap();
        assert!(verify_manifest(&manifest).is_empty());
        // A payload that is no longer a well-formed grid.
        manifest.items[0].payload = "tampered payload".into();
        // Companion data pointing at words that are not an inserted pair.
        manifest.items[3].aux.not_not_positions = Some(vec![0]);
        let failures = verify_manifest(&manifest);
        assert_eq!(
            failures,
            vec![
                manifest.items[0].item_id.clone(),
                manifest.items[3].item_id.clone()
            ]
        );
    }

    #[test]
    fn ingest_reports_parse_errors_with_line_numbers() {
        let dir = std::env::temp_dir().join(format!("pb-ingest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"id\": \"q1\", \"problem\": \"fine\", \"answer\": 1}\n{\"id\": \"q2\", \"problem\": \"missing answer\"}\n",
        )
        .unwrap();
        match ingest_dataset(&path).unwrap_err() {
            BenchError::ParseError { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn ingest_rejects_duplicate_ids() {
        let dir = std::env::temp_dir().join(format!("pb-ingest-dup-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dup.jsonl");
        std::fs::write(
            &path,
            "{\"id\": \"q7\", \"problem\": \"one\", \"answer\": 1}\n{\"id\": \"q7\", \"problem\": \"two\", \"answer\": 2}\n",
        )
        .unwrap();
        match ingest_dataset(&path).unwrap_err() {
            BenchError::DuplicateId(id) => assert_eq!(id, "q7"),
            other => panic!("unexpected: {other}"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn round_trip_firewall_rejects_a_corrupted_encoder() {
        // A decoder double whose payload no longer matches the statement
        // must abort the build, never ship silently.
        let recs = records(2);
        let spec = TransformSpec::with_defaults(TransformId::WordReversal);
        let good = transform::encode(&spec, &recs[0].statement, None).unwrap();
        check_round_trip(&spec, &good, recs[0].statement.as_str(), "item-ok").unwrap();

        let mut corrupted = good.clone();
        corrupted.payload = reverse_extra_word(&corrupted.payload);
        match check_round_trip(&spec, &corrupted, recs[0].statement.as_str(), "item-bad") {
            Err(BenchError::RoundTripFailure(id)) => assert_eq!(id, "item-bad"),
            other => panic!("expected RoundTripFailure, got {other:?}"),
        }
    }

    fn reverse_extra_word(payload: &str) -> String {
        format!("{payload} extra")
    }

    #[test]
    fn think_regions_are_stripped() {
        assert_eq!(strip_think_regions("<think>plan</think>ans"), "ans");
        assert_eq!(
            strip_think_regions("a<think>x</think>b<think>y</think>c"),
            "abc"
        );
        assert_eq!(strip_think_regions("keep <think>dangling"), "keep ");
    }

    #[test]
    fn saturation_prefix_lands_in_the_budget_window() {
        let corpus = DistractorCorpus {
            entries: (0..200)
                .map(|i| DistractorEntry {
                    question: format!("What is {i} plus {i}?"),
                    solution_text: format!("Adding {i} and {i} gives {}.", 2 * i),
                    token_estimate: 0,
                })
                .collect(),
            source: "synthetic".into(),
        };
        let counter = HeuristicCounter;
        let budget = 1000;
        let prefix = build_saturation_prefix(&corpus, budget, &counter).unwrap();
        let measured = counter.count(&prefix);
        assert!(measured <= budget);
        assert!(measured >= 990, "measured {measured}");
    }

    #[test]
    fn tiny_corpus_cannot_fill_a_big_budget() {
        let corpus = DistractorCorpus {
            entries: vec![DistractorEntry {
                question: "q".into(),
                solution_text: "s".into(),
                token_estimate: 0,
            }],
            source: "tiny".into(),
        };
        assert!(matches!(
            build_saturation_prefix(&corpus, 10_000, &HeuristicCounter),
            Err(BenchError::CorpusExhausted { .. })
        ));
    }

    #[test]
    fn sequences_place_the_target_last_without_repeats() {
        let recs = records(10);
        let set = build_sequences(&recs, &[1, 3], 42).unwrap();
        assert_eq!(set.items.len(), 20);
        for item in &set.items {
            assert_eq!(item.problems.last().unwrap().id, item.target_id);
            let ids: HashSet<&str> = item.problems.iter().map(|p| p.id.as_str()).collect();
            assert_eq!(ids.len(), item.problems.len(), "no repeats in {}", item.sequence_id);
            assert_eq!(item.problems.len(), item.length);
        }
    }

    #[test]
    fn single_problem_sequence_is_just_the_target() {
        let recs = records(4);
        let set = build_sequences(&recs, &[1], 42).unwrap();
        for item in &set.items {
            assert_eq!(item.problems.len(), 1);
            assert_eq!(item.problems[0].id, item.target_id);
        }
    }

    #[test]
    fn oversized_sequence_length_is_rejected() {
        let recs = records(30);
        assert!(matches!(
            build_sequences(&recs, &[31], 1),
            Err(BenchError::InsufficientProblems { .. })
        ));
    }
}
