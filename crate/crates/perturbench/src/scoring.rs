//! Answer extraction and verdict classification.
//!
//! A response is scored from its `\boxed{...}` regions. Sequential prompts
//! accept a match in any box (answers may arrive out of order) and count a
//! max-token cutoff as a success, since the model may still be reasoning
//! about the final problem when it hits the limit. Every other protocol
//! trusts only the last box and counts cutoffs as failures.

use serde::{Deserialize, Serialize};

use crate::benchgen::{BenchmarkManifest, SequenceSet};
use crate::exec;
use crate::prompt::Protocol;
use crate::runner::{FinishReason, ModelResponse, RawResult};
use crate::transform::{Category, TransformId};

/// Every `\boxed{...}` interior in appearance order, nested braces
/// balanced, unterminated regions dropped.
pub fn extract_boxed_all(text: &str) -> Vec<String> {
    const MARKER: &str = "\\boxed{";
    let mut boxes = Vec::new();
    let mut search_from = 0;
    while let Some(found) = text[search_from..].find(MARKER) {
        let open = search_from + found + MARKER.len();
        let mut depth = 1usize;
        let mut end = None;
        for (offset, ch) in text[open..].char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(open + offset);
                        break;
                    }
                }
                _ => {}
            }
        }
        if let Some(end) = end {
            boxes.push(text[open..end].to_string());
        }
        // Resume right after the marker so nested \boxed regions are still
        // found.
        search_from = open;
    }
    boxes
}

/// Normalize a boxed candidate and compare it to the integer ground truth.
/// Strips whitespace, `\text{...}` wrappers, thousands separators, and
/// leading zeros; anything that still fails to parse as an integer is
/// simply not a match.
pub fn verify_answer(candidate: &str, truth: u32) -> bool {
    let mut s = candidate.trim();
    while let Some(inner) = s
        .strip_prefix("\\text{")
        .and_then(|rest| rest.strip_suffix('}'))
    {
        s = inner.trim();
    }
    let cleaned: String = s.chars().filter(|&c| c != ',').collect();
    let cleaned = cleaned.trim();
    if cleaned.is_empty() || !cleaned.chars().all(|c| c.is_ascii_digit()) {
        return false;
    }
    let digits = cleaned.trim_start_matches('0');
    let normalized = if digits.is_empty() { "0" } else { digits };
    normalized.parse::<u64>().map(|v| v == truth as u64).unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Incorrect,
    Refusal,
    CutoffCorrect,
    CutoffFailure,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Correct => "correct",
            Verdict::Incorrect => "incorrect",
            Verdict::Refusal => "refusal",
            Verdict::CutoffCorrect => "cutoff_correct",
            Verdict::CutoffFailure => "cutoff_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_box_index: Option<usize>,
    pub completion_tokens: u64,
}

/// Classify one response. The verdict partition is total: every response
/// maps to exactly one verdict.
pub fn classify_sample(response: &ModelResponse, truth: u32, protocol: Protocol) -> SampleVerdict {
    let boxes = extract_boxed_all(&response.text);
    let verdict = |v, idx| SampleVerdict {
        verdict: v,
        matched_box_index: idx,
        completion_tokens: response.completion_tokens,
    };

    // Transport-level filtering and exhausted retries both mean the model
    // produced no usable answer.
    if matches!(
        response.finish_reason,
        FinishReason::RefusalFilter | FinishReason::Error
    ) {
        return verdict(Verdict::Refusal, None);
    }

    match protocol {
        Protocol::Sequential => {
            if let Some(idx) = boxes.iter().position(|b| verify_answer(b, truth)) {
                return verdict(Verdict::Correct, Some(idx));
            }
            if response.finish_reason == FinishReason::Length {
                return verdict(Verdict::CutoffCorrect, None);
            }
            if boxes.is_empty() {
                return verdict(Verdict::Refusal, None);
            }
            verdict(Verdict::Incorrect, None)
        }
        Protocol::Transform | Protocol::Baseline | Protocol::Saturation => {
            if response.finish_reason == FinishReason::Length {
                return verdict(Verdict::CutoffFailure, None);
            }
            match boxes.last() {
                None => verdict(Verdict::Refusal, None),
                Some(last) if verify_answer(last, truth) => {
                    verdict(Verdict::Correct, Some(boxes.len() - 1))
                }
                Some(_) => verdict(Verdict::Incorrect, None),
            }
        }
    }
}

/// One scored sample, joined with what reporting needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub item_id: String,
    pub sample_index: u32,
    pub endpoint: String,
    pub protocol: Protocol,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform_id: Option<TransformId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence_length: Option<usize>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_box_index: Option<usize>,
    pub completion_tokens: u64,
    pub finish_reason: FinishReason,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("raw result '{0}' has no matching item in the manifest")]
    UnknownItem(String),
}

/// Score raw results against a benchmark manifest.
pub fn score_transform_run(
    raw: &[RawResult],
    manifest: &BenchmarkManifest,
) -> Result<Vec<VerdictRecord>, ScoreError> {
    let index: std::collections::HashMap<&str, &crate::benchgen::BenchmarkItem> = manifest
        .items
        .iter()
        .map(|item| (item.item_id.as_str(), item))
        .collect();
    let scored: Vec<Result<VerdictRecord, ScoreError>> = exec::map_ordered(raw, |result| {
        let item = index
            .get(result.item_id.as_str())
            .ok_or_else(|| ScoreError::UnknownItem(result.item_id.clone()))?;
        let sample = classify_sample(&result.response, item.expected_answer, result.protocol);
        Ok(VerdictRecord {
            item_id: result.item_id.clone(),
            sample_index: result.sample_index,
            endpoint: result.endpoint.clone(),
            protocol: result.protocol,
            transform_id: Some(item.spec.id),
            category: Some(item.spec.id.category()),
            sequence_length: None,
            verdict: sample.verdict,
            matched_box_index: sample.matched_box_index,
            completion_tokens: sample.completion_tokens,
            finish_reason: result.response.finish_reason,
        })
    });
    scored.into_iter().collect()
}

/// Score raw results against a sequential-overload set.
pub fn score_sequential_run(
    raw: &[RawResult],
    sequences: &SequenceSet,
) -> Result<Vec<VerdictRecord>, ScoreError> {
    let index: std::collections::HashMap<&str, &crate::benchgen::SequenceItem> = sequences
        .items
        .iter()
        .map(|item| (item.sequence_id.as_str(), item))
        .collect();
    let scored: Vec<Result<VerdictRecord, ScoreError>> = exec::map_ordered(raw, |result| {
        let item = index
            .get(result.item_id.as_str())
            .ok_or_else(|| ScoreError::UnknownItem(result.item_id.clone()))?;
        let sample = classify_sample(&result.response, item.expected_answer, Protocol::Sequential);
        Ok(VerdictRecord {
            item_id: result.item_id.clone(),
            sample_index: result.sample_index,
            endpoint: result.endpoint.clone(),
            protocol: Protocol::Sequential,
            transform_id: None,
            category: None,
            sequence_length: Some(item.length),
            verdict: sample.verdict,
            matched_box_index: sample.matched_box_index,
            completion_tokens: sample.completion_tokens,
            finish_reason: result.response.finish_reason,
        })
    });
    scored.into_iter().collect()
}
