//! Prompt assembly for the four protocols. Pure string concatenation: the
//! payload, rule text, and statement always appear verbatim.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchgen::{BenchmarkItem, SequenceItem};
use crate::sanitize::ProblemRecord;
use crate::transform::TransformId;

/// Chain-of-thought system prompt, byte-identical across every bundle of a
/// run.
pub const SYSTEM_PROMPT: &str = "You are a helpful math assistant. Please reason step by step, and put your final answer within \\boxed{}.";

/// Decode-then-solve protocol block placed before the transformed query.
pub const PROTOCOL_BLOCK: &str = "YOUR PROTOCOL:\n1. Read the \"TRANSFORMATION RULE\" provided by the user and reverse the transformation on the \"TRANSFORMED INPUT\" to obtain the original problem statement.\n2. Once you have the original problem statement, proceed to solve the math problem.\n3. Put your final answer within \\boxed{}.";

/// Instruction opening every sequential-overload prompt.
pub const SEQUENTIAL_INSTRUCTION: &str = "Solve these completely unrelated math problems. For each problem put your final answer within \\boxed{}";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("item '{0}' is a baseline item; use the baseline builder")]
    BaselineItem(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Transform,
    Sequential,
    Saturation,
    Baseline,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Transform => "transform",
            Protocol::Sequential => "sequential",
            Protocol::Saturation => "saturation",
            Protocol::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub user: String,
    pub protocol: Protocol,
    pub item_ref: String,
}

/// Protocol block, the rule, and the payload, labeled exactly.
pub fn build_transform_prompt(item: &BenchmarkItem) -> Result<PromptBundle, PromptError> {
    if item.spec.id == TransformId::Baseline || item.rule_text.is_empty() {
        return Err(PromptError::BaselineItem(item.item_id.clone()));
    }
    let user = format!(
        "{PROTOCOL_BLOCK}\n\nTRANSFORMATION RULE:\n{}\n\nTRANSFORMED INPUT:\n{}",
        item.rule_text, item.payload
    );
    Ok(PromptBundle {
        system: SYSTEM_PROMPT.to_string(),
        user,
        protocol: Protocol::Transform,
        item_ref: item.item_id.clone(),
    })
}

/// The sanitized statement alone.
pub fn build_baseline_prompt(record: &ProblemRecord) -> PromptBundle {
    PromptBundle {
        system: SYSTEM_PROMPT.to_string(),
        user: record.statement.as_str().to_string(),
        protocol: Protocol::Baseline,
        item_ref: record.id.clone(),
    }
}

/// Baseline bundle for a manifest item whose payload is the statement
/// itself.
pub fn build_baseline_item_prompt(item: &BenchmarkItem) -> PromptBundle {
    PromptBundle {
        system: SYSTEM_PROMPT.to_string(),
        user: item.payload.clone(),
        protocol: Protocol::Baseline,
        item_ref: item.item_id.clone(),
    }
}

/// The instruction sentence, then the numbered problems with the target
/// last.
pub fn build_sequential_prompt(sequence: &SequenceItem) -> PromptBundle {
    let mut user = String::from(SEQUENTIAL_INSTRUCTION);
    for (i, problem) in sequence.problems.iter().enumerate() {
        user.push('\n');
        user.push_str(&format!("Problem {}: {}", i + 1, problem.statement));
    }
    PromptBundle {
        system: SYSTEM_PROMPT.to_string(),
        user,
        protocol: Protocol::Sequential,
        item_ref: sequence.sequence_id.clone(),
    }
}

/// The distractor prefix, a blank line, then the untransformed target
/// statement. An empty prefix degenerates to the baseline prompt.
pub fn build_saturation_prompt(prefix: &str, record: &ProblemRecord) -> PromptBundle {
    let user = if prefix.is_empty() {
        record.statement.as_str().to_string()
    } else {
        format!("{prefix}\n\n{}", record.statement.as_str())
    };
    PromptBundle {
        system: SYSTEM_PROMPT.to_string(),
        user,
        protocol: Protocol::Saturation,
        item_ref: record.id.clone(),
    }
}
