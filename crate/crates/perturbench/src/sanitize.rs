//! Preprocessing that makes problem statements safe under character-level
//! reversal and grid layout.
//!
//! Raw LaTeX math problems can contain three hazards: inline `%` comments,
//! newlines that break single-line grid encodings, and backslash/character
//! adjacencies that turn into control sequences (`\b`, `\n`, ...) when the
//! text is reversed. The pipeline here removes all three while leaving the
//! mathematical content intact, and is applied identically to baseline and
//! transformed items. The three steps run in a fixed order: comments, then
//! newlines, then escapes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Characters that form a control sequence next to a backslash.
const ESCAPE_HAZARDS: [char; 6] = ['n', 't', 'b', 'r', 'a', 'f'];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SanitizeError {
    #[error("problem '{0}': statement is empty after sanitization")]
    EmptyStatement(String),
}

/// One raw dataset row, before preprocessing.
///
/// The serialized field name for the statement is `problem`, matching the
/// line-delimited dataset format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawProblem {
    pub id: String,
    #[serde(rename = "problem")]
    pub statement: String,
    pub answer: u32,
}

/// Single-line text with comments stripped and escape hazards defused.
///
/// Invariants: no newline characters, no unescaped `%`-to-end-of-line
/// regions, and no backslash adjacent (on either side) to any of
/// `n t b r a f`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SanitizedText(String);

impl SanitizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn char_count(&self) -> usize {
        self.0.chars().count()
    }
}

impl std::fmt::Display for SanitizedText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::ops::Deref for SanitizedText {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

/// A sanitized problem with its ground-truth answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub id: String,
    pub statement: SanitizedText,
    pub answer: u32,
    pub source: String,
}

/// Remove every unescaped `%` together with the rest of its line, keeping
/// the newline itself. `\%` is a literal percent and is preserved.
pub fn strip_latex_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut backslashes = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '%' if backslashes.is_multiple_of(2) => {
                // Comment: drop until the next newline (not consumed).
                while let Some(&next) = chars.peek() {
                    if next == '\n' {
                        break;
                    }
                    chars.next();
                }
                backslashes = 0;
            }
            '\\' => {
                backslashes += 1;
                out.push(ch);
            }
            _ => {
                backslashes = 0;
                out.push(ch);
            }
        }
    }
    out
}

/// Replace every line break with `; `. A `\r\n` pair counts as one break,
/// as does a lone `\r`.
pub fn flatten_newlines(text: &str) -> String {
    let unified = text.replace("\r\n", "\n").replace('\r', "\n");
    unified.replace('\n', "; ")
}

/// Insert a space between a backslash and any of `n t b r a f`, in both
/// adjacency directions, so no control sequence can form under any
/// character reordering. Idempotent.
pub fn neutralize_escapes(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    for (i, &ch) in chars.iter().enumerate() {
        out.push(ch);
        if let Some(&next) = chars.get(i + 1) {
            let hazard = (ch == '\\' && ESCAPE_HAZARDS.contains(&next))
                || (ESCAPE_HAZARDS.contains(&ch) && next == '\\');
            if hazard {
                out.push(' ');
            }
        }
    }
    out
}

/// Run the full pipeline on a bare string: comments, newlines, escapes.
pub fn sanitize_text(text: &str) -> SanitizedText {
    SanitizedText(neutralize_escapes(&flatten_newlines(&strip_latex_comments(
        text,
    ))))
}

/// Sanitize a raw problem into a [`ProblemRecord`]. The id and answer pass
/// through unchanged; an empty post-sanitization statement is an error
/// rather than a silent skip.
pub fn sanitize(problem: &RawProblem, source: &str) -> Result<ProblemRecord, SanitizeError> {
    let statement = sanitize_text(&problem.statement);
    if statement.is_empty() {
        return Err(SanitizeError::EmptyStatement(problem.id.clone()));
    }
    Ok(ProblemRecord {
        id: problem.id.clone(),
        statement,
        answer: problem.answer,
        source: source.to_string(),
    })
}
