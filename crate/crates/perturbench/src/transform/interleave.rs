//! Contextual overload: weaving a distractor problem into the target
//! problem at line, word, or symbol granularity.
//!
//! Units strictly alternate starting with Problem A. When one stream runs
//! out it restarts from its own beginning, and the output ends after the
//! pair that exhausts the longer stream, so the unit count is always
//! `2 * max(|A|, |B|)`.

use super::{TagStyle, TransformError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    /// Segments of at most 60 characters, one per line, each tagged with
    /// its problem.
    Line,
    Word,
    Symbol,
}

/// Segment length cap for line-level interleaving.
pub const LINE_SEGMENT_CHARS: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleaveResult {
    pub payload: String,
    /// Unit count of the target text (segments, words, or characters).
    pub a_units: usize,
}

pub fn interleave(
    a: &str,
    b: &str,
    granularity: Granularity,
    tag_style: TagStyle,
) -> Result<InterleaveResult, TransformError> {
    if a.is_empty() {
        return Err(TransformError::InvalidParams(
            "interleave target is empty".into(),
        ));
    }
    if b.is_empty() {
        return Err(TransformError::EmptyDistractor);
    }
    match granularity {
        Granularity::Word => {
            let a_words: Vec<&str> = a.split(' ').collect();
            let b_words: Vec<&str> = b.split(' ').collect();
            let pairs = a_words.len().max(b_words.len());
            let mut out = Vec::with_capacity(pairs * 2);
            for i in 0..pairs {
                out.push(a_words[i % a_words.len()]);
                out.push(b_words[i % b_words.len()]);
            }
            Ok(InterleaveResult {
                payload: out.join(" "),
                a_units: a_words.len(),
            })
        }
        Granularity::Symbol => {
            let a_chars: Vec<char> = a.chars().collect();
            let b_chars: Vec<char> = b.chars().collect();
            let pairs = a_chars.len().max(b_chars.len());
            let mut out = String::with_capacity(pairs * 2);
            for i in 0..pairs {
                out.push(a_chars[i % a_chars.len()]);
                out.push(b_chars[i % b_chars.len()]);
            }
            Ok(InterleaveResult {
                payload: out,
                a_units: a_chars.len(),
            })
        }
        Granularity::Line => {
            let a_segments = chunk_chars(a, LINE_SEGMENT_CHARS);
            let b_segments = chunk_chars(b, LINE_SEGMENT_CHARS);
            let pairs = a_segments.len().max(b_segments.len());
            let mut lines = Vec::with_capacity(pairs * 2);
            for i in 0..pairs {
                lines.push(tag_line(&a_segments[i % a_segments.len()], 'A', tag_style));
                lines.push(tag_line(&b_segments[i % b_segments.len()], 'B', tag_style));
            }
            Ok(InterleaveResult {
                payload: lines.join("\n"),
                a_units: a_segments.len(),
            })
        }
    }
}

/// Recover the target text: take the A-stream units and cut the cyclic
/// padding at `a_units`.
pub fn invert_interleave(
    payload: &str,
    granularity: Granularity,
    tag_style: TagStyle,
    a_units: usize,
) -> Result<String, TransformError> {
    match granularity {
        Granularity::Word => {
            let words: Vec<&str> = payload.split(' ').collect();
            let a_stream: Vec<&str> = words.iter().step_by(2).copied().collect();
            if a_units > a_stream.len() {
                return Err(TransformError::DecodeMismatch(format!(
                    "expected {a_units} target words, payload holds {}",
                    a_stream.len()
                )));
            }
            Ok(a_stream[..a_units].join(" "))
        }
        Granularity::Symbol => {
            let a_stream: Vec<char> = payload.chars().step_by(2).collect();
            if a_units > a_stream.len() {
                return Err(TransformError::DecodeMismatch(format!(
                    "expected {a_units} target characters, payload holds {}",
                    a_stream.len()
                )));
            }
            Ok(a_stream[..a_units].iter().collect())
        }
        Granularity::Line => {
            let lines: Vec<&str> = payload.split('\n').collect();
            let mut segments = Vec::new();
            for (i, line) in lines.iter().enumerate() {
                let which = if i % 2 == 0 { 'A' } else { 'B' };
                let segment = strip_tag(line, which, tag_style).ok_or_else(|| {
                    TransformError::DecodeMismatch(format!(
                        "line {i} is missing its <Problem {which}> tag"
                    ))
                })?;
                if i % 2 == 0 {
                    segments.push(segment);
                }
            }
            if a_units > segments.len() {
                return Err(TransformError::DecodeMismatch(format!(
                    "expected {a_units} target segments, payload holds {}",
                    segments.len()
                )));
            }
            Ok(segments[..a_units].concat())
        }
    }
}

/// Split into chunks of at most `size` characters; every chunk except the
/// last is exactly `size` long.
fn chunk_chars(text: &str, size: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    chars
        .chunks(size)
        .map(|chunk| chunk.iter().collect())
        .collect()
}

fn tag_line(segment: &str, which: char, style: TagStyle) -> String {
    match style {
        TagStyle::Prefix => format!("<Problem {which}> {segment}"),
        TagStyle::Suffix => format!("{segment} <Problem {which}>"),
    }
}

fn strip_tag(line: &str, which: char, style: TagStyle) -> Option<&str> {
    match style {
        TagStyle::Prefix => line.strip_prefix(&format!("<Problem {which}> ")),
        TagStyle::Suffix => line.strip_suffix(&format!(" <Problem {which}>")),
    }
}
