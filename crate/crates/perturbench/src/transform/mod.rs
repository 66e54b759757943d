//! The perturbation registry: encoders, exact decoders, and rule texts.
//!
//! Every transform is a pure function of its input text and a
//! [`TransformSpec`]: the id, parameters, and seed fully determine the
//! output bytes. Every encoder has an exact positional or algebraic
//! inverse, never a pattern heuristic. [`encode`] and [`invert`] dispatch
//! to the per-family implementations in the submodules.

pub mod interleave;
pub mod reversal;
pub mod rules;
pub mod semantic;
pub mod spatial;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridError;
use crate::sanitize::SanitizedText;

/// Default antonym table, one tab-separated `original<TAB>replacement` pair
/// per line. Editable without recompiling by pointing the config at another
/// file.
pub const DEFAULT_ANTONYMS: &str = include_str!("../../data/antonyms.tsv");

/// Default double-negation trigger lexicon, one word per line.
pub const DEFAULT_LEXICON: &str = include_str!("../../data/not_not_lexicon.txt");

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("unknown transform: {0}")]
    UnknownTransform(String),
    #[error("remapping is not invertible: {0}")]
    NonInvertibleMapping(String),
    #[error("interleave distractor is empty")]
    EmptyDistractor,
    #[error("decode mismatch: {0}")]
    DecodeMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// The sixteen benchmark behaviors: fifteen perturbations plus the
/// untouched baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformId {
    NotNot,
    Opposites,
    Wrappers,
    InterleaveLine,
    InterleaveWord,
    InterleaveSymbol,
    Saturation,
    SentenceReversal,
    WordReversal,
    SymbolReversal,
    WordSplitSwap,
    RailFence,
    RectanglePerimeter,
    SnakeVertical,
    SnakeHorizontal,
    Baseline,
}

impl TransformId {
    /// Canonical ordering used for reports and manifests.
    pub const ALL: [TransformId; 16] = [
        TransformId::NotNot,
        TransformId::Opposites,
        TransformId::Wrappers,
        TransformId::InterleaveLine,
        TransformId::InterleaveWord,
        TransformId::InterleaveSymbol,
        TransformId::Saturation,
        TransformId::SentenceReversal,
        TransformId::WordReversal,
        TransformId::SymbolReversal,
        TransformId::WordSplitSwap,
        TransformId::RailFence,
        TransformId::RectanglePerimeter,
        TransformId::SnakeVertical,
        TransformId::SnakeHorizontal,
        TransformId::Baseline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransformId::NotNot => "not_not",
            TransformId::Opposites => "opposites",
            TransformId::Wrappers => "wrappers",
            TransformId::InterleaveLine => "interleave_line",
            TransformId::InterleaveWord => "interleave_word",
            TransformId::InterleaveSymbol => "interleave_symbol",
            TransformId::Saturation => "saturation",
            TransformId::SentenceReversal => "sentence_reversal",
            TransformId::WordReversal => "word_reversal",
            TransformId::SymbolReversal => "symbol_reversal",
            TransformId::WordSplitSwap => "word_split_swap",
            TransformId::RailFence => "rail_fence",
            TransformId::RectanglePerimeter => "rectangle_perimeter",
            TransformId::SnakeVertical => "snake_vertical",
            TransformId::SnakeHorizontal => "snake_horizontal",
            TransformId::Baseline => "baseline",
        }
    }

    pub fn parse(s: &str) -> Result<Self, TransformError> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| TransformError::UnknownTransform(s.to_string()))
    }

    pub fn category(self) -> Category {
        match self {
            TransformId::NotNot | TransformId::Opposites | TransformId::Wrappers => {
                Category::Semantic
            }
            TransformId::InterleaveLine
            | TransformId::InterleaveWord
            | TransformId::InterleaveSymbol
            | TransformId::Saturation => Category::Contextual,
            TransformId::SentenceReversal
            | TransformId::WordReversal
            | TransformId::SymbolReversal
            | TransformId::WordSplitSwap => Category::Syntactic,
            TransformId::RailFence
            | TransformId::RectanglePerimeter
            | TransformId::SnakeVertical
            | TransformId::SnakeHorizontal => Category::Spatial,
            TransformId::Baseline => Category::None,
        }
    }

    /// Interleaves weave a second problem into the payload.
    pub fn needs_distractor(self) -> bool {
        matches!(
            self,
            TransformId::InterleaveLine
                | TransformId::InterleaveWord
                | TransformId::InterleaveSymbol
        )
    }
}

impl std::fmt::Display for TransformId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Semantic,
    Contextual,
    Syntactic,
    Spatial,
    None,
}

impl Category {
    /// The four perturbation categories, baseline excluded.
    pub const PERTURBATION_CATEGORIES: [Category; 4] = [
        Category::Semantic,
        Category::Contextual,
        Category::Syntactic,
        Category::Spatial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Semantic => "semantic",
            Category::Contextual => "contextual",
            Category::Syntactic => "syntactic",
            Category::Spatial => "spatial",
            Category::None => "none",
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the `<Problem X>` tag sits on an interleaved line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TagStyle {
    #[default]
    Prefix,
    Suffix,
}

/// Transform-specific knobs. Unset fields fall back to the documented
/// defaults, so a spec of just `{"id": "rail_fence"}` is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Params {
    /// Rail count for the rail fence cipher (default 3).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rails: Option<usize>,
    /// Maximum rectangle width (default 80).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_width: Option<usize>,
    /// Snake extent: rows per column (vertical, default 5) or characters
    /// per row (horizontal, default 36).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extent: Option<usize>,
    /// Tag placement for line interleaving (default prefix).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag_style: Option<TagStyle>,
    /// Antonym table for opposites, `(original, replacement)` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antonyms: Option<Vec<(String, String)>>,
    /// Trigger lexicon for double negation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<Vec<String>>,
    /// Token budget for the saturation prefix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_tokens: Option<usize>,
}

impl Params {
    pub fn rails(&self) -> usize {
        self.rails.unwrap_or(3)
    }

    pub fn max_width(&self) -> usize {
        self.max_width.unwrap_or(80)
    }

    pub fn extent_for(&self, id: TransformId) -> usize {
        self.extent.unwrap_or(match id {
            TransformId::SnakeHorizontal => 36,
            _ => 5,
        })
    }

    pub fn tag_style(&self) -> TagStyle {
        self.tag_style.unwrap_or_default()
    }

    pub fn antonym_table(&self) -> Vec<(String, String)> {
        match &self.antonyms {
            Some(t) => t.clone(),
            None => parse_antonyms(DEFAULT_ANTONYMS),
        }
    }

    pub fn trigger_lexicon(&self) -> Vec<String> {
        match &self.lexicon {
            Some(l) => l.clone(),
            None => parse_lexicon(DEFAULT_LEXICON),
        }
    }
}

/// Parse a tab-separated antonym table. Blank lines and `#` comments are
/// skipped.
pub fn parse_antonyms(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let (orig, repl) = l.split_once('\t')?;
            Some((orig.trim().to_string(), repl.trim().to_string()))
        })
        .collect()
}

/// Parse a one-word-per-line lexicon. Blank lines and `#` comments are
/// skipped.
pub fn parse_lexicon(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// A fully-specified perturbation: `(id, params, seed)` determines the
/// output bytes for any input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub id: TransformId,
    pub category: Category,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
}

impl TransformSpec {
    pub fn new(id: TransformId, params: Params, seed: u64) -> Self {
        Self {
            id,
            category: id.category(),
            params,
            seed,
        }
    }

    pub fn with_defaults(id: TransformId) -> Self {
        Self::new(id, Params::default(), 0)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        spec.seed = seed;
        spec
    }

    /// The category field must agree with the id's taxonomy; deserialized
    /// specs are checked before use.
    pub fn validate(&self) -> Result<(), TransformError> {
        if self.category != self.id.category() {
            return Err(TransformError::InvalidParams(format!(
                "transform {} carries category {} but belongs to {}",
                self.id,
                self.category,
                self.id.category()
            )));
        }
        if self.id == TransformId::RailFence && self.params.rails() < 2 {
            return Err(TransformError::InvalidParams(
                "rail fence needs at least 2 rails".into(),
            ));
        }
        if matches!(
            self.id,
            TransformId::SnakeVertical | TransformId::SnakeHorizontal
        ) && self.params.extent_for(self.id) < 1
        {
            return Err(TransformError::InvalidParams(
                "snake extent must be at least 1".into(),
            ));
        }
        if self.id == TransformId::RectanglePerimeter && self.params.max_width() < 1 {
            return Err(TransformError::InvalidParams(
                "rectangle max_width must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Companion data a decoder needs beyond the payload itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Aux {
    /// Which problem was woven in as Problem B.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distractor_id: Option<String>,
    /// Length of the target text in interleave units (segments, words, or
    /// characters); the decoder truncates cyclic padding at this length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_units: Option<usize>,
    /// Character count of the encoded message, for grid encodings whose
    /// trailing fill cells would otherwise be ambiguous with message dots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msg_len: Option<usize>,
    /// Output word indices of the first `not` of each inserted pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub not_not_positions: Option<Vec<usize>>,
    /// The `(replacement, original)` pairs listed in the defyn block.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mappings: Option<Vec<(String, String)>>,
}

/// Result of encoding one statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformOutput {
    /// The transformed statement text, or the rendered grid.
    pub payload: String,
    /// Plain-English decoding rule shown to the model; empty only for
    /// baseline.
    pub rule_text: String,
    #[serde(default)]
    pub aux: Aux,
}

/// Apply the transform named by `spec` to `text`. Interleaves take the
/// distractor statement as `problem_b`; all other transforms ignore it.
pub fn encode(
    spec: &TransformSpec,
    text: &SanitizedText,
    problem_b: Option<&SanitizedText>,
) -> Result<TransformOutput, TransformError> {
    spec.validate()?;
    let rule_text = match spec.id {
        TransformId::Baseline => String::new(),
        _ => rules::rule_text(spec)?,
    };
    let (payload, aux) = match spec.id {
        TransformId::Baseline | TransformId::Saturation => {
            (text.as_str().to_string(), Aux::default())
        }
        TransformId::NotNot => {
            let lexicon = spec.params.trigger_lexicon();
            let (payload, positions) = semantic::insert_double_negation(text.as_str(), &lexicon);
            (
                payload,
                Aux {
                    not_not_positions: Some(positions),
                    ..Aux::default()
                },
            )
        }
        TransformId::Opposites => {
            let table = spec.params.antonym_table();
            let result = semantic::apply_opposites(text.as_str(), &table)?;
            (
                result.text,
                Aux {
                    mappings: Some(result.mappings),
                    ..Aux::default()
                },
            )
        }
        TransformId::Wrappers => {
            let result = semantic::apply_wrappers(text.as_str(), spec.seed)?;
            (
                result.text,
                Aux {
                    mappings: Some(result.mappings),
                    ..Aux::default()
                },
            )
        }
        TransformId::InterleaveLine | TransformId::InterleaveWord | TransformId::InterleaveSymbol => {
            let b = problem_b.ok_or(TransformError::EmptyDistractor)?;
            let granularity = match spec.id {
                TransformId::InterleaveLine => interleave::Granularity::Line,
                TransformId::InterleaveWord => interleave::Granularity::Word,
                _ => interleave::Granularity::Symbol,
            };
            let result =
                interleave::interleave(text.as_str(), b.as_str(), granularity, spec.params.tag_style())?;
            (
                result.payload,
                Aux {
                    a_units: Some(result.a_units),
                    ..Aux::default()
                },
            )
        }
        TransformId::SentenceReversal => {
            (reversal::reverse_sentences(text.as_str()), Aux::default())
        }
        TransformId::WordReversal => (reversal::reverse_words(text.as_str()), Aux::default()),
        TransformId::SymbolReversal => (reversal::reverse_symbols(text.as_str()), Aux::default()),
        TransformId::WordSplitSwap => (reversal::word_split_swap(text.as_str()), Aux::default()),
        TransformId::RailFence => {
            let grid = spatial::encode_rail_fence(text.as_str(), spec.params.rails())?;
            (grid.render(), Aux::default())
        }
        TransformId::RectanglePerimeter => {
            let grid = spatial::encode_rectangle_perimeter(text.as_str(), spec.params.max_width())?;
            (
                grid.render(),
                Aux {
                    msg_len: Some(text.char_count()),
                    ..Aux::default()
                },
            )
        }
        TransformId::SnakeVertical | TransformId::SnakeHorizontal => {
            let orientation = match spec.id {
                TransformId::SnakeVertical => spatial::Orientation::Vertical,
                _ => spatial::Orientation::Horizontal,
            };
            let grid =
                spatial::encode_snake(text.as_str(), orientation, spec.params.extent_for(spec.id))?;
            (
                grid.render(),
                Aux {
                    msg_len: Some(text.char_count()),
                    ..Aux::default()
                },
            )
        }
    };
    Ok(TransformOutput {
        payload,
        rule_text,
        aux,
    })
}

/// Reconstruct the original sanitized statement from an encoder's output,
/// byte for byte.
pub fn invert(spec: &TransformSpec, output: &TransformOutput) -> Result<String, TransformError> {
    spec.validate()?;
    match spec.id {
        TransformId::Baseline | TransformId::Saturation => Ok(output.payload.clone()),
        TransformId::NotNot => {
            let positions = output
                .aux
                .not_not_positions
                .as_deref()
                .ok_or_else(|| TransformError::DecodeMismatch("missing insertion positions".into()))?;
            semantic::invert_double_negation(&output.payload, positions)
        }
        TransformId::Opposites | TransformId::Wrappers => {
            semantic::invert_term_remap(&output.payload)
        }
        TransformId::InterleaveLine | TransformId::InterleaveWord | TransformId::InterleaveSymbol => {
            let a_units = output
                .aux
                .a_units
                .ok_or_else(|| TransformError::DecodeMismatch("missing a_units".into()))?;
            let granularity = match spec.id {
                TransformId::InterleaveLine => interleave::Granularity::Line,
                TransformId::InterleaveWord => interleave::Granularity::Word,
                _ => interleave::Granularity::Symbol,
            };
            interleave::invert_interleave(
                &output.payload,
                granularity,
                spec.params.tag_style(),
                a_units,
            )
        }
        TransformId::SentenceReversal => Ok(reversal::reverse_sentences(&output.payload)),
        TransformId::WordReversal => Ok(reversal::reverse_words(&output.payload)),
        TransformId::SymbolReversal => Ok(reversal::reverse_symbols(&output.payload)),
        TransformId::WordSplitSwap => Ok(reversal::word_split_swap_invert(&output.payload)),
        TransformId::RailFence => {
            let grid = crate::grid::CharGrid::parse(&output.payload)?;
            spatial::invert_rail_fence(&grid, spec.params.rails())
        }
        TransformId::RectanglePerimeter => {
            let grid = crate::grid::CharGrid::parse(&output.payload)?;
            let msg_len = output
                .aux
                .msg_len
                .ok_or_else(|| TransformError::DecodeMismatch("missing msg_len".into()))?;
            spatial::invert_rectangle_perimeter(&grid, msg_len)
        }
        TransformId::SnakeVertical | TransformId::SnakeHorizontal => {
            let grid = crate::grid::CharGrid::parse(&output.payload)?;
            let msg_len = output
                .aux
                .msg_len
                .ok_or_else(|| TransformError::DecodeMismatch("missing msg_len".into()))?;
            let orientation = match spec.id {
                TransformId::SnakeVertical => spatial::Orientation::Vertical,
                _ => spatial::Orientation::Horizontal,
            };
            spatial::invert_snake(&grid, orientation, msg_len)
        }
    }
}
