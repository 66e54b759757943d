//! Semantic and lexical substitutions: double negation, antonym remapping,
//! and identity wrappers.
//!
//! The remapping transforms list every substitution in a
//! `defyn{let "X" mean "Y", ...}` block inserted at the midpoint of the
//! text, so applying the listed replacements to the payload recovers the
//! original exactly. Encoding refuses any mapping that would make that
//! plain-string decoding ambiguous.

use crate::rng::SplitMix64;

use super::TransformError;

/// Result of a term remap: the rewritten text (defyn block included) and
/// the `(replacement, original)` pairs it lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemapResult {
    pub text: String,
    pub mappings: Vec<(String, String)>,
}

fn is_integer_literal(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| c.is_ascii_digit())
}

/// Per-token math-span state: a token sits inside `$...$` if the number of
/// dollar signs before it is odd, and any token containing `$` touches a
/// span boundary itself.
fn math_flags(tokens: &[&str]) -> Vec<bool> {
    let mut flags = Vec::with_capacity(tokens.len());
    let mut parity = 0usize;
    for token in tokens {
        let dollars = token.chars().filter(|&c| c == '$').count();
        flags.push(parity % 2 == 1 || dollars > 0);
        parity += dollars;
    }
    flags
}

/// Insert the literal pair `not not` immediately before every token that is
/// a decimal integer literal or a lexicon member, skipping math spans.
/// Returns the rewritten text and the output word index of the first `not`
/// of each inserted pair.
pub fn insert_double_negation(text: &str, lexicon: &[String]) -> (String, Vec<usize>) {
    let tokens: Vec<&str> = text.split(' ').collect();
    let in_math = math_flags(&tokens);
    let mut out: Vec<&str> = Vec::with_capacity(tokens.len());
    let mut positions = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        let trigger = !in_math[i]
            && (is_integer_literal(token) || lexicon.iter().any(|w| w == token));
        if trigger {
            positions.push(out.len());
            out.push("not");
            out.push("not");
        }
        out.push(token);
    }
    (out.join(" "), positions)
}

/// Remove the inserted `not not` pairs at the recorded output positions.
pub fn invert_double_negation(
    payload: &str,
    positions: &[usize],
) -> Result<String, TransformError> {
    let tokens: Vec<&str> = payload.split(' ').collect();
    let mut drop = vec![false; tokens.len()];
    for &p in positions {
        if p + 1 >= tokens.len() || tokens[p] != "not" || tokens[p + 1] != "not" {
            return Err(TransformError::DecodeMismatch(format!(
                "no inserted pair at word index {p}"
            )));
        }
        drop[p] = true;
        drop[p + 1] = true;
    }
    let kept: Vec<&str> = tokens
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(&t, _)| t)
        .collect();
    Ok(kept.join(" "))
}

/// Replace every whole-word occurrence of a table key with its antonym and
/// record the substitutions in a defyn block.
pub fn apply_opposites(
    text: &str,
    table: &[(String, String)],
) -> Result<RemapResult, TransformError> {
    let mut keys_seen = std::collections::HashSet::new();
    let mut values_seen = std::collections::HashSet::new();
    for (orig, repl) in table {
        if !keys_seen.insert(orig) || !values_seen.insert(repl) {
            return Err(TransformError::NonInvertibleMapping(format!(
                "antonym table is not bijective at '{orig}' -> '{repl}'"
            )));
        }
    }
    let tokens: Vec<&str> = text.split(' ').collect();
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut mappings: Vec<(String, String)> = Vec::new();
    for token in &tokens {
        match table.iter().find(|(orig, _)| orig == token) {
            Some((orig, repl)) => {
                if !mappings.iter().any(|(r, _)| r == repl) {
                    mappings.push((repl.clone(), orig.clone()));
                }
                out.push(repl.clone());
            }
            None => out.push((*token).to_string()),
        }
    }
    finish_remap(text, out, mappings)
}

/// Wrap every k-th eligible word in a seeded single-digit identity wrapper
/// `d(term)`, where both k (2..=4) and each digit (1..=9) come from the
/// seed. Eligible words have a purely alphanumeric core once surrounding
/// punctuation is stripped; the core may sit inside a math span.
pub fn apply_wrappers(text: &str, seed: u64) -> Result<RemapResult, TransformError> {
    let mut rng = SplitMix64::new(seed);
    let stride = 2 + rng.next_below(3) as usize;
    let tokens: Vec<&str> = text.split(' ').collect();
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut mappings: Vec<(String, String)> = Vec::new();
    let mut eligible_index = 0usize;
    for token in &tokens {
        let core = alphanumeric_core(token);
        match core {
            Some((start, end)) => {
                eligible_index += 1;
                if eligible_index.is_multiple_of(stride) {
                    let digit = 1 + rng.next_below(9);
                    let term = &token[start..end];
                    let wrapped = format!("{digit}({term})");
                    if !mappings.iter().any(|(r, _)| r == &wrapped) {
                        mappings.push((wrapped.clone(), term.to_string()));
                    }
                    out.push(format!("{}{}{}", &token[..start], wrapped, &token[end..]));
                } else {
                    out.push((*token).to_string());
                }
            }
            None => out.push((*token).to_string()),
        }
    }
    finish_remap(text, out, mappings)
}

/// Byte range of the token's core after stripping non-alphanumeric
/// characters from both ends; `None` unless the core is purely ASCII
/// alphanumeric.
fn alphanumeric_core(token: &str) -> Option<(usize, usize)> {
    let start = token.find(|c: char| c.is_ascii_alphanumeric())?;
    let end = token.rfind(|c: char| c.is_ascii_alphanumeric())? + 1;
    let core = &token[start..end];
    if core.chars().all(|c| c.is_ascii_alphanumeric()) {
        Some((start, end))
    } else {
        None
    }
}

fn finish_remap(
    original: &str,
    replaced_tokens: Vec<String>,
    mappings: Vec<(String, String)>,
) -> Result<RemapResult, TransformError> {
    if mappings.is_empty() {
        return Ok(RemapResult {
            text: original.to_string(),
            mappings,
        });
    }
    if original.contains("defyn{") {
        return Err(TransformError::NonInvertibleMapping(
            "text already contains a defyn block".into(),
        ));
    }
    for (repl, _) in &mappings {
        if original.contains(repl.as_str()) {
            return Err(TransformError::NonInvertibleMapping(format!(
                "replacement '{repl}' already occurs in the text"
            )));
        }
    }
    for (a, _) in &mappings {
        for (b, _) in &mappings {
            if a != b && b.contains(a.as_str()) {
                return Err(TransformError::NonInvertibleMapping(format!(
                    "replacement '{a}' is a substring of replacement '{b}'"
                )));
            }
        }
    }
    let block = format!(
        "defyn{{{}}}",
        mappings
            .iter()
            .map(|(repl, orig)| format!("let \"{repl}\" mean \"{orig}\""))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let mut tokens = replaced_tokens;
    let midpoint = tokens.len() / 2;
    tokens.insert(midpoint, block);
    Ok(RemapResult {
        text: tokens.join(" "),
        mappings,
    })
}

/// Strip the defyn block and apply each listed mapping as a plain string
/// replacement, recovering the original text.
pub fn invert_term_remap(payload: &str) -> Result<String, TransformError> {
    let Some(start) = payload.find("defyn{") else {
        // Empty mapping: the block was omitted and the text is unchanged.
        return Ok(payload.to_string());
    };
    let close = payload[start..]
        .find('}')
        .ok_or_else(|| TransformError::DecodeMismatch("unterminated defyn block".into()))?;
    let block_end = start + close + 1;
    let interior = &payload[start + "defyn{".len()..start + close];
    let mappings = parse_defyn_entries(interior)?;

    // The block was inserted as a word, so exactly one adjacent space joint
    // goes with it.
    let mut text = String::with_capacity(payload.len());
    if block_end < payload.len() && payload[block_end..].starts_with(' ') {
        text.push_str(&payload[..start]);
        text.push_str(&payload[block_end + 1..]);
    } else if start > 0 && payload[..start].ends_with(' ') {
        text.push_str(&payload[..start - 1]);
        text.push_str(&payload[block_end..]);
    } else {
        return Err(TransformError::DecodeMismatch(
            "defyn block is not space-joined".into(),
        ));
    }

    for (repl, orig) in &mappings {
        text = text.replace(repl.as_str(), orig.as_str());
    }
    Ok(text)
}

fn parse_defyn_entries(interior: &str) -> Result<Vec<(String, String)>, TransformError> {
    let mut entries = Vec::new();
    for part in interior.split(", ") {
        let rest = part.strip_prefix("let \"").ok_or_else(|| {
            TransformError::DecodeMismatch(format!("malformed defyn entry '{part}'"))
        })?;
        let (repl, rest) = rest.split_once("\" mean \"").ok_or_else(|| {
            TransformError::DecodeMismatch(format!("malformed defyn entry '{part}'"))
        })?;
        let orig = rest.strip_suffix('"').ok_or_else(|| {
            TransformError::DecodeMismatch(format!("malformed defyn entry '{part}'"))
        })?;
        entries.push((repl.to_string(), orig.to_string()));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> Vec<String> {
        super::super::parse_lexicon(super::super::DEFAULT_LEXICON)
    }

    fn antonyms() -> Vec<(String, String)> {
        super::super::parse_antonyms(super::super::DEFAULT_ANTONYMS)
    }

    #[test]
    fn not_not_matches_reference_sentence() {
        let (out, positions) =
            insert_double_negation("Let $p$ be the least prime number", &lexicon());
        assert_eq!(
            out,
            "Let $p$ be the not not least not not prime not not number"
        );
        assert_eq!(positions.len(), 3);
    }

    #[test]
    fn not_not_triggers_on_integer_literals() {
        let (out, _) = insert_double_negation("there are 5 cats", &lexicon());
        assert_eq!(out, "there are not not 5 cats");
    }

    #[test]
    fn not_not_skips_math_spans() {
        let (out, positions) = insert_double_negation("the $x$ value", &lexicon());
        assert_eq!(out, "the $x$ value");
        assert!(positions.is_empty());
        // A trigger word inside a multi-token span is also skipped.
        let (out, _) = insert_double_negation("see $ 5 $ here", &lexicon());
        assert_eq!(out, "see $ 5 $ here");
    }

    #[test]
    fn not_not_round_trips_even_when_text_contains_not_not() {
        let text = "it is not not 7 really";
        let (payload, positions) = insert_double_negation(text, &lexicon());
        assert_eq!(payload, "it is not not not not 7 really");
        assert_eq!(invert_double_negation(&payload, &positions).unwrap(), text);
    }

    #[test]
    fn opposites_match_reference_mappings() {
        let result = apply_opposites("Let $p$ be the least prime", &antonyms()).unwrap();
        assert!(result.text.contains("Forbid"));
        assert!(result.text.contains("most"));
        assert!(result.text.contains("antiprime"));
        assert!(result.text.contains("let \"most\" mean \"least\""));
        assert!(result.text.contains("let \"Forbid\" mean \"Let\""));
        assert_eq!(invert_term_remap(&result.text).unwrap(), "Let $p$ be the least prime");
    }

    #[test]
    fn opposites_with_no_matching_terms_is_identity() {
        let result = apply_opposites("nothing matches here", &antonyms()).unwrap();
        assert_eq!(result.text, "nothing matches here");
        assert!(result.mappings.is_empty());
        assert!(!result.text.contains("defyn"));
    }

    #[test]
    fn opposites_reject_ambiguous_replacement() {
        let table = vec![("least".to_string(), "most".to_string())];
        let err = apply_opposites("the most and the least", &table).unwrap_err();
        assert!(matches!(err, TransformError::NonInvertibleMapping(_)));
    }

    #[test]
    fn opposites_reject_replacement_hidden_in_longer_word() {
        let table = vec![("least".to_string(), "most".to_string())];
        let err = apply_opposites("almost the least", &table).unwrap_err();
        assert!(matches!(err, TransformError::NonInvertibleMapping(_)));
    }

    #[test]
    fn opposites_reject_non_bijective_table() {
        let table = vec![
            ("least".to_string(), "most".to_string()),
            ("small".to_string(), "most".to_string()),
        ];
        let err = apply_opposites("the least value", &table).unwrap_err();
        assert!(matches!(err, TransformError::NonInvertibleMapping(_)));
    }

    #[test]
    fn wrappers_wrap_seeded_terms_and_round_trip() {
        let text = "Let $p$ be the least prime number for which there exists one";
        let result = apply_wrappers(text, 42).unwrap();
        assert!(result.text.contains("defyn{"));
        assert!(!result.mappings.is_empty());
        for (repl, orig) in &result.mappings {
            assert!(repl.ends_with(&format!("({orig})")));
        }
        assert_eq!(invert_term_remap(&result.text).unwrap(), text);
    }

    #[test]
    fn wrappers_can_wrap_inside_math_spans() {
        // Eligible terms include math tokens like $p$, whose core is `p`.
        let text = "a $p$ b $q$ c $r$ d $s$ e $t$ f";
        let result = apply_wrappers(text, 7).unwrap();
        let wrapped_math = result
            .mappings
            .iter()
            .any(|(repl, _)| result.text.contains(&format!("${repl}$")));
        assert!(wrapped_math, "expected some $d(term)$ in: {}", result.text);
        assert_eq!(invert_term_remap(&result.text).unwrap(), text);
    }

    #[test]
    fn wrappers_different_seeds_differ() {
        let text = "one two three four five six seven eight nine ten";
        let a = apply_wrappers(text, 1).unwrap();
        let b = apply_wrappers(text, 2).unwrap();
        assert_ne!(a.text, b.text);
    }

    #[test]
    fn wrappers_golden_output_for_seed_42() {
        // Frozen bytes: manifests must rebuild identically across releases,
        // so any change to the seeding chain has to show up here.
        let result = apply_wrappers("Find the least value of $k$ now", 42).unwrap();
        assert_eq!(
            result.text,
            "Find the 2(least) defyn{let \"2(least)\" mean \"least\", let \"1(k)\" mean \"k\"} value of $1(k)$ now"
        );
    }

    #[test]
    fn defyn_block_sits_at_the_word_midpoint() {
        let table = vec![("bb".to_string(), "xx".to_string())];
        let result = apply_opposites("aa bb cc dd", &table).unwrap();
        let words: Vec<&str> = result.text.split(' ').collect();
        assert!(words[2].starts_with("defyn{"), "got: {}", result.text);
    }

    #[test]
    fn invert_rejects_unterminated_block() {
        let err = invert_term_remap("aa defyn{let \"x\" mean \"y\" bb").unwrap_err();
        assert!(matches!(err, TransformError::DecodeMismatch(_)));
    }
}
