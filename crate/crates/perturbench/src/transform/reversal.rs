//! Split-modify-join distortions: sentence, word, and symbol reversal, and
//! the word split swap.
//!
//! Words are sequences of symbols separated by spaces, so splitting on the
//! single space character (keeping empty fields) makes every operation here
//! byte-exact on arbitrary input, double spaces included.

/// Reverse the order of space-delimited words. Involution.
pub fn reverse_words(text: &str) -> String {
    let mut words: Vec<&str> = text.split(' ').collect();
    words.reverse();
    words.join(" ")
}

/// Reverse the characters within each word, keeping word order. Involution.
pub fn reverse_symbols(text: &str) -> String {
    text.split(' ')
        .map(|w| w.chars().rev().collect::<String>())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Reverse the order of period-delimited sentences.
///
/// Sentences are separated by `". "`; a trailing period stays at the end of
/// the text, so each sentence keeps its own period after the swap. This is
/// an involution on arbitrary input: text without a `". "` separator is a
/// single sentence and passes through unchanged.
pub fn reverse_sentences(text: &str) -> String {
    let (core, trailing_period) = match text.strip_suffix('.') {
        Some(core) => (core, true),
        None => (text, false),
    };
    let mut sentences: Vec<&str> = core.split(". ").collect();
    sentences.reverse();
    let mut out = sentences.join(". ");
    if trailing_period {
        out.push('.');
    }
    out
}

/// Split each word down the middle and swap the halves. For odd lengths the
/// first part is one symbol shorter, so `prime` becomes `pr` + `ime` and
/// then `imepr`.
pub fn word_split_swap(text: &str) -> String {
    map_words(text, |chars| {
        let front = chars.len() / 2;
        chars[front..].iter().chain(chars[..front].iter()).collect()
    })
}

/// Exact inverse of [`word_split_swap`]: the swapped word leads with the
/// original suffix of length `ceil(len / 2)`.
pub fn word_split_swap_invert(text: &str) -> String {
    map_words(text, |chars| {
        let take = chars.len() - chars.len() / 2;
        chars[take..].iter().chain(chars[..take].iter()).collect()
    })
}

fn map_words(text: &str, f: impl Fn(&[char]) -> String) -> String {
    text.split(' ')
        .map(|w| {
            let chars: Vec<char> = w.chars().collect();
            f(&chars)
        })
        .collect::<Vec<_>>()
        .join(" ")
}
