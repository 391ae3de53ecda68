//! Deterministic text normalization shared by the metrics and the segmenter.
//!
//! All downstream token counts and alignments depend on these rules being
//! stable, so everything here is pure and locale-independent: Unicode
//! lowercasing, whitespace splitting with leading/trailing punctuation peeled
//! into separate tokens, and a character-per-token mode for languages written
//! without word boundaries.

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// How text is split into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LangMode {
    /// Lowercase, split on whitespace, peel leading/trailing punctuation.
    #[default]
    SpaceDelimited,
    /// One token per non-whitespace character (Chinese, Japanese, ...).
    CharacterBased,
}

impl LangMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LangMode::SpaceDelimited => "space",
            LangMode::CharacterBased => "char",
        }
    }
}

impl std::str::FromStr for LangMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "space" => Ok(LangMode::SpaceDelimited),
            "char" => Ok(LangMode::CharacterBased),
            other => Err(format!("unknown lang mode `{other}` (expected space|char)")),
        }
    }
}

impl std::fmt::Display for LangMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn is_punct_char(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// True iff every character of the token is Unicode punctuation.
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punct_char)
}

/// Split text into tokens, preserving the original casing.
///
/// The split positions are identical to [`tokenize`], so the two outputs
/// always pair up one-to-one.
pub fn tokenize_cased(text: &str, mode: LangMode) -> Vec<String> {
    match mode {
        LangMode::SpaceDelimited => {
            let mut out = Vec::new();
            for piece in text.split_whitespace() {
                peel_punctuation(piece, &mut out);
            }
            out
        }
        LangMode::CharacterBased => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect(),
    }
}

/// Split text into lowercased tokens.
pub fn tokenize(text: &str, mode: LangMode) -> Vec<String> {
    tokenize_cased(text, mode)
        .into_iter()
        .map(|t| t.to_lowercase())
        .collect()
}

// Leading and trailing punctuation characters become single-character tokens;
// interior punctuation (don't, e-mail) stays attached.
fn peel_punctuation(piece: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = piece.chars().collect();
    let mut start = 0;
    let mut end = chars.len();
    while start < end && is_punct_char(chars[start]) {
        start += 1;
    }
    while end > start && is_punct_char(chars[end - 1]) {
        end -= 1;
    }
    for c in &chars[..start] {
        out.push(c.to_string());
    }
    if start < end {
        out.push(chars[start..end].iter().collect());
    }
    for c in &chars[end..] {
        out.push(c.to_string());
    }
}

/// Jaccard similarity of the two tokens' character sets, in `[0, 1]`.
///
/// Character sets, not multisets: `("abc", "abd")` scores `2/4 = 0.5`.
/// For single-character tokens this degenerates to an exact match.
pub fn char_similarity(a: &str, b: &str) -> f64 {
    use std::collections::BTreeSet;
    let sa: BTreeSet<char> = a.chars().collect();
    let sb: BTreeSet<char> = b.chars().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Join tokens back into display text.
///
/// Space-delimited mode inserts spaces except before punctuation tokens;
/// character mode concatenates directly.
pub fn detokenize<S: AsRef<str>>(tokens: &[S], mode: LangMode) -> String {
    match mode {
        LangMode::CharacterBased => tokens.iter().map(|t| t.as_ref()).collect(),
        LangMode::SpaceDelimited => {
            let mut out = String::new();
            for token in tokens {
                let token = token.as_ref();
                if !out.is_empty() && !is_punctuation(token) {
                    out.push(' ');
                }
                out.push_str(token);
            }
            out
        }
    }
}
