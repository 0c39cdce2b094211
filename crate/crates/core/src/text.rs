//! Whitespace tokenizer with punctuation splitting.
//!
//! Tokens are lowercased, except blindness placeholders (`NAME_TOKEN`,
//! `IDENTITY_TOKEN`, ...) which pass through verbatim so that blinded text
//! re-tokenizes to the same sequence.

/// True for `UPPER_CASE` words with at least one underscore.
pub fn is_placeholder(word: &str) -> bool {
    let mut parts = word.split('_');
    let head_ok = parts
        .next()
        .is_some_and(|h| h.starts_with(|c: char| c.is_ascii_uppercase()) && valid_part(h));
    let mut rest = 0;
    for part in parts {
        if !valid_part(part) {
            return false;
        }
        rest += 1;
    }
    head_ok && rest > 0
}

fn valid_part(part: &str) -> bool {
    !part.is_empty()
        && part
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
}

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let start = chunk
            .find(|c: char| !c.is_ascii_punctuation())
            .unwrap_or(chunk.len());
        let end = chunk
            .rfind(|c: char| !c.is_ascii_punctuation())
            .map_or(start, |i| {
                i + chunk[i..].chars().next().map_or(1, char::len_utf8)
            });
        out.extend(chunk[..start].chars().map(String::from));
        if start < end {
            let core = &chunk[start..end];
            if is_placeholder(core) {
                out.push(core.to_string());
            } else {
                out.push(core.to_lowercase());
            }
        }
        if end > start {
            out.extend(chunk[end..].chars().map(String::from));
        }
    }
    out
}

pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.as_ref());
    }
    out
}
