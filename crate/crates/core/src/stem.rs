//! Small deterministic suffix-stripping lemmatizer used to collapse
//! inflectional variants of identity pairs (`women/men` vs `woman/man`).

const EXCEPTIONS: &[(&str, &str)] = &[
    ("women", "woman"),
    ("men", "man"),
    ("gentlemen", "gentleman"),
    ("businessmen", "businessman"),
    ("congressmen", "congressman"),
    ("chairmen", "chairman"),
    ("policemen", "policeman"),
    ("children", "child"),
    ("people", "person"),
    ("wives", "wife"),
    ("lives", "life"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("series", "series"),
    ("species", "species"),
    ("news", "news"),
    ("christmas", "christmas"),
    ("texas", "texas"),
    ("paris", "paris"),
    ("always", "always"),
    ("perhaps", "perhaps"),
];

/// Lemma-like normal form of a lowercase token.
pub fn lemma(word: &str) -> String {
    if let Some(&(_, base)) = EXCEPTIONS.iter().find(|(w, _)| *w == word) {
        return base.to_string();
    }
    if !word.is_ascii() {
        return word.to_string();
    }
    let n = word.len();
    if n >= 5 && word.ends_with("ies") {
        return format!("{}y", &word[..n - 3]);
    }
    if word.ends_with("sses") {
        return word[..n - 2].to_string();
    }
    if n >= 5
        && ["xes", "ches", "shes", "zes"]
            .iter()
            .any(|s| word.ends_with(s))
    {
        return word[..n - 2].to_string();
    }
    if n >= 4 && word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        return word[..n - 1].to_string();
    }
    if n >= 6 && word.ends_with("ing") {
        return undouble(&word[..n - 3]);
    }
    if n >= 5 && word.ends_with("ied") {
        return format!("{}y", &word[..n - 3]);
    }
    if n >= 5 && word.ends_with("ed") {
        return undouble(&word[..n - 2]);
    }
    word.to_string()
}

fn undouble(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !b"aeioulsz".contains(&b[n - 1]) {
        stem[..n - 1].to_string()
    } else {
        stem.to_string()
    }
}
