//! Tokenization and sentence splitting.

/// Tokens that end in a period without closing a sentence. Compared against
/// the lowercase word preceding the period.
const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "etc", "vs", "mr", "mrs", "ms", "dr", "st", "approx", "ver", "incl", "min", "max",
];

/// Lowercase word tokens. Anything other than letters, digits and inner
/// apostrophes separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn is_delimiter(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split on runs of `.`, `!` or `?` that are followed by whitespace or the end
/// of the text. A period after a known abbreviation does not split. Sentences
/// are trimmed and empty ones dropped.
pub fn sentence_split(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_delimiter(c) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < chars.len() && is_delimiter(chars[j + 1].1) {
            j += 1;
        }
        let end = chars.get(j + 1).map_or(text.len(), |&(p, _)| p);
        let at_boundary = chars.get(j + 1).is_none_or(|&(_, n)| n.is_whitespace());
        if at_boundary && !(i == j && c == '.' && ends_with_abbreviation(&text[start..pos])) {
            let s = text[start..end].trim();
            if !s.is_empty() {
                sentences.push(s.to_owned());
            }
            start = end;
        }
        i = j + 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_owned());
    }
    sentences
}

fn ends_with_abbreviation(prefix: &str) -> bool {
    let word = prefix
        .rsplit(|c: char| c.is_whitespace() || c == '(')
        .next()
        .unwrap_or("")
        .to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Whether `tokens` contains `phrase` (already tokenized) as a consecutive run.
pub fn contains_phrase(tokens: &[String], phrase: &[String]) -> bool {
    match phrase.len() {
        0 => false,
        1 => tokens.iter().any(|t| *t == phrase[0]),
        n => tokens.windows(n).any(|w| w == phrase),
    }
}
