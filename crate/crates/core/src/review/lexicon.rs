use std::collections::BTreeSet;
use std::path::Path;

use super::text::{contains_phrase, tokenize};
use crate::error::{Error, Result};
use crate::format::content_lines;
use crate::model::LexiconPaths;

const MALWARE: &str = include_str!("../../assets/lexicons/malware.txt");
const FRAUD: &str = include_str!("../../assets/lexicons/fraud.txt");
const BENIGN: &str = include_str!("../../assets/lexicons/benign.txt");
const COERCIVE: &str = include_str!("../../assets/coercive_keywords.txt");

/// Reference sizes of the three indicator lists.
pub const EXPECTED_SIZES: (usize, usize, usize) = (31, 112, 105);

/// Lowercase word or phrase list, one entry per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList {
    entries: BTreeSet<String>,
    phrases: Vec<Vec<String>>,
}

impl WordList {
    pub fn parse(text: &str) -> Self {
        let entries: BTreeSet<String> = content_lines(text)
            .map(|(_, l)| tokenize(l).join(" "))
            .filter(|e| !e.is_empty())
            .collect();
        let phrases = entries
            .iter()
            .map(|e| e.split(' ').map(str::to_owned).collect())
            .collect();
        WordList { entries, phrases }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        let text: Vec<String> = words.into_iter().map(|w| w.as_ref().to_owned()).collect();
        Self::parse(&text.join("\n"))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeSet<String> {
        &self.entries
    }

    /// Whether the token sequence contains any entry.
    pub fn matches_tokens(&self, tokens: &[String]) -> bool {
        self.phrases.iter().any(|p| contains_phrase(tokens, p))
    }

    pub fn matches(&self, text: &str) -> bool {
        self.matches_tokens(&tokenize(text))
    }
}

/// Malware, fraud and benign indicator words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorLexicons {
    pub malware: WordList,
    pub fraud: WordList,
    pub benign: WordList,
}

impl IndicatorLexicons {
    /// Build and check that the lists are pairwise disjoint.
    pub fn new(malware: WordList, fraud: WordList, benign: WordList) -> Result<Self> {
        let pairs = [
            ("malware", &malware, "fraud", &fraud),
            ("malware", &malware, "benign", &benign),
            ("fraud", &fraud, "benign", &benign),
        ];
        for (an, a, bn, b) in pairs {
            if let Some(w) = a.entries.intersection(&b.entries).next() {
                return Err(Error::Config(format!(
                    "`{w}` appears in both the {an} and {bn} lexicons"
                )));
            }
        }
        let lex = IndicatorLexicons { malware, fraud, benign };
        let sizes = lex.sizes();
        if sizes != EXPECTED_SIZES {
            log::warn!(
                "indicator lexicon sizes {:?} differ from the reference sizes {:?}",
                sizes,
                EXPECTED_SIZES
            );
        } else {
            log::debug!("indicator lexicon sizes {:?}", sizes);
        }
        Ok(lex)
    }

    pub fn load(paths: &LexiconPaths) -> Result<Self> {
        Self::new(
            WordList::load(&paths.malware)?,
            WordList::load(&paths.fraud)?,
            WordList::load(&paths.benign)?,
        )
    }

    pub fn bundled() -> Self {
        Self::new(
            WordList::parse(MALWARE),
            WordList::parse(FRAUD),
            WordList::parse(BENIGN),
        )
        .expect("bundled lexicons are disjoint")
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.malware.len(), self.fraud.len(), self.benign.len())
    }
}

/// Keywords for the coercive-campaign scan.
pub fn bundled_coercive_keywords() -> WordList {
    WordList::parse(COERCIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sizes_match_reference() {
        assert_eq!(IndicatorLexicons::bundled().sizes(), EXPECTED_SIZES);
    }

    #[test]
    fn overlapping_lists_rejected() {
        let a = WordList::from_words(["hack", "virus"]);
        let b = WordList::from_words(["virus"]);
        assert!(IndicatorLexicons::new(a, b, WordList::default()).is_err());
    }

    #[test]
    fn whole_token_case_insensitive_match() {
        let l = WordList::from_words(["malware", "rate it"]);
        assert!(l.matches("Full of MALWARE!"));
        assert!(!l.matches("antimalware scanner"));
        assert!(l.matches("had to Rate it, ugh"));
        assert!(!l.matches("rate this"));
    }
}
