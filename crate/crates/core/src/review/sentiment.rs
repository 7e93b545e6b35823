//! Multinomial Naive Bayes over bag-of-words sentences.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::text::tokenize;
use crate::error::{Error, Result};
use crate::format::content_lines;
use crate::learn::{stratified_folds, Confusion};

const BUNDLED_CORPUS: &str = include_str!("../../assets/sentiment_corpus.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
}

impl Sentiment {
    fn idx(self) -> usize {
        match self {
            Sentiment::Positive => 0,
            Sentiment::Negative => 1,
        }
    }
}

/// Parse `label<TAB>sentence` lines. Labels: `pos`/`neg`, `positive`/`negative`
/// or `+`/`-`.
pub fn parse_corpus(text: &str) -> Result<Vec<(Sentiment, String)>> {
    content_lines(text)
        .map(|(lineno, line)| {
            let (label, sentence) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(format!("corpus line {lineno}"), "missing TAB"))?;
            let label = match label.trim() {
                "pos" | "positive" | "+" => Sentiment::Positive,
                "neg" | "negative" | "-" => Sentiment::Negative,
                other => {
                    return Err(Error::parse(
                        format!("corpus line {lineno}"),
                        format!("unknown label `{other}`"),
                    ))
                }
            };
            Ok((label, sentence.trim().to_owned()))
        })
        .collect()
}

pub fn load_corpus(path: &Path) -> Result<Vec<(Sentiment, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text)
}

/// The sentence corpus shipped with the crate.
pub fn bundled_corpus() -> Vec<(Sentiment, String)> {
    parse_corpus(BUNDLED_CORPUS).expect("bundled corpus parses")
}

/// Trained sentence classifier. Tokens never seen in training are ignored at
/// classification time, so an all-unknown sentence falls back to the priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentModel {
    pub alpha: f64,
    /// `[positive, negative]` log priors.
    pub log_prior: [f64; 2],
    /// Per token `[positive, negative]` log likelihoods.
    pub log_likelihood: BTreeMap<String, [f64; 2]>,
}

impl SentimentModel {
    /// Fit with additive smoothing `alpha`.
    pub fn train(corpus: &[(Sentiment, String)], alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!("smoothing alpha must be positive, got {alpha}")));
        }
        let mut docs = [0usize; 2];
        let mut totals = [0u64; 2];
        let mut counts: BTreeMap<String, [u64; 2]> = BTreeMap::new();
        for (label, sentence) in corpus {
            let k = label.idx();
            docs[k] += 1;
            for tok in tokenize(sentence) {
                counts.entry(tok).or_default()[k] += 1;
                totals[k] += 1;
            }
        }
        if docs[0] == 0 || docs[1] == 0 {
            return Err(Error::Degenerate(
                "sentiment corpus needs both positive and negative sentences".into(),
            ));
        }
        let n = (docs[0] + docs[1]) as f64;
        let v = counts.len() as f64;
        let log_prior = [(docs[0] as f64 / n).ln(), (docs[1] as f64 / n).ln()];
        let denom = [(totals[0] as f64 + alpha * v).ln(), (totals[1] as f64 + alpha * v).ln()];
        let log_likelihood = counts
            .into_iter()
            .map(|(tok, c)| {
                let ll = [
                    (c[0] as f64 + alpha).ln() - denom[0],
                    (c[1] as f64 + alpha).ln() - denom[1],
                ];
                (tok, ll)
            })
            .collect();
        Ok(SentimentModel {
            alpha,
            log_prior,
            log_likelihood,
        })
    }

    /// Unnormalized `[positive, negative]` log posteriors.
    pub fn log_posteriors(&self, sentence: &str) -> [f64; 2] {
        let mut lp = self.log_prior;
        for tok in tokenize(sentence) {
            if let Some(ll) = self.log_likelihood.get(&tok) {
                lp[0] += ll[0];
                lp[1] += ll[1];
            }
        }
        lp
    }

    /// Positive only when its posterior is strictly larger; ties are negative.
    pub fn classify(&self, sentence: &str) -> Sentiment {
        let lp = self.log_posteriors(sentence);
        if lp[0] > lp[1] {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        }
    }

    pub fn vocabulary_len(&self) -> usize {
        self.log_likelihood.len()
    }
}

/// k-fold cross-validation of the sentence classifier, positive sentiment as
/// the positive class.
pub fn cross_validate_sentiment(
    corpus: &[(Sentiment, String)],
    alpha: f64,
    k: usize,
    seed: u64,
) -> Result<(Vec<Confusion>, Confusion)> {
    let labels: Vec<bool> = corpus.iter().map(|(l, _)| *l == Sentiment::Positive).collect();
    let fold_of = stratified_folds(&labels, k, seed)?;
    let mut folds = Vec::with_capacity(k);
    let mut total = Confusion::default();
    for f in 0..k {
        let train: Vec<(Sentiment, String)> = corpus
            .iter()
            .zip(&fold_of)
            .filter(|(_, &g)| g != f)
            .map(|(c, _)| c.clone())
            .collect();
        let model = SentimentModel::train(&train, alpha)?;
        let mut m = Confusion::default();
        for ((label, sentence), &g) in corpus.iter().zip(&fold_of) {
            if g == f {
                let predicted = model.classify(sentence) == Sentiment::Positive;
                m.record(*label == Sentiment::Positive, predicted);
                total.record(*label == Sentiment::Positive, predicted);
            }
        }
        folds.push(m);
    }
    Ok((folds, total))
}
