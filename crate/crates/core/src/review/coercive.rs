use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::filter::ReviewClassifier;
use super::lexicon::WordList;
use super::text::tokenize;
use crate::error::{Error, Result};
use crate::model::{DatasetStore, Review};

/// Apps need this many matching genuine reviews to be reported.
pub const DEFAULT_MIN_HITS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoerciveHit {
    pub app_id: String,
    pub review_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoerciveApp {
    pub app_id: String,
    pub hits: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoerciveScan {
    pub hits: Vec<CoerciveHit>,
    /// By hit count, descending, then app id.
    pub ranking: Vec<CoerciveApp>,
}

impl CoerciveScan {
    pub fn flagged(&self, min_hits: usize) -> impl Iterator<Item = &CoerciveApp> {
        self.ranking.iter().filter(move |a| a.hits >= min_hits)
    }
}

/// Keyword-matching reviews that the classifier considers genuine.
pub fn coercive_scan(
    store: &DatasetStore,
    keywords: &WordList,
    classifier: &dyn ReviewClassifier,
) -> Result<CoerciveScan> {
    if keywords.is_empty() {
        return Err(Error::Config("coercive scan needs at least one keyword".into()));
    }
    let mut hits = Vec::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for app in store.app_ids() {
        let matched: Vec<&Review> = store
            .reviews_of(app)?
            .iter()
            .filter(|r| keywords.matches_tokens(&tokenize(&r.full_text())))
            .collect();
        if matched.is_empty() {
            continue;
        }
        let fraud = classifier.classify(store, &matched)?;
        for (r, f) in matched.into_iter().zip(fraud) {
            if !f {
                hits.push(CoerciveHit {
                    app_id: r.app_id.clone(),
                    review_id: r.review_id.clone(),
                });
                *counts.entry(app).or_default() += 1;
            }
        }
    }
    let mut ranking: Vec<CoerciveApp> = counts
        .into_iter()
        .map(|(a, h)| CoerciveApp {
            app_id: a.to_owned(),
            hits: h,
        })
        .collect();
    ranking.sort_by(|a, b| b.hits.cmp(&a.hits).then_with(|| a.app_id.cmp(&b.app_id)));
    Ok(CoerciveScan { hits, ranking })
}
