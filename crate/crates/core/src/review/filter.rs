use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{review_features, review_schema};
use super::sentiment::SentimentModel;
use crate::error::{Error, Result};
use crate::format::{document_body, header_line};
use crate::learn::{train, Dataset, Hyperparameters, TrainedModel};
use crate::model::{DatasetStore, Review, ReviewLabel};

pub const FILTER_KIND: &str = "review-filter";

/// Decides which reviews are fraudulent.
pub trait ReviewClassifier: Sync {
    fn classify(&self, store: &DatasetStore, reviews: &[&Review]) -> Result<Vec<bool>>;
}

/// Sentence sentiment model plus the classifier over review features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewFilter {
    pub sentiment: SentimentModel,
    pub classifier: TrainedModel,
}

impl ReviewFilter {
    pub fn new(sentiment: SentimentModel, classifier: TrainedModel) -> Result<Self> {
        review_schema().ensure_matches(&classifier.schema)?;
        Ok(ReviewFilter { sentiment, classifier })
    }

    pub fn to_json(&self) -> String {
        let mut s = header_line(FILTER_KIND);
        s.push('\n');
        s.push_str(&serde_json::to_string_pretty(self).expect("filter serializes"));
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ReviewFilter = serde_json::from_str(document_body(text, FILTER_KIND)?)
            .map_err(|e| Error::parse("review filter", e.to_string()))?;
        Self::new(f.sentiment, f.classifier)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl ReviewClassifier for ReviewFilter {
    fn classify(&self, store: &DatasetStore, reviews: &[&Review]) -> Result<Vec<bool>> {
        let rows = reviews
            .iter()
            .map(|r| Ok(review_features(store, r, &self.sentiment)?.to_vector()))
            .collect::<Result<Vec<_>>>()?;
        let preds = self.classifier.predict(&review_schema(), &rows)?;
        Ok(preds.into_iter().map(|p| p.positive).collect())
    }
}

/// Labeled review matrix over every review that carries a label.
pub fn review_dataset(store: &DatasetStore, sentiment: &SentimentModel) -> Result<Dataset> {
    let labeled: Vec<(&Review, bool)> = store
        .reviews()
        .iter()
        .filter_map(|r| {
            store
                .labels()
                .review(&r.review_id)
                .map(|l| (r, l == ReviewLabel::Fraudulent))
        })
        .collect();
    let rows = labeled
        .par_iter()
        .map(|(r, _)| Ok(review_features(store, r, sentiment)?.to_vector()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        review_schema(),
        labeled.iter().map(|(r, _)| r.review_id.clone()).collect(),
        rows,
        labeled.iter().map(|(_, l)| *l).collect(),
    )
}

pub fn train_review_filter(
    store: &DatasetStore,
    sentiment: SentimentModel,
    params: &Hyperparameters,
    seed: u64,
) -> Result<ReviewFilter> {
    let data = review_dataset(store, &sentiment)?;
    if data.is_empty() {
        return Err(Error::Degenerate("no labeled reviews to train on".into()));
    }
    let classifier = train(&data, params, seed)?;
    ReviewFilter::new(sentiment, classifier)
}

/// Reviews of one app split by the classifier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReviewPartition<'a> {
    pub genuine: Vec<&'a Review>,
    pub fraudulent: Vec<&'a Review>,
}

pub fn filter_fraud_reviews<'a>(
    store: &'a DatasetStore,
    app_id: &str,
    classifier: &dyn ReviewClassifier,
) -> Result<ReviewPartition<'a>> {
    let reviews: Vec<&Review> = store.reviews_of(app_id)?.iter().collect();
    let flags = classifier.classify(store, &reviews)?;
    if flags.len() != reviews.len() {
        return Err(Error::Config(format!(
            "classifier returned {} decisions for {} reviews",
            flags.len(),
            reviews.len()
        )));
    }
    let mut part = ReviewPartition::default();
    for (r, fraud) in reviews.into_iter().zip(flags) {
        if fraud {
            part.fraudulent.push(r);
        } else {
            part.genuine.push(r);
        }
    }
    Ok(part)
}

/// Classifier that marks everything with one fixed decision.
#[derive(Debug, Clone, Copy)]
pub struct ConstantClassifier(pub bool);

impl ReviewClassifier for ConstantClassifier {
    fn classify(&self, _: &DatasetStore, reviews: &[&Review]) -> Result<Vec<bool>> {
        Ok(vec![self.0; reviews.len()])
    }
}

/// Classifier that reads the review gold labels, treating unlabeled reviews as
/// genuine.
#[derive(Debug, Clone, Copy)]
pub struct LabelClassifier;

impl ReviewClassifier for LabelClassifier {
    fn classify(&self, store: &DatasetStore, reviews: &[&Review]) -> Result<Vec<bool>> {
        Ok(reviews
            .iter()
            .map(|r| store.labels().review(&r.review_id) == Some(ReviewLabel::Fraudulent))
            .collect())
    }
}
