use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::sentiment::{Sentiment, SentimentModel};
use super::text::sentence_split;
use crate::error::{Error, Result};
use crate::learn::FeatureSchema;
use crate::model::{DatasetStore, Review};

pub const REVIEW_FEATURE_NAMES: [&str; 9] = [
    "expertise",
    "bias",
    "money_paid",
    "liked_count",
    "follower_count",
    "pct_positive_sentences",
    "pct_negative_sentences",
    "rating",
    "rating_percentile",
];

/// Schema of the review-filter feature vectors.
pub fn review_schema() -> FeatureSchema {
    FeatureSchema::new("review-features", 1, &REVIEW_FEATURE_NAMES)
}

/// Signals describing one review `R` by user `U` for app `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewFeatures {
    /// Reviews by `U` for apps listed as similar to `A`.
    pub expertise: u32,
    /// Reviews by `U` for other apps of `A`'s developer.
    pub bias: u32,
    pub money_paid: f64,
    pub liked_count: u64,
    pub follower_count: u64,
    pub pct_positive_sentences: f64,
    pub pct_negative_sentences: f64,
    pub rating: u8,
    /// Share of `U`'s reviews rated strictly below `R`, in percent.
    pub rating_percentile: f64,
    /// The profile fields above were zero-filled.
    pub profile_imputed: bool,
}

impl ReviewFeatures {
    pub fn to_vector(&self) -> Vec<f64> {
        vec![
            f64::from(self.expertise),
            f64::from(self.bias),
            self.money_paid,
            self.liked_count as f64,
            self.follower_count as f64,
            self.pct_positive_sentences,
            self.pct_negative_sentences,
            f64::from(self.rating),
            self.rating_percentile,
        ]
    }
}

/// Percentages of positive and negative sentences in `text`.
pub fn sentence_sentiment(model: &SentimentModel, text: &str) -> (f64, f64) {
    let sentences = sentence_split(text);
    if sentences.is_empty() {
        return (0.0, 0.0);
    }
    let pos = sentences
        .iter()
        .filter(|s| model.classify(s) == Sentiment::Positive)
        .count();
    let n = sentences.len() as f64;
    let pos_pct = 100.0 * pos as f64 / n;
    (pos_pct, 100.0 - pos_pct)
}

pub fn review_features(store: &DatasetStore, review: &Review, sentiment: &SentimentModel) -> Result<ReviewFeatures> {
    let app = store.app(&review.app_id)?;
    let profile = store.profile(&review.reviewer_id).ok_or_else(|| Error::NotFound {
        kind: "reviewer",
        id: review.reviewer_id.clone(),
    })?;
    let similar: BTreeSet<&str> = app.similar_app_ids.iter().map(String::as_str).collect();

    let mut expertise = 0;
    let mut bias = 0;
    let mut total = 0usize;
    let mut below = 0usize;
    for r in store.reviews_by(&review.reviewer_id) {
        total += 1;
        if r.rating < review.rating {
            below += 1;
        }
        if similar.contains(r.app_id.as_str()) {
            expertise += 1;
        }
        if r.app_id != app.app_id {
            if let Ok(other) = store.app(&r.app_id) {
                if other.developer_id == app.developer_id {
                    bias += 1;
                }
            }
        }
    }
    let rating_percentile = if total == 0 {
        0.0
    } else {
        100.0 * below as f64 / total as f64
    };
    let (pct_pos, pct_neg) = sentence_sentiment(sentiment, &review.full_text());

    Ok(ReviewFeatures {
        expertise,
        bias,
        money_paid: profile.money_paid_total,
        liked_count: profile.liked_app_count,
        follower_count: profile.follower_count,
        pct_positive_sentences: pct_pos,
        pct_negative_sentences: pct_neg,
        rating: review.rating,
        rating_percentile,
        profile_imputed: profile.imputed,
    })
}
