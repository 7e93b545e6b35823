//! Review analysis: sentence sentiment, review-level features for the
//! fraudulent-review filter, indicator-word feedback and the coercive
//! campaign keyword scan.

pub mod coercive;
pub mod features;
pub mod feedback;
pub mod filter;
pub mod lexicon;
pub mod sentiment;
pub mod text;

pub use coercive::{coercive_scan, CoerciveApp, CoerciveHit, CoerciveScan};
pub use features::{review_features, review_schema, ReviewFeatures};
pub use feedback::{feedback_features, Feedback};
pub use filter::{
    filter_fraud_reviews, review_dataset, train_review_filter, ConstantClassifier, LabelClassifier, ReviewClassifier,
    ReviewFilter, ReviewPartition,
};
pub use lexicon::{bundled_coercive_keywords, IndicatorLexicons, WordList};
pub use sentiment::{bundled_corpus, cross_validate_sentiment, Sentiment, SentimentModel};
pub use text::{sentence_split, tokenize};
