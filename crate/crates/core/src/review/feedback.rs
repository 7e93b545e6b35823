use serde::{Deserialize, Serialize};

use super::lexicon::IndicatorLexicons;
use super::text::tokenize;
use crate::model::Review;

/// Lexicon hit rates among genuine reviews and the fraud review impact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub mal_w: f64,
    pub fraud_w: f64,
    pub good_w: f64,
    pub fri: f64,
    /// No genuine reviews; every value above is 0.
    pub degenerate: bool,
}

fn mean_rating(reviews: &[&Review]) -> f64 {
    reviews.iter().map(|r| f64::from(r.rating)).sum::<f64>() / reviews.len() as f64
}

pub fn feedback_features(genuine: &[&Review], all: &[&Review], lexicons: &IndicatorLexicons) -> Feedback {
    if genuine.is_empty() {
        return Feedback {
            degenerate: true,
            ..Feedback::default()
        };
    }
    let mut hits = [0usize; 3];
    for r in genuine {
        let tokens = tokenize(&r.full_text());
        let lists = [&lexicons.malware, &lexicons.fraud, &lexicons.benign];
        for (h, list) in hits.iter_mut().zip(lists) {
            if list.matches_tokens(&tokens) {
                *h += 1;
            }
        }
    }
    let n = genuine.len() as f64;
    let pct = |h: usize| 100.0 * h as f64 / n;
    let fri = if genuine.len() == all.len() {
        0.0
    } else {
        (mean_rating(all) - mean_rating(genuine)).abs()
    };
    Feedback {
        mal_w: pct(hits[0]),
        fraud_w: pct(hits[1]),
        good_w: pct(hits[2]),
        fri,
        degenerate: false,
    }
}
