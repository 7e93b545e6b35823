use serde::{Deserialize, Serialize};

use crate::model::{AppSnapshot, BucketTable};

/// Install bucket endpoints over rating- and review-count bucket endpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub i1_rt1: f64,
    pub i2_rt2: f64,
    pub i1_rv1: f64,
    pub i2_rv2: f64,
}

/// Zero denominators are replaced by 1.
fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den.max(1) as f64
}

/// Ratios for a snapshot; `genuine_reviews` is the count after fraud filtering.
pub fn ratio_features(snapshot: &AppSnapshot, genuine_reviews: u64, table: &BucketTable) -> Ratios {
    let i = snapshot.install_bucket;
    let rt = table.bucket_of(snapshot.rating_count);
    let rv = table.bucket_of(genuine_reviews);
    Ratios {
        i1_rt1: ratio(i.0, rt.0),
        i2_rt2: ratio(i.1, rt.1),
        i1_rv1: ratio(i.0, rv.0),
        i2_rv2: ratio(i.1, rv.1),
    }
}
