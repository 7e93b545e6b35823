//! Review, rating and install imbalance signals: daily positive-review spikes,
//! install-to-rating and install-to-review ratios, and the Pearson chi-square
//! test of rating against install buckets.

mod chisq;
mod gamma;
mod ratios;
mod spikes;

pub use chisq::{chi_square_independence, contingency_table, mosaic_tsv, ChiSquare, ContingencyTable};
pub use gamma::{ln_gamma, regularized_gamma_q};
pub use ratios::{ratio_features, Ratios};
pub use spikes::{
    app_spikes, daily_positive_counts, detect_spikes, quantile_type7, AppSpikes, SpikeReport, MIN_SERIES_DAYS,
    POSITIVE_RATING,
};
