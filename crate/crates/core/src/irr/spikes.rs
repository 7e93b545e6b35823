use chrono::Days;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{DatasetStore, Day};

/// Ratings at or above this count as positive reviews.
pub const POSITIVE_RATING: u8 = 4;
/// Shorter series report no spikes and set `insufficient`.
pub const MIN_SERIES_DAYS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeReport {
    /// Indices into the series whose count is strictly above the fence.
    pub spike_days: Vec<usize>,
    pub max_amplitude: u64,
    /// Upper outer fence `Q3 + 3 IQR`.
    pub fence: f64,
    pub insufficient: bool,
}

/// Quantile `p` of sorted data by linear interpolation between order
/// statistics at position `(n - 1) p`.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) => sorted[lo] + frac * (next - sorted[lo]),
        None => sorted[lo],
    }
}

/// Spikes of a daily count series, zero days included.
pub fn detect_spikes(counts: &[u64]) -> SpikeReport {
    if counts.len() < MIN_SERIES_DAYS {
        return SpikeReport {
            spike_days: Vec::new(),
            max_amplitude: 0,
            fence: 0.0,
            insufficient: true,
        };
    }
    let mut work: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let n = work.len();
    // Only the order statistics around the quartile positions matter.
    let q = |work: &mut Vec<f64>, p: f64| {
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        let (_, &mut a, rest) = work.select_nth_unstable_by(lo, f64::total_cmp);
        match rest.iter().copied().min_by(f64::total_cmp) {
            Some(b) => a + frac * (b - a),
            None => a,
        }
    };
    let q1 = q(&mut work, 0.25);
    let q3 = q(&mut work, 0.75);
    let fence = q3 + 3.0 * (q3 - q1);
    let spike_days: Vec<usize> = (0..n).filter(|&i| counts[i] as f64 > fence).collect();
    let max_amplitude = spike_days.iter().map(|&i| counts[i]).max().unwrap_or(0);
    SpikeReport {
        spike_days,
        max_amplitude,
        fence,
        insufficient: false,
    }
}

/// Daily positive-review counts from the app's first to last review day,
/// with zero days filled in.
pub fn daily_positive_counts(store: &DatasetStore, app_id: &str) -> Result<Vec<(Day, u64)>> {
    let reviews = store.reviews_of(app_id)?;
    let (Some(first), Some(last)) = (reviews.first(), reviews.last()) else {
        return Ok(Vec::new());
    };
    let start = store
        .app(app_id)?
        .first_review_date
        .map_or(first.date, |d| d.min(first.date));
    let days = (last.date - start).num_days() as usize + 1;
    let mut series: Vec<(Day, u64)> = (0..days).map(|i| (start + Days::new(i as u64), 0)).collect();
    for r in reviews.iter().filter(|r| r.rating >= POSITIVE_RATING) {
        series[(r.date - start).num_days() as usize].1 += 1;
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppSpikes {
    pub app_id: String,
    pub days: Vec<Day>,
    pub report: SpikeReport,
}

pub fn app_spikes(store: &DatasetStore, app_id: &str) -> Result<AppSpikes> {
    let series = daily_positive_counts(store, app_id)?;
    let counts: Vec<u64> = series.iter().map(|(_, c)| *c).collect();
    let report = detect_spikes(&counts);
    Ok(AppSpikes {
        app_id: app_id.to_owned(),
        days: report.spike_days.iter().map(|&i| series[i].0).collect(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oracle(counts: &[u64]) -> Vec<usize> {
        let mut s: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        s.sort_by(f64::total_cmp);
        let q1 = quantile_type7(&s, 0.25);
        let q3 = quantile_type7(&s, 0.75);
        let fence = q3 + 3.0 * (q3 - q1);
        (0..counts.len()).filter(|&i| counts[i] as f64 > fence).collect()
    }

    #[test]
    fn fence_example() {
        let r = detect_spikes(&[1, 1, 2, 1, 1, 50]);
        assert_eq!(r.fence, 4.0);
        assert_eq!(r.spike_days, [5]);
        assert_eq!(r.max_amplitude, 50);
    }

    #[test]
    fn flat_and_short_series() {
        let r = detect_spikes(&[3, 3, 3, 3]);
        assert_eq!((r.fence, r.spike_days.len()), (3.0, 0));
        assert!(detect_spikes(&[0; 30]).spike_days.is_empty());
        assert!(detect_spikes(&[0, 9, 0]).insufficient);
    }

    proptest! {
        #[test]
        fn matches_sort_oracle(counts in proptest::collection::vec(0u64..60, 4..80)) {
            prop_assert_eq!(detect_spikes(&counts).spike_days, oracle(&counts));
        }

        #[test]
        fn raising_a_spike_keeps_it(counts in proptest::collection::vec(0u64..20, 4..40), bump in 1u64..100) {
            let r = detect_spikes(&counts);
            for &d in &r.spike_days {
                let mut raised = counts.clone();
                raised[d] += bump;
                prop_assert!(detect_spikes(&raised).spike_days.contains(&d));
            }
        }

        #[test]
        fn spike_invariants(counts in proptest::collection::vec(0u64..40, 4..60)) {
            let r = detect_spikes(&counts);
            for &d in &r.spike_days {
                prop_assert!(counts[d] as f64 > r.fence);
            }
            if !r.spike_days.is_empty() {
                prop_assert!(r.spike_days.iter().any(|&d| counts[d] == r.max_amplitude));
            }
        }
    }
}
