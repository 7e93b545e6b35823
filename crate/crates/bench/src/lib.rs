//! Shared fixtures for the benchmarks.

use playsleuth::features::app_cliques;
use playsleuth::learn::Dataset;
use playsleuth::model::AppLabel;
use playsleuth::{generate, CoReviewGraph, DatasetStore, GenConfig, GraphConfig, PcfConfig};

/// A small synthetic market: `apps` apps per class.
pub fn market(apps: usize, seed: u64) -> DatasetStore {
    let mut config = GenConfig::default();
    config.seed = seed;
    config.counts.fraud_apps = apps;
    config.counts.malware_apps = apps;
    config.counts.benign_apps = apps;
    config.counts.coercive_apps = config.counts.coercive_apps.min(apps);
    generate(&config).expect("benchmark config is feasible").store
}

/// The fraudulent app with the most reviews.
pub fn busiest_fraud_app(store: &DatasetStore) -> String {
    store
        .labels()
        .apps_with(AppLabel::Fraudulent)
        .max_by_key(|a| {
            (
                store.reviews_of(a).map_or(0, <[_]>::len),
                std::cmp::Reverse(a.to_string()),
            )
        })
        .expect("market has fraud apps")
        .to_owned()
}

pub fn graph_of(store: &DatasetStore, app: &str) -> CoReviewGraph {
    playsleuth::build_graph(store, app, GraphConfig::default()).expect("app exists")
}

/// Clique features for every app, the unit of work of the finder benchmark.
pub fn mine_all(store: &DatasetStore, config: &PcfConfig) -> usize {
    store
        .app_ids()
        .map(|a| {
            app_cliques(store, a, GraphConfig::default(), config)
                .expect("app exists")
                .0
                .len()
        })
        .sum()
}

/// Deterministic two-class data with `features` columns.
pub fn separable(n: usize, features: usize) -> Dataset {
    let mut state = 0x9e37_79b9_7f4a_7c15_u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2 == 0;
        let shift = if label { 0.6 } else { 0.0 };
        rows.push((0..features).map(|_| next() + shift).collect());
        labels.push(label);
    }
    Dataset::anonymous(rows, labels).expect("rows are rectangular")
}
