use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use playsleuth::features::{assemble, assemble_all, FeatureContext, FeatureMatrix, FEATURE_NAMES};
use playsleuth::learn::{cross_validate, Dataset, Forest, ForestParams, Hyperparameters, LearnerKind};
use playsleuth::model::{AppLabel, BucketTable, Review, ReviewLabel};
use playsleuth::permissions::PermissionCatalog;
use playsleuth::review::{
    bundled_coercive_keywords, bundled_corpus, coercive_scan, train_review_filter, IndicatorLexicons, ReviewClassifier,
    ReviewFilter, SentimentModel,
};
use playsleuth::synth::{generate, GenConfig, SyntheticMarket};

struct Fixture {
    market: SyntheticMarket,
    filter: ReviewFilter,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let market = generate(&GenConfig::default()).unwrap();
        let sentiment = SentimentModel::train(&bundled_corpus(), 1.0).unwrap();
        let filter = train_review_filter(
            &market.store,
            sentiment,
            &Hyperparameters::defaults(LearnerKind::Mlp),
            0,
        )
        .unwrap();
        Fixture { market, filter }
    })
}

struct Assets {
    lexicons: IndicatorLexicons,
    buckets: BucketTable,
    catalog: PermissionCatalog,
}

fn assets() -> Assets {
    Assets {
        lexicons: IndicatorLexicons::bundled(),
        buckets: BucketTable::default(),
        catalog: PermissionCatalog::bundled(),
    }
}

#[test]
fn review_filter_recall_on_unseen_market() {
    let f = fixture();
    let mut config = GenConfig::default();
    config.seed = 1;
    let other = generate(&config).unwrap();
    let reviews: Vec<&Review> = other.store.reviews().iter().collect();
    let flags = f.filter.classify(&other.store, &reviews).unwrap();
    let (mut tp, mut positives) = (0, 0);
    for (r, flagged) in reviews.iter().zip(flags) {
        if other.store.labels().review(&r.review_id) == Some(ReviewLabel::Fraudulent) {
            positives += 1;
            tp += flagged as usize;
        }
    }
    let recall = tp as f64 / positives as f64;
    assert!(recall >= 0.9, "recall {recall:.3} over {positives} planted reviews");
}

#[test]
fn most_fraud_apps_have_a_third_of_reviewers_in_cliques() {
    let f = fixture();
    let a = assets();
    let ctx = FeatureContext::new(&f.filter, &a.lexicons, &a.buckets, &a.catalog);
    let store = &f.market.store;
    let fraud: Vec<&str> = store.labels().apps_with(AppLabel::Fraudulent).collect();
    let features = assemble_all(store, &fraud, &ctx).unwrap();
    let heavy = features.iter().filter(|x| x.features.in_clique_size >= 0.33).count();
    assert!(heavy as f64 >= 0.55 * fraud.len() as f64, "{heavy} of {}", fraud.len());
}

#[test]
fn coercive_apps_recovered_with_trained_filter() {
    let f = fixture();
    let scan = coercive_scan(&f.market.store, &bundled_coercive_keywords(), &f.filter).unwrap();
    let want: BTreeSet<&str> = f.market.truth.coercive_apps.iter().map(String::as_str).collect();
    let top: BTreeSet<&str> = scan
        .ranking
        .iter()
        .take(want.len())
        .map(|a| a.app_id.as_str())
        .collect();
    assert_eq!(top, want);
}

#[test]
fn features_survive_matrix_round_trip() {
    let f = fixture();
    let a = assets();
    let ctx = FeatureContext::new(&f.filter, &a.lexicons, &a.buckets, &a.catalog);
    let store = &f.market.store;
    let ids: Vec<&str> = store.app_ids().take(40).collect();
    let features = assemble_all(store, &ids, &ctx).unwrap();
    let m = FeatureMatrix::from_features(&features, |id| store.labels().app(id));
    assert!(m.rows.iter().all(|r| r.len() == FEATURE_NAMES.len()));
    assert_eq!(FeatureMatrix::from_tsv(&m.to_tsv()).unwrap(), m);
    let again = assemble_all(store, &ids, &ctx).unwrap();
    assert_eq!(
        FeatureMatrix::from_features(&again, |id| store.labels().app(id)).to_tsv(),
        m.to_tsv()
    );
}

#[test]
fn app_without_reviews_still_has_permission_features() {
    let mut config = GenConfig::benign_only(5);
    config.benign.reviews_per_app = [0, 0];
    let market = generate(&config).unwrap();
    let f = fixture();
    let a = assets();
    let ctx = FeatureContext::new(&f.filter, &a.lexicons, &a.buckets, &a.catalog);
    for app in market.store.app_ids() {
        let x = assemble(&market.store, app, &ctx).unwrap();
        assert!(x.flags.no_reviews);
        let v = &x.features;
        assert_eq!(
            [v.n_cliques, v.mal_w, v.fraud_w, v.good_w, v.fri, v.spike_days],
            [0.0; 6]
        );
        assert!(v.perm_ct > 0.0);
    }
}

fn noisy_data(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let clean = row[0] + 0.7 * row[1] - 0.4 * row[2] > 0.0;
        labels.push(clean != rng.gen_bool(0.15));
        rows.push(row);
    }
    Dataset::anonymous(rows, labels).unwrap()
}

fn accuracy(score: impl Fn(&[f64]) -> f64, data: &Dataset) -> f64 {
    let right = data
        .rows
        .iter()
        .zip(&data.labels)
        .filter(|(r, &l)| (score(r) > 0.5) == l)
        .count();
    right as f64 / data.len() as f64
}

#[test]
fn forest_beats_its_average_tree() {
    let seeds = 20;
    let diffs: Vec<f64> = (0..seeds)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
            let train = noisy_data(&mut rng, 300);
            let test = noisy_data(&mut rng, 300);
            let forest = Forest::fit(&train.rows, &train.labels, &ForestParams::default(), s);
            let ensemble = accuracy(|r| forest.score(r), &test);
            let trees = forest
                .trees
                .iter()
                .map(|t| accuracy(|r| t.score(r), &test))
                .sum::<f64>()
                / forest.trees.len() as f64;
            ensemble - trees
        })
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = mean / (sd / n.sqrt());
    let critical = StudentsT::new(0.0, 1.0, n - 1.0).unwrap().inverse_cdf(0.95);
    assert!(t > critical, "mean gain {mean:.4}, t {t:.2} vs {critical:.2}");
}

#[test]
fn random_labels_give_chance_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
    let labels: Vec<bool> = (0..200).map(|_| rng.gen_bool(0.5)).collect();
    let majority = 100.0
        * labels
            .iter()
            .filter(|&&l| l)
            .count()
            .max(labels.iter().filter(|&&l| !l).count()) as f64
        / labels.len() as f64;
    let data = Dataset::anonymous(rows, labels).unwrap();
    for kind in LearnerKind::ALL {
        let r = cross_validate(&data, &Hyperparameters::defaults(kind), 10, 2).unwrap();
        assert!(
            (r.accuracy - majority).abs() <= 10.0,
            "{kind}: {} vs {majority}",
            r.accuracy
        );
    }
}
