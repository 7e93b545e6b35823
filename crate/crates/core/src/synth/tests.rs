use super::*;
use crate::graph::{build_graph, weighted_density, GraphConfig};
use crate::irr::{chi_square_independence, contingency_table};
use crate::model::{export_texts, ingest, Manifest};
use crate::permissions::{ramp_analysis, RampMode};
use crate::review::{bundled_coercive_keywords, coercive_scan, LabelClassifier};

fn small(seed: u64) -> GenConfig {
    let mut c = GenConfig::default();
    c.seed = seed;
    c.counts.fraud_apps = 40;
    c.counts.malware_apps = 20;
    c.counts.benign_apps = 40;
    c.counts.coercive_apps = 4;
    c.counts.honest_reviewers = 800;
    c.counts.fraud_workers = 40;
    c
}

#[test]
fn same_seed_same_bytes() {
    let a = generate(&small(3)).unwrap();
    let b = generate(&small(3)).unwrap();
    assert_eq!(export_texts(&a.store), export_texts(&b.store));
    assert_eq!(a.truth.to_json(), b.truth.to_json());
    let c = generate(&small(4)).unwrap();
    assert_ne!(export_texts(&a.store), export_texts(&c.store));
}

#[test]
fn class_counts_match_config() {
    let m = generate(&small(1)).unwrap();
    let l = m.store.labels();
    assert_eq!(l.apps_with(AppLabel::Fraudulent).count(), 40);
    assert_eq!(l.apps_with(AppLabel::Malware).count(), 20);
    assert_eq!(l.apps_with(AppLabel::Benign).count(), 40);
    assert_eq!(l.reviews.len(), m.store.review_count());
    assert_eq!(m.truth.coercive_apps.len(), 4);
    for app in m.store.app_ids() {
        assert!(!m.store.snapshots_of(app).unwrap().is_empty());
    }
}

#[test]
fn planted_pairs_share_every_campaign_app() {
    let m = generate(&small(2)).unwrap();
    let a = CampaignShape::default().apps_per_worker;
    for camp in &m.truth.campaigns {
        assert_eq!(camp.apps.len(), a);
        let g = build_graph(&m.store, &camp.apps[0], GraphConfig::default()).unwrap();
        let nodes: Vec<usize> = camp.workers.iter().map(|w| g.node_index(w).unwrap()).collect();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                assert!(g.weight(u, v) as usize >= a);
            }
        }
        assert!(weighted_density(&g, &nodes) >= a as f64);
    }
}

#[test]
fn export_ingest_round_trip() {
    let m = generate(&small(5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = m.write(dir.path()).unwrap();
    let (store, report) = ingest(&Manifest::load(&manifest).unwrap()).unwrap();
    assert_eq!(report.rejected_count(), 0);
    assert_eq!(export_texts(&store), export_texts(&m.store));
    assert_eq!(GroundTruth::load(&dir.path().join(TRUTH_FILE)).unwrap(), m.truth);
}

#[test]
fn infeasible_targets_rejected() {
    let mut c = small(0);
    c.counts.fraud_apps = 5;
    c.counts.coercive_apps = 0;
    c.counts.malware_apps = 0;
    assert!(matches!(generate(&c), Err(Error::Config(_))));
    let mut c = small(0);
    c.counts.campaigns = Some(1);
    assert!(matches!(generate(&c), Err(Error::Config(_))));
}

#[test]
fn benign_market_couples_installs_to_ratings() {
    let mut c = GenConfig::benign_only(300);
    c.counts.honest_reviewers = 1500;
    let m = generate(&c).unwrap();
    assert!(m.truth.campaigns.is_empty());
    let table = contingency_table(&m.store, &BucketTable::default()).unwrap();
    let chi = chi_square_independence(&table).unwrap();
    assert!(chi.p_value < 1e-6, "p = {}", chi.p_value);
    // installs were drawn at 70 to 140 per rating; the bucket must admit that
    for a in m.store.app_ids() {
        let s = m.store.latest_snapshot(a).unwrap().unwrap();
        if s.rating_count > 0 {
            let b = s.install_bucket;
            assert!(
                b.lower() < 140 * s.rating_count && b.upper() >= 70 * s.rating_count,
                "{a}: {s:?}"
            );
        }
    }
}

#[test]
fn coercive_apps_rank_first() {
    let m = generate(&small(6)).unwrap();
    let scan = coercive_scan(&m.store, &bundled_coercive_keywords(), &LabelClassifier).unwrap();
    let top: BTreeSet<&str> = scan
        .ranking
        .iter()
        .take(m.truth.coercive_apps.len())
        .map(|a| a.app_id.as_str())
        .collect();
    let want: BTreeSet<&str> = m.truth.coercive_apps.iter().map(String::as_str).collect();
    assert_eq!(top, want);
}

#[test]
fn ramp_apps_ramp() {
    let m = generate(&small(7)).unwrap();
    let catalog = PermissionCatalog::bundled();
    assert!(!m.truth.ramp_apps.is_empty());
    for app in &m.truth.ramp_apps {
        let r = ramp_analysis(m.store.snapshots_of(app).unwrap(), &catalog, RampMode::Count).unwrap();
        assert!(r.ramp_count >= 1, "{app}");
    }
}
