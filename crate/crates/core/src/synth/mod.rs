//! Deterministic synthetic markets with planted fraud campaigns, malware
//! signals and benign baselines.

mod config;
mod text;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use chrono::Duration;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{
    BenignShape, CampaignShape, Counts, FraudShape, GenConfig, MalwareShape, Timeline, CONFIG_KIND,
    MIN_CAMPAIGN_WORKERS,
};

use crate::error::{Error, Result};
use crate::format::{document_body, header_line};
use crate::model::{
    export, AppLabel, AppRecord, AppSnapshot, BucketTable, DatasetStore, Day, LabelRecord, Records, Review,
    ReviewLabel, ReviewerProfile,
};
use crate::pcf::PseudoClique;
use crate::permissions::PermissionCatalog;

pub const TRUTH_KIND: &str = "ground-truth";
pub const TRUTH_FILE: &str = "ground_truth.json";

pub const CATEGORIES: &[&str] = &[
    "Arcade",
    "Racing",
    "Casual",
    "Puzzle",
    "Tools",
    "Productivity",
    "Social",
    "Music",
    "Education",
    "Entertainment",
    "Personalization",
    "Sports",
];

// fraud targets lean towards these
const FRAUD_HEAVY: &[&str] = &["Arcade", "Racing"];
const SIMILAR_APPS: usize = 6;
const HOME_CATEGORY_SHARE: f64 = 0.8;
const MISSING_PROFILE_SHARE: f64 = 0.03;
const PAID_APP_SHARE: f64 = 0.15;
const PRICES: &[f64] = &[0.99, 1.99, 2.99, 4.99];
const RAMP_STEP_PROBABILITY: f64 = 0.6;
const BENIGN_PERMISSION_DRIFT: f64 = 0.1;
const MIN_COERCIVE_REVIEWS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedCampaign {
    pub id: usize,
    pub workers: Vec<String>,
    pub apps: Vec<String>,
    pub window_start: Day,
    pub window_days: u32,
}

/// What the generator planted, for scoring detectors against.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub campaigns: Vec<PlantedCampaign>,
    pub coercive_apps: Vec<String>,
    pub ramp_apps: Vec<String>,
}

impl GroundTruth {
    /// Workers that reviewed `app_id` as part of some campaign.
    pub fn planted_members(&self, app_id: &str) -> BTreeSet<&str> {
        self.campaigns
            .iter()
            .filter(|c| c.apps.iter().any(|a| a == app_id))
            .flat_map(|c| c.workers.iter().map(String::as_str))
            .collect()
    }

    pub fn campaign_apps(&self) -> BTreeSet<&str> {
        self.campaigns
            .iter()
            .flat_map(|c| c.apps.iter().map(String::as_str))
            .collect()
    }

    /// Share of planted members of `app_id` found in any of `cliques`, or
    /// `None` when nothing was planted there.
    pub fn recovery(&self, app_id: &str, cliques: &[PseudoClique]) -> Option<f64> {
        let planted = self.planted_members(app_id);
        if planted.is_empty() {
            return None;
        }
        let found: BTreeSet<&str> = cliques
            .iter()
            .flat_map(|c| c.members.iter().map(String::as_str))
            .collect();
        Some(planted.intersection(&found).count() as f64 / planted.len() as f64)
    }

    pub fn to_json(&self) -> String {
        let mut s = header_line(TRUTH_KIND);
        s.push('\n');
        s.push_str(&serde_json::to_string_pretty(self).expect("truth serializes"));
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(document_body(text, TRUTH_KIND)?).map_err(|e| Error::parse("ground truth", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticMarket {
    pub store: DatasetStore,
    pub truth: GroundTruth,
}

impl SyntheticMarket {
    /// Writes the ingestion files, the manifest and the ground truth; returns
    /// the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let manifest = export(&self.store, dir)?;
        let path = dir.join(TRUTH_FILE);
        std::fs::write(&path, self.truth.to_json()).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

struct AppPlan {
    id: String,
    class: AppLabel,
    category: usize,
    developer: String,
    price: f64,
    launch: u32,
    campaign: bool,
    coercive: bool,
    ramp: bool,
}

struct Draft {
    app: usize,
    reviewer: String,
    day: u32,
    rating: u8,
    title: String,
    text: String,
    fraudulent: bool,
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.max(1).to_string().len().max(4);
    (0..n).map(|i| format!("{prefix}-{:0width$}", i + 1)).collect()
}

fn star(rng: &mut ChaCha8Rng, dist: &WeightedIndex<f64>) -> u8 {
    dist.sample(rng) as u8 + 1
}

fn plan_apps(config: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<AppPlan> {
    let c = &config.counts;
    let mut classes: Vec<AppLabel> = std::iter::repeat_n(AppLabel::Fraudulent, c.fraud_apps)
        .chain(std::iter::repeat_n(AppLabel::Malware, c.malware_apps))
        .chain(std::iter::repeat_n(AppLabel::Benign, c.benign_apps))
        .collect();
    classes.shuffle(rng);
    let fraud_weights: Vec<f64> = CATEGORIES
        .iter()
        .map(|cat| if FRAUD_HEAVY.contains(cat) { 3.0 } else { 1.0 })
        .collect();
    let fraud_cat = WeightedIndex::new(&fraud_weights).expect("positive weights");
    let launch_max = config.timeline.days / 3;
    let mut plans: Vec<AppPlan> = ids("app", classes.len())
        .into_iter()
        .zip(classes)
        .map(|(id, class)| {
            let category = match class {
                AppLabel::Fraudulent => fraud_cat.sample(rng),
                _ => rng.gen_range(0..CATEGORIES.len()),
            };
            let price = if rng.gen_bool(PAID_APP_SHARE) {
                *PRICES.choose(rng).expect("prices")
            } else {
                0.0
            };
            let campaign = match class {
                AppLabel::Fraudulent => true,
                AppLabel::Malware => rng.gen_bool(config.malware.campaign_probability),
                AppLabel::Benign => false,
            };
            let ramp = class == AppLabel::Malware && rng.gen_bool(config.malware.ramp_probability);
            AppPlan {
                id,
                class,
                category,
                developer: String::new(),
                price,
                launch: rng.gen_range(0..=launch_max),
                campaign,
                coercive: false,
                ramp,
            }
        })
        .collect();

    let fraud_idx: Vec<usize> = (0..plans.len())
        .filter(|&i| plans[i].class == AppLabel::Fraudulent)
        .collect();
    for i in index::sample(rng, fraud_idx.len(), c.coercive_apps) {
        plans[fraud_idx[i]].coercive = true;
    }

    // developers own one to three apps of a single class
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for class in [AppLabel::Fraudulent, AppLabel::Malware, AppLabel::Benign] {
        let members: Vec<usize> = (0..plans.len()).filter(|&i| plans[i].class == class).collect();
        let mut rest = members.as_slice();
        while !rest.is_empty() {
            let k = rng.gen_range(1..=3).min(rest.len());
            groups.push(rest[..k].to_vec());
            rest = &rest[k..];
        }
    }
    groups.shuffle(rng);
    for (dev, group) in ids("dev", groups.len()).into_iter().zip(groups) {
        for i in group {
            plans[i].developer = dev.clone();
        }
    }
    plans
}

fn similar_apps(plans: &[AppPlan], rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut by_cat: Vec<Vec<usize>> = vec![Vec::new(); CATEGORIES.len()];
    for (i, p) in plans.iter().enumerate() {
        by_cat[p.category].push(i);
    }
    plans
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let others: Vec<usize> = by_cat[p.category].iter().copied().filter(|&j| j != i).collect();
            let mut picked: Vec<String> = index::sample(rng, others.len(), SIMILAR_APPS.min(others.len()))
                .into_iter()
                .map(|k| plans[others[k]].id.clone())
                .collect();
            picked.sort();
            picked
        })
        .collect()
}

fn plan_campaigns(
    config: &GenConfig,
    plans: &[AppPlan],
    workers: &[String],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(Vec<usize>, Vec<usize>, u32)>> {
    let shape = &config.campaign;
    let mut targets: Vec<usize> = (0..plans.len()).filter(|&i| plans[i].campaign).collect();
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    // same-developer apps tend to be bought together
    targets.sort_by(|&a, &b| plans[a].developer.cmp(&plans[b].developer).then(a.cmp(&b)));
    let a = shape.apps_per_worker;
    if targets.len() < a {
        return Err(Error::Config(format!(
            "{} campaign targets cannot fill apps_per_worker = {a}",
            targets.len()
        )));
    }
    let needed = targets.len().div_ceil(a);
    let n = config.counts.campaigns.unwrap_or(needed);
    if n < needed {
        return Err(Error::Config(format!(
            "{n} campaigns of {a} apps cannot cover {} targets",
            targets.len()
        )));
    }
    let start_min = config.timeline.days / 3;
    let start_max = config.timeline.days - shape.window_days;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut apps: Vec<usize> = targets.iter().skip(i * a).take(a).copied().collect();
        while apps.len() < a {
            let t = targets[rng.gen_range(0..targets.len())];
            if !apps.contains(&t) {
                apps.push(t);
            }
        }
        let mut crew: Vec<usize> = index::sample(rng, workers.len(), shape.workers_per_campaign).into_vec();
        crew.sort_unstable();
        out.push((apps, crew, rng.gen_range(start_min..=start_max)));
    }
    Ok(out)
}

fn honest_review_count(config: &GenConfig, plan: &AppPlan, rng: &mut ChaCha8Rng) -> usize {
    let [lo, hi] = if plan.campaign {
        config.fraud.honest_reviews
    } else {
        config.benign.reviews_per_app
    };
    rng.gen_range(lo..=hi)
}

fn permissions(
    plan: &AppPlan,
    snapshots: usize,
    normal: &[&String],
    dangerous: &[&String],
    rng: &mut ChaCha8Rng,
) -> Vec<BTreeSet<String>> {
    let k = rng.gen_range(2..=6).min(normal.len());
    let base: BTreeSet<String> = index::sample(rng, normal.len(), k)
        .into_iter()
        .map(|i| normal[i].clone())
        .collect();
    let mut order: Vec<&String> = dangerous.to_vec();
    order.shuffle(rng);
    let mut used = if plan.ramp {
        rng.gen_range(0..=1)
    } else if plan.class == AppLabel::Malware {
        rng.gen_range(3..=7)
    } else {
        rng.gen_range(0..=3)
    };
    let mut counts = vec![used; snapshots];
    if plan.ramp {
        let mut grew = false;
        for c in counts.iter_mut().skip(1) {
            if rng.gen_bool(RAMP_STEP_PROBABILITY) {
                used += rng.gen_range(1..=3);
                grew = true;
            }
            *c = used;
        }
        if !grew {
            *counts.last_mut().expect("snapshots") += 2;
        }
    } else if snapshots > 1 && rng.gen_bool(BENIGN_PERMISSION_DRIFT) {
        let at = rng.gen_range(1..snapshots);
        for c in &mut counts[at..] {
            *c += 1;
        }
    }
    counts
        .into_iter()
        .map(|k| {
            let mut set = base.clone();
            set.extend(order.iter().take(k.min(order.len())).map(|p| (*p).clone()));
            set
        })
        .collect()
}

/// Generate a market from `config`. The same config always yields the same
/// store, down to the serialized bytes.
pub fn generate(config: &GenConfig) -> Result<SyntheticMarket> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let tl = &config.timeline;
    let day = |offset: u32| tl.start + Duration::days(offset as i64);

    let plans = plan_apps(config, &mut rng);
    let similar = similar_apps(&plans, &mut rng);
    let honest = ids("u", config.counts.honest_reviewers);
    let workers = ids("w", config.counts.fraud_workers);
    let campaigns = plan_campaigns(config, &plans, &workers, &mut rng)?;

    let mut drafts: Vec<Draft> = Vec::new();
    let mut seen: HashSet<(usize, String)> = HashSet::new();
    for (apps, crew, start) in &campaigns {
        for &app in apps {
            for &w in crew {
                if !seen.insert((app, workers[w].clone())) {
                    continue;
                }
                let (title, text) = text::fraudulent(&mut rng);
                let rating = if rng.gen_bool(config.campaign.five_star_share) {
                    5
                } else {
                    4
                };
                drafts.push(Draft {
                    app,
                    reviewer: workers[w].clone(),
                    day: start + rng.gen_range(0..config.campaign.window_days),
                    rating,
                    title,
                    text,
                    fraudulent: true,
                });
            }
        }
    }

    let benign_stars = WeightedIndex::new(config.benign.rating_weights).expect("validated weights");
    let malware_stars = WeightedIndex::new(config.malware.rating_weights).expect("validated weights");
    let ncat = CATEGORIES.len();
    let home: Vec<Vec<usize>> = (0..ncat).map(|c| (c..honest.len()).step_by(ncat).collect()).collect();
    for (app, plan) in plans.iter().enumerate() {
        let n = honest_review_count(config, plan, &mut rng);
        let span = tl.days - 1 - plan.launch;
        let mut coercive_left = if plan.coercive { MIN_COERCIVE_REVIEWS } else { 0 };
        for _ in 0..n {
            let mut reviewer = None;
            for _ in 0..32 {
                let pool = &home[plan.category];
                let u = if !pool.is_empty() && rng.gen_bool(HOME_CATEGORY_SHARE) {
                    pool[rng.gen_range(0..pool.len())]
                } else {
                    rng.gen_range(0..honest.len())
                };
                if seen.insert((app, honest[u].clone())) {
                    reviewer = Some(u);
                    break;
                }
            }
            let Some(u) = reviewer else { continue };
            let stars = if plan.class == AppLabel::Malware {
                &malware_stars
            } else {
                &benign_stars
            };
            let rating = star(&mut rng, stars);
            let (title, mut body) = text::honest(&mut rng, rating);
            if plan.class == AppLabel::Malware && rng.gen_bool(config.malware.indicator_rate) {
                text::append(&mut body, &mut rng, text::MALWARE_SENTENCES);
            }
            if plan.class == AppLabel::Fraudulent && rng.gen_bool(config.fraud.indicator_rate) {
                text::append(&mut body, &mut rng, text::FRAUD_SENTENCES);
            }
            if plan.coercive && (coercive_left > 0 || rng.gen_bool(config.fraud.coercive_rate)) {
                text::append(&mut body, &mut rng, text::COERCIVE_SENTENCES);
                coercive_left = coercive_left.saturating_sub(1);
            }
            let u01: f64 = rng.gen();
            let offset = (span as f64 * u01.powf(config.benign.review_rate_skew)).floor() as u32;
            drafts.push(Draft {
                app,
                reviewer: honest[u].clone(),
                day: plan.launch + offset.min(span),
                rating,
                title,
                text: body,
                fraudulent: false,
            });
        }
    }
    drafts.sort_by(|a, b| (a.app, a.day, &a.reviewer).cmp(&(b.app, b.day, &b.reviewer)));

    let buckets = BucketTable::default();
    let catalog = PermissionCatalog::bundled();
    let dangerous: Vec<&String> = catalog.dangerous.iter().collect();
    let normal: Vec<&String> = catalog.all.difference(&catalog.dangerous).collect();
    let mut by_app: Vec<Vec<&Draft>> = vec![Vec::new(); plans.len()];
    for d in &drafts {
        by_app[d.app].push(d);
    }
    let mut snapshots = Vec::new();
    for (app, plan) in plans.iter().enumerate() {
        let k = rng.gen_range(3..=6usize);
        let mut captures: Vec<u32> = index::sample(&mut rng, (tl.days - 2 - plan.launch) as usize, k - 1)
            .into_iter()
            .map(|i| plan.launch + 1 + i as u32)
            .collect();
        captures.push(tl.days - 1);
        captures.sort_unstable();
        let perms = permissions(plan, k, &normal, &dangerous, &mut rng);
        let [lo, hi] = config.benign.ratings_per_review;
        let per_review = rng.gen_range(lo..=hi);
        let ipr = if plan.campaign {
            config.fraud.install_per_rating
        } else {
            config.benign.install_per_rating
        };
        for (v, (&t, permissions)) in captures.iter().zip(perms).enumerate() {
            let seen: Vec<&&Draft> = by_app[app].iter().filter(|d| d.day <= t).collect();
            let fraud = seen.iter().filter(|d| d.fraudulent).count() as u64;
            let genuine = seen.len() as u64 - fraud;
            let organic = (genuine as f64 * per_review).round();
            let installs = (organic * ipr * rng.gen_range(0.7..1.4) + 2.0 * fraud as f64).round() as u64;
            let aggregate_rating = (!seen.is_empty()).then(|| {
                let mean = seen.iter().map(|d| d.rating as f64).sum::<f64>() / seen.len() as f64;
                (mean * 100.0).round() / 100.0
            });
            snapshots.push(AppSnapshot {
                app_id: plan.id.clone(),
                capture_date: day(t),
                rating_count: organic as u64 + fraud,
                install_bucket: buckets.bucket_of(installs),
                review_count: seen.len() as u64,
                aggregate_rating,
                permissions,
                version_tag: format!("1.{v}"),
            });
        }
    }

    let review_ids = ids("rv", drafts.len());
    let mut reviewed: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    let mut labels = Vec::with_capacity(plans.len() + drafts.len());
    let reviews: Vec<Review> = drafts
        .iter()
        .zip(&review_ids)
        .map(|(d, id)| {
            reviewed
                .entry(d.reviewer.as_str())
                .or_default()
                .insert(plans[d.app].id.clone());
            labels.push(LabelRecord::Review {
                review_id: id.clone(),
                label: if d.fraudulent {
                    ReviewLabel::Fraudulent
                } else {
                    ReviewLabel::Genuine
                },
            });
            Review {
                review_id: id.clone(),
                app_id: plans[d.app].id.clone(),
                reviewer_id: d.reviewer.clone(),
                date: day(d.day),
                title: d.title.clone(),
                text: d.text.clone(),
                rating: d.rating,
            }
        })
        .collect();

    let price_of: BTreeMap<&str, f64> = plans.iter().map(|p| (p.id.as_str(), p.price)).collect();
    let mut profiles = Vec::new();
    for (reviewer, apps) in reviewed {
        let worker = reviewer.starts_with("w-");
        let profile = if worker {
            ReviewerProfile {
                reviewer_id: reviewer.to_owned(),
                reviewed_app_ids: Some(apps),
                money_paid_total: 0.0,
                liked_app_count: rng.gen_range(0..=3),
                follower_count: rng.gen_range(0..=2),
                imputed: false,
            }
        } else {
            if rng.gen_bool(MISSING_PROFILE_SHARE) {
                continue;
            }
            let spent: f64 = apps.iter().map(|a| price_of[a.as_str()]).sum();
            let extra = if rng.gen_bool(0.5) {
                rng.gen_range(0.0..40.0)
            } else {
                0.0
            };
            ReviewerProfile {
                reviewer_id: reviewer.to_owned(),
                reviewed_app_ids: Some(apps),
                money_paid_total: ((spent + extra) * 100.0).round() / 100.0,
                liked_app_count: rng.gen_range(0..=80),
                follower_count: if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=300) },
                imputed: false,
            }
        };
        profiles.push(profile);
    }

    let apps: Vec<AppRecord> = plans
        .iter()
        .zip(similar)
        .map(|(p, similar_app_ids)| {
            labels.push(LabelRecord::App {
                app_id: p.id.clone(),
                label: p.class,
            });
            AppRecord {
                app_id: p.id.clone(),
                developer_id: p.developer.clone(),
                category: CATEGORIES[p.category].to_owned(),
                price: p.price,
                first_review_date: Some(day(p.launch)),
                similar_app_ids,
            }
        })
        .collect();

    let truth = GroundTruth {
        seed: config.seed,
        campaigns: campaigns
            .iter()
            .enumerate()
            .map(|(i, (apps, crew, start))| PlantedCampaign {
                id: i + 1,
                workers: crew.iter().map(|&w| workers[w].clone()).collect(),
                apps: apps.iter().map(|&a| plans[a].id.clone()).collect(),
                window_start: day(*start),
                window_days: config.campaign.window_days,
            })
            .collect(),
        coercive_apps: plans.iter().filter(|p| p.coercive).map(|p| p.id.clone()).collect(),
        ramp_apps: plans.iter().filter(|p| p.ramp).map(|p| p.id.clone()).collect(),
    };
    let store = DatasetStore::from_records(Records {
        apps,
        snapshots,
        reviews,
        profiles,
        labels,
    })?;
    Ok(SyntheticMarket { store, truth })
}

#[cfg(test)]
mod tests;
