use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use super::types::*;
use crate::error::{Error, Result};

/// Raw tables prior to cross-record validation.
#[derive(Debug, Clone, Default)]
pub struct Records {
    pub apps: Vec<AppRecord>,
    pub snapshots: Vec<AppSnapshot>,
    pub reviews: Vec<Review>,
    pub profiles: Vec<ReviewerProfile>,
    pub labels: Vec<LabelRecord>,
}

/// Immutable, fully indexed market dataset.
///
/// Reviews are held in one vector ordered by `(app_id, date, reviewer_id,
/// review_id)`, so every app's reviews form a contiguous, date-ordered slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStore {
    apps: BTreeMap<String, AppRecord>,
    app_ordinals: HashMap<String, u32>,
    snapshots: BTreeMap<String, Vec<AppSnapshot>>,
    reviews: Vec<Review>,
    review_pos: HashMap<String, usize>,
    app_reviews: HashMap<String, Range<usize>>,
    reviewer_reviews: BTreeMap<String, Vec<usize>>,
    reviewer_apps: BTreeMap<String, BTreeSet<String>>,
    reviewer_app_ordinals: HashMap<String, Vec<u32>>,
    profiles: BTreeMap<String, ReviewerProfile>,
    labels: LabelSet,
}

/// Checks that only concern a single record. Ingestion rejects the offending
/// line; programmatic construction treats a failure as fatal.
pub(crate) fn check_app(app: &AppRecord) -> Result<(), String> {
    if app.app_id.is_empty() {
        return Err("empty app_id".into());
    }
    if !(app.price.is_finite() && app.price >= 0.0) {
        return Err(format!("app {}: price must be a non-negative number", app.app_id));
    }
    Ok(())
}

pub(crate) fn check_snapshot(s: &AppSnapshot) -> Result<(), String> {
    if s.install_bucket.0 >= s.install_bucket.1 {
        return Err(format!(
            "snapshot {}@{}: install bucket {} needs lower < upper",
            s.app_id, s.capture_date, s.install_bucket
        ));
    }
    if let Some(r) = s.aggregate_rating {
        if !(1.0..=5.0).contains(&r) {
            return Err(format!(
                "snapshot {}@{}: aggregate_rating {r} outside [1,5]",
                s.app_id, s.capture_date
            ));
        }
    }
    Ok(())
}

pub(crate) fn check_review(r: &Review) -> Result<(), String> {
    if r.review_id.is_empty() || r.reviewer_id.is_empty() {
        return Err("review with empty review_id or reviewer_id".into());
    }
    if !(1..=5).contains(&r.rating) {
        return Err(format!("review {}: rating {} outside 1..=5", r.review_id, r.rating));
    }
    Ok(())
}

pub(crate) fn check_profile(p: &ReviewerProfile) -> Result<(), String> {
    if !(p.money_paid_total.is_finite() && p.money_paid_total >= 0.0) {
        return Err(format!(
            "reviewer {}: money_paid_total must be non-negative",
            p.reviewer_id
        ));
    }
    Ok(())
}

impl DatasetStore {
    /// Validate and index a set of tables.
    pub fn from_records(records: Records) -> Result<Self> {
        let Records {
            apps: app_list,
            snapshots: snapshot_list,
            reviews: mut review_list,
            profiles: profile_list,
            labels: label_list,
        } = records;
        let mut problems = Vec::new();

        let mut apps = BTreeMap::new();
        for app in app_list {
            if let Err(e) = check_app(&app) {
                problems.push(e);
                continue;
            }
            if apps.contains_key(&app.app_id) {
                problems.push(format!("duplicate app_id {}", app.app_id));
                continue;
            }
            apps.insert(app.app_id.clone(), app);
        }
        let app_ordinals: HashMap<String, u32> =
            apps.keys().enumerate().map(|(i, id)| (id.clone(), i as u32)).collect();

        let mut snapshots: BTreeMap<String, Vec<AppSnapshot>> = BTreeMap::new();
        for s in snapshot_list {
            if let Err(e) = check_snapshot(&s) {
                problems.push(e);
                continue;
            }
            if !apps.contains_key(&s.app_id) {
                problems.push(format!("snapshot references unknown app {}", s.app_id));
                continue;
            }
            snapshots.entry(s.app_id.clone()).or_default().push(s);
        }
        for (app_id, list) in snapshots.iter_mut() {
            list.sort_by_key(|s| s.capture_date);
            for w in list.windows(2) {
                if w[0].capture_date == w[1].capture_date {
                    problems.push(format!("app {app_id}: two snapshots captured on {}", w[0].capture_date));
                }
            }
        }

        let mut seen_reviews = BTreeSet::new();
        review_list.retain(|r| {
            if let Err(e) = check_review(r) {
                problems.push(e);
                return false;
            }
            if !apps.contains_key(&r.app_id) {
                problems.push(format!("review {} references unknown app {}", r.review_id, r.app_id));
                return false;
            }
            if !seen_reviews.insert(r.review_id.clone()) {
                problems.push(format!("duplicate review_id {}", r.review_id));
                return false;
            }
            true
        });
        review_list.sort_by(|a, b| {
            (&a.app_id, a.date, &a.reviewer_id, &a.review_id).cmp(&(&b.app_id, b.date, &b.reviewer_id, &b.review_id))
        });

        let mut review_pos = HashMap::with_capacity(review_list.len());
        let mut app_reviews: HashMap<String, Range<usize>> = HashMap::new();
        let mut reviewer_reviews: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut reviewer_apps: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (i, r) in review_list.iter().enumerate() {
            review_pos.insert(r.review_id.clone(), i);
            app_reviews
                .entry(r.app_id.clone())
                .and_modify(|range| range.end = i + 1)
                .or_insert(i..i + 1);
            reviewer_reviews.entry(r.reviewer_id.clone()).or_default().push(i);
            reviewer_apps
                .entry(r.reviewer_id.clone())
                .or_default()
                .insert(r.app_id.clone());
        }
        let reviewer_app_ordinals = reviewer_apps
            .iter()
            .map(|(u, set)| {
                // BTreeSet order equals ordinal order since ordinals follow sorted ids.
                (u.clone(), set.iter().map(|a| app_ordinals[a]).collect())
            })
            .collect();

        for (app_id, app) in apps.iter_mut() {
            let earliest = app_reviews.get(app_id).map(|r| review_list[r.start].date);
            match (app.first_review_date, earliest) {
                (Some(declared), Some(first)) if declared > first => problems.push(format!(
                    "app {app_id}: first_review_date {declared} is after its review on {first}"
                )),
                (None, Some(first)) => app.first_review_date = Some(first),
                _ => {}
            }
        }

        let mut profiles = BTreeMap::new();
        for p in profile_list {
            if let Err(e) = check_profile(&p) {
                problems.push(e);
                continue;
            }
            if profiles.contains_key(&p.reviewer_id) {
                problems.push(format!("duplicate reviewer profile {}", p.reviewer_id));
                continue;
            }
            if let Some(declared) = &p.reviewed_app_ids {
                let empty = BTreeSet::new();
                let derived = reviewer_apps.get(&p.reviewer_id).unwrap_or(&empty);
                if declared != derived {
                    problems.push(format!(
                        "reviewer {}: reviewed_app_ids disagree with the review table",
                        p.reviewer_id
                    ));
                }
            }
            profiles.insert(p.reviewer_id.clone(), p);
        }
        for u in reviewer_apps.keys() {
            profiles.entry(u.clone()).or_insert_with(|| ReviewerProfile::imputed(u));
        }

        let mut labels = LabelSet::default();
        for l in label_list {
            match l {
                LabelRecord::App { app_id, label } => {
                    if !apps.contains_key(&app_id) {
                        problems.push(format!("label references unknown app {app_id}"));
                    } else if labels.apps.insert(app_id.clone(), label).is_some() {
                        problems.push(format!("app {app_id} labeled more than once"));
                    }
                }
                LabelRecord::Review { review_id, label } => {
                    if !review_pos.contains_key(&review_id) {
                        problems.push(format!("label references unknown review {review_id}"));
                    } else if labels.reviews.insert(review_id.clone(), label).is_some() {
                        problems.push(format!("review {review_id} labeled more than once"));
                    }
                }
            }
        }

        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }

        Ok(DatasetStore {
            apps,
            app_ordinals,
            snapshots,
            reviews: review_list,
            review_pos,
            app_reviews,
            reviewer_reviews,
            reviewer_apps,
            reviewer_app_ordinals,
            profiles,
            labels,
        })
    }

    pub fn empty() -> Self {
        Self::from_records(Records::default()).expect("empty dataset is valid")
    }

    pub fn app_count(&self) -> usize {
        self.apps.len()
    }

    pub fn review_count(&self) -> usize {
        self.reviews.len()
    }

    pub fn apps(&self) -> impl Iterator<Item = &AppRecord> {
        self.apps.values()
    }

    pub fn app_ids(&self) -> impl Iterator<Item = &str> {
        self.apps.keys().map(String::as_str)
    }

    pub fn app(&self, app_id: &str) -> Result<&AppRecord> {
        self.apps.get(app_id).ok_or_else(|| Error::NotFound {
            kind: "app",
            id: app_id.to_owned(),
        })
    }

    /// Dense ordinal of an app in sorted id order.
    pub fn app_ordinal(&self, app_id: &str) -> Option<u32> {
        self.app_ordinals.get(app_id).copied()
    }

    /// The app's reviews ordered by date.
    pub fn reviews_of(&self, app_id: &str) -> Result<&[Review]> {
        self.app(app_id)?;
        Ok(self
            .app_reviews
            .get(app_id)
            .map(|r| &self.reviews[r.clone()])
            .unwrap_or(&[]))
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn review(&self, review_id: &str) -> Option<&Review> {
        self.review_pos.get(review_id).map(|&i| &self.reviews[i])
    }

    pub fn snapshots_of(&self, app_id: &str) -> Result<&[AppSnapshot]> {
        self.app(app_id)?;
        Ok(self.snapshots.get(app_id).map(Vec::as_slice).unwrap_or(&[]))
    }

    pub fn latest_snapshot(&self, app_id: &str) -> Result<Option<&AppSnapshot>> {
        Ok(self.snapshots_of(app_id)?.last())
    }

    pub fn reviewers(&self) -> impl Iterator<Item = &str> {
        self.reviewer_apps.keys().map(String::as_str)
    }

    pub fn reviewer_apps(&self, reviewer_id: &str) -> Option<&BTreeSet<String>> {
        self.reviewer_apps.get(reviewer_id)
    }

    /// Sorted app ordinals the reviewer has reviewed.
    pub fn reviewer_app_ordinals(&self, reviewer_id: &str) -> &[u32] {
        self.reviewer_app_ordinals
            .get(reviewer_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn reviews_by<'a>(&'a self, reviewer_id: &str) -> impl Iterator<Item = &'a Review> + 'a {
        self.reviewer_reviews
            .get(reviewer_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.reviews[i])
    }

    pub fn profile(&self, reviewer_id: &str) -> Option<&ReviewerProfile> {
        self.profiles.get(reviewer_id)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &ReviewerProfile> {
        self.profiles.values()
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn all_snapshots(&self) -> impl Iterator<Item = &AppSnapshot> {
        self.snapshots.values().flatten()
    }

    /// Back to raw tables, in canonical order. Imputed profiles are dropped so
    /// re-ingesting the tables reproduces this store.
    pub fn to_records(&self) -> Records {
        Records {
            apps: self.apps.values().cloned().collect(),
            snapshots: self.all_snapshots().cloned().collect(),
            reviews: self.reviews.clone(),
            profiles: self.profiles.values().filter(|p| !p.imputed).cloned().collect(),
            labels: self.labels.records().collect(),
        }
    }
}

/// Reviews of an app grouped by day, days strictly increasing, empty days
/// omitted. Within a day reviews are ordered by reviewer id then review id.
pub fn daily_review_series<'a>(store: &'a DatasetStore, app_id: &str) -> Result<Vec<(Day, Vec<&'a Review>)>> {
    let mut days: Vec<(Day, Vec<&Review>)> = Vec::new();
    for r in store.reviews_of(app_id)? {
        match days.last_mut() {
            Some((d, list)) if *d == r.date => list.push(r),
            _ => days.push((r.date, vec![r])),
        }
    }
    Ok(days)
}
