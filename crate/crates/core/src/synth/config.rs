use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{document_body, header_line};
use crate::model::Day;

pub const CONFIG_KIND: &str = "gen-config";

/// Smallest campaign that can plant a pseudo clique.
pub const MIN_CAMPAIGN_WORKERS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct GenConfig {
    pub seed: u64,
    pub counts: Counts,
    pub campaign: CampaignShape,
    pub fraud: FraudShape,
    pub malware: MalwareShape,
    pub benign: BenignShape,
    pub timeline: Timeline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Counts {
    pub fraud_apps: usize,
    pub malware_apps: usize,
    pub benign_apps: usize,
    /// Fraud apps whose genuine users complain about forced ratings.
    pub coercive_apps: usize,
    pub honest_reviewers: usize,
    pub fraud_workers: usize,
    /// Derived from the number of campaign targets when absent.
    pub campaigns: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignShape {
    pub workers_per_campaign: usize,
    pub apps_per_worker: usize,
    pub window_days: u32,
    pub five_star_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FraudShape {
    /// Inclusive range of genuine reviews on a campaign target.
    pub honest_reviews: [usize; 2],
    pub install_per_rating: f64,
    pub indicator_rate: f64,
    pub coercive_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MalwareShape {
    pub campaign_probability: f64,
    pub ramp_probability: f64,
    pub indicator_rate: f64,
    /// Weights of ratings 1 through 5 from genuine users.
    pub rating_weights: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenignShape {
    pub rating_weights: [f64; 5],
    pub reviews_per_app: [usize; 2],
    /// Exponent on the uniform review-day draw; above 1 front-loads reviews
    /// after launch.
    pub review_rate_skew: f64,
    pub install_per_rating: f64,
    /// Range of star ratings posted per written review.
    pub ratings_per_review: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timeline {
    pub start: Day,
    pub days: u32,
}

impl Default for Counts {
    fn default() -> Self {
        Counts {
            fraud_apps: 200,
            malware_apps: 200,
            benign_apps: 200,
            coercive_apps: 10,
            honest_reviewers: 4000,
            fraud_workers: 150,
            campaigns: None,
        }
    }
}

impl Default for CampaignShape {
    fn default() -> Self {
        CampaignShape {
            workers_per_campaign: 10,
            apps_per_worker: 20,
            window_days: 2,
            five_star_share: 0.85,
        }
    }
}

impl Default for FraudShape {
    fn default() -> Self {
        FraudShape {
            honest_reviews: [5, 30],
            install_per_rating: 25.0,
            indicator_rate: 0.15,
            coercive_rate: 0.5,
        }
    }
}

impl Default for MalwareShape {
    fn default() -> Self {
        MalwareShape {
            campaign_probability: 0.75,
            ramp_probability: 0.8,
            indicator_rate: 0.3,
            rating_weights: [0.25, 0.15, 0.2, 0.2, 0.2],
        }
    }
}

impl Default for BenignShape {
    fn default() -> Self {
        BenignShape {
            rating_weights: [0.04, 0.05, 0.11, 0.3, 0.5],
            reviews_per_app: [15, 60],
            review_rate_skew: 1.5,
            install_per_rating: 100.0,
            ratings_per_review: [2.0, 5.0],
        }
    }
}

impl Default for Timeline {
    fn default() -> Self {
        Timeline {
            start: NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date"),
            days: 540,
        }
    }
}

fn probability(name: &str, p: f64, problems: &mut Vec<String>) {
    if !(0.0..=1.0).contains(&p) {
        problems.push(format!("{name} must be a probability, got {p}"));
    }
}

fn weights(name: &str, w: &[f64; 5], problems: &mut Vec<String>) {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
        problems.push(format!("{name} must be non-negative with a positive sum"));
    }
}

fn range<T: PartialOrd + std::fmt::Debug>(name: &str, r: &[T; 2], problems: &mut Vec<String>) {
    if r[0] > r[1] {
        problems.push(format!("{name} range {r:?} is inverted"));
    }
}

impl GenConfig {
    pub fn total_apps(&self) -> usize {
        self.counts.fraud_apps + self.counts.malware_apps + self.counts.benign_apps
    }

    /// A config with only benign apps and no campaigns.
    pub fn benign_only(apps: usize) -> Self {
        let mut c = GenConfig::default();
        c.counts.fraud_apps = 0;
        c.counts.malware_apps = 0;
        c.counts.coercive_apps = 0;
        c.counts.benign_apps = apps;
        c
    }

    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        let c = &self.counts;
        if self.total_apps() == 0 {
            p.push("at least one app is required".to_owned());
        }
        if c.honest_reviewers == 0 {
            p.push("honest_reviewers must be positive".to_owned());
        }
        if c.coercive_apps > c.fraud_apps {
            p.push(format!(
                "coercive_apps ({}) exceeds fraud_apps ({})",
                c.coercive_apps, c.fraud_apps
            ));
        }
        if c.campaigns == Some(0) {
            p.push("campaigns must be positive when given".to_owned());
        }
        let s = &self.campaign;
        let may_plant = c.fraud_apps > 0 || (c.malware_apps > 0 && self.malware.campaign_probability > 0.0);
        if s.workers_per_campaign < MIN_CAMPAIGN_WORKERS {
            p.push(format!(
                "workers_per_campaign ({}) is below the minimum clique size {MIN_CAMPAIGN_WORKERS}",
                s.workers_per_campaign
            ));
        }
        if may_plant && c.fraud_workers < s.workers_per_campaign {
            p.push(format!(
                "fraud_workers ({}) is smaller than workers_per_campaign ({})",
                c.fraud_workers, s.workers_per_campaign
            ));
        }
        if s.apps_per_worker == 0 {
            p.push("apps_per_worker must be positive".to_owned());
        }
        if self.timeline.days < 30 {
            p.push(format!(
                "timeline must span at least 30 days, got {}",
                self.timeline.days
            ));
        }
        if s.window_days == 0 || s.window_days > self.timeline.days / 3 {
            p.push(format!(
                "window_days ({}) must be between 1 and a third of the timeline",
                s.window_days
            ));
        }
        probability("campaign.five_star_share", s.five_star_share, &mut p);
        probability("fraud.indicator_rate", self.fraud.indicator_rate, &mut p);
        probability("fraud.coercive_rate", self.fraud.coercive_rate, &mut p);
        probability(
            "malware.campaign_probability",
            self.malware.campaign_probability,
            &mut p,
        );
        probability("malware.ramp_probability", self.malware.ramp_probability, &mut p);
        probability("malware.indicator_rate", self.malware.indicator_rate, &mut p);
        weights("malware.rating_weights", &self.malware.rating_weights, &mut p);
        weights("benign.rating_weights", &self.benign.rating_weights, &mut p);
        range("fraud.honest_reviews", &self.fraud.honest_reviews, &mut p);
        range("benign.reviews_per_app", &self.benign.reviews_per_app, &mut p);
        range("benign.ratings_per_review", &self.benign.ratings_per_review, &mut p);
        if !(self.benign.ratings_per_review[0] >= 1.0) || !self.benign.ratings_per_review[1].is_finite() {
            p.push("benign.ratings_per_review must be at least 1".to_owned());
        }
        for (name, v) in [
            ("benign.review_rate_skew", self.benign.review_rate_skew),
            ("benign.install_per_rating", self.benign.install_per_rating),
            ("fraud.install_per_rating", self.fraud.install_per_rating),
        ] {
            if !(v.is_finite() && v > 0.0) {
                p.push(format!("{name} must be positive, got {v}"));
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p.join("; ")))
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = header_line(CONFIG_KIND);
        s.push('\n');
        s.push_str(&serde_json::to_string_pretty(self).expect("config serializes"));
        s.push('\n');
        s
    }

    /// Parses and validates. Missing fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: GenConfig =
            serde_json::from_str(document_body(text, CONFIG_KIND)?).map_err(|e| Error::parse("generator config", e))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
