use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Reviews, snapshots and first-review dates are tracked at calendar-day
/// resolution.
pub type Day = NaiveDate;

/// Half-open count interval `(lower, upper]`, e.g. `(100, 500]` installs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bucket(pub u64, pub u64);

impl Bucket {
    pub fn lower(&self) -> u64 {
        self.0
    }

    pub fn upper(&self) -> u64 {
        self.1
    }

    pub fn contains(&self, count: u64) -> bool {
        self.0 < count && count <= self.1
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}]", self.0, self.1)
    }
}

/// Static metadata of one app.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppRecord {
    pub app_id: String,
    pub developer_id: String,
    pub category: String,
    #[serde(default)]
    pub price: f64,
    /// Approximates the upload date. Derived from the earliest review when the
    /// input omits it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_review_date: Option<Day>,
    #[serde(default)]
    pub similar_app_ids: Vec<String>,
}

/// Time-varying state of an app observed at one capture date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppSnapshot {
    pub app_id: String,
    pub capture_date: Day,
    pub rating_count: u64,
    pub install_bucket: Bucket,
    pub review_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate_rating: Option<f64>,
    #[serde(default)]
    pub permissions: BTreeSet<String>,
    #[serde(default)]
    pub version_tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub app_id: String,
    pub reviewer_id: String,
    pub date: Day,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub text: String,
    pub rating: u8,
}

impl Review {
    /// Title and body joined, the text unit used by lexicon and keyword matching.
    pub fn full_text(&self) -> String {
        if self.title.is_empty() {
            self.text.clone()
        } else if self.text.is_empty() {
            self.title.clone()
        } else {
            format!("{}. {}", self.title, self.text)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewerProfile {
    pub reviewer_id: String,
    /// Optional in input; when present it must equal the set derived from the
    /// review table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewed_app_ids: Option<BTreeSet<String>>,
    #[serde(default)]
    pub money_paid_total: f64,
    #[serde(default)]
    pub liked_app_count: u64,
    #[serde(default)]
    pub follower_count: u64,
    /// Set when the profile was missing from the input and zero-filled.
    #[serde(skip)]
    pub imputed: bool,
}

impl ReviewerProfile {
    pub fn imputed(reviewer_id: &str) -> Self {
        ReviewerProfile {
            reviewer_id: reviewer_id.to_owned(),
            reviewed_app_ids: None,
            money_paid_total: 0.0,
            liked_app_count: 0,
            follower_count: 0,
            imputed: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AppLabel {
    Benign,
    Fraudulent,
    Malware,
}

impl AppLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AppLabel::Benign => "benign",
            AppLabel::Fraudulent => "fraudulent",
            AppLabel::Malware => "malware",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "benign" => Some(AppLabel::Benign),
            "fraudulent" => Some(AppLabel::Fraudulent),
            "malware" => Some(AppLabel::Malware),
            _ => None,
        }
    }
}

impl fmt::Display for AppLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReviewLabel {
    Genuine,
    Fraudulent,
}

/// One line of the labels file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRecord {
    App { app_id: String, label: AppLabel },
    Review { review_id: String, label: ReviewLabel },
}

/// Gold-standard annotations for apps and reviews.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelSet {
    pub apps: BTreeMap<String, AppLabel>,
    pub reviews: BTreeMap<String, ReviewLabel>,
}

impl LabelSet {
    pub fn app(&self, app_id: &str) -> Option<AppLabel> {
        self.apps.get(app_id).copied()
    }

    pub fn review(&self, review_id: &str) -> Option<ReviewLabel> {
        self.reviews.get(review_id).copied()
    }

    pub fn apps_with(&self, label: AppLabel) -> impl Iterator<Item = &str> {
        self.apps
            .iter()
            .filter(move |(_, l)| **l == label)
            .map(|(id, _)| id.as_str())
    }

    pub fn records(&self) -> impl Iterator<Item = LabelRecord> + '_ {
        let apps = self.apps.iter().map(|(id, l)| LabelRecord::App {
            app_id: id.clone(),
            label: *l,
        });
        let reviews = self.reviews.iter().map(|(id, l)| LabelRecord::Review {
            review_id: id.clone(),
            label: *l,
        });
        apps.chain(reviews)
    }
}
