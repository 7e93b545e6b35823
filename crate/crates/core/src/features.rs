//! Per-app feature vectors joining the co-review, review, imbalance and
//! permission signals with general app statistics.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{content_lines, document_body, header_line};
use crate::graph::{build_graph, GraphConfig};
use crate::irr::{app_spikes, ratio_features};
use crate::learn::{Dataset, FeatureSchema};
use crate::model::{daily_review_series, AppLabel, BucketTable, DatasetStore};
use crate::pcf::{pcf, review_days, PcfConfig, PseudoClique};
use crate::permissions::{ramp_analysis, PermissionCatalog, RampMode};
use crate::review::{feedback_features, filter_fraud_reviews, IndicatorLexicons, ReviewClassifier};

pub const MATRIX_KIND: &str = "feature-matrix";
pub const SCHEMA_NAME: &str = "app-features";
pub const SCHEMA_VERSION: u32 = 1;

pub const FEATURE_NAMES: [&str; 26] = [
    "nCliques",
    "maxRho",
    "medRho",
    "sdRho",
    "maxCliqueSizeN",
    "medCliqueSizeN",
    "sdCliqueSizeN",
    "inCliqueSize",
    "malW",
    "fraudW",
    "goodW",
    "FRI",
    "spikeDays",
    "maxSpikeAmp",
    "i1rt1",
    "i2rt2",
    "i1rv1",
    "i2rv2",
    "permCt",
    "dangerCt",
    "rampCt",
    "dangerRamp",
    "avgRating",
    "reviewCt",
    "ratingCt",
    "installLower",
];

pub fn app_schema() -> FeatureSchema {
    FeatureSchema::new(SCHEMA_NAME, SCHEMA_VERSION, &FEATURE_NAMES)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub n_cliques: f64,
    pub max_rho: f64,
    pub med_rho: f64,
    pub sd_rho: f64,
    pub max_clique_size_n: f64,
    pub med_clique_size_n: f64,
    pub sd_clique_size_n: f64,
    pub in_clique_size: f64,
    pub mal_w: f64,
    pub fraud_w: f64,
    pub good_w: f64,
    pub fri: f64,
    pub spike_days: f64,
    pub max_spike_amp: f64,
    pub i1rt1: f64,
    pub i2rt2: f64,
    pub i1rv1: f64,
    pub i2rv2: f64,
    pub perm_ct: f64,
    pub danger_ct: f64,
    pub ramp_ct: f64,
    pub danger_ramp: f64,
    pub avg_rating: f64,
    pub review_ct: f64,
    pub rating_ct: f64,
    pub install_lower: f64,
}

impl FeatureVector {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.n_cliques,
            self.max_rho,
            self.med_rho,
            self.sd_rho,
            self.max_clique_size_n,
            self.med_clique_size_n,
            self.sd_clique_size_n,
            self.in_clique_size,
            self.mal_w,
            self.fraud_w,
            self.good_w,
            self.fri,
            self.spike_days,
            self.max_spike_amp,
            self.i1rt1,
            self.i2rt2,
            self.i1rv1,
            self.i2rv2,
            self.perm_ct,
            self.danger_ct,
            self.ramp_ct,
            self.danger_ramp,
            self.avg_rating,
            self.review_ct,
            self.rating_ct,
            self.install_lower,
        ]
    }
}

/// Which degenerate fallbacks were taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureFlags {
    pub no_reviews: bool,
    pub no_cliques: bool,
    pub no_genuine_reviews: bool,
    pub short_series: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppFeatures {
    pub app_id: String,
    pub features: FeatureVector,
    pub flags: FeatureFlags,
}

/// Everything the extractors need besides the store.
pub struct FeatureContext<'a> {
    pub graph: GraphConfig,
    pub pcf: PcfConfig,
    pub classifier: &'a dyn ReviewClassifier,
    pub lexicons: &'a IndicatorLexicons,
    pub buckets: &'a BucketTable,
    pub catalog: &'a PermissionCatalog,
    pub ramp_mode: RampMode,
}

impl<'a> FeatureContext<'a> {
    /// Default graph, finder and ramp settings.
    pub fn new(
        classifier: &'a dyn ReviewClassifier,
        lexicons: &'a IndicatorLexicons,
        buckets: &'a BucketTable,
        catalog: &'a PermissionCatalog,
    ) -> Self {
        FeatureContext {
            graph: GraphConfig::default(),
            pcf: PcfConfig::default(),
            classifier,
            lexicons,
            buckets,
            catalog,
            ramp_mode: RampMode::default(),
        }
    }
}

/// Maximum, median and population standard deviation; zeros when empty.
pub fn summary(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let max = v[n - 1];
    let med = if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    };
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    (max, med, var.sqrt())
}

/// Clique features for `n` graph nodes.
pub fn clique_features(cliques: &[PseudoClique], n: usize) -> [f64; 8] {
    if cliques.is_empty() || n == 0 {
        return [0.0; 8];
    }
    let rho: Vec<f64> = cliques.iter().map(|c| c.density).collect();
    let size: Vec<f64> = cliques.iter().map(|c| c.size() as f64 / n as f64).collect();
    let (max_rho, med_rho, sd_rho) = summary(&rho);
    let (max_s, med_s, sd_s) = summary(&size);
    let involved: BTreeSet<&str> = cliques
        .iter()
        .flat_map(|c| c.members.iter().map(String::as_str))
        .collect();
    [
        cliques.len() as f64,
        max_rho,
        med_rho,
        sd_rho,
        max_s,
        med_s,
        sd_s,
        involved.len() as f64 / n as f64,
    ]
}

/// Pseudo cliques of one app together with its reviewer count.
pub fn app_cliques(
    store: &DatasetStore,
    app_id: &str,
    graph_config: GraphConfig,
    pcf_config: &PcfConfig,
) -> Result<(Vec<PseudoClique>, usize)> {
    let graph = build_graph(store, app_id, graph_config)?;
    let series = daily_review_series(store, app_id)?;
    let days = review_days(&graph, &series);
    Ok((pcf(&graph, &days, pcf_config), graph.node_count()))
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

pub fn assemble(store: &DatasetStore, app_id: &str, ctx: &FeatureContext<'_>) -> Result<AppFeatures> {
    let reviews = store.reviews_of(app_id)?;
    let snapshots = store.snapshots_of(app_id)?;
    let latest = snapshots.last().ok_or_else(|| {
        Error::Degenerate(format!(
            "app {app_id} has no snapshot to take install and permission data from"
        ))
    })?;
    let mut flags = FeatureFlags {
        no_reviews: reviews.is_empty(),
        ..FeatureFlags::default()
    };

    let (cliques, n) = app_cliques(store, app_id, ctx.graph, &ctx.pcf)?;
    flags.no_cliques = cliques.is_empty();
    let c = clique_features(&cliques, n);

    let part = filter_fraud_reviews(store, app_id, ctx.classifier)?;
    let all: Vec<_> = reviews.iter().collect();
    let fb = feedback_features(&part.genuine, &all, ctx.lexicons);
    flags.no_genuine_reviews = fb.degenerate;

    let spikes = app_spikes(store, app_id)?;
    flags.short_series = spikes.report.insufficient;

    let ratios = ratio_features(latest, part.genuine.len() as u64, ctx.buckets);
    let ramps = ramp_analysis(snapshots, ctx.catalog, ctx.ramp_mode)?;

    let avg_rating = latest.aggregate_rating.unwrap_or_else(|| {
        if reviews.is_empty() {
            0.0
        } else {
            reviews.iter().map(|r| f64::from(r.rating)).sum::<f64>() / reviews.len() as f64
        }
    });

    let f = FeatureVector {
        n_cliques: c[0],
        max_rho: c[1],
        med_rho: c[2],
        sd_rho: c[3],
        max_clique_size_n: c[4],
        med_clique_size_n: c[5],
        sd_clique_size_n: c[6],
        in_clique_size: c[7],
        mal_w: fb.mal_w,
        fraud_w: fb.fraud_w,
        good_w: fb.good_w,
        fri: fb.fri,
        spike_days: spikes.report.spike_days.len() as f64,
        max_spike_amp: spikes.report.max_amplitude as f64,
        i1rt1: ratios.i1_rt1,
        i2rt2: ratios.i2_rt2,
        i1rv1: ratios.i1_rv1,
        i2rv2: ratios.i2_rv2,
        perm_ct: ramps.perm_count as f64,
        danger_ct: ramps.danger_count as f64,
        ramp_ct: ramps.ramp_count as f64,
        danger_ramp: ramps.danger_added_total as f64,
        avg_rating: finite(avg_rating),
        review_ct: latest.review_count as f64,
        rating_ct: latest.rating_count as f64,
        install_lower: latest.install_bucket.0 as f64,
    };
    Ok(AppFeatures {
        app_id: app_id.to_owned(),
        features: f,
        flags,
    })
}

/// Features of many apps in parallel, returned in the order given.
pub fn assemble_all(store: &DatasetStore, app_ids: &[&str], ctx: &FeatureContext<'_>) -> Result<Vec<AppFeatures>> {
    app_ids.par_iter().map(|a| assemble(store, a, ctx)).collect()
}

/// Feature rows paired with optional gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub schema: FeatureSchema,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Option<AppLabel>>,
}

/// Binary learning tasks over app labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Fraudulent (positive) against benign.
    Fraud,
    /// Malware (positive) against benign.
    Malware,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fraud" => Ok(Task::Fraud),
            "malware" => Ok(Task::Malware),
            other => Err(Error::Config(format!("unknown task `{other}` (fraud, malware)"))),
        }
    }
}

impl Task {
    pub fn positive(self) -> AppLabel {
        match self {
            Task::Fraud => AppLabel::Fraudulent,
            Task::Malware => AppLabel::Malware,
        }
    }
}

impl FeatureMatrix {
    pub fn from_features(features: &[AppFeatures], labels: impl Fn(&str) -> Option<AppLabel>) -> Self {
        FeatureMatrix {
            schema: app_schema(),
            ids: features.iter().map(|f| f.app_id.clone()).collect(),
            rows: features.iter().map(|f| f.features.to_vec()).collect(),
            labels: features.iter().map(|f| labels(&f.app_id)).collect(),
        }
    }

    /// Rows labeled benign or with the task's positive label.
    pub fn task_dataset(&self, task: Task) -> Result<Dataset> {
        let idx: Vec<usize> = (0..self.ids.len())
            .filter(|&i| matches!(self.labels[i], Some(l) if l == AppLabel::Benign || l == task.positive()))
            .collect();
        self.dataset_of(&idx, |l| l == Some(task.positive()))
    }

    /// Rows with the given label, all marked positive.
    pub fn labeled_as(&self, label: AppLabel) -> Result<Dataset> {
        let idx: Vec<usize> = (0..self.ids.len()).filter(|&i| self.labels[i] == Some(label)).collect();
        self.dataset_of(&idx, |_| true)
    }

    fn dataset_of(&self, idx: &[usize], positive: impl Fn(Option<AppLabel>) -> bool) -> Result<Dataset> {
        Dataset::new(
            self.schema.clone(),
            idx.iter().map(|&i| self.ids[i].clone()).collect(),
            idx.iter().map(|&i| self.rows[i].clone()).collect(),
            idx.iter().map(|&i| positive(self.labels[i])).collect(),
        )
    }

    /// Tab-separated matrix: `app_id`, one column per feature, `label`.
    pub fn to_tsv(&self) -> String {
        let mut s = header_line(MATRIX_KIND);
        let _ = writeln!(s, "\n# schema {} v{}", self.schema.name, self.schema.version);
        s.push_str("app_id");
        for name in &self.schema.features {
            s.push('\t');
            s.push_str(name);
        }
        s.push_str("\tlabel\n");
        for ((id, row), label) in self.ids.iter().zip(&self.rows).zip(&self.labels) {
            s.push_str(id);
            for v in row {
                let _ = write!(s, "\t{v}");
            }
            let _ = writeln!(s, "\t{}", label.as_ref().map_or("-", AppLabel::as_str));
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let body = document_body(text, MATRIX_KIND)?;
        let mut schema_tag = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("# schema ") {
                schema_tag = Some(rest.trim().to_owned());
            }
        }
        let mut lines = content_lines(body);
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse("feature matrix", "missing column header"))?;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < 2 || cols[0] != "app_id" || cols[cols.len() - 1] != "label" {
            return Err(Error::parse(
                "feature matrix",
                "header must be app_id, features..., label",
            ));
        }
        let names: Vec<&str> = cols[1..cols.len() - 1].to_vec();
        let (name, version) = match schema_tag.as_deref().and_then(|t| t.rsplit_once(" v")) {
            Some((n, v)) => (
                n.to_owned(),
                v.parse().map_err(|e| Error::parse("feature matrix schema", e))?,
            ),
            None => (SCHEMA_NAME.to_owned(), SCHEMA_VERSION),
        };
        let schema = FeatureSchema {
            name,
            version,
            features: names.iter().map(|s| s.to_string()).collect(),
        };
        let mut m = FeatureMatrix {
            schema,
            ids: Vec::new(),
            rows: Vec::new(),
            labels: Vec::new(),
        };
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != cols.len() {
                return Err(Error::parse(
                    format!("feature matrix line {lineno}"),
                    format!("{} fields, expected {}", fields.len(), cols.len()),
                ));
            }
            let row = fields[1..fields.len() - 1]
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::parse(format!("feature matrix line {lineno}"), e))
                })
                .collect::<Result<Vec<_>>>()?;
            let label = match fields[fields.len() - 1] {
                "-" => None,
                l => Some(AppLabel::parse(l).ok_or_else(|| {
                    Error::parse(format!("feature matrix line {lineno}"), format!("unknown label `{l}`"))
                })?),
            };
            m.ids.push(fields[0].to_owned());
            m.rows.push(row);
            m.labels.push(label);
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn summary_conventions() {
        assert_eq!(summary(&[]), (0.0, 0.0, 0.0));
        assert_eq!(summary(&[4.0, 1.0, 3.0, 2.0]), (4.0, 2.5, 1.25f64.sqrt()));
        assert_eq!(summary(&[5.0]), (5.0, 5.0, 0.0));
    }

    #[test]
    fn single_clique_algebra() {
        let day = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let c = PseudoClique {
            members: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            nodes: vec![0, 1, 2, 3],
            density: 5.0,
            day_span: (day, day),
        };
        let f = clique_features(&[c], 4);
        assert_eq!(f, [1.0, 5.0, 5.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(clique_features(&[], 4), [0.0; 8]);
    }

    #[test]
    fn names_and_vector_agree() {
        assert_eq!(FeatureVector::default().to_vec().len(), FEATURE_NAMES.len());
        let names: BTreeSet<&str> = FEATURE_NAMES.iter().copied().collect();
        assert_eq!(names.len(), FEATURE_NAMES.len());
    }

    #[test]
    fn matrix_round_trip() {
        let f = AppFeatures {
            app_id: "x".into(),
            features: FeatureVector {
                max_rho: 0.1 + 0.2,
                install_lower: 1e9,
                ..Default::default()
            },
            flags: FeatureFlags::default(),
        };
        let g = AppFeatures {
            app_id: "y".into(),
            ..f.clone()
        };
        let m = FeatureMatrix::from_features(&[f, g], |id| (id == "x").then_some(AppLabel::Malware));
        let back = FeatureMatrix::from_tsv(&m.to_tsv()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_tsv(), m.to_tsv());
        assert_eq!(m.labeled_as(AppLabel::Malware).unwrap().len(), 1);
    }
}
