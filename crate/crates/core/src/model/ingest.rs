use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::store::{check_app, check_profile, check_review, check_snapshot, DatasetStore, Records};
use super::types::*;
use crate::error::{Error, Result};
use crate::format::{content_lines, header_line};

pub const MANIFEST_KIND: &str = "manifest";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Locations of every input the pipeline reads. Relative paths resolve
/// against the manifest file's directory. Optional assets fall back to the
/// bundled defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub apps: PathBuf,
    pub snapshots: PathBuf,
    pub reviews: PathBuf,
    pub reviewers: PathBuf,
    pub labels: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permission_catalog: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicons: Option<LexiconPaths>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment_corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coercive_keywords: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub install_buckets: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconPaths {
    pub malware: PathBuf,
    pub fraud: PathBuf,
    pub benign: PathBuf,
}

impl Manifest {
    /// Manifest naming the five record files by their conventional names.
    pub fn conventional() -> Self {
        Manifest {
            apps: "apps.jsonl".into(),
            snapshots: "snapshots.jsonl".into(),
            reviews: "reviews.jsonl".into(),
            reviewers: "reviewers.jsonl".into(),
            labels: "labels.jsonl".into(),
            permission_catalog: None,
            lexicons: None,
            sentiment_corpus: None,
            coercive_keywords: None,
            install_buckets: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: Manifest = serde_json::from_str(crate::format::strip_header(&text))
            .map_err(|e| Error::parse(path.display().to_string(), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.resolve_against(base);
        Ok(m)
    }

    fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.apps,
            &mut self.snapshots,
            &mut self.reviews,
            &mut self.reviewers,
            &mut self.labels,
        ] {
            fix(p);
        }
        for p in [
            &mut self.permission_catalog,
            &mut self.sentiment_corpus,
            &mut self.coercive_keywords,
            &mut self.install_buckets,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(l) = &mut self.lexicons {
            fix(&mut l.malware);
            fix(&mut l.fraud);
            fix(&mut l.benign);
        }
    }

    pub fn to_document(&self) -> String {
        let mut s = header_line(MANIFEST_KIND);
        s.push('\n');
        s.push_str(&serde_json::to_string_pretty(self).expect("manifest serializes"));
        s.push('\n');
        s
    }

    /// Every input path, used to keep outputs from clobbering inputs.
    pub fn input_paths(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![
            &self.apps,
            &self.snapshots,
            &self.reviews,
            &self.reviewers,
            &self.labels,
        ];
        v.extend(
            [
                &self.permission_catalog,
                &self.sentiment_corpus,
                &self.coercive_keywords,
                &self.install_buckets,
            ]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path),
        );
        if let Some(l) = &self.lexicons {
            v.extend([l.malware.as_path(), l.fraud.as_path(), l.benign.as_path()]);
        }
        v
    }
}

/// A line that failed to parse or broke a single-record invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub loaded: BTreeMap<&'static str, usize>,
    pub rejected: Vec<RecordError>,
}

impl IngestReport {
    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&header_line("ingest-report"));
        out.push('\n');
        for (kind, n) in &self.loaded {
            let _ = writeln!(out, "loaded\t{kind}\t{n}");
        }
        let _ = writeln!(out, "rejected\t{}", self.rejected.len());
        for e in &self.rejected {
            let _ = writeln!(out, "reject\t{}:{}\t{}", e.file, e.line, e.message);
        }
        out
    }
}

fn parse_lines<T, F>(text: &str, file: &str, kind: &'static str, report: &mut IngestReport, mut check: F) -> Vec<T>
where
    T: DeserializeOwned,
    F: FnMut(&T) -> std::result::Result<(), String>,
{
    let mut out = Vec::new();
    for (line, body) in content_lines(text) {
        let parsed: std::result::Result<T, String> = serde_json::from_str(body).map_err(|e| e.to_string());
        match parsed.and_then(|rec| check(&rec).map(|_| rec)) {
            Ok(rec) => out.push(rec),
            Err(message) => report.rejected.push(RecordError {
                file: file.to_owned(),
                line,
                message,
            }),
        }
    }
    report.loaded.insert(kind, out.len());
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parse raw record texts. Malformed lines and single-record violations
/// (including duplicate keys) are rejected with their line number; the
/// remainder of the file still loads.
pub fn parse_records(
    apps: &str,
    snapshots: &str,
    reviews: &str,
    reviewers: &str,
    labels: &str,
) -> (Records, IngestReport) {
    let mut report = IngestReport::default();
    let mut seen = std::collections::HashSet::new();
    let apps = parse_lines(apps, "apps", "apps", &mut report, |a: &AppRecord| {
        check_app(a)?;
        if !seen.insert(a.app_id.clone()) {
            return Err(format!("duplicate app_id {}", a.app_id));
        }
        Ok(())
    });
    let snapshots = parse_lines(snapshots, "snapshots", "snapshots", &mut report, check_snapshot);
    let mut seen = std::collections::HashSet::new();
    let reviews = parse_lines(reviews, "reviews", "reviews", &mut report, |r: &Review| {
        check_review(r)?;
        if !seen.insert(r.review_id.clone()) {
            return Err(format!("duplicate review_id {}", r.review_id));
        }
        Ok(())
    });
    let mut seen = std::collections::HashSet::new();
    let profiles = parse_lines(
        reviewers,
        "reviewers",
        "reviewers",
        &mut report,
        |p: &ReviewerProfile| {
            check_profile(p)?;
            if !seen.insert(p.reviewer_id.clone()) {
                return Err(format!("duplicate reviewer profile {}", p.reviewer_id));
            }
            Ok(())
        },
    );
    let mut seen = std::collections::HashSet::new();
    let labels = parse_lines(labels, "labels", "labels", &mut report, |l: &LabelRecord| {
        let key = match l {
            LabelRecord::App { app_id, .. } => format!("app:{app_id}"),
            LabelRecord::Review { review_id, .. } => format!("review:{review_id}"),
        };
        if !seen.insert(key) {
            return Err("record labeled more than once".into());
        }
        Ok(())
    });
    (
        Records {
            apps,
            snapshots,
            reviews,
            profiles,
            labels,
        },
        report,
    )
}

/// Load and validate the dataset named by a manifest.
pub fn ingest(manifest: &Manifest) -> Result<(DatasetStore, IngestReport)> {
    let (records, report) = parse_records(
        &read(&manifest.apps)?,
        &read(&manifest.snapshots)?,
        &read(&manifest.reviews)?,
        &read(&manifest.reviewers)?,
        &read(&manifest.labels)?,
    );
    let store = DatasetStore::from_records(records)?;
    log::info!(
        "ingested {} apps, {} reviews; {} record(s) rejected",
        store.app_count(),
        store.review_count(),
        report.rejected_count()
    );
    Ok((store, report))
}

fn jsonl<T: Serialize>(kind: &str, items: impl IntoIterator<Item = T>) -> String {
    let mut out = header_line(kind);
    out.push('\n');
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Canonical serialization of a store as the five record files, keyed by the
/// conventional file names.
pub fn export_texts(store: &DatasetStore) -> Vec<(&'static str, String)> {
    let r = store.to_records();
    vec![
        ("apps.jsonl", jsonl("apps", &r.apps)),
        ("snapshots.jsonl", jsonl("snapshots", &r.snapshots)),
        ("reviews.jsonl", jsonl("reviews", &r.reviews)),
        ("reviewers.jsonl", jsonl("reviewers", &r.profiles)),
        ("labels.jsonl", jsonl("labels", &r.labels)),
    ]
}

/// Write the five record files plus `manifest.json` into `dir`.
pub fn export(store: &DatasetStore, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in export_texts(store) {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, Manifest::conventional().to_document()).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}
