//! Dangerous-permission accounting over snapshot histories.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::content_lines;
use crate::model::AppSnapshot;

const BUNDLED: &str = include_str!("../assets/permissions_api22.txt");
const DANGEROUS_MARKER: &str = "dangerous";

/// Dangerous permissions at the reference API level.
pub const EXPECTED_DANGEROUS: usize = 47;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissionCatalog {
    pub all: BTreeSet<String>,
    pub dangerous: BTreeSet<String>,
}

impl PermissionCatalog {
    /// One id per line, optionally followed by the `dangerous` marker.
    pub fn parse(text: &str) -> Result<Self> {
        let mut all = BTreeSet::new();
        let mut dangerous = BTreeSet::new();
        for (lineno, line) in content_lines(text) {
            let mut parts = line.split_whitespace();
            let id = parts.next().unwrap_or_default().to_owned();
            match parts.next() {
                None => {}
                Some(DANGEROUS_MARKER) => {
                    dangerous.insert(id.clone());
                }
                Some(other) => {
                    return Err(Error::parse(
                        format!("permission catalog line {lineno}"),
                        format!("unknown marker `{other}`"),
                    ))
                }
            }
            if parts.next().is_some() {
                return Err(Error::parse(
                    format!("permission catalog line {lineno}"),
                    "trailing tokens",
                ));
            }
            if !all.insert(id.clone()) {
                return Err(Error::parse(
                    format!("permission catalog line {lineno}"),
                    format!("duplicate permission `{id}`"),
                ));
            }
        }
        if dangerous.len() != EXPECTED_DANGEROUS {
            log::warn!(
                "permission catalog marks {} permissions dangerous, reference level has {}",
                dangerous.len(),
                EXPECTED_DANGEROUS
            );
        }
        Ok(PermissionCatalog { all, dangerous })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled catalog parses")
    }

    pub fn is_dangerous(&self, id: &str) -> bool {
        self.dangerous.contains(id)
    }

    pub fn is_known(&self, id: &str) -> bool {
        self.all.contains(id)
    }
}

/// When a snapshot transition counts as a ramp.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampMode {
    /// The number of dangerous permissions strictly increases.
    #[default]
    Count,
    /// At least one dangerous permission is newly present.
    Set,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RampReport {
    pub perm_count: usize,
    pub danger_count: usize,
    pub ramp_count: usize,
    /// Newly present dangerous permissions, summed over ramps.
    pub danger_added_total: usize,
    /// Ids missing from the catalog, over all snapshots.
    pub unknown: BTreeSet<String>,
}

fn dangerous_of<'a>(s: &'a AppSnapshot, catalog: &PermissionCatalog) -> BTreeSet<&'a str> {
    s.permissions
        .iter()
        .filter(|p| catalog.is_dangerous(p))
        .map(String::as_str)
        .collect()
}

/// Ramps over chronologically ordered snapshots.
pub fn ramp_analysis(snapshots: &[AppSnapshot], catalog: &PermissionCatalog, mode: RampMode) -> Result<RampReport> {
    let last = snapshots
        .last()
        .ok_or_else(|| Error::Degenerate("ramp analysis needs at least one snapshot".into()))?;
    if let Some(w) = snapshots.windows(2).find(|w| w[0].capture_date >= w[1].capture_date) {
        return Err(Error::Config(format!(
            "snapshots of {} are not in chronological order at {}",
            w[1].app_id, w[1].capture_date
        )));
    }
    let mut report = RampReport {
        perm_count: last.permissions.len(),
        danger_count: dangerous_of(last, catalog).len(),
        ..RampReport::default()
    };
    for s in snapshots {
        report
            .unknown
            .extend(s.permissions.iter().filter(|p| !catalog.is_known(p)).cloned());
    }
    for w in snapshots.windows(2) {
        let before = dangerous_of(&w[0], catalog);
        let after = dangerous_of(&w[1], catalog);
        let added = after.difference(&before).count();
        let ramp = match mode {
            RampMode::Count => after.len() > before.len(),
            RampMode::Set => added > 0,
        };
        if ramp {
            report.ramp_count += 1;
            report.danger_added_total += added;
        }
    }
    if !report.unknown.is_empty() {
        log::debug!(
            "{}: {} permission ids not in the catalog",
            last.app_id,
            report.unknown.len()
        );
    }
    Ok(report)
}
