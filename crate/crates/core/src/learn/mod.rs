//! Binary classifiers (C4.5-style decision tree, random forest, multilayer
//! perceptron), stratified cross-validation and FPR/FNR/accuracy reports.
//!
//! Labels are booleans; `true` is the positive class (fraudulent review,
//! fraudulent or malware app).

mod cv;
mod forest;
mod mlp;
mod model;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cv::{cross_validate, cross_validate_with, stratified_folds, Confusion, EvalReport};
pub use forest::{Forest, ForestParams};
pub use mlp::{Mlp, MlpParams};
pub use model::{train, Hyperparameters, Learned, LearnerKind, Prediction, TrainedModel};
pub use tree::{Tree, TreeParams};

/// Named, versioned column layout of a feature matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub version: u32,
    pub features: Vec<String>,
}

impl FeatureSchema {
    pub fn new(name: &str, version: u32, features: &[&str]) -> Self {
        FeatureSchema {
            name: name.to_owned(),
            version,
            features: features.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn tag(&self) -> String {
        format!("{} v{} ({} features)", self.name, self.version, self.len())
    }

    pub fn ensure_matches(&self, other: &FeatureSchema) -> Result<()> {
        if self != other {
            return Err(Error::SchemaMismatch {
                expected: self.tag(),
                found: other.tag(),
            });
        }
        Ok(())
    }
}

/// Labeled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, ids: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != ids.len() {
            return Err(Error::Config(format!(
                "{} rows, {} labels and {} ids",
                rows.len(),
                labels.len(),
                ids.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::SchemaMismatch {
                    expected: schema.tag(),
                    found: format!("row {i} with {} values", row.len()),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Config(format!(
                    "row {i} feature `{}` is not finite",
                    schema.features[j]
                )));
            }
        }
        Ok(Dataset {
            schema,
            ids,
            rows,
            labels,
        })
    }

    /// Unnamed rows `0..n`, for tests and ad-hoc matrices.
    pub fn anonymous(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let names: Vec<String> = (0..width).map(|j| format!("x{j}")).collect();
        let schema = FeatureSchema {
            name: "anonymous".into(),
            version: 1,
            features: names,
        };
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(schema, ids, rows, labels)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Concatenate datasets sharing a schema.
    pub fn concat(parts: &[&Dataset]) -> Result<Dataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Config("nothing to concatenate".into()))?;
        let mut out = Dataset {
            schema: first.schema.clone(),
            ids: Vec::new(),
            rows: Vec::new(),
            labels: Vec::new(),
        };
        for p in parts {
            out.schema.ensure_matches(&p.schema)?;
            out.ids.extend(p.ids.iter().cloned());
            out.rows.extend(p.rows.iter().cloned());
            out.labels.extend(p.labels.iter().copied());
        }
        Ok(out)
    }

    pub(crate) fn check_trainable(&self) -> Result<()> {
        let pos = self.positives();
        if pos == 0 || pos == self.len() {
            return Err(Error::Degenerate(format!(
                "training data needs both classes ({} rows, {} positive)",
                self.len(),
                pos
            )));
        }
        Ok(())
    }
}

/// Anything that can score rows; the score is the positive-class probability.
pub trait Predictor: Send + Sync {
    fn score(&self, row: &[f64]) -> f64;

    /// Positive only when the score is strictly above one half.
    fn predict(&self, row: &[f64]) -> bool {
        self.score(row) > 0.5
    }
}

/// Produces a predictor from training data; implemented by the real learners
/// and by test stubs.
pub trait Learner: Sync {
    fn name(&self) -> String;
    fn fit(&self, train: &Dataset, seed: u64) -> Result<Box<dyn Predictor>>;
}

/// Deterministic child seeds of a master seed.
pub(crate) fn derive_seeds(master: u64, salt: u64, n: usize) -> Vec<u64> {
    use rand::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (0..n).map(|_| rng.next_u64()).collect()
}

pub(crate) fn entropy(counts: [f64; 2]) -> f64 {
    let n = counts[0] + counts[1];
    if n <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / n;
            -p * p.log2()
        })
        .sum()
}
