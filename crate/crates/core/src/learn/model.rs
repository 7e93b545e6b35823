use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureSchema, Forest, ForestParams, Learner, Mlp, MlpParams, Predictor, Tree, TreeParams};
use crate::error::{Error, Result};
use crate::format::{document_body, header_line};

pub const MODEL_KIND: &str = "model";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Dt,
    Rf,
    Mlp,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::Dt, LearnerKind::Rf, LearnerKind::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Dt => "dt",
            LearnerKind::Rf => "rf",
            LearnerKind::Mlp => "mlp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            LearnerKind::Dt => "DT",
            LearnerKind::Rf => "RF",
            LearnerKind::Mlp => "MLP",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dt" | "tree" | "c45" => Ok(LearnerKind::Dt),
            "rf" | "forest" => Ok(LearnerKind::Rf),
            "mlp" => Ok(LearnerKind::Mlp),
            other => Err(Error::Config(format!("unknown learner `{other}` (dt, rf, mlp)"))),
        }
    }
}

/// Learner kind together with its settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "lowercase")]
pub enum Hyperparameters {
    Dt(TreeParams),
    Rf(ForestParams),
    Mlp(MlpParams),
}

impl Hyperparameters {
    pub fn defaults(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::Dt => Hyperparameters::Dt(TreeParams::default()),
            LearnerKind::Rf => Hyperparameters::Rf(ForestParams::default()),
            LearnerKind::Mlp => Hyperparameters::Mlp(MlpParams::default()),
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            Hyperparameters::Dt(_) => LearnerKind::Dt,
            Hyperparameters::Rf(_) => LearnerKind::Rf,
            Hyperparameters::Mlp(_) => LearnerKind::Mlp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "lowercase")]
pub enum Learned {
    Dt { params: TreeParams, tree: Tree },
    Rf { params: ForestParams, forest: Forest },
    Mlp { params: MlpParams, network: Mlp },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: FeatureSchema,
    pub seed: u64,
    pub training_rows: usize,
    pub model: Learned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub positive: bool,
    /// `[negative, positive]` scores summing to 1.
    pub scores: [f64; 2],
}

impl Prediction {
    fn from_score(s: f64) -> Self {
        let s = s.clamp(0.0, 1.0);
        Prediction {
            positive: s > 0.5,
            scores: [1.0 - s, s],
        }
    }
}

pub fn train(data: &Dataset, params: &Hyperparameters, seed: u64) -> Result<TrainedModel> {
    data.check_trainable()?;
    let (rows, labels) = (&data.rows, &data.labels);
    let model = match *params {
        Hyperparameters::Dt(p) => Learned::Dt {
            params: p,
            tree: Tree::fit(rows, labels, &p),
        },
        Hyperparameters::Rf(p) => {
            if p.trees == 0 {
                return Err(Error::Config("a forest needs at least one tree".into()));
            }
            Learned::Rf {
                params: p,
                forest: Forest::fit(rows, labels, &p, seed),
            }
        }
        Hyperparameters::Mlp(p) => Learned::Mlp {
            params: p,
            network: Mlp::fit(rows, labels, &p, seed),
        },
    };
    log::debug!(
        "trained {} on {} rows ({} positive)",
        params.kind(),
        data.len(),
        data.positives()
    );
    Ok(TrainedModel {
        schema: data.schema.clone(),
        seed,
        training_rows: data.len(),
        model,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> LearnerKind {
        match self.model {
            Learned::Dt { .. } => LearnerKind::Dt,
            Learned::Rf { .. } => LearnerKind::Rf,
            Learned::Mlp { .. } => LearnerKind::Mlp,
        }
    }

    pub fn hyperparameters(&self) -> Hyperparameters {
        match &self.model {
            Learned::Dt { params, .. } => Hyperparameters::Dt(*params),
            Learned::Rf { params, .. } => Hyperparameters::Rf(*params),
            Learned::Mlp { params, .. } => Hyperparameters::Mlp(*params),
        }
    }

    fn raw_score(&self, row: &[f64]) -> f64 {
        match &self.model {
            Learned::Dt { tree, .. } => tree.score(row),
            Learned::Rf { forest, .. } => forest.score(row),
            Learned::Mlp { network, .. } => network.score(row),
        }
    }

    /// Predict rows laid out by `schema`, which must equal the training schema.
    pub fn predict(&self, schema: &FeatureSchema, rows: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        self.schema.ensure_matches(schema)?;
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != self.schema.len() {
                    return Err(Error::SchemaMismatch {
                        expected: self.schema.tag(),
                        found: format!("row {i} with {} values", r.len()),
                    });
                }
                Ok(Prediction::from_score(self.raw_score(r)))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = header_line(MODEL_KIND);
        s.push('\n');
        s.push_str(&serde_json::to_string_pretty(self).expect("model serializes"));
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let body = document_body(text, MODEL_KIND)?;
        serde_json::from_str(body).map_err(|e| Error::parse("model", e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl Predictor for TrainedModel {
    fn score(&self, row: &[f64]) -> f64 {
        self.raw_score(row)
    }
}

impl Learner for Hyperparameters {
    fn name(&self) -> String {
        self.kind().display_name().to_owned()
    }

    fn fit(&self, data: &Dataset, seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(train(data, self, seed)?))
    }
}
