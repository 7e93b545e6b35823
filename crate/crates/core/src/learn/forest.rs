use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive_seeds;
use super::tree::{bootstrap, Criterion, GrowConfig, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(width))`.
    pub features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 100,
            features_per_split: None,
            max_depth: None,
        }
    }
}

/// Bagged unpruned information-gain trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], params: &ForestParams, seed: u64) -> Forest {
        let width = rows.first().map_or(0, Vec::len);
        let k = params
            .features_per_split
            .unwrap_or_else(|| ((width as f64).sqrt().floor() as usize).max(1));
        let cfg = GrowConfig {
            min_leaf: 1,
            criterion: Criterion::InfoGain,
            features_per_split: Some(k),
            max_depth: params.max_depth,
        };
        let trees = derive_seeds(seed, 0xF0, params.trees)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let idx = bootstrap(rows.len(), &mut rng);
                Tree::grow_with(rows, labels, idx, cfg, Some(&mut rng), None)
            })
            .collect();
        Forest { trees }
    }

    /// Fraction of trees voting positive.
    pub fn score(&self, row: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        let votes = self.trees.iter().filter(|t| t.score(row) > 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}
