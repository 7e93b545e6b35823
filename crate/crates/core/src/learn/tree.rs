//! Decision trees over numeric features with binary `x <= t` splits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::entropy;

/// Gain-ratio tree with error-based pruning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Minimum instances on each side of a split.
    pub min_leaf: usize,
    /// Confidence factor for the pessimistic error estimate.
    pub confidence: f64,
    pub prune: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 2,
            confidence: 0.25,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum Criterion {
    GainRatio,
    InfoGain,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowConfig {
    pub min_leaf: usize,
    pub criterion: Criterion,
    /// Features examined per node; `None` means all.
    pub features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
}

/// Flattened tree; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    /// Training counts `[negative, positive]`.
    Leaf { counts: [u32; 2] },
    Split {
        feature: usize,
        threshold: f64,
        counts: [u32; 2],
        left: u32,
        right: u32,
    },
}

enum Build {
    Leaf([u32; 2]),
    Split {
        feature: usize,
        threshold: f64,
        counts: [u32; 2],
        left: Box<Build>,
        right: Box<Build>,
    },
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
}

fn counts_of(labels: &[bool], idx: &[usize]) -> [u32; 2] {
    let pos = idx.iter().filter(|&&i| labels[i]).count() as u32;
    [idx.len() as u32 - pos, pos]
}

fn as_f64(c: [u32; 2]) -> [f64; 2] {
    [f64::from(c[0]), f64::from(c[1])]
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Best binary split of one feature by information gain.
fn best_split_on(
    rows: &[Vec<f64>],
    labels: &[bool],
    idx: &[usize],
    feature: usize,
    min_leaf: usize,
    parent_entropy: f64,
) -> Option<Candidate> {
    let mut vals: Vec<(f64, bool)> = idx.iter().map(|&i| (rows[i][feature], labels[i])).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = vals.len() as f64;
    let total_pos = vals.iter().filter(|v| v.1).count() as f64;
    let mut left = [0.0f64; 2];
    let mut best: Option<Candidate> = None;
    for i in 0..vals.len() - 1 {
        left[usize::from(vals[i].1)] += 1.0;
        if vals[i].0 == vals[i + 1].0 {
            continue;
        }
        let nl = (i + 1) as f64;
        let nr = n - nl;
        if (i + 1) < min_leaf || vals.len() - (i + 1) < min_leaf {
            continue;
        }
        let right = [nr - (total_pos - left[1]), total_pos - left[1]];
        let gain = parent_entropy - (nl / n) * entropy(left) - (nr / n) * entropy(right);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let split_info = entropy([nl, nr]);
            best = Some(Candidate {
                feature,
                threshold: midpoint(vals[i].0, vals[i + 1].0),
                gain,
                ratio: gain / split_info,
            });
        }
    }
    best
}

const MIN_GAIN: f64 = 1e-10;

fn choose(
    rows: &[Vec<f64>],
    labels: &[bool],
    idx: &[usize],
    cfg: &GrowConfig,
    rng: &mut Option<&mut rand_chacha::ChaCha8Rng>,
) -> Option<Candidate> {
    let width = rows[idx[0]].len();
    let parent = entropy(as_f64(counts_of(labels, idx)));
    match cfg.criterion {
        Criterion::GainRatio => {
            let cands: Vec<Candidate> = (0..width)
                .filter_map(|f| best_split_on(rows, labels, idx, f, cfg.min_leaf, parent))
                .filter(|c| c.gain > MIN_GAIN)
                .collect();
            if cands.is_empty() {
                return None;
            }
            let avg = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
            let mut best: Option<Candidate> = None;
            for c in cands {
                if c.gain >= avg - 1e-3 && best.as_ref().is_none_or(|b| c.ratio > b.ratio) {
                    best = Some(c);
                }
            }
            best
        }
        Criterion::InfoGain => {
            let mut order: Vec<usize> = (0..width).collect();
            if let Some(r) = rng.as_deref_mut() {
                order.shuffle(r);
            }
            let window = cfg.features_per_split.unwrap_or(width).max(1);
            let mut best: Option<Candidate> = None;
            // Keep looking past the window until something splits.
            for (k, &f) in order.iter().enumerate() {
                if k >= window && best.is_some() {
                    break;
                }
                if let Some(c) = best_split_on(rows, labels, idx, f, cfg.min_leaf, parent) {
                    if c.gain > MIN_GAIN && best.as_ref().is_none_or(|b| c.gain > b.gain) {
                        best = Some(c);
                    }
                }
            }
            best
        }
    }
}

fn grow(
    rows: &[Vec<f64>],
    labels: &[bool],
    idx: Vec<usize>,
    cfg: &GrowConfig,
    depth: usize,
    rng: &mut Option<&mut rand_chacha::ChaCha8Rng>,
) -> Build {
    let counts = counts_of(labels, &idx);
    if counts[0] == 0
        || counts[1] == 0
        || idx.len() < 2 * cfg.min_leaf.max(1)
        || cfg.max_depth.is_some_and(|d| depth >= d)
    {
        return Build::Leaf(counts);
    }
    let Some(c) = choose(rows, labels, &idx, cfg, rng) else {
        return Build::Leaf(counts);
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| rows[i][c.feature] <= c.threshold);
    Build::Split {
        feature: c.feature,
        threshold: c.threshold,
        counts,
        left: Box::new(grow(rows, labels, l, cfg, depth + 1, rng)),
        right: Box::new(grow(rows, labels, r, cfg, depth + 1, rng)),
    }
}

/// Upper-confidence extra errors for `e` observed errors among `n`.
fn add_errs(n: f64, e: f64, cf: f64, z: f64) -> f64 {
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (add_errs(n, 1.0, cf, z) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    r * n - e
}

fn leaf_estimate(counts: [u32; 2], cf: f64, z: f64) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    let e = f64::from(counts[0].min(counts[1]));
    e + add_errs(n, e, cf, z)
}

fn prune(node: &mut Build, cf: f64, z: f64) -> f64 {
    match node {
        Build::Leaf(c) => leaf_estimate(*c, cf, z),
        Build::Split {
            counts, left, right, ..
        } => {
            let subtree = prune(left, cf, z) + prune(right, cf, z);
            let leaf = leaf_estimate(*counts, cf, z);
            if leaf <= subtree + 0.1 {
                let c = *counts;
                *node = Build::Leaf(c);
                leaf
            } else {
                subtree
            }
        }
    }
}

fn flatten(b: Build, nodes: &mut Vec<Node>) -> u32 {
    let at = nodes.len();
    match b {
        Build::Leaf(counts) => nodes.push(Node::Leaf { counts }),
        Build::Split {
            feature,
            threshold,
            counts,
            left,
            right,
        } => {
            nodes.push(Node::Leaf { counts });
            let l = flatten(*left, nodes);
            let r = flatten(*right, nodes);
            nodes[at] = Node::Split {
                feature,
                threshold,
                counts,
                left: l,
                right: r,
            };
        }
    }
    at as u32
}

/// z for a one-sided upper bound at confidence `cf`.
fn upper_z(cf: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(1.0 - cf)
}

impl Tree {
    pub(crate) fn grow_with(
        rows: &[Vec<f64>],
        labels: &[bool],
        idx: Vec<usize>,
        cfg: GrowConfig,
        rng: Option<&mut rand_chacha::ChaCha8Rng>,
        prune_cf: Option<f64>,
    ) -> Tree {
        let mut rng = rng;
        let mut root = grow(rows, labels, idx, &cfg, 0, &mut rng);
        if let Some(cf) = prune_cf {
            prune(&mut root, cf, upper_z(cf));
        }
        let mut nodes = Vec::new();
        flatten(root, &mut nodes);
        Tree { nodes }
    }

    /// C4.5-style tree on all rows.
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], params: &TreeParams) -> Tree {
        let cfg = GrowConfig {
            min_leaf: params.min_leaf,
            criterion: Criterion::GainRatio,
            features_per_split: None,
            max_depth: None,
        };
        let prune_cf = params.prune.then_some(params.confidence);
        Self::grow_with(rows, labels, (0..rows.len()).collect(), cfg, None, prune_cf)
    }

    fn leaf_for(&self, row: &[f64]) -> [u32; 2] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if row[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Positive share of the training instances in the reached leaf.
    pub fn score(&self, row: &[f64]) -> f64 {
        let c = self.leaf_for(row);
        let n = c[0] + c[1];
        if n == 0 {
            0.0
        } else {
            f64::from(c[1]) / f64::from(n)
        }
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn d(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(t, *left as usize).max(d(t, *right as usize)),
            }
        }
        d(self, 0)
    }

    /// Split features and thresholds in preorder, ignoring counts.
    pub fn shape(&self) -> Vec<Option<(usize, f64)>> {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Leaf { .. } => None,
                Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            })
            .collect()
    }
}

/// Bootstrap sample of `n` indices.
pub(crate) fn bootstrap(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_free_data() -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let x = i as f64;
            rows.push(vec![x, (i * 7 % 5) as f64]);
            labels.push(x >= 10.0);
        }
        (rows, labels)
    }

    #[test]
    fn separable_single_split() {
        let (rows, labels) = xor_free_data();
        let t = Tree::fit(&rows, &labels, &TreeParams::default());
        assert_eq!(t.leaves(), 2);
        assert_eq!(t.shape()[0], Some((0, 9.5)));
        for (r, &l) in rows.iter().zip(&labels) {
            assert_eq!(t.score(r) > 0.5, l);
        }
    }

    #[test]
    fn add_errs_reference_values() {
        let z = upper_z(0.25);
        assert!((z - 0.674_489_750_196_081_7).abs() < 1e-9);
        // zero observed errors: n(1 - cf^(1/n))
        assert!((add_errs(6.0, 0.0, 0.25, z) - 6.0 * (1.0 - 0.25f64.powf(1.0 / 6.0))).abs() < 1e-12);
        assert!(add_errs(10.0, 2.0, 0.25, z) > 0.0);
    }

    #[test]
    fn noisy_split_is_pruned() {
        // labels unrelated to the feature
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let labels: Vec<bool> = (0..40).map(|i| (i * 7 + i / 3) % 3 == 0).collect();
        let unpruned = Tree::fit(
            &rows,
            &labels,
            &TreeParams {
                prune: false,
                ..TreeParams::default()
            },
        );
        let pruned = Tree::fit(&rows, &labels, &TreeParams::default());
        assert!(pruned.leaves() < unpruned.leaves());
    }

    #[test]
    fn duplicated_rows_same_structure() {
        let (rows, labels) = xor_free_data();
        let mut rows2 = rows.clone();
        rows2.extend(rows.iter().cloned());
        let mut labels2 = labels.clone();
        labels2.extend(labels.iter().copied());
        let p = TreeParams::default();
        assert_eq!(
            Tree::fit(&rows, &labels, &p).shape(),
            Tree::fit(&rows2, &labels2, &p).shape()
        );
    }
}
