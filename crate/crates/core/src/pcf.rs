//! Pseudo Clique Finder.
//!
//! Scans an app's review days in order. From every day it grows the day's
//! densest greedy pseudo clique, then keeps extending that clique with the
//! reviews of the following days for as long as each day contributes at least
//! one new member. Cliques with at least `min_size` members are emitted.
//!
//! The greedy step always tries the candidate with the largest total edge
//! weight to the current members. All candidates share the same denominator
//! `C(k + 1, 2)`, so when that candidate fails the `density >= theta` test
//! every other candidate fails too and the step stops there.
//!
//! Loop control follows the published pseudo-code: the day after the seed day
//! is always scanned, and each later day is scanned only while the previous
//! one added a member.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{density_from_total, weighted_density, CoReviewGraph};
use crate::model::{Day, Review};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcfConfig {
    /// Weighted density threshold.
    pub theta: f64,
    pub min_size: usize,
}

impl PcfConfig {
    pub fn new(theta: f64, min_size: usize) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Config(format!("theta must be positive, got {theta}")));
        }
        if min_size < 3 {
            return Err(Error::Config(format!("min_size must be at least 3, got {min_size}")));
        }
        Ok(PcfConfig { theta, min_size })
    }
}

impl Default for PcfConfig {
    fn default() -> Self {
        PcfConfig {
            theta: 3.0,
            min_size: 3,
        }
    }
}

/// One review available to the greedy step: its author's node and date.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub node: usize,
    pub date: Day,
}

/// Reviews of a single day, one candidate per distinct reviewer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewDay {
    pub day: Day,
    pub candidates: Vec<Candidate>,
}

/// Map a daily review series onto graph nodes.
pub fn review_days(graph: &CoReviewGraph, series: &[(Day, Vec<&Review>)]) -> Vec<ReviewDay> {
    series
        .iter()
        .map(|(day, reviews)| {
            let mut seen = BTreeSet::new();
            let candidates = reviews
                .iter()
                .filter_map(|r| graph.node_index(&r.reviewer_id))
                .filter(|&node| seen.insert(node))
                .map(|node| Candidate { node, date: *day })
                .collect();
            ReviewDay { day: *day, candidates }
        })
        .collect()
}

/// A pseudo clique reported by the finder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoClique {
    /// Reviewer ids, sorted.
    pub members: Vec<String>,
    /// Graph node indices matching `members`.
    #[serde(skip)]
    pub nodes: Vec<usize>,
    pub density: f64,
    /// First and last review day that contributed members.
    pub day_span: (Day, Day),
}

impl PseudoClique {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Counters used to check the finder's cost against its complexity bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PcfStats {
    pub days: usize,
    pub max_reviews_per_day: usize,
    /// Edge-weight lookups performed while scoring candidates.
    pub weight_lookups: u64,
}

/// Work-in-progress pseudo clique.
#[derive(Debug, Clone)]
pub struct WorkingClique {
    members: Vec<usize>,
    member_mask: Vec<bool>,
    total_weight: u64,
    last_join: Option<Day>,
}

impl WorkingClique {
    pub fn empty(graph: &CoReviewGraph) -> Self {
        WorkingClique {
            members: Vec::new(),
            member_mask: vec![false; graph.node_count()],
            total_weight: 0,
            last_join: None,
        }
    }

    fn push(&mut self, node: usize, gain: u64, date: Day) {
        self.members.push(node);
        self.member_mask[node] = true;
        self.total_weight += gain;
        self.last_join = Some(date);
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.member_mask[node]
    }

    pub fn density(&self) -> f64 {
        density_from_total(self.total_weight, self.members.len())
    }
}

/// Candidate ordering: larger gain first, then earlier review, then the
/// lexicographically smaller reviewer id.
fn better(graph: &CoReviewGraph, a: (u64, &Candidate), b: (u64, &Candidate)) -> bool {
    match a.0.cmp(&b.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => match a.1.date.cmp(&b.1.date) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => graph.nodes()[a.1.node].reviewer_id < graph.nodes()[b.1.node].reviewer_id,
        },
    }
}

/// Index into `candidates` of the review whose author has the largest total
/// edge weight to `members`. Reviews by current members are skipped.
pub fn max_density_gain(graph: &CoReviewGraph, members: &[usize], candidates: &[Candidate]) -> Option<usize> {
    let mut best: Option<(u64, usize)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if members.contains(&c.node) {
            continue;
        }
        let gain: u64 = members.iter().map(|&m| u64::from(graph.weight(m, c.node))).sum();
        best = match best {
            Some((g, j)) if !better(graph, (gain, c), (g, &candidates[j])) => Some((g, j)),
            _ => Some((gain, i)),
        };
    }
    best.map(|(_, i)| i)
}

/// Greedily add candidates to `clique` while the density stays at or above
/// `theta`.
fn grow(graph: &CoReviewGraph, clique: &mut WorkingClique, candidates: &[Candidate], theta: f64, stats: &mut PcfStats) {
    let mut alive: Vec<bool> = candidates.iter().map(|c| !clique.contains(c.node)).collect();
    let mut gains: Vec<u64> = candidates
        .iter()
        .zip(&alive)
        .map(|(c, &live)| {
            if !live {
                return 0;
            }
            stats.weight_lookups += clique.len() as u64;
            clique
                .members()
                .iter()
                .map(|&m| u64::from(graph.weight(m, c.node)))
                .sum()
        })
        .collect();
    loop {
        let mut best: Option<usize> = None;
        for (i, c) in candidates.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            if best.is_none_or(|j| better(graph, (gains[i], c), (gains[j], &candidates[j]))) {
                best = Some(i);
            }
        }
        let Some(pick) = best else { break };
        let gain = gains[pick];
        if density_from_total(clique.total_weight + gain, clique.len() + 1) < theta {
            break;
        }
        let chosen = candidates[pick];
        clique.push(chosen.node, gain, chosen.date);
        alive[pick] = false;
        for (i, c) in candidates.iter().enumerate() {
            if alive[i] {
                if c.node == chosen.node {
                    alive[i] = false;
                } else {
                    gains[i] += u64::from(graph.weight(chosen.node, c.node));
                    stats.weight_lookups += 1;
                }
            }
        }
    }
}

/// Extend `clique` with one day's reviews.
///
/// An empty clique is seeded from every review of the day in turn and the
/// densest greedy result replaces it (the first root wins ties, so a day with
/// a single review yields that singleton). A non-empty clique is extended in
/// place.
pub fn best_near_clique(
    graph: &CoReviewGraph,
    clique: &mut WorkingClique,
    day: &ReviewDay,
    theta: f64,
    stats: &mut PcfStats,
) {
    if !clique.is_empty() {
        grow(graph, clique, &day.candidates, theta, stats);
        return;
    }
    let mut best: Option<WorkingClique> = None;
    let mut max_rho = f64::NEG_INFINITY;
    for root in &day.candidates {
        let mut cand = WorkingClique::empty(graph);
        cand.push(root.node, 0, root.date);
        grow(graph, &mut cand, &day.candidates, theta, stats);
        let rho = cand.density();
        if rho > max_rho {
            max_rho = rho;
            best = Some(cand);
        }
    }
    if let Some(b) = best {
        *clique = b;
    }
}

/// All pseudo cliques of an app, see the module docs.
pub fn pcf(graph: &CoReviewGraph, days: &[ReviewDay], config: &PcfConfig) -> Vec<PseudoClique> {
    pcf_with_stats(graph, days, config).0
}

pub fn pcf_with_stats(graph: &CoReviewGraph, days: &[ReviewDay], config: &PcfConfig) -> (Vec<PseudoClique>, PcfStats) {
    let mut stats = PcfStats {
        days: days.len(),
        max_reviews_per_day: days.iter().map(|d| d.candidates.len()).max().unwrap_or(0),
        weight_lookups: 0,
    };
    let mut found: Vec<(usize, PseudoClique)> = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();

    for (d, seed) in days.iter().enumerate() {
        let mut pc = WorkingClique::empty(graph);
        best_near_clique(graph, &mut pc, seed, config.theta, &mut stats);
        let first_day = seed.day;
        let mut grew = true;
        let mut size = pc.len();
        let mut nd = d + 1;
        while nd < days.len() && grew {
            best_near_clique(graph, &mut pc, &days[nd], config.theta, &mut stats);
            grew = pc.len() > size;
            size = pc.len();
            nd += 1;
        }
        if pc.len() < config.min_size || pc.density() < config.theta {
            continue;
        }
        let mut nodes = pc.members().to_vec();
        nodes.sort_by(|&a, &b| graph.nodes()[a].reviewer_id.cmp(&graph.nodes()[b].reviewer_id));
        let mut key = nodes.clone();
        key.sort_unstable();
        if !seen.insert(key) {
            continue;
        }
        let members = nodes.iter().map(|&n| graph.nodes()[n].reviewer_id.clone()).collect();
        let density = weighted_density(graph, &nodes);
        found.push((
            d,
            PseudoClique {
                members,
                nodes,
                density,
                day_span: (first_day, pc.last_join.unwrap_or(first_day)),
            },
        ));
    }
    found.sort_by(|(da, a), (db, b)| {
        da.cmp(db)
            .then(b.density.total_cmp(&a.density))
            .then_with(|| a.members.cmp(&b.members))
    });
    (found.into_iter().map(|(_, c)| c).collect(), stats)
}

/// One output record: the clique plus the app it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueRecord {
    pub app_id: String,
    pub members: Vec<String>,
    pub density: f64,
    pub day_span: (Day, Day),
}

impl CliqueRecord {
    pub fn new(app_id: &str, clique: &PseudoClique) -> Self {
        CliqueRecord {
            app_id: app_id.to_owned(),
            members: clique.members.clone(),
            density: clique.density,
            day_span: clique.day_span,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphNode;
    use chrono::NaiveDate;

    fn day(n: u32) -> Day {
        NaiveDate::from_ymd_opt(2015, 2, n).unwrap()
    }

    fn graph(n: usize, w: impl FnMut(usize, usize) -> u32) -> CoReviewGraph {
        let nodes = (0..n)
            .map(|i| GraphNode {
                reviewer_id: format!("u{i:02}"),
                review_dates: vec![],
            })
            .collect();
        CoReviewGraph::from_fn("app", nodes, w)
    }

    fn on_day(d: u32, nodes: &[usize]) -> ReviewDay {
        ReviewDay {
            day: day(d),
            candidates: nodes.iter().map(|&node| Candidate { node, date: day(d) }).collect(),
        }
    }

    #[test]
    fn unit_triangle_at_threshold_one() {
        let g = graph(3, |_, _| 1);
        let out = pcf(&g, &[on_day(1, &[0, 1, 2])], &PcfConfig::new(1.0, 3).unwrap());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].members, ["u00", "u01", "u02"]);
        assert_eq!(out[0].density, 1.0);
        assert_eq!(out[0].day_span, (day(1), day(1)));
    }

    #[test]
    fn single_review_day_keeps_singleton() {
        let g = graph(1, |_, _| 0);
        let mut wip = WorkingClique::empty(&g);
        best_near_clique(&g, &mut wip, &on_day(1, &[0]), 3.0, &mut PcfStats::default());
        assert_eq!(wip.members(), &[0]);
        assert_eq!(wip.density(), 0.0);
    }

    #[test]
    fn star_keeps_center_and_heaviest_leaf() {
        // center 0; leaves 1..=4 with center weights 10, 12, 9, 11; leaves share weight 1
        let center = [0, 10, 12, 9, 11];
        let g = graph(5, |i, j| if i == 0 { center[j] } else { 1 });
        let mut wip = WorkingClique::empty(&g);
        best_near_clique(
            &g,
            &mut wip,
            &on_day(1, &[0, 1, 2, 3, 4]),
            8.0,
            &mut PcfStats::default(),
        );
        // hand trace at theta 8: rooted at the center the greedy reaches {0, 2, 4}
        // with rho (12 + 11 + 1) / 3 = 8; rooted at leaf 1 it stops at {1, 0}
        // with rho 10 because leaf 2 would give 23 / 3. The denser root wins.
        let mut members = wip.members().to_vec();
        members.sort();
        assert_eq!(members, vec![0, 1]);
        assert_eq!(wip.density(), 10.0);

        let mut wip = WorkingClique::empty(&g);
        best_near_clique(
            &g,
            &mut wip,
            &on_day(1, &[0, 1, 2, 3, 4]),
            9.0,
            &mut PcfStats::default(),
        );
        let mut members = wip.members().to_vec();
        members.sort();
        assert_eq!(members, vec![0, 2]);
        assert_eq!(wip.density(), 12.0);
    }

    #[test]
    fn uniform_weights_take_whole_day() {
        let g = graph(6, |_, _| 4);
        let out = pcf(&g, &[on_day(1, &[0, 1, 2, 3, 4, 5])], &PcfConfig::new(4.0, 3).unwrap());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].size(), 6);
        assert_eq!(out[0].density, 4.0);
    }

    #[test]
    fn gain_tie_breaks() {
        // member 0; candidates 1, 2, 3 with gains 5, 9, 9
        let gains = [0, 5, 9, 9];
        let g = graph(4, |i, j| if i == 0 { gains[j] } else { 0 });
        let cands = [
            Candidate { node: 1, date: day(1) },
            Candidate { node: 3, date: day(2) },
            Candidate { node: 2, date: day(3) },
        ];
        assert_eq!(max_density_gain(&g, &[0], &cands), Some(1));
        let same_day = [Candidate { node: 3, date: day(1) }, Candidate { node: 2, date: day(1) }];
        assert_eq!(max_density_gain(&g, &[0], &same_day), Some(1));
        assert_eq!(max_density_gain(&g, &[0], &[]), None);
        assert_eq!(max_density_gain(&g, &[0], &cands[..1]), Some(0));
    }

    #[test]
    fn config_validation() {
        assert!(PcfConfig::new(0.0, 3).is_err());
        assert!(PcfConfig::new(3.0, 2).is_err());
        assert!(PcfConfig::new(f64::NAN, 3).is_err());
    }

    #[test]
    fn empty_input_emits_nothing() {
        let g = graph(0, |_, _| 0);
        assert!(pcf(&g, &[], &PcfConfig::default()).is_empty());
    }

    #[test]
    fn extension_spans_consecutive_days() {
        // five reviewers pairwise weight 5, split over three days
        let g = graph(5, |_, _| 5);
        let days = [on_day(1, &[0, 1]), on_day(2, &[2, 3]), on_day(4, &[4])];
        let out = pcf(&g, &days, &PcfConfig::default());
        assert_eq!(out[0].size(), 5);
        assert_eq!(out[0].day_span, (day(1), day(4)));
        // seeds on later days produce subsets: {2,3,4} from day 2, {4} alone is too small
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].members, ["u02", "u03", "u04"]);
    }
}
