//! Per-app co-review graphs and weighted density.
//!
//! Nodes are the distinct reviewers of one app. The weight of an edge is the
//! number of apps both endpoints reviewed anywhere in the dataset, so every
//! pair of an app's reviewers is connected with weight at least 1.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::Result;
use crate::format::header_line;
use crate::model::{DatasetStore, Day};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphConfig {
    /// Count the app under analysis among the common apps. Turning this off
    /// drops every pair that has nothing else in common.
    pub include_target_app: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            include_target_app: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub reviewer_id: String,
    /// Dates of this reviewer's reviews of the app, ascending.
    pub review_dates: Vec<Day>,
}

/// Weighted undirected graph over an app's reviewers, stored as a dense
/// symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CoReviewGraph {
    app_id: String,
    nodes: Vec<GraphNode>,
    index: HashMap<String, usize>,
    weights: Vec<u32>,
}

impl CoReviewGraph {
    /// Build from an explicit weight function over node pairs. Nodes keep the
    /// given order; `weight(i, j)` is queried for `i < j` only.
    pub fn from_fn(
        app_id: impl Into<String>,
        nodes: Vec<GraphNode>,
        mut weight: impl FnMut(usize, usize) -> u32,
    ) -> Self {
        let n = nodes.len();
        let mut weights = vec![0u32; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = weight(i, j);
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, node)| (node.reviewer_id.clone(), i))
            .collect();
        CoReviewGraph {
            app_id: app_id.into(),
            nodes,
            index,
            weights,
        }
    }

    pub fn app_id(&self) -> &str {
        &self.app_id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node_index(&self, reviewer_id: &str) -> Option<usize> {
        self.index.get(reviewer_id).copied()
    }

    /// Weight of the edge `{u, v}`; zero means no edge. Self pairs are zero.
    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> u32 {
        self.weights[u * self.nodes.len() + v]
    }

    /// Edges `(u, v, w)` with `u < v` and `w > 0`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        let n = self.nodes.len();
        (0..n)
            .flat_map(move |u| (u + 1..n).map(move |v| (u, v, self.weight(u, v))))
            .filter(|&(_, _, w)| w > 0)
    }

    /// Sum of edge weights inside `members`.
    pub fn internal_weight(&self, members: &[usize]) -> u64 {
        let mut total = 0u64;
        for (k, &u) in members.iter().enumerate() {
            for &v in &members[k + 1..] {
                total += u64::from(self.weight(u, v));
            }
        }
        total
    }

    /// Weighted density of the whole graph.
    pub fn density(&self) -> f64 {
        let all: Vec<usize> = (0..self.nodes.len()).collect();
        weighted_density(self, &all)
    }

    /// Text dump: a header, one `node` line per reviewer, then `u v w` edges
    /// using reviewer ids.
    pub fn dump(&self) -> String {
        let mut out = header_line("coreview-graph");
        out.push('\n');
        let _ = writeln!(out, "# app {} nodes {}", self.app_id, self.nodes.len());
        for node in &self.nodes {
            let dates: Vec<String> = node.review_dates.iter().map(Day::to_string).collect();
            let _ = writeln!(out, "node {} {}", node.reviewer_id, dates.join(","));
        }
        for (u, v, w) in self.edges() {
            let _ = writeln!(out, "{} {} {}", self.nodes[u].reviewer_id, self.nodes[v].reviewer_id, w);
        }
        out
    }
}

/// `total / C(n, 2)` from an integer weight total; 0 for fewer than two nodes.
///
/// Both operands are exact integers, so the result is the correctly rounded
/// quotient (relative error below 2^-53).
#[inline]
pub fn density_from_total(total: u64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    total as f64 / pairs as f64
}

/// Weighted density `sum(w(e)) / C(n, 2)` of the subgraph induced by
/// `members`. Subgraphs with fewer than two nodes have density 0.
pub fn weighted_density(graph: &CoReviewGraph, members: &[usize]) -> f64 {
    density_from_total(graph.internal_weight(members), members.len())
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Co-review graph of `app_id`, one node per distinct reviewer sorted by id.
pub fn build_graph(store: &DatasetStore, app_id: &str, config: GraphConfig) -> Result<CoReviewGraph> {
    let reviews = store.reviews_of(app_id)?;
    let mut by_reviewer: std::collections::BTreeMap<&str, Vec<Day>> = Default::default();
    for r in reviews {
        by_reviewer.entry(&r.reviewer_id).or_default().push(r.date);
    }
    let nodes: Vec<GraphNode> = by_reviewer
        .into_iter()
        .map(|(id, mut dates)| {
            dates.sort();
            GraphNode {
                reviewer_id: id.to_owned(),
                review_dates: dates,
            }
        })
        .collect();
    let histories: Vec<&[u32]> = nodes
        .iter()
        .map(|n| store.reviewer_app_ordinals(&n.reviewer_id))
        .collect();
    let discount = u32::from(!config.include_target_app);
    Ok(CoReviewGraph::from_fn(app_id, nodes, |i, j| {
        sorted_intersection_len(histories[i], histories[j]) as u32 - discount
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AppRecord, Records, Review};
    use chrono::NaiveDate;

    fn node(id: &str) -> GraphNode {
        GraphNode {
            reviewer_id: id.into(),
            review_dates: vec![],
        }
    }

    fn uniform(n: usize, w: u32) -> CoReviewGraph {
        CoReviewGraph::from_fn("x", (0..n).map(|i| node(&format!("n{i}"))).collect(), |_, _| w)
    }

    #[test]
    fn density_examples() {
        assert_eq!(uniform(2, 5).density(), 5.0);
        assert_eq!(uniform(3, 1).density(), 1.0);
        assert_eq!(uniform(4, 2).density(), 2.0);
        assert_eq!(uniform(1, 9).density(), 0.0);
        assert_eq!(uniform(0, 9).density(), 0.0);
    }

    fn store_with_histories(histories: &[(&str, Vec<String>)]) -> DatasetStore {
        let mut apps = std::collections::BTreeSet::new();
        let mut reviews = Vec::new();
        for (u, list) in histories {
            for a in list {
                apps.insert(a.clone());
                reviews.push(Review {
                    review_id: format!("{u}-{a}"),
                    app_id: a.clone(),
                    reviewer_id: (*u).into(),
                    date: NaiveDate::from_ymd_opt(2015, 3, 1).unwrap(),
                    title: String::new(),
                    text: String::new(),
                    rating: 4,
                });
            }
        }
        let apps = apps
            .into_iter()
            .map(|id| AppRecord {
                app_id: id,
                developer_id: "d".into(),
                category: "c".into(),
                price: 0.0,
                first_review_date: None,
                similar_app_ids: vec![],
            })
            .collect();
        DatasetStore::from_records(Records {
            apps,
            reviews,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn minimal_overlap_gives_unit_edge() {
        let s = store_with_histories(&[("a", vec!["t".into()]), ("b", vec!["t".into()])]);
        let g = build_graph(&s, "t", GraphConfig::default()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 1)]);
        let g = build_graph(
            &s,
            "t",
            GraphConfig {
                include_target_app: false,
            },
        )
        .unwrap();
        assert_eq!(g.edges().count(), 0);
    }

    #[test]
    fn shared_history_weight_matches_set_intersection() {
        let shared: Vec<String> = (0..115).map(|i| format!("s{i:03}")).collect();
        let mut a = shared.clone();
        a.extend(["t".to_string(), "only-a".to_string()]);
        let mut b = shared.clone();
        b.extend(["t".to_string(), "only-b1".to_string(), "only-b2".to_string()]);
        // oracle: plain set intersection on the constructed histories
        let sa: std::collections::BTreeSet<_> = a.iter().collect();
        let expected = b.iter().filter(|x| sa.contains(x)).count() as u32;
        assert_eq!(expected, 116);
        let s = store_with_histories(&[("a", a), ("b", b)]);
        let g = build_graph(&s, "t", GraphConfig::default()).unwrap();
        assert_eq!(g.weight(0, 1), expected);
        assert_eq!(g.weight(1, 0), expected);
        assert_eq!(g.weight(0, 0), 0);
    }

    #[test]
    fn single_reviewer_has_no_edges() {
        let s = store_with_histories(&[("a", vec!["t".into(), "u".into()])]);
        let g = build_graph(&s, "t", GraphConfig::default()).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edges().count(), 0);
        assert!(build_graph(&s, "nope", GraphConfig::default()).is_err());
    }

    #[test]
    fn dump_lists_nodes_and_edges() {
        let g = uniform(3, 2);
        let text = g.dump();
        assert!(text.starts_with("# playsleuth-format coreview-graph v1\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("node ")).count(), 3);
        assert!(text.contains("\nn0 n1 2\n"));
    }
}
