use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::gamma::regularized_gamma_q;
use crate::error::{Error, Result};
use crate::format::header_line;
use crate::model::{BucketTable, DatasetStore};

pub const MOSAIC_KIND: &str = "mosaic";

/// Rating-count buckets (rows) by install buckets (columns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != row_labels.len() || counts.iter().any(|r| r.len() != col_labels.len()) {
            return Err(Error::Config(
                "contingency table shape does not match its labels".into(),
            ));
        }
        Ok(ContingencyTable {
            row_labels,
            col_labels,
            counts,
        })
    }

    /// Unlabeled table, rows and columns numbered from 0.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        Self::new(
            (0..counts.len()).map(|i| i.to_string()).collect(),
            (0..cols).map(|j| j.to_string()).collect(),
            counts,
        )
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Latest-snapshot rating count against install bucket, one entry per app
/// with a snapshot. Both axes use `table`.
pub fn contingency_table(store: &DatasetStore, table: &BucketTable) -> Result<ContingencyTable> {
    let labels: Vec<String> = table.buckets().map(|b| b.to_string()).collect();
    let mut counts = vec![vec![0u64; table.len()]; table.len()];
    for app in store.app_ids() {
        if let Some(s) = store.latest_snapshot(app)? {
            let col = table.position(s.install_bucket).ok_or_else(|| {
                Error::Config(format!(
                    "app {app}: install bucket {} is not in the bucket table",
                    s.install_bucket
                ))
            })?;
            counts[table.index_of(s.rating_count)][col] += 1;
        }
    }
    ContingencyTable::new(labels.clone(), labels, counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    /// Labels of the rows and columns kept after dropping empty ones.
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub observed: Vec<Vec<u64>>,
    pub expected: Vec<Vec<f64>>,
    /// `(observed - expected) / sqrt(expected)`.
    pub residuals: Vec<Vec<f64>>,
}

/// Pearson's test of independence.
pub fn chi_square_independence(table: &ContingencyTable) -> Result<ChiSquare> {
    let keep_rows: Vec<usize> = (0..table.counts.len())
        .filter(|&i| table.counts[i].iter().any(|&c| c > 0))
        .collect();
    let keep_cols: Vec<usize> = (0..table.col_labels.len())
        .filter(|&j| table.counts.iter().any(|r| r[j] > 0))
        .collect();
    if keep_rows.len() < 2 || keep_cols.len() < 2 {
        return Err(Error::Degenerate(format!(
            "chi-square needs at least 2x2 non-empty margins, got {}x{}",
            keep_rows.len(),
            keep_cols.len()
        )));
    }
    let observed: Vec<Vec<u64>> = keep_rows
        .iter()
        .map(|&i| keep_cols.iter().map(|&j| table.counts[i][j]).collect())
        .collect();
    let row_sums: Vec<f64> = observed.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..keep_cols.len())
        .map(|j| observed.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let n: f64 = row_sums.iter().sum();

    let mut statistic = 0.0;
    let mut expected = Vec::with_capacity(observed.len());
    let mut residuals = Vec::with_capacity(observed.len());
    for (i, row) in observed.iter().enumerate() {
        let mut e_row = Vec::with_capacity(row.len());
        let mut r_row = Vec::with_capacity(row.len());
        for (j, &o) in row.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / n;
            let r = (o as f64 - e) / e.sqrt();
            statistic += r * r;
            e_row.push(e);
            r_row.push(r);
        }
        expected.push(e_row);
        residuals.push(r_row);
    }
    let dof = ((keep_rows.len() - 1) * (keep_cols.len() - 1)) as u64;
    // The upper tail underflows for enormous statistics; keep p inside (0, 1].
    let p_value = regularized_gamma_q(dof as f64 / 2.0, statistic / 2.0).max(f64::MIN_POSITIVE);
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
        rows: keep_rows.iter().map(|&i| table.row_labels[i].clone()).collect(),
        cols: keep_cols.iter().map(|&j| table.col_labels[j].clone()).collect(),
        observed,
        expected,
        residuals,
    })
}

/// Tab-separated cells for a mosaic plot.
pub fn mosaic_tsv(result: &ChiSquare) -> String {
    let mut s = header_line(MOSAIC_KIND);
    s.push_str("\nrating_bucket\tinstall_bucket\tobserved\texpected\tresidual\n");
    for (i, row) in result.rows.iter().enumerate() {
        for (j, col) in result.cols.iter().enumerate() {
            let _ = writeln!(
                s,
                "{row}\t{col}\t{}\t{}\t{}",
                result.observed[i][j], result.expected[i][j], result.residuals[i][j]
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn closed_form_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
        let n = a + b + c + d;
        n * (a * d - b * c).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d))
    }

    #[test]
    fn two_by_two_example() {
        let t = ContingencyTable::from_counts(vec![vec![10, 20], vec![20, 10]]).unwrap();
        let r = chi_square_independence(&t).unwrap();
        assert!((r.statistic - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.dof, 1);
        assert!((r.p_value - 0.009_823).abs() < 1e-5, "{}", r.p_value);
        assert!((r.statistic - closed_form_2x2(10.0, 20.0, 20.0, 10.0)).abs() < 1e-12);
    }

    #[test]
    fn independent_and_degenerate() {
        let t = ContingencyTable::from_counts(vec![vec![10, 10], vec![10, 10]]).unwrap();
        let r = chi_square_independence(&t).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let t = ContingencyTable::from_counts(vec![vec![5, 0], vec![7, 0]]).unwrap();
        assert!(matches!(chi_square_independence(&t), Err(Error::Degenerate(_))));
    }

    #[test]
    fn empty_rows_dropped() {
        let t = ContingencyTable::from_counts(vec![vec![10, 0, 20], vec![0, 0, 0], vec![20, 0, 10]]).unwrap();
        let r = chi_square_independence(&t).unwrap();
        assert_eq!((r.rows.len(), r.cols.len(), r.dof), (2, 2, 1));
        assert_eq!(r.cols, ["0", "2"]);
        let tsv = mosaic_tsv(&r);
        assert_eq!(tsv.lines().count(), 2 + 4);
    }

    fn arb_table() -> impl Strategy<Value = Vec<Vec<u64>>> {
        (2usize..5, 2usize..5)
            .prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(1u64..50, c), r))
    }

    proptest! {
        #[test]
        fn residuals_reproduce_statistic(t in arb_table()) {
            let r = chi_square_independence(&ContingencyTable::from_counts(t).unwrap()).unwrap();
            let sum: f64 = r.residuals.iter().flatten().map(|x| x * x).sum();
            prop_assert!((sum - r.statistic).abs() <= 1e-9 * r.statistic.max(1.0));
            prop_assert!(r.statistic >= 0.0);
            prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }

        #[test]
        fn permutation_invariant(t in arb_table(), rot in 0usize..4) {
            let a = chi_square_independence(&ContingencyTable::from_counts(t.clone()).unwrap()).unwrap();
            let mut p = t.clone();
            let k = rot % p.len();
            p.rotate_left(k);
            for row in &mut p {
                row.reverse();
            }
            let b = chi_square_independence(&ContingencyTable::from_counts(p).unwrap()).unwrap();
            prop_assert!((a.statistic - b.statistic).abs() <= 1e-9 * a.statistic.max(1.0));
            prop_assert_eq!(a.dof, b.dof);
        }
    }
}
