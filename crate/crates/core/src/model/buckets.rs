use std::path::Path;

use super::types::Bucket;
use crate::error::{Error, Result};
use crate::format::content_lines;

const DEFAULT_TABLE: &str = include_str!("../../assets/install_buckets.txt");

/// Ordered bucket boundaries. Buckets are `(b[i], b[i+1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketTable {
    bounds: Vec<u64>,
}

impl BucketTable {
    pub fn from_bounds(bounds: Vec<u64>) -> Result<Self> {
        if bounds.len() < 2 {
            return Err(Error::Config("bucket table needs at least two boundaries".into()));
        }
        if bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("bucket boundaries must be strictly increasing".into()));
        }
        Ok(BucketTable { bounds })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bounds = content_lines(text)
            .map(|(lineno, line)| {
                line.parse::<u64>()
                    .map_err(|e| Error::parse(format!("bucket table line {lineno}"), e))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bounds(bounds)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn buckets(&self) -> impl Iterator<Item = Bucket> + '_ {
        self.bounds.windows(2).map(|w| Bucket(w[0], w[1]))
    }

    /// Index of the bucket holding `count`. Zero maps to the first bucket and
    /// counts past the last boundary clamp to the last bucket.
    pub fn index_of(&self, count: u64) -> usize {
        let last = self.bounds.len() - 2;
        // first i with bounds[i + 1] >= count
        match self.bounds[1..].binary_search(&count) {
            Ok(i) => i,
            Err(i) => i.min(last),
        }
    }

    pub fn bucket_of(&self, count: u64) -> Bucket {
        let i = self.index_of(count);
        Bucket(self.bounds[i], self.bounds[i + 1])
    }

    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of a bucket whose endpoints appear in the table, if any.
    pub fn position(&self, bucket: Bucket) -> Option<usize> {
        self.buckets().position(|b| b == bucket)
    }
}

impl Default for BucketTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled bucket table is valid")
    }
}
