//! Domain records, the immutable dataset store and line-oriented ingestion.

mod buckets;
mod ingest;
mod store;
mod types;

pub use buckets::BucketTable;
pub use ingest::{
    export, export_texts, ingest, parse_records, IngestReport, LexiconPaths, Manifest, RecordError, MANIFEST_FILE,
    MANIFEST_KIND,
};
pub use store::{daily_review_series, DatasetStore, Records};
pub use types::*;
