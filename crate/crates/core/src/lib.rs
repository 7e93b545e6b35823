//! Detection of search rank fraud and malware-indicative apps in app-market
//! data.
//!
//! The pipeline mines temporally contiguous co-review pseudo cliques
//! ([`pcf`]), extracts review feedback signals ([`review`]), review, rating
//! and install imbalances ([`irr`]) and dangerous-permission ramps
//! ([`permissions`]), assembles them into per-app [`features`] and trains the
//! supervised learners in [`learn`]. [`synth`] generates labeled markets with
//! planted fraud campaigns.

pub mod assets;
pub mod error;
pub mod features;
pub mod format;
pub mod graph;
pub mod irr;
pub mod learn;
pub mod model;
pub mod pcf;
pub mod permissions;
pub mod review;
pub mod synth;

pub use assets::Assets;
pub use error::{Error, Result};
pub use graph::{build_graph, weighted_density, CoReviewGraph, GraphConfig};
pub use model::{daily_review_series, DatasetStore, LabelSet, Manifest};
pub use pcf::{pcf, PcfConfig, PseudoClique};
pub use synth::{generate, GenConfig, GroundTruth, SyntheticMarket};
