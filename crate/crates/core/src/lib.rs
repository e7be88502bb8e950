//! Account and topic authenticity scoring for social-media corpora.
//!
//! Accounts are compared to labeled abusers and legitimate accounts through
//! one of five similarity functions; a similarity-weighted KNN confidence
//! turns those comparisons into an authenticity score in `[-0.5, 0.5]`, and
//! per-post LDA topic distributions aggregate the scores into topic-level
//! authenticity.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel drivers live in the `authlab` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod classify;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod report;
pub mod rng;
pub mod similarity;
pub mod synth;
pub mod textproc;
pub mod topics;

pub use crate::corpus::{Account, Dataset, DatasetBuilder, Label, LoadManifest, Post, ProfileRaw};
pub use crate::error::{Error, Result};
pub use crate::similarity::{SimilarityKind, SimilarityMatrix};
