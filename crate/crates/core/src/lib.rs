//! Contextual chunk enrichment and vector dilution measurement.
//!
//! The crate is organised as a pipeline:
//!
//! | Module | Role |
//! | ------ | ---- |
//! | [`corpus`] | seeded synthetic corpus with specific and thematic ground-truth queries |
//! | [`chunking`] | tokenizer and fixed-window chunker |
//! | [`injection`] | context blocks, injection ratio (CIR), static strategies and the density-aware budget |
//! | [`embedding`] | mean-pooled signed feature hashing and the dilution geometry |
//! | [`retrieval`] | exact cosine kNN index with a binary file format |
//! | [`evaluation`] | NDCG / Recall metrics, strategy sweeps and reports |
//!
//! Data-parallel loops (embedding batches, query batches, per-strategy runs)
//! use rayon when the `parallel` feature is enabled (the default) and plain
//! iterators otherwise. Results are identical either way.

pub mod chunking;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod injection;
pub(crate) mod io_util;
pub mod retrieval;

pub use error::{Error, Result};
pub use io_util::write_atomic;
