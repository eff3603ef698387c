//! File formats, link auditing and pipeline runs on top of `coordnet-core`.

pub mod export;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod snapshot;
pub mod steps;
pub mod urlcheck;

pub use coordnet_core as core;
