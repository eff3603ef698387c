//! Core algorithms for actor/shared-link network analysis.
//!
//! The crate is `no_std` + `alloc`. The default `std` feature enables
//! multi-threaded betweenness and closeness through rayon; without it every
//! computation runs on the calling thread and produces the same numbers.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod communities;
pub mod components;
pub mod graph;
pub mod metrics;
pub mod parallel;
pub mod record;
pub mod stats;

pub use graph::{build_graph, ActorLinkGraph, BuildOptions, GraphBuilder, NodeId, NodeKind};
pub use parallel::Workers;
pub use record::{merge_datasets, Dataset, PostRecord};
