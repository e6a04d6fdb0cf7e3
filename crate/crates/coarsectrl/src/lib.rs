//! Estimate group-level average controllability of large networked linear
//! systems from coarse graph summaries.
//!
//! The pipeline: sample a block-structured random graph, observe it only
//! through disjoint group averages, then estimate how controllable each group
//! is, either by treating the coarse graph as a reduced-order system or by
//! first recovering the community structure spectrally and applying a closed
//! form. Exact oracles, error metrics, and a seeded sweep harness round out
//! the crate; see the `examples/` directory for end-to-end usage.

pub mod checks;
pub mod coarsening;
pub mod controllability;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod sbm;

pub use error::{Error, Result};
