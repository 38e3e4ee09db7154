//! Full-duplex D2D caching in clustered cellular networks.
//!
//! Closed-form collaboration probabilities live in [`analytic`]; the
//! Monte-Carlo pipeline (users, clusters, caches, request graph, link
//! capacities, throughput and latency) is assembled in [`harness`].

// `!(x > 0.0)` is used on purpose so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod placement;
pub mod popularity;
pub mod topology;

pub use error::{Error, Result};
