//! Mining characteristic voting-behavior patterns from roll-call data.
//!
//! Each roll-call becomes a signed graph over the voters who took part
//! (positive between equal votes, negative otherwise). Every such layer is
//! partitioned exactly by correlation clustering, the resulting patterns are
//! compared pairwise and grouped with k-medoids, and each group is summarized
//! by the correlation-clustering solution of its signed consensus graph.

pub mod cc;
pub mod characteristic;
pub mod clustering;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod multiplex;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
