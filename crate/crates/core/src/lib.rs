//! Clustered neural associative memory.
//!
//! Patterns are integer vectors whose entries are grouped into overlapping
//! clusters. Each cluster learns a sparse set of constraint vectors that are
//! orthogonal to every training sub-pattern; recall removes additive noise by
//! bit-flipping inside a cluster and peeling across clusters. The [`analysis`]
//! module predicts recall performance through density evolution.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the experiment
//! harness and the command line live in the companion `clustered-am-cli` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]
// `!(x >= 0.0)` style checks are how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
mod math;

pub mod analysis;
pub mod exact;
pub mod imagesys;
pub mod learning;
pub mod linalg;
pub mod model;
pub mod recall;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use model::{ClusterLayout, Dataset, NoiseSpec, SparseWeightMatrix};
