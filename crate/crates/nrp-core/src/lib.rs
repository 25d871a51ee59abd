//! Node embeddings for directed and undirected graphs, built by factorizing a
//! truncated personalized-PageRank proximity matrix and then calibrating the
//! factors with degree-targeted node weights.
//!
//! The pipeline has three stages:
//!
//! 1. [`bksvd`] — randomized block-Krylov SVD of the adjacency operator,
//! 2. [`ppr`] — iterative propagation of the SVD factors so that the product
//!    `X · Yᵀ` approximates truncated PPR between distinct nodes,
//! 3. [`reweight`]/[`nrp`] — coordinate-descent learning of per-node forward
//!    and backward weights so that total connection strength tracks node
//!    degrees, followed by row scaling.
//!
//! [`eval`] provides link-prediction (AUC) and graph-reconstruction
//! (precision@K) harnesses. All numeric kernels are generic over the scalar
//! type via [`Scalar`] (`f32` or `f64`); the type aliases at the crate root
//! pick the `f64` instantiations the CLI uses.

pub mod bksvd;
pub mod error;
pub mod eval;
pub mod graph;
pub mod nrp;
pub mod ppr;
pub mod reweight;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` embedding pair, the default precision used by the CLI.
pub type EmbeddingPair64 = ppr::EmbeddingPair<f64>;
/// `f64` SVD factors.
pub type SvdFactors64 = bksvd::SvdFactors<f64>;
/// `f64` weight state.
pub type WeightState64 = reweight::WeightState<f64>;
/// `f64` pipeline configuration.
pub type NrpConfig64 = nrp::NrpConfig<f64>;
