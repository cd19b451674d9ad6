//! Adjacency-spectral partitioning for stochastic block model graphs.
//!
//! The library covers the full inference pipeline when the model parameters
//! are unknown except for an upper bound `R` on the rank of the communication
//! probability matrix:
//!
//! * [`model`] — block model parameters, validation, latent factorization,
//!   and the analysis constants derived from them.
//! * [`sampler`] — seeded realization of block memberships and adjacency
//!   matrices, with a portable counter-based generator.
//! * [`embedding`] — singular value decomposition of each adjacency matrix,
//!   scaled spectral embeddings, and the singular-value rank estimator.
//! * [`clustering`] — least-squares row clustering: exact enumeration at
//!   small scale and seeded Lloyd iteration with restarts at scale.
//! * [`selection`] — estimators for the number of blocks from the clustering
//!   residual threshold and from part-size/centroid-separation predicates.
//! * [`evaluation`] — misassignment metric minimized over label bijections.
//! * [`diagnostics`] — empirical checks of the finite-sample spectral bounds
//!   on sampled instances.
//! * [`harness`] — Monte Carlo studies with deterministic, parallel
//!   replication and tabular output.
//! * [`io`] — text formats for parameters, graphs, embeddings, and tables.

// Index loops mirror the matrix arithmetic throughout the numeric kernels.
#![allow(clippy::needless_range_loop)]

pub mod clustering;
pub mod diagnostics;
pub mod embedding;
mod error;
pub mod evaluation;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod selection;

pub use error::{Error, Result};

/// Library version reported in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
