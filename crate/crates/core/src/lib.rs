//! Small fully connected Bayesian neural networks and the tooling needed to
//! study how their posterior predictive behaves under adversarial attack.
//!
//! The crate is organized around five building blocks:
//!
//! - [`nn`]: the network itself — architecture, flat weight vectors, forward
//!   evaluation, cross-entropy loss, and exact reverse-mode gradients with
//!   respect to both weights and inputs.
//! - [`data`]: the half-moons generator, IDX (MNIST-style) ingestion, and
//!   train/test splitting.
//! - [`inference`]: ways of producing weight ensembles — HMC sampling,
//!   mean-field Gaussian VI, plain SGD, and deep ensembles — plus the wide
//!   Gaussian prior they share.
//! - [`attacks`]: FGSM, PGD, the random-sign baseline, and a query-only
//!   finite-difference (ZOO-style) attack, all phrased against the posterior
//!   predictive.
//! - [`analysis`]: the measurements — posterior predictive, accuracy,
//!   softmax-difference robustness, expected-gradient reports, attack tables,
//!   and PCA projections of weight ensembles — together with their CSV
//!   serializations.
//!
//! Everything is deterministic under explicit seeds: identical configuration
//! and seed reproduce bit-identical ensembles, attacks, and reports.

pub mod analysis;
pub mod attacks;
pub mod data;
pub mod error;
pub mod inference;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
