//! Limited-feedback MIMO beamforming from a subspace-projection viewpoint.
//!
//! The crate models the downlink limited-feedback pipeline for a ULA base
//! station: a sparse geometric channel is observed through a probing codebook,
//! compressed by one of four feedback schemes (Type-I, Type-II, port
//! selection, or a learned subspace scheme), reconstructed at the base
//! station, and scored by its CSI-capture efficiency and effective spectral
//! efficiency.
//!
//! Modules:
//! - [`numkernel`]: complex matrix substrate (Hermitian products, rank-revealing
//!   orthonormalization, least squares, power-iteration spectral norm).
//! - [`channel`]: steering vectors, sparse path channels, a synthetic
//!   site generator, and the dataset file format.
//! - [`probing`]: probing codebooks and the RSRP fingerprint measurement model.
//! - [`schemes`]: the feedback schemes, their induced subspaces, and all metrics.
//! - [`learn`]: the differentiable probing-codebook + subspace-inference
//!   pipeline with hand-written backprop and mini-batch SGD.

pub mod channel;
pub mod error;
pub mod learn;
pub mod numkernel;
pub mod probing;
pub mod rng;
pub mod schemes;

pub use error::{Error, Result};
