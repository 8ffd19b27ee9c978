//! Subspace feature representations for few-shot classification.
//!
//! Features extracted by a pretrained network (one row per sample) are reduced to a small
//! subspace fitted on the training split, then classified with k-nearest neighbours:
//!
//! * [`subspaces`]: multiclass LDA, orthonormal binary discriminant directions with their
//!   discrim-values, and truncated SVD.
//! * [`factorization`]: NMF by multiplicative updates and supervised NMF with a logistic
//!   term optimized by ADADELTA.
//! * [`classify`]: KNN, accuracy and a two-sample Z-test.
//! * [`harness`]: repeated per-class splits, method comparison reports, dimension sweeps
//!   and NMF initialization studies.

pub mod classify;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod factorization;
pub mod harness;
pub mod matrix;
pub mod subspaces;

pub use error::{Error, Result};
pub use matrix::Matrix;
