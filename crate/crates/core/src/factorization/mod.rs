//! Non-negative factorizations Y ≈ K X and their supervised variant.

mod adadelta;
mod nmf;
mod snmf;

pub use adadelta::{adadelta_step, AdadeltaParams, AdadeltaState, DEFAULT_EPSILON, DEFAULT_RHO};
pub use nmf::{
    nmf_fit, nmf_transform, reconstruction_error, NmfModel, DEFAULT_ITERS, DENOMINATOR_FLOOR,
};
pub use snmf::{
    project_nonnegative, snmf_fit, snmf_gradients, snmf_objective, SnmfConfig, SnmfLoss,
    SnmfModel, DEFAULT_LAMBDA, PROJECTION_FLOOR,
};
