use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_RHO: f64 = 0.95;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Decay and floor of the ADADELTA running averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdadeltaParams {
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for AdadeltaParams {
    fn default() -> Self {
        AdadeltaParams {
            rho: DEFAULT_RHO,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl AdadeltaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("ADADELTA rho must be in (0, 1), got {}", self.rho)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "ADADELTA epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Per-parameter running means of squared gradients and squared steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub grad_accum: DMatrix<f64>,
    pub step_accum: DMatrix<f64>,
    pub params: AdadeltaParams,
}

impl AdadeltaState {
    pub fn new(rows: usize, cols: usize, params: AdadeltaParams) -> Result<Self> {
        params.validate()?;
        Ok(AdadeltaState {
            grad_accum: DMatrix::zeros(rows, cols),
            step_accum: DMatrix::zeros(rows, cols),
            params,
        })
    }

    /// Advances the accumulators with `grad` and returns the step to add to the parameters.
    pub fn step(&mut self, grad: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if grad.shape() != self.grad_accum.shape() {
            return Err(Error::invalid(format!(
                "gradient shape {:?} does not match optimizer state {:?}",
                grad.shape(),
                self.grad_accum.shape()
            )));
        }
        let AdadeltaParams { rho, epsilon } = self.params;
        let mut step = DMatrix::zeros(grad.nrows(), grad.ncols());
        for (((g, ga), sa), s) in grad
            .iter()
            .zip(self.grad_accum.iter_mut())
            .zip(self.step_accum.iter_mut())
            .zip(step.iter_mut())
        {
            *ga = rho * *ga + (1.0 - rho) * g * g;
            *s = -((*sa + epsilon).sqrt() / (*ga + epsilon).sqrt()) * g;
            *sa = rho * *sa + (1.0 - rho) * *s * *s;
        }
        Ok(step)
    }
}

/// Functional form of [`AdadeltaState::step`].
pub fn adadelta_step(state: &AdadeltaState, grad: &Matrix) -> Result<(Matrix, AdadeltaState)> {
    let mut next = state.clone();
    let step = next.step(grad.as_dmatrix())?;
    Ok((Matrix::from_dmatrix(step), next))
}
