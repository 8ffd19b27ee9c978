use std::fmt;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// How a [`Projection`] was fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    LdaMulticlass,
    FsBinary,
    Svd,
}

impl ProjectionMethod {
    pub fn is_discriminant(self) -> bool {
        matches!(self, ProjectionMethod::LdaMulticlass | ProjectionMethod::FsBinary)
    }
}

impl fmt::Display for ProjectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectionMethod::LdaMulticlass => "lda_multiclass",
            ProjectionMethod::FsBinary => "fs_binary",
            ProjectionMethod::Svd => "svd",
        })
    }
}

/// A fitted M×L linear map with unit-norm columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Projection {
    pub method: ProjectionMethod,
    pub source_dims: usize,
    pub dims: usize,
    /// M×L, one direction per column.
    pub directions: Matrix,
    /// Fisher ratio of each direction (discriminant methods only).
    #[serde(default)]
    pub discrim_values: Vec<f64>,
    /// Singular value of each direction (SVD only).
    #[serde(default)]
    pub singular_values: Vec<f64>,
    /// Training column means subtracted before projecting, if fitted centered.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// δ added to the intra-class scatter diagonal during fitting (0 if none was needed).
    #[serde(default)]
    pub regularization: f64,
}

impl Projection {
    pub(crate) fn new(method: ProjectionMethod, directions: Matrix) -> Self {
        Projection {
            method,
            source_dims: directions.rows(),
            dims: directions.cols(),
            directions,
            discrim_values: Vec::new(),
            singular_values: Vec::new(),
            center: None,
            regularization: 0.0,
        }
    }

    /// `samples · directions`, after subtracting the stored center when present.
    pub fn project(&self, samples: &Matrix) -> Result<Matrix> {
        if samples.cols() != self.source_dims {
            return Err(Error::invalid(format!(
                "samples have {} columns, projection expects {}",
                samples.cols(),
                self.source_dims
            )));
        }
        let y = samples.as_dmatrix();
        let w = self.directions.as_dmatrix();
        let out = match &self.center {
            Some(c) => {
                let c = DVector::from_column_slice(c).transpose();
                let mut centered = y.clone();
                for mut r in centered.row_iter_mut() {
                    r -= &c;
                }
                centered * w
            }
            None => y * w,
        };
        Ok(Matrix::from_dmatrix(out))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("projection serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Projection =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("projection JSON: {e}")))?;
        if p.directions.rows() != p.source_dims || p.directions.cols() != p.dims {
            return Err(Error::invalid("projection JSON: dims disagree with directions"));
        }
        if p.center.as_ref().is_some_and(|c| c.len() != p.source_dims) {
            return Err(Error::invalid("projection JSON: center length mismatch"));
        }
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Normalizes `v` to unit length in place and returns the original norm.
pub(crate) fn normalize(v: &mut DVector<f64>) -> f64 {
    let n = v.norm();
    if n > 0.0 {
        *v /= n;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_projection_is_a_no_op() {
        let p = Projection::new(ProjectionMethod::Svd, Matrix::identity(3));
        let x = Matrix::from_rows(&[[1.0, 2.0, 3.0], [-1.0, 0.5, 9.0]]).unwrap();
        assert_eq!(p.project(&x).unwrap(), x);
    }

    #[test]
    fn single_axis_picks_first_column() {
        let d = Matrix::from_rows(&[[1.0], [0.0], [0.0]]).unwrap();
        let p = Projection::new(ProjectionMethod::FsBinary, d);
        let x = Matrix::from_rows(&[[4.0, 2.0, 3.0], [-1.0, 0.5, 9.0]]).unwrap();
        assert_eq!(p.project(&x).unwrap().column(0), vec![4.0, -1.0]);
    }

    #[test]
    fn center_is_subtracted() {
        let mut p = Projection::new(ProjectionMethod::Svd, Matrix::identity(2));
        p.center = Some(vec![1.0, 1.0]);
        let x = Matrix::from_rows(&[[1.0, 3.0]]).unwrap();
        assert_eq!(p.project(&x).unwrap().row(0), vec![0.0, 2.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let p = Projection::new(ProjectionMethod::Svd, Matrix::identity(2));
        assert!(p.project(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let d = Matrix::from_rows(&[[0.1 + 0.2, 1.0 / 3.0], [std::f64::consts::PI, -1e-300]]).unwrap();
        let mut p = Projection::new(ProjectionMethod::LdaMulticlass, d);
        p.discrim_values = vec![1.0 / 7.0, 2.0 / 9.0];
        p.center = Some(vec![0.3, f64::MIN_POSITIVE]);
        p.regularization = 5e-3;
        let back = Projection::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(Projection::from_json("{\"method\":\"svd\",\"bogus\":1}").is_err());
    }
}
