//! Dense-matrix spectral primitives: SVD, singular spectra, rank-r truncation.
//!
//! Everything downstream (the regularizer, its prox, the solvers) is a
//! function of singular value decompositions, so this module pins the
//! conventions once: spectra are stored nonincreasing and nonnegative, and
//! the numerical rank of a matrix counts singular values above
//! `RANK_REL_TOL * sigma_1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense column-major matrix of `f64`, the working type for all matrix
/// variables.
pub type Mat = DMatrix<f64>;
/// Dense vector of `f64`, the working type for measurements.
pub type Vec64 = DVector<f64>;

/// Relative threshold for numerical rank: singular values above
/// `RANK_REL_TOL * sigma_1` count towards the rank. Shared by every rank
/// decision in the crate (solver reports, bisection, certificates).
pub const RANK_REL_TOL: f64 = 1e-9;

/// A vector of singular values, kept nonincreasing and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Wraps a vector of singular values. Fails unless the values are
    /// finite, nonnegative and nonincreasing.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "singular value {i} = {v} is negative or not finite"
                )));
            }
            if i > 0 && values[i - 1] < *v {
                return Err(Error::InvalidInput(format!(
                    "singular values not nonincreasing at index {i}: {} < {v}",
                    values[i - 1]
                )));
            }
        }
        Ok(Spectrum(values))
    }

    /// Sorts the given nonnegative values into nonincreasing order.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
        Spectrum::new(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Sum of the values strictly after the first `r`.
    pub fn tail_sum(&self, r: usize) -> f64 {
        self.0[r.min(self.len())..].iter().sum()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// Numerical rank at the shared relative threshold.
    pub fn numerical_rank(&self) -> usize {
        if self.0.is_empty() {
            return 0;
        }
        let cutoff = RANK_REL_TOL * self.0[0];
        self.0.iter().filter(|&&v| v > cutoff).count()
    }
}

impl std::ops::Index<usize> for Spectrum {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Full SVD `X = U * diag(spectrum) * V^T` with orthonormal columns in `U`
/// and `V` and the spectrum sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Mat,
    pub spectrum: Spectrum,
    pub v: Mat,
}

impl SvdFactors {
    /// Reassembles `U * diag(s) * V^T` for an arbitrary replacement
    /// spectrum `s` (same length as the stored one).
    pub fn recompose_with(&self, values: &[f64]) -> Mat {
        assert_eq!(values.len(), self.spectrum.len());
        let k = values.len();
        let mut scaled = self.u.clone();
        for j in 0..k {
            scaled.column_mut(j).scale_mut(values[j]);
        }
        &scaled * self.v.transpose()
    }

    /// Reassembles the original matrix.
    pub fn recompose(&self) -> Mat {
        self.recompose_with(self.spectrum.values())
    }
}

fn check_finite(x: &Mat) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "matrix contains NaN or infinite entries".into(),
        ))
    }
}

/// Full SVD with min(m, n) singular triplets, spectrum sorted nonincreasing.
///
/// Deterministic for a fixed input; no sign convention is imposed on the
/// factor columns beyond `U D V^T` reconstructing the input.
pub fn svd(x: &Mat) -> Result<SvdFactors> {
    check_finite(x)?;
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    // nalgebra sorts descending already; clamp the occasional -0.0.
    let values: Vec<f64> = svd.singular_values.iter().map(|v| v.max(0.0)).collect();
    let spectrum = Spectrum::new(values)?;
    Ok(SvdFactors {
        u,
        spectrum,
        v: v_t.transpose(),
    })
}

/// Singular values only, sorted nonincreasing.
pub fn singular_values(x: &Mat) -> Result<Spectrum> {
    check_finite(x)?;
    let values: Vec<f64> = x
        .clone()
        .singular_values()
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    Spectrum::from_unsorted(values)
}

/// Numerical rank of a matrix at the shared relative threshold.
pub fn numerical_rank(x: &Mat) -> Result<usize> {
    Ok(singular_values(x)?.numerical_rank())
}

/// Best rank-`r` approximation in Frobenius norm: keep the `r` largest
/// singular values, zero the rest.
pub fn truncate_rank(x: &Mat, r: usize) -> Result<Mat> {
    let max_rank = x.nrows().min(x.ncols());
    if r > max_rank {
        return Err(Error::InvalidInput(format!(
            "truncation rank {r} exceeds min(rows, cols) = {max_rank}"
        )));
    }
    if r == 0 {
        return Ok(Mat::zeros(x.nrows(), x.ncols()));
    }
    let factors = svd(x)?;
    let mut values = factors.spectrum.values().to_vec();
    for v in values.iter_mut().skip(r) {
        *v = 0.0;
    }
    Ok(factors.recompose_with(&values))
}

/// Column-stacks a matrix into a vector (column-major vectorization).
pub fn vectorize(x: &Mat) -> Vec64 {
    Vec64::from_column_slice(x.as_slice())
}

/// Inverse of [`vectorize`]: reshapes a vector into an `rows x cols` matrix
/// by filling columns.
pub fn unvectorize(v: &Vec64, rows: usize, cols: usize) -> Result<Mat> {
    if v.len() != rows * cols {
        return Err(Error::ShapeMismatch(format!(
            "vector of length {} cannot fill a {rows}x{cols} matrix",
            v.len()
        )));
    }
    Ok(Mat::from_column_slice(rows, cols, v.as_slice()))
}
