//! Linear measurement operators `A : R^{m x n} -> R^p` with adjoints.
//!
//! Three variants cover the problems in this crate:
//! * `Dense`: an explicit `p x (m*n)` matrix acting on column-stacked
//!   input (column-major vectorization, fixed so stored operators are
//!   portable);
//! * `NrsfmProjection`: per-frame orthographic projection of a stacked
//!   3D trajectory matrix, acting on its frame-major reshaping;
//! * `Augmented`: a base operator extended with weighted first-order row
//!   differences of the input, which folds a temporal smoothness prior
//!   into the data term.

use nalgebra::Matrix2x3;

use crate::error::{Error, Result};
use crate::nrsfm::{sharp, unsharp};
use crate::spectral::{singular_values, unvectorize, vectorize, Mat, Vec64};

/// Row-difference map: `(DX)_i = X_{i+1} - X_i`, shape `(rows-1) x cols`.
pub fn diff_rows(x: &Mat) -> Mat {
    let rows = x.nrows();
    let mut out = Mat::zeros(rows.saturating_sub(1), x.ncols());
    for i in 0..rows.saturating_sub(1) {
        for j in 0..x.ncols() {
            out[(i, j)] = x[(i + 1, j)] - x[(i, j)];
        }
    }
    out
}

/// Adjoint of [`diff_rows`]: maps `(rows-1) x cols` back to `rows x cols`.
pub fn diff_rows_adjoint(y: &Mat, rows: usize) -> Mat {
    let mut out = Mat::zeros(rows, y.ncols());
    for j in 0..y.ncols() {
        for i in 0..rows {
            let mut v = 0.0;
            if i >= 1 && i - 1 < y.nrows() {
                v += y[(i - 1, j)];
            }
            if i < y.nrows() {
                v -= y[(i, j)];
            }
            out[(i, j)] = v;
        }
    }
    out
}

/// A linear map from `m x n` matrices to `R^p` together with its adjoint.
#[derive(Debug, Clone)]
pub enum MeasurementOperator {
    /// Explicit matrix acting on the column-stacked input.
    Dense { matrix: Mat, rows: usize, cols: usize },
    /// Blockwise orthographic projection `X^sharp -> vec(R * X)` where the
    /// input is the `F x 3m` frame-major reshaping of a `3F x m` matrix and
    /// `R` is block diagonal with the `2 x 3` camera blocks.
    NrsfmProjection {
        rotations: Vec<Matrix2x3<f64>>,
        points: usize,
    },
    /// `X -> [base(X); weight * vec(diff_rows(X))]`.
    Augmented {
        base: Box<MeasurementOperator>,
        weight: f64,
    },
}

impl MeasurementOperator {
    pub fn dense(matrix: Mat, rows: usize, cols: usize) -> Result<Self> {
        if matrix.ncols() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "dense operator has {} columns, expected rows*cols = {}",
                matrix.ncols(),
                rows * cols
            )));
        }
        Ok(MeasurementOperator::Dense { matrix, rows, cols })
    }

    pub fn nrsfm(rotations: Vec<Matrix2x3<f64>>, points: usize) -> Result<Self> {
        if rotations.is_empty() || points == 0 {
            return Err(Error::InvalidInput(
                "projection operator needs at least one frame and one point".into(),
            ));
        }
        Ok(MeasurementOperator::NrsfmProjection { rotations, points })
    }

    pub fn augmented(base: MeasurementOperator, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidInput(format!(
                "augmentation weight must be finite and positive, got {weight}"
            )));
        }
        Ok(MeasurementOperator::Augmented {
            base: Box::new(base),
            weight,
        })
    }

    /// Shape `(m, n)` of matrices this operator accepts.
    pub fn input_shape(&self) -> (usize, usize) {
        match self {
            MeasurementOperator::Dense { rows, cols, .. } => (*rows, *cols),
            MeasurementOperator::NrsfmProjection { rotations, points } => {
                (rotations.len(), 3 * points)
            }
            MeasurementOperator::Augmented { base, .. } => base.input_shape(),
        }
    }

    /// Length of the measurement vector this operator produces.
    pub fn output_len(&self) -> usize {
        match self {
            MeasurementOperator::Dense { matrix, .. } => matrix.nrows(),
            MeasurementOperator::NrsfmProjection { rotations, points } => {
                2 * rotations.len() * points
            }
            MeasurementOperator::Augmented { base, .. } => {
                let (rows, cols) = base.input_shape();
                base.output_len() + (rows - 1) * cols
            }
        }
    }

    fn check_input(&self, x: &Mat) -> Result<()> {
        let (m, n) = self.input_shape();
        if x.nrows() != m || x.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "operator expects {m}x{n} input, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Applies the operator to a matrix.
    pub fn apply(&self, x: &Mat) -> Result<Vec64> {
        self.check_input(x)?;
        match self {
            MeasurementOperator::Dense { matrix, .. } => Ok(matrix * vectorize(x)),
            MeasurementOperator::NrsfmProjection { rotations, points } => {
                let stacked = unsharp(x)?;
                let mut projected = Mat::zeros(2 * rotations.len(), *points);
                for (i, rot) in rotations.iter().enumerate() {
                    let block = stacked.rows(3 * i, 3);
                    projected.rows_mut(2 * i, 2).copy_from(&(rot * block));
                }
                Ok(vectorize(&projected))
            }
            MeasurementOperator::Augmented { base, weight } => {
                let head = base.apply(x)?;
                let tail = vectorize(&diff_rows(x)) * *weight;
                let mut out = Vec64::zeros(head.len() + tail.len());
                out.rows_mut(0, head.len()).copy_from(&head);
                out.rows_mut(head.len(), tail.len()).copy_from(&tail);
                Ok(out)
            }
        }
    }

    /// Applies the adjoint map to a measurement vector.
    pub fn adjoint(&self, y: &Vec64) -> Result<Mat> {
        if y.len() != self.output_len() {
            return Err(Error::ShapeMismatch(format!(
                "operator adjoint expects length {}, got {}",
                self.output_len(),
                y.len()
            )));
        }
        match self {
            MeasurementOperator::Dense { matrix, rows, cols } => {
                unvectorize(&(matrix.transpose() * y), *rows, *cols)
            }
            MeasurementOperator::NrsfmProjection { rotations, points } => {
                let projected = unvectorize(y, 2 * rotations.len(), *points)?;
                let mut stacked = Mat::zeros(3 * rotations.len(), *points);
                for (i, rot) in rotations.iter().enumerate() {
                    let block = projected.rows(2 * i, 2);
                    stacked
                        .rows_mut(3 * i, 3)
                        .copy_from(&(rot.transpose() * block));
                }
                sharp(&stacked)
            }
            MeasurementOperator::Augmented { base, weight } => {
                let (rows, cols) = base.input_shape();
                let head = y.rows(0, base.output_len()).into_owned();
                let tail = y
                    .rows(base.output_len(), (rows - 1) * cols)
                    .into_owned();
                let diff = unvectorize(&tail, rows - 1, cols)?;
                Ok(base.adjoint(&head)? + diff_rows_adjoint(&diff, rows) * *weight)
            }
        }
    }

    /// Exact two-sided isometry defect for a square dense operator
    /// (`p = m*n`): `max(1 - sigma_min^2, sigma_max^2 - 1)`. With this
    /// constant the two-sided norm bounds hold for matrices of every rank
    /// and are tight on at least one side.
    pub fn exact_delta_square(&self) -> Result<f64> {
        match self {
            MeasurementOperator::Dense { matrix, rows, cols } => {
                if matrix.nrows() != rows * cols {
                    return Err(Error::UnsupportedOperator(format!(
                        "exact delta needs a square representation, got {}x{}",
                        matrix.nrows(),
                        rows * cols
                    )));
                }
                let s = singular_values(matrix)?;
                let smax = s[0];
                let smin = s[s.len() - 1];
                Ok((1.0 - smin * smin).max(smax * smax - 1.0))
            }
            _ => Err(Error::UnsupportedOperator(
                "exact delta is only defined for the dense square variant".into(),
            )),
        }
    }

    /// Power-iteration estimate of the operator norm `||A||`.
    pub fn norm_est(&self, iters: usize) -> f64 {
        let (m, n) = self.input_shape();
        let mut x = Mat::from_element(m, n, 1.0);
        x /= x.norm();
        let mut norm = 0.0;
        for _ in 0..iters.max(1) {
            let y = self.apply(&x).expect("shape fixed");
            norm = y.norm();
            if norm == 0.0 {
                return 0.0;
            }
            x = self.adjoint(&y).expect("shape fixed");
            let xn = x.norm();
            if xn == 0.0 {
                return 0.0;
            }
            x /= xn;
        }
        norm
    }
}

/// A recovery problem: operator, observations, and the target rank,
/// optionally carrying the ground truth and a known isometry constant.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub operator: MeasurementOperator,
    pub observations: Vec64,
    pub target_rank: usize,
    pub ground_truth: Option<Mat>,
    pub delta: Option<f64>,
}

impl ProblemInstance {
    pub fn new(
        operator: MeasurementOperator,
        observations: Vec64,
        target_rank: usize,
    ) -> Result<Self> {
        if observations.len() != operator.output_len() {
            return Err(Error::ShapeMismatch(format!(
                "observation length {} does not match operator output length {}",
                observations.len(),
                operator.output_len()
            )));
        }
        let (m, n) = operator.input_shape();
        if target_rank < 1 || target_rank > m.min(n) {
            return Err(Error::InvalidInput(format!(
                "target rank {target_rank} out of range for {m}x{n} variables"
            )));
        }
        Ok(ProblemInstance {
            operator,
            observations,
            target_rank,
            ground_truth: None,
            delta: None,
        })
    }

    pub fn with_ground_truth(mut self, x: Mat) -> Self {
        self.ground_truth = Some(x);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    /// Residual norm `||A(X) - b||`.
    pub fn fit(&self, x: &Mat) -> Result<f64> {
        Ok((self.operator.apply(x)? - &self.observations).norm())
    }
}
