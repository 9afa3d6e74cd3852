//! Non-rigid structure from motion: trajectory reshaping, camera blocks,
//! the projection operator's null-space family, the temporal difference
//! prior, and a synthetic scene generator.
//!
//! A scene over `F` frames and `m` tracked points is a `3F x m` matrix `X`
//! whose frame blocks hold the x/y/z coordinate rows. Its frame-major
//! reshaping `X^sharp` is `F x 3m` with row `i = (X_i | Y_i | Z_i)`; the
//! rank of `X^sharp` counts the shape-basis elements needed to express the
//! motion. Orthographic cameras observe `M = R X` with block-diagonal `R`
//! made of `2 x 3` blocks with orthonormal rows.

use nalgebra::{Matrix2x3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::MeasurementOperator;
use crate::spectral::{Mat, Vec64};

/// Reshapes a stacked `3F x m` trajectory matrix into its frame-major
/// `F x 3m` form.
pub fn sharp(x: &Mat) -> Result<Mat> {
    if x.nrows() % 3 != 0 || x.nrows() == 0 {
        return Err(Error::ShapeMismatch(format!(
            "stacked trajectory matrix must have 3F rows, got {}",
            x.nrows()
        )));
    }
    let frames = x.nrows() / 3;
    let m = x.ncols();
    let mut out = Mat::zeros(frames, 3 * m);
    for f in 0..frames {
        for c in 0..3 {
            for j in 0..m {
                out[(f, c * m + j)] = x[(3 * f + c, j)];
            }
        }
    }
    Ok(out)
}

/// Inverse of [`sharp`]: `F x 3m` back to `3F x m`.
pub fn unsharp(x_sharp: &Mat) -> Result<Mat> {
    if x_sharp.ncols() % 3 != 0 || x_sharp.ncols() == 0 {
        return Err(Error::ShapeMismatch(format!(
            "frame-major matrix must have 3m columns, got {}",
            x_sharp.ncols()
        )));
    }
    let frames = x_sharp.nrows();
    let m = x_sharp.ncols() / 3;
    let mut out = Mat::zeros(3 * frames, m);
    for f in 0..frames {
        for c in 0..3 {
            for j in 0..m {
                out[(3 * f + c, j)] = x_sharp[(f, c * m + j)];
            }
        }
    }
    Ok(out)
}

/// Builds the orthographic projection operator acting on `X^sharp`.
pub fn build_nrsfm_operator(rotations: &[Matrix2x3<f64>], points: usize) -> Result<MeasurementOperator> {
    for (i, rot) in rotations.iter().enumerate() {
        check_rotation(rot, i, 1e-10)?;
    }
    MeasurementOperator::nrsfm(rotations.to_vec(), points)
}

fn check_rotation(rot: &Matrix2x3<f64>, frame: usize, tol: f64) -> Result<()> {
    let gram = rot * rot.transpose();
    let defect = (gram - nalgebra::Matrix2::identity()).norm();
    if defect > tol {
        return Err(Error::Ingestion(format!(
            "camera block at frame {frame} has non-orthonormal rows (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Unit vector orthogonal to both rows of a camera block.
pub fn camera_null_direction(rot: &Matrix2x3<f64>) -> Vector3<f64> {
    let r1 = Vector3::new(rot[(0, 0)], rot[(0, 1)], rot[(0, 2)]);
    let r2 = Vector3::new(rot[(1, 0)], rot[(1, 1)], rot[(1, 2)]);
    r1.cross(&r2)
}

/// Builds the null-space family element `N(C)` in frame-major form: frame
/// `i` contributes the rank-1 block `N_i * C_i` where `N_i` is the camera
/// null direction and `C_i` is the given `1 x m` row. The result vanishes
/// under the projection operator.
pub fn nullspace_element(rotations: &[Matrix2x3<f64>], coeffs: &Mat) -> Result<Mat> {
    let frames = rotations.len();
    if coeffs.nrows() != frames {
        return Err(Error::ShapeMismatch(format!(
            "coefficient matrix has {} rows, expected one per frame ({frames})",
            coeffs.nrows()
        )));
    }
    let m = coeffs.ncols();
    let mut out = Mat::zeros(frames, 3 * m);
    for (i, rot) in rotations.iter().enumerate() {
        let n = camera_null_direction(rot);
        for c in 0..3 {
            for j in 0..m {
                out[(i, c * m + j)] = n[c] * coeffs[(i, j)];
            }
        }
    }
    Ok(out)
}

/// First-order difference matrix `D : R^F -> R^{F-1}`; applied from the
/// left it differences the rows of `X^sharp`. Its null space is the
/// frame-constant (rigid) motions.
pub fn derivative_matrix(frames: usize) -> Result<Mat> {
    if frames < 2 {
        return Err(Error::InvalidInput(
            "difference operator needs at least two frames".into(),
        ));
    }
    let mut d = Mat::zeros(frames - 1, frames);
    for i in 0..frames - 1 {
        d[(i, i)] = -1.0;
        d[(i, i + 1)] = 1.0;
    }
    Ok(d)
}

/// A tracked scene: cameras, 2D observations, optional 3D ground truth.
#[derive(Debug, Clone)]
pub struct NrsfmDataset {
    pub frames: usize,
    pub points: usize,
    pub rotations: Vec<Matrix2x3<f64>>,
    /// `2F x m` image measurements.
    pub observations: Mat,
    /// `3F x m` stacked trajectories, when known.
    pub ground_truth: Option<Mat>,
}

impl NrsfmDataset {
    /// Projection operator for this dataset's cameras.
    pub fn operator(&self) -> Result<MeasurementOperator> {
        build_nrsfm_operator(&self.rotations, self.points)
    }

    /// Observation vector (column-stacked 2D tracks).
    pub fn observation_vector(&self) -> Vec64 {
        crate::spectral::vectorize(&self.observations)
    }

    /// Ground truth in frame-major form, when present.
    pub fn ground_truth_sharp(&self) -> Result<Option<Mat>> {
        self.ground_truth.as_ref().map(sharp).transpose()
    }
}

/// Projects a stacked scene through per-frame camera blocks: `M = R X`.
pub fn project(rotations: &[Matrix2x3<f64>], stacked: &Mat) -> Result<Mat> {
    if stacked.nrows() != 3 * rotations.len() {
        return Err(Error::ShapeMismatch(format!(
            "scene has {} rows, expected {}",
            stacked.nrows(),
            3 * rotations.len()
        )));
    }
    let m = stacked.ncols();
    let mut out = Mat::zeros(2 * rotations.len(), m);
    for (i, rot) in rotations.iter().enumerate() {
        out.rows_mut(2 * i, 2)
            .copy_from(&(rot * stacked.rows(3 * i, 3)));
    }
    Ok(out)
}

/// Draws a random camera block by orthonormalizing two Gaussian vectors.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix2x3<f64> {
    loop {
        let a: Vector3<f64> = Vector3::from_fn(|_, _| StandardNormal.sample(rng));
        let b: Vector3<f64> = Vector3::from_fn(|_, _| StandardNormal.sample(rng));
        let na = a.norm();
        if na < 1e-8 {
            continue;
        }
        let r1 = a / na;
        let mut r2 = b - r1 * r1.dot(&b);
        let n2 = r2.norm();
        if n2 < 1e-8 {
            continue;
        }
        r2 /= n2;
        return Matrix2x3::from_rows(&[r1.transpose(), r2.transpose()]);
    }
}

/// Generates a synthetic scene whose frame-major form has rank exactly
/// `rank`: `X^sharp = C * B` with a Gaussian shape basis `B` and
/// temporally coherent Gaussian mixing coefficients `C` (an integrated
/// white process, so consecutive frames deform smoothly as tracked
/// scenes do), random orthographic cameras, and Gaussian image noise of
/// standard deviation `sigma`.
pub fn gen_synthetic_nrsfm(
    frames: usize,
    points: usize,
    rank: usize,
    sigma: f64,
    seed: u64,
) -> Result<NrsfmDataset> {
    if rank > frames.min(3 * points) {
        return Err(Error::InvalidInput(format!(
            "rank {rank} exceeds min(F, 3m) = {}",
            frames.min(3 * points)
        )));
    }
    if sigma < 0.0 {
        return Err(Error::InvalidInput("noise level must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotations: Vec<_> = (0..frames).map(|_| random_rotation(&mut rng)).collect();
    let mut coeffs = Mat::from_fn(frames, rank, |_, _| StandardNormal.sample(&mut rng));
    for i in 1..frames {
        for k in 0..rank {
            coeffs[(i, k)] += coeffs[(i - 1, k)];
        }
    }
    let basis = Mat::from_fn(rank, 3 * points, |_, _| StandardNormal.sample(&mut rng));
    let x_sharp = &coeffs * &basis;
    let stacked = unsharp(&x_sharp)?;
    let mut observations = project(&rotations, &stacked)?;
    if sigma > 0.0 {
        for v in observations.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * e;
        }
    }
    Ok(NrsfmDataset {
        frames,
        points,
        rotations,
        observations,
        ground_truth: Some(stacked),
    })
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    #[serde(rename = "F")]
    frames: usize,
    m: usize,
    /// One entry per frame: the 2x3 camera block, row-major.
    rotations: Vec<Vec<f64>>,
    /// `2F x m` matrix, row-major.
    observations: Vec<f64>,
    /// `3F x m` matrix, row-major.
    #[serde(skip_serializing_if = "Option::is_none")]
    ground_truth: Option<Vec<f64>>,
}

fn mat_to_row_major(m: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn mat_from_row_major(data: &[f64], rows: usize, cols: usize, what: &str) -> Result<Mat> {
    if data.len() != rows * cols {
        return Err(Error::Ingestion(format!(
            "{what} has {} entries, expected {rows}x{cols} = {}",
            data.len(),
            rows * cols
        )));
    }
    Ok(Mat::from_row_slice(rows, cols, data))
}

/// Writes a dataset as JSON. Decimal round-trip preserves the values to
/// full double precision.
pub fn save_nrsfm(path: &std::path::Path, dataset: &NrsfmDataset) -> Result<()> {
    let file = DatasetFile {
        frames: dataset.frames,
        m: dataset.points,
        rotations: dataset
            .rotations
            .iter()
            .map(|r| vec![r[(0, 0)], r[(0, 1)], r[(0, 2)], r[(1, 0)], r[(1, 1)], r[(1, 2)]])
            .collect(),
        observations: mat_to_row_major(&dataset.observations),
        ground_truth: dataset.ground_truth.as_ref().map(mat_to_row_major),
    };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Loads and validates a dataset written by [`save_nrsfm`] (or converted
/// from external sources into that schema). Camera blocks are checked for
/// orthonormal rows to a tolerance of 1e-6; violations report the frame.
pub fn load_nrsfm(path: &std::path::Path) -> Result<NrsfmDataset> {
    let text = std::fs::read_to_string(path)?;
    let file: DatasetFile = serde_json::from_str(&text)?;
    if file.frames == 0 || file.m == 0 {
        return Err(Error::Ingestion("dataset must have F >= 1 and m >= 1".into()));
    }
    if file.rotations.len() != file.frames {
        return Err(Error::Ingestion(format!(
            "dataset lists {} camera blocks, expected one per frame ({})",
            file.rotations.len(),
            file.frames
        )));
    }
    let mut rotations = Vec::with_capacity(file.frames);
    for (i, r) in file.rotations.iter().enumerate() {
        if r.len() != 6 {
            return Err(Error::Ingestion(format!(
                "camera block at frame {i} has {} entries, expected 6",
                r.len()
            )));
        }
        let rot = Matrix2x3::new(r[0], r[1], r[2], r[3], r[4], r[5]);
        check_rotation(&rot, i, 1e-6)?;
        rotations.push(rot);
    }
    let observations =
        mat_from_row_major(&file.observations, 2 * file.frames, file.m, "observations")?;
    let ground_truth = file
        .ground_truth
        .as_deref()
        .map(|g| mat_from_row_major(g, 3 * file.frames, file.m, "ground_truth"))
        .transpose()?;
    Ok(NrsfmDataset {
        frames: file.frames,
        points: file.m,
        rotations,
        observations,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{numerical_rank, singular_values};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn sharp_single_frame() {
        let x = Mat::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = sharp(&x).unwrap();
        assert_eq!(s.nrows(), 1);
        let expected = Mat::from_row_slice(1, 6, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(s, expected);
    }

    #[test]
    fn sharp_round_trip() {
        let mut r = rng(0);
        let x = random_matrix(12, 7, &mut r); // F = 4
        let back = unsharp(&sharp(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn shape_basis_scene_has_low_sharp_rank() {
        let mut r = rng(1);
        let coeffs = random_matrix(6, 2, &mut r);
        let basis = random_matrix(2, 15, &mut r);
        let x_sharp = coeffs * basis;
        assert_eq!(numerical_rank(&x_sharp).unwrap(), 2);
        // The stacked form typically has higher rank.
        let stacked = unsharp(&x_sharp).unwrap();
        assert!(numerical_rank(&stacked).unwrap() >= 2);
    }

    #[test]
    fn nullspace_element_vanishes_under_projection() {
        let mut r = rng(2);
        let rotations: Vec<_> = (0..5).map(|_| random_rotation(&mut r)).collect();
        let coeffs = random_matrix(5, 10, &mut r);
        let n = nullspace_element(&rotations, &coeffs).unwrap();
        let op = build_nrsfm_operator(&rotations, 10).unwrap();
        let image = op.apply(&n).unwrap();
        assert!(image.norm() <= 1e-10 * n.norm());
    }

    #[test]
    fn nullspace_single_row_is_rank_one() {
        let mut r = rng(3);
        let rotations: Vec<_> = (0..4).map(|_| random_rotation(&mut r)).collect();
        let mut coeffs = Mat::zeros(4, 6);
        for j in 0..6 {
            coeffs[(0, j)] = StandardNormal.sample(&mut r);
        }
        let n = nullspace_element(&rotations, &coeffs).unwrap();
        assert_eq!(numerical_rank(&n).unwrap(), 1);
        let op = build_nrsfm_operator(&rotations, 6).unwrap();
        assert!(op.apply(&n).unwrap().norm() <= 1e-10 * n.norm());
    }

    #[test]
    fn nullspace_zero_coeffs() {
        let mut r = rng(4);
        let rotations: Vec<_> = (0..3).map(|_| random_rotation(&mut r)).collect();
        let n = nullspace_element(&rotations, &Mat::zeros(3, 5)).unwrap();
        assert_eq!(n.norm(), 0.0);
    }

    #[test]
    fn derivative_kills_constant_frames() {
        let mut r = rng(5);
        let row = random_matrix(1, 9, &mut r);
        let mut x_sharp = Mat::zeros(6, 9);
        for i in 0..6 {
            x_sharp.row_mut(i).copy_from(&row.row(0));
        }
        let d = derivative_matrix(6).unwrap();
        assert_eq!((d * x_sharp).norm(), 0.0);
    }

    #[test]
    fn derivative_two_frames_and_norm_bound() {
        let d = derivative_matrix(2).unwrap();
        assert_eq!(d.nrows(), 1);
        assert_eq!(d[(0, 0)], -1.0);
        assert_eq!(d[(0, 1)], 1.0);
        for frames in [2, 5, 12] {
            let d = derivative_matrix(frames).unwrap();
            let top = singular_values(&d).unwrap()[0];
            assert!(top <= 2.0 + 1e-12, "||D|| = {top}");
        }
    }

    #[test]
    fn derivative_does_not_kill_nonconstant_nullspace_elements() {
        let mut r = rng(6);
        for _ in 0..20 {
            let rotations: Vec<_> = (0..5).map(|_| random_rotation(&mut r)).collect();
            let coeffs = random_matrix(5, 8, &mut r);
            let n = nullspace_element(&rotations, &coeffs).unwrap();
            let d = derivative_matrix(5).unwrap();
            assert!((d * &n).norm() > 1e-8);
        }
    }

    #[test]
    fn synthetic_scene_noiseless_projects_exactly() {
        let ds = gen_synthetic_nrsfm(8, 11, 3, 0.0, 42).unwrap();
        let gt = ds.ground_truth.as_ref().unwrap();
        let projected = project(&ds.rotations, gt).unwrap();
        assert_eq!(projected, ds.observations);
        let x_sharp = ds.ground_truth_sharp().unwrap().unwrap();
        assert_eq!(numerical_rank(&x_sharp).unwrap(), 3);
        for rot in &ds.rotations {
            let defect = (rot * rot.transpose() - nalgebra::Matrix2::identity()).norm();
            assert!(defect < 1e-10);
        }
    }

    #[test]
    fn synthetic_scene_deterministic() {
        let a = gen_synthetic_nrsfm(5, 6, 2, 0.3, 7).unwrap();
        let b = gen_synthetic_nrsfm(5, 6, 2, 0.3, 7).unwrap();
        assert_eq!(a.observations, b.observations);
        assert_eq!(a.ground_truth, b.ground_truth);
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let ds = gen_synthetic_nrsfm(4, 5, 2, 0.1, 9).unwrap();
        save_nrsfm(&path, &ds).unwrap();
        let loaded = load_nrsfm(&path).unwrap();
        assert_eq!(loaded.observations, ds.observations);
        assert_eq!(loaded.ground_truth.unwrap(), ds.ground_truth.unwrap());
        assert_eq!(loaded.rotations, ds.rotations);
    }

    #[test]
    fn dataset_missing_ground_truth_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let mut ds = gen_synthetic_nrsfm(4, 5, 2, 0.1, 10).unwrap();
        ds.ground_truth = None;
        save_nrsfm(&path, &ds).unwrap();
        let loaded = load_nrsfm(&path).unwrap();
        assert!(loaded.ground_truth.is_none());
    }

    #[test]
    fn dataset_bad_rotation_cites_frame() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let mut ds = gen_synthetic_nrsfm(6, 5, 2, 0.0, 11).unwrap();
        ds.rotations[3][(0, 0)] += 0.5;
        save_nrsfm(&path, &ds).unwrap();
        let err = load_nrsfm(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frame 3"), "message was: {msg}");
    }
}
