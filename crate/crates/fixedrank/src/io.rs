//! File formats: headerless CSV matrices, a JSON matrix container,
//! problem bundles, solver trace JSON lines, and certificates.
//!
//! Numbers are written with the shortest decimal representation that
//! round-trips, so reading a file back reproduces the doubles exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{MeasurementOperator, ProblemInstance};
use crate::problems::SyntheticSpec;
use crate::solvers::SolverTrace;
use crate::spectral::{Mat, Vec64};

/// Writes a matrix as headerless CSV, one line per row.
pub fn write_matrix_csv(path: &Path, x: &Mat) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..x.nrows() {
        let row: Vec<String> = (0..x.ncols()).map(|j| x[(i, j)].to_string()).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headerless CSV matrix.
pub fn read_matrix_csv(path: &Path) -> Result<Mat> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: Vec<f64> = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad numeric field {field:?} in {path:?}")))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "ragged CSV matrix in {path:?}: row lengths {} and {}",
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse(format!("empty CSV matrix in {path:?}")));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

/// JSON matrix container `{rows, cols, data}` with row-major data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(x: &Mat) -> Self {
        let mut data = Vec::with_capacity(x.nrows() * x.ncols());
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                data.push(x[(i, j)]);
            }
        }
        MatrixJson {
            rows: x.nrows(),
            cols: x.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Parse("matrix container with zero dimension".into()));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Parse(format!(
                "matrix container data length {} does not match {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(Mat::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// On-disk description of a generated problem: the generating spec, a
/// file reference for the dense operator, the observations inline, and
/// an optional ground-truth file reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemBundle {
    pub spec: SyntheticSpec,
    pub operator_file: String,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_gt_file: Option<String>,
}

/// Writes a realized problem to `dir` as `problem.json` plus CSV files
/// for the operator and, when known, the ground truth. Returns the
/// bundle path.
pub fn save_problem(dir: &Path, spec: &SyntheticSpec, problem: &ProblemInstance) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let matrix = match &problem.operator {
        MeasurementOperator::Dense { matrix, .. } => matrix,
        _ => {
            return Err(Error::UnsupportedOperator(
                "problem bundles store dense operators only".into(),
            ))
        }
    };
    write_matrix_csv(&dir.join("operator.csv"), matrix)?;
    let x_gt_file = match &problem.ground_truth {
        Some(gt) => {
            write_matrix_csv(&dir.join("x_gt.csv"), gt)?;
            Some("x_gt.csv".to_string())
        }
        None => None,
    };
    let bundle = ProblemBundle {
        spec: spec.clone(),
        operator_file: "operator.csv".to_string(),
        b: problem.observations.iter().copied().collect(),
        x_gt_file,
    };
    let path = dir.join("problem.json");
    std::fs::write(&path, serde_json::to_string_pretty(&bundle)?)?;
    Ok(path)
}

/// Loads a problem bundle; file references resolve relative to the
/// bundle's directory.
pub fn load_problem(bundle_path: &Path) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(bundle_path)?;
    let bundle: ProblemBundle = serde_json::from_str(&text)?;
    bundle.spec.validate()?;
    let dir = bundle_path.parent().unwrap_or(Path::new("."));
    let matrix = read_matrix_csv(&dir.join(&bundle.operator_file))?;
    if matrix.nrows() != bundle.spec.p || matrix.ncols() != bundle.spec.m * bundle.spec.n {
        return Err(Error::Parse(format!(
            "operator file is {}x{}, spec requires {}x{}",
            matrix.nrows(),
            matrix.ncols(),
            bundle.spec.p,
            bundle.spec.m * bundle.spec.n
        )));
    }
    let operator = MeasurementOperator::dense(matrix, bundle.spec.m, bundle.spec.n)?;
    let observations = Vec64::from_vec(bundle.b.clone());
    let mut problem = ProblemInstance::new(operator, observations, bundle.spec.rank.max(1))?;
    if let Some(gt_file) = &bundle.x_gt_file {
        let gt = read_matrix_csv(&dir.join(gt_file))?;
        if gt.nrows() != bundle.spec.m || gt.ncols() != bundle.spec.n {
            return Err(Error::Parse(format!(
                "ground truth file is {}x{}, spec requires {}x{}",
                gt.nrows(),
                gt.ncols(),
                bundle.spec.m,
                bundle.spec.n
            )));
        }
        problem = problem.with_ground_truth(gt);
    }
    if let Some(delta) = bundle.spec.delta {
        problem = problem.with_delta(delta);
    }
    Ok(problem)
}

/// One solver iteration for the JSON-lines trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub tau: f64,
    pub f: f64,
    pub accepted: bool,
}

/// Writes one JSON object per iteration: `{k, tau, f, accepted}` where
/// `f` is the objective after the accept/reject decision.
pub fn write_trace_jsonl(path: &Path, trace: &SolverTrace) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let per_iter = trace.objective_at_each_iteration();
    for k in 0..trace.iterations {
        let record = TraceRecord {
            k,
            tau: trace.taus[k],
            f: per_iter[k],
            accepted: trace.accepted[k],
        };
        serde_json::to_writer(&mut file, &record)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}
