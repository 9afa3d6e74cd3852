//! Batch experiment harnesses: the noise sweep comparing the rank-aware
//! solver against the nuclear baseline on synthetic instances, and the
//! rank/regularization sweep on non-rigid structure-from-motion scenes.
//!
//! Each instance is an independent pure computation; instances fan out
//! across worker threads and aggregate in index order, so every emitted
//! row is a deterministic function of (config, seed).

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nrsfm::{gen_synthetic_nrsfm, load_nrsfm, NrsfmDataset};
use crate::operator::{MeasurementOperator, ProblemInstance};
use crate::problems::SyntheticSpec;
use crate::solvers::{bisect_mu, gist_solve, nuclear_solve_from, SolverConfig};
use crate::spectral::{numerical_rank, Mat, Vec64};

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite stats"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Configuration of the synthetic noise sweep. The default reproduces
/// the reference experiment: a square 400x400 operator with defect 0.2
/// on 20x20 rank-5 ground truths, 30 noise levels in [0, 1], 50
/// instances per level.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSweepConfig {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    /// Isometry defect for the square ensemble; set to `null` to use the
    /// Gaussian `N(0, 1/p)` ensemble with `p` measurements instead.
    pub delta: Option<f64>,
    pub p: usize,
    /// Explicit noise grid; when absent, `sigma_count` even steps over
    /// `[0, sigma_max]`.
    pub sigmas: Option<Vec<f64>>,
    pub sigma_count: usize,
    pub sigma_max: f64,
    pub instances: usize,
    pub seed: u64,
    /// Run the nuclear baseline with mu-bisection alongside the
    /// rank-aware solver.
    pub run_nuclear: bool,
    pub mu_hi: f64,
    pub max_bisect: usize,
    pub max_iters: usize,
}

impl Default for NoiseSweepConfig {
    fn default() -> Self {
        NoiseSweepConfig {
            m: 20,
            n: 20,
            rank: 5,
            delta: Some(0.2),
            p: 400,
            sigmas: None,
            sigma_count: 30,
            sigma_max: 1.0,
            instances: 50,
            seed: 0,
            run_nuclear: true,
            mu_hi: 64.0,
            max_bisect: 20,
            max_iters: 5000,
        }
    }
}

impl NoiseSweepConfig {
    pub fn sigma_grid(&self) -> Vec<f64> {
        if let Some(list) = &self.sigmas {
            return list.clone();
        }
        let count = self.sigma_count.max(1);
        if count == 1 {
            return vec![0.0];
        }
        (0..count)
            .map(|i| self.sigma_max * i as f64 / (count - 1) as f64)
            .collect()
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::InvalidInput("instances must be >= 1".into()));
        }
        if self.rank == 0 || self.rank >= self.m.min(self.n) {
            return Err(Error::InvalidInput(format!(
                "sweep rank {} must satisfy 1 <= rank < min(m, n)",
                self.rank
            )));
        }
        if self.delta.is_some() && self.p != self.m * self.n {
            return Err(Error::InvalidInput(
                "square ensemble requires p = m*n".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregated results at one noise level. Means and medians are both
/// reported since either aggregate is a reasonable summary of the
/// per-instance fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sigma: f64,
    pub fit_rr_mean: f64,
    pub fit_rr_median: f64,
    pub fit_nuclear_mean: Option<f64>,
    pub fit_nuclear_median: Option<f64>,
    pub gt_dist_rr_mean: f64,
    pub gt_dist_rr_median: f64,
    pub gt_dist_nuclear_mean: Option<f64>,
    pub gt_dist_nuclear_median: Option<f64>,
    pub certified_fraction: f64,
    pub instances: usize,
}

struct InstanceOutcome {
    fit_rr: f64,
    gt_dist_rr: f64,
    certified: bool,
    fit_nuclear: Option<f64>,
    gt_dist_nuclear: Option<f64>,
}

fn run_instance(config: &NoiseSweepConfig, sigma: f64, seed: u64) -> Result<InstanceOutcome> {
    let spec = SyntheticSpec {
        m: config.m,
        n: config.n,
        p: config.p,
        rank: config.rank,
        delta: config.delta,
        sigma,
        seed,
    };
    let problem = spec.realize()?;
    let solver = config.solver_config();
    let gt = problem.ground_truth.clone().expect("synthetic instances carry ground truth");

    let (x_rr, trace) = gist_solve(&problem, &solver)?;
    let fit_rr = problem.fit(&x_rr)?;
    let gt_dist_rr = (&x_rr - &gt).norm();
    let certified = trace.certificate.map(|c| c.certified).unwrap_or(false);

    let (fit_nuclear, gt_dist_nuclear) = if config.run_nuclear {
        let r = config.rank;
        // Grow the bracket until the nuclear path reaches the target rank.
        let mut mu_hi = config.mu_hi;
        let mut ok = false;
        for _ in 0..24 {
            let (x, _) = crate::solvers::nuclear_solve(&problem, mu_hi, &solver)?;
            if numerical_rank(&x)? <= r {
                ok = true;
                break;
            }
            mu_hi *= 2.0;
        }
        if !ok {
            return Err(Error::Bracket(format!(
                "no nuclear weight up to {mu_hi} reached rank <= {r}"
            )));
        }
        let (_, x_nuc) = bisect_mu(&problem, r, 0.0, mu_hi, config.max_bisect, &solver)?;
        (
            Some(problem.fit(&x_nuc)?),
            Some((&x_nuc - &gt).norm()),
        )
    } else {
        (None, None)
    };

    Ok(InstanceOutcome {
        fit_rr,
        gt_dist_rr,
        certified,
        fit_nuclear,
        gt_dist_nuclear,
    })
}

/// Runs the noise sweep and returns one aggregated record per noise
/// level. Instance `j` of level `i` uses seed
/// `config.seed + i * instances + j`.
pub fn run_noise_sweep(config: &NoiseSweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let sigmas = config.sigma_grid();
    let mut records = Vec::with_capacity(sigmas.len());
    for (si, &sigma) in sigmas.iter().enumerate() {
        let outcomes: Vec<Result<InstanceOutcome>> = (0..config.instances)
            .into_par_iter()
            .map(|j| {
                let seed = config
                    .seed
                    .wrapping_add((si * config.instances + j) as u64);
                run_instance(config, sigma, seed)
            })
            .collect();
        let mut fits_rr = Vec::new();
        let mut dists_rr = Vec::new();
        let mut fits_nuc = Vec::new();
        let mut dists_nuc = Vec::new();
        let mut certified = 0usize;
        for outcome in outcomes {
            let o = outcome?;
            fits_rr.push(o.fit_rr);
            dists_rr.push(o.gt_dist_rr);
            if let Some(f) = o.fit_nuclear {
                fits_nuc.push(f);
            }
            if let Some(d) = o.gt_dist_nuclear {
                dists_nuc.push(d);
            }
            if o.certified {
                certified += 1;
            }
        }
        records.push(SweepRecord {
            sigma,
            fit_rr_mean: mean(&fits_rr),
            fit_rr_median: median(&fits_rr),
            fit_nuclear_mean: (!fits_nuc.is_empty()).then(|| mean(&fits_nuc)),
            fit_nuclear_median: (!fits_nuc.is_empty()).then(|| median(&fits_nuc)),
            gt_dist_rr_mean: mean(&dists_rr),
            gt_dist_rr_median: median(&dists_rr),
            gt_dist_nuclear_mean: (!dists_nuc.is_empty()).then(|| mean(&dists_nuc)),
            gt_dist_nuclear_median: (!dists_nuc.is_empty()).then(|| median(&dists_nuc)),
            certified_fraction: certified as f64 / config.instances as f64,
            instances: config.instances,
        });
    }
    Ok(records)
}

/// Writes serializable records as CSV with a header row.
pub fn write_records_csv<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for record in records {
        w.serialize(record)?;
    }
    w.flush()?;
    Ok(())
}

/// Renders records to a CSV string (used for reproducibility checks).
pub fn records_to_csv_string<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for record in records {
        w.serialize(record)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Synthetic scene recipe for the structure-from-motion sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSceneSpec {
    pub frames: usize,
    pub points: usize,
    pub rank: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        SyntheticSceneSpec {
            frames: 20,
            points: 30,
            rank: 3,
            sigma: 0.05,
            seed: 0,
        }
    }
}

/// Which data terms to run: plain projections, projections plus the
/// temporal difference prior, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    Off,
    On,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NrsfmSweepConfig {
    /// Path to a dataset file; when absent a synthetic scene is generated.
    pub dataset: Option<PathBuf>,
    pub synthetic: SyntheticSceneSpec,
    pub target_ranks: Vec<usize>,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub mu_count: usize,
    pub prior: PriorMode,
    pub prior_weight: f64,
    pub max_iters: usize,
}

impl Default for NrsfmSweepConfig {
    fn default() -> Self {
        NrsfmSweepConfig {
            dataset: None,
            synthetic: SyntheticSceneSpec::default(),
            target_ranks: (1..=10).collect(),
            mu_lo: 1.0,
            mu_hi: 100.0,
            mu_count: 50,
            prior: PriorMode::Both,
            prior_weight: 1.0,
            max_iters: 5000,
        }
    }
}

impl NrsfmSweepConfig {
    /// Logarithmic grid with the endpoints placed exactly.
    pub fn mu_grid(&self) -> Vec<f64> {
        let count = self.mu_count.max(2);
        let (lo, hi) = (self.mu_lo, self.mu_hi);
        let mut grid: Vec<f64> = (0..count)
            .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
            .collect();
        grid[0] = lo;
        grid[count - 1] = hi;
        grid
    }

    fn modes(&self) -> Vec<bool> {
        match self.prior {
            PriorMode::Off => vec![false],
            PriorMode::On => vec![true],
            PriorMode::Both => vec![false, true],
        }
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            ..SolverConfig::default()
        }
    }
}

/// One rank-aware solve on a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NrsfmRankRecord {
    pub prior: bool,
    pub target_rank: usize,
    pub rank: usize,
    /// Data fit `||R X - M||_F` (prior term excluded).
    pub fit: f64,
    pub gt_dist: Option<f64>,
}

/// One nuclear solve on a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NrsfmMuRecord {
    pub prior: bool,
    pub mu: f64,
    pub rank: usize,
    pub fit: f64,
    pub gt_dist: Option<f64>,
}

/// Builds the problem in frame-major variables, optionally augmented
/// with the weighted difference prior.
pub fn nrsfm_problem(
    dataset: &NrsfmDataset,
    target_rank: usize,
    prior_weight: Option<f64>,
) -> Result<ProblemInstance> {
    let base = dataset.operator()?;
    let b = dataset.observation_vector();
    let (operator, observations) = match prior_weight {
        Some(w) => {
            let augmented = MeasurementOperator::augmented(base, w)?;
            let mut extended = Vec64::zeros(augmented.output_len());
            extended.rows_mut(0, b.len()).copy_from(&b);
            (augmented, extended)
        }
        None => (base, b),
    };
    let mut problem = ProblemInstance::new(operator, observations, target_rank)?;
    if let Some(gt_sharp) = dataset.ground_truth_sharp()? {
        problem = problem.with_ground_truth(gt_sharp);
    }
    Ok(problem)
}

fn scene_metrics(
    dataset: &NrsfmDataset,
    x_sharp: &Mat,
) -> Result<(usize, f64, Option<f64>)> {
    let rank = numerical_rank(x_sharp)?;
    let base = dataset.operator()?;
    let fit = (base.apply(x_sharp)? - dataset.observation_vector()).norm();
    let gt_dist = dataset
        .ground_truth_sharp()?
        .map(|gt| (x_sharp - gt).norm());
    Ok((rank, fit, gt_dist))
}

/// Runs the scene sweep: the rank-aware solver over the target ranks and
/// the nuclear baseline over the regularization grid, each with and/or
/// without the difference prior.
pub fn run_nrsfm_sweep(
    config: &NrsfmSweepConfig,
) -> Result<(Vec<NrsfmRankRecord>, Vec<NrsfmMuRecord>)> {
    let dataset = match &config.dataset {
        Some(path) => load_nrsfm(path)?,
        None => gen_synthetic_nrsfm(
            config.synthetic.frames,
            config.synthetic.points,
            config.synthetic.rank,
            config.synthetic.sigma,
            config.synthetic.seed,
        )?,
    };
    let solver = config.solver_config();
    let mu_grid = config.mu_grid();

    let mut rank_records = Vec::new();
    let mut mu_records = Vec::new();
    for with_prior in config.modes() {
        let weight = with_prior.then_some(config.prior_weight);

        let ranked: Vec<Result<NrsfmRankRecord>> = config
            .target_ranks
            .par_iter()
            .map(|&r| {
                let problem = nrsfm_problem(&dataset, r, weight)?;
                let (x, _) = gist_solve(&problem, &solver)?;
                let (rank, fit, gt_dist) = scene_metrics(&dataset, &x)?;
                Ok(NrsfmRankRecord {
                    prior: with_prior,
                    target_rank: r,
                    rank,
                    fit,
                    gt_dist,
                })
            })
            .collect();
        for record in ranked {
            rank_records.push(record?);
        }

        // Nuclear path: warm-start along the grid; rank budget is unused
        // by the baseline but the problem requires one.
        let problem = nrsfm_problem(&dataset, 1, weight)?;
        let mut warm = crate::solvers::default_init(&problem)?;
        for &mu in &mu_grid {
            let (x, _) = nuclear_solve_from(&problem, mu, &solver, warm.clone())?;
            let (rank, fit, gt_dist) = scene_metrics(&dataset, &x)?;
            mu_records.push(NrsfmMuRecord {
                prior: with_prior,
                mu,
                rank,
                fit,
                gt_dist,
            });
            warm = x;
        }
    }
    Ok((rank_records, mu_records))
}
