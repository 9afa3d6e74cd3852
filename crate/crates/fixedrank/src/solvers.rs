//! Proximal-gradient solvers: the adaptive-weight scheme for the
//! rank-aware objective `R_r(X) + ||A X - b||^2`, the nuclear-norm
//! baseline `mu ||X||_* + ||A X - b||^2`, a bisection search for the
//! smallest `mu` reaching a target rank, and stationarity diagnostics.
//!
//! Each outer iteration linearizes the data term around the iterate,
//! `M_k = X_k - (1/tau_k) A*(A X_k - b)`, and applies the corresponding
//! proximal map with weight `tau_k`. Steps that decrease the objective
//! are accepted and relax `tau` towards 1; rejected steps tighten it.
//! Fixed points of the `tau = 1` map are exactly the stationary points
//! of the objective, which is what the final stationarity residual
//! measures.

use crate::error::{Error, Result};
use crate::operator::ProblemInstance;
use crate::regularizer::{certify, eval_rr_spectrum, prox_rr, Certificate};
use crate::spectral::{singular_values, svd, truncate_rank, Mat, Spectrum};

/// Step-weight schedule and termination knobs. Deterministic given inputs.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Initial prox weight.
    pub tau0: f64,
    /// Successful steps relax the weight: `tau <- (tau - 1)/divisor + 1`.
    pub decrease_divisor: f64,
    /// Rejected steps tighten it: `tau <- factor*(tau - 1) + 1`.
    pub increase_factor: f64,
    pub max_iters: usize,
    /// Relative step size below which an accepted step at `tau ~ 1` stops
    /// the iteration.
    pub step_tol: f64,
    /// Consecutive rejections tolerated before declaring a stall.
    pub stall_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau0: 5.0,
            decrease_divisor: 1.1,
            increase_factor: 1.5,
            max_iters: 5000,
            step_tol: 1e-10,
            stall_iters: 50,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau0.is_finite() && self.tau0 >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "tau0 must be >= 1, got {}",
                self.tau0
            )));
        }
        if !self.decrease_divisor.is_finite() || self.decrease_divisor <= 1.0 {
            return Err(Error::InvalidInput(format!(
                "decrease divisor must exceed 1, got {}",
                self.decrease_divisor
            )));
        }
        if !self.increase_factor.is_finite() || self.increase_factor <= 1.0 {
            return Err(Error::InvalidInput(format!(
                "increase factor must exceed 1, got {}",
                self.increase_factor
            )));
        }
        Ok(())
    }
}

/// Per-run history: accepted objective values, the weight sequence, the
/// accept/reject pattern, and the terminal diagnostics.
#[derive(Debug, Clone)]
pub struct SolverTrace {
    /// Objective at the initial point followed by each accepted value;
    /// strictly decreasing.
    pub objectives: Vec<f64>,
    /// Weight used at each iteration.
    pub taus: Vec<f64>,
    /// Whether each iteration's candidate was accepted.
    pub accepted: Vec<bool>,
    pub iterations: usize,
    /// `||X - truncate_rank(Z, r)||_F` at the returned iterate, with
    /// `Z = X - A*(A X - b)`.
    pub final_stationarity: f64,
    /// Spectral-gap certificate at the returned iterate, when the
    /// problem's isometry constant is known.
    pub certificate: Option<Certificate>,
}

impl SolverTrace {
    fn new(initial_objective: f64) -> Self {
        SolverTrace {
            objectives: vec![initial_objective],
            taus: Vec::new(),
            accepted: Vec::new(),
            iterations: 0,
            final_stationarity: f64::NAN,
            certificate: None,
        }
    }

    /// Objective value at each iteration after the accept/reject decision
    /// (rejected iterations repeat the previous value).
    pub fn objective_at_each_iteration(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.accepted.len());
        let mut idx = 0;
        for &acc in &self.accepted {
            if acc {
                idx += 1;
            }
            out.push(self.objectives[idx]);
        }
        out
    }
}

/// Objective of the rank-aware relaxation: `R_r(X) + ||A X - b||^2`.
pub fn objective_rr(x: &Mat, problem: &ProblemInstance) -> Result<f64> {
    let fit = problem.fit(x)?;
    Ok(crate::regularizer::eval_rr(x, problem.target_rank)? + fit * fit)
}

/// Linearization point `M = X - (1/tau) A*(A X - b)`.
pub fn gradient_step(x: &Mat, problem: &ProblemInstance, tau: f64) -> Result<Mat> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gradient step weight must be positive, got {tau}"
        )));
    }
    let residual = problem.operator.apply(x)? - &problem.observations;
    Ok(x - problem.operator.adjoint(&residual)? / tau)
}

/// Nuclear norm (sum of singular values).
pub fn nuclear_norm(x: &Mat) -> Result<f64> {
    Ok(singular_values(x)?.sum())
}

/// Objective of the nuclear baseline: `mu ||X||_* + ||A X - b||^2`.
pub fn objective_nuclear(x: &Mat, problem: &ProblemInstance, mu: f64) -> Result<f64> {
    let fit = problem.fit(x)?;
    Ok(mu * nuclear_norm(x)? + fit * fit)
}

/// Soft-thresholds the singular values by `mu / (2 tau)`, the proximal
/// map of `mu ||.||_*` with weight `tau`.
pub fn nuclear_prox(m: &Mat, mu: f64, tau: f64) -> Result<Mat> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "nuclear weight must be nonnegative, got {mu}"
        )));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "prox weight must be positive, got {tau}"
        )));
    }
    let factors = svd(m)?;
    let shift = mu / (2.0 * tau);
    let values: Vec<f64> = factors
        .spectrum
        .values()
        .iter()
        .map(|v| (v - shift).max(0.0))
        .collect();
    Ok(factors.recompose_with(&values))
}

/// Spectral initialization shared by both solvers: the best rank-`r`
/// approximation of `A* b`.
pub fn default_init(problem: &ProblemInstance) -> Result<Mat> {
    let back = problem.operator.adjoint(&problem.observations)?;
    truncate_rank(&back, problem.target_rank)
}

enum ProxKind {
    RankAware,
    Nuclear { mu: f64 },
}

struct ProxOutcome {
    candidate: Mat,
    spectrum: Spectrum,
}

fn apply_prox(kind: &ProxKind, m: &Mat, r: usize, tau: f64) -> Result<ProxOutcome> {
    match kind {
        ProxKind::RankAware => {
            let p = prox_rr(m, r, tau.max(1.0))?;
            Ok(ProxOutcome {
                candidate: p.minimizer,
                spectrum: p.spectrum,
            })
        }
        ProxKind::Nuclear { mu } => {
            let candidate = nuclear_prox(m, *mu, tau)?;
            let spectrum = singular_values(&candidate)?;
            Ok(ProxOutcome { candidate, spectrum })
        }
    }
}

fn objective_from_spectrum(
    kind: &ProxKind,
    spectrum: &Spectrum,
    fit: f64,
    r: usize,
) -> Result<f64> {
    match kind {
        ProxKind::RankAware => Ok(eval_rr_spectrum(spectrum, r)? + fit * fit),
        ProxKind::Nuclear { mu } => Ok(mu * spectrum.sum() + fit * fit),
    }
}

fn run_descent(
    problem: &ProblemInstance,
    config: &SolverConfig,
    kind: ProxKind,
    x0: Mat,
) -> Result<(Mat, SolverTrace)> {
    config.validate()?;
    let r = problem.target_rank;
    let (rows, cols) = problem.operator.input_shape();
    if x0.nrows() != rows || x0.ncols() != cols {
        return Err(Error::ShapeMismatch(format!(
            "initial point is {}x{}, expected {rows}x{cols}",
            x0.nrows(),
            x0.ncols()
        )));
    }
    if matches!(kind, ProxKind::RankAware) && r >= rows.min(cols) {
        return Err(Error::InvalidInput(format!(
            "target rank {r} must be below min(m, n) = {}",
            rows.min(cols)
        )));
    }

    let mut x = x0;
    let mut current = match &kind {
        ProxKind::RankAware => objective_rr(&x, problem)?,
        ProxKind::Nuclear { mu } => objective_nuclear(&x, problem, *mu)?,
    };
    let mut trace = SolverTrace::new(current);
    let mut tau = config.tau0;
    let mut rejects = 0usize;

    for _ in 0..config.max_iters {
        let m = gradient_step(&x, problem, tau)?;
        let prox = apply_prox(&kind, &m, r, tau)?;
        let fit = problem.fit(&prox.candidate)?;
        let candidate_obj = objective_from_spectrum(&kind, &prox.spectrum, fit, r)?;
        trace.taus.push(tau);
        if candidate_obj < current {
            let step = (&prox.candidate - &x).norm() / x.norm().max(1.0);
            x = prox.candidate;
            current = candidate_obj;
            trace.objectives.push(current);
            trace.accepted.push(true);
            rejects = 0;
            let converged = step < config.step_tol && tau < 1.0 + 1e-6;
            tau = (tau - 1.0) / config.decrease_divisor + 1.0;
            if converged {
                break;
            }
        } else {
            trace.accepted.push(false);
            rejects += 1;
            tau = config.increase_factor * (tau - 1.0) + 1.0;
            if rejects >= config.stall_iters {
                break;
            }
        }
    }

    trace.iterations = trace.taus.len();
    let z = gradient_step(&x, problem, 1.0)?;
    match &kind {
        ProxKind::RankAware => {
            trace.final_stationarity = (&x - truncate_rank(&z, r)?).norm();
            if let Some(delta) = problem.delta {
                trace.certificate = Some(certify(&singular_values(&z)?, r, delta)?);
            }
        }
        ProxKind::Nuclear { mu } => {
            trace.final_stationarity = (&x - nuclear_prox(&z, *mu, 1.0)?).norm();
        }
    }
    Ok((x, trace))
}

/// Runs the rank-aware solver from the spectral initialization.
pub fn gist_solve(problem: &ProblemInstance, config: &SolverConfig) -> Result<(Mat, SolverTrace)> {
    let x0 = default_init(problem)?;
    gist_solve_from(problem, config, x0)
}

/// Runs the rank-aware solver from a caller-supplied initial point.
pub fn gist_solve_from(
    problem: &ProblemInstance,
    config: &SolverConfig,
    x0: Mat,
) -> Result<(Mat, SolverTrace)> {
    run_descent(problem, config, ProxKind::RankAware, x0)
}

/// Runs the nuclear baseline from the spectral initialization.
pub fn nuclear_solve(
    problem: &ProblemInstance,
    mu: f64,
    config: &SolverConfig,
) -> Result<(Mat, SolverTrace)> {
    let x0 = default_init(problem)?;
    nuclear_solve_from(problem, mu, config, x0)
}

/// Runs the nuclear baseline from a caller-supplied initial point.
pub fn nuclear_solve_from(
    problem: &ProblemInstance,
    mu: f64,
    config: &SolverConfig,
    x0: Mat,
) -> Result<(Mat, SolverTrace)> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "nuclear weight must be nonnegative, got {mu}"
        )));
    }
    run_descent(problem, config, ProxKind::Nuclear { mu }, x0)
}

/// Smallest `mu` (to bracket resolution) whose nuclear solution has
/// numerical rank at most `r`, together with that solution.
///
/// Requires the solution at `mu_hi` to already satisfy the rank bound;
/// the returned `mu` is the upper end of the final bracket, so its
/// solution is always feasible. Solves are warm-started along the
/// bisection path.
pub fn bisect_mu(
    problem: &ProblemInstance,
    r: usize,
    mu_lo: f64,
    mu_hi: f64,
    max_bisect: usize,
    config: &SolverConfig,
) -> Result<(f64, Mat)> {
    if !(mu_lo >= 0.0 && mu_hi > mu_lo) {
        return Err(Error::Bracket(format!(
            "need 0 <= mu_lo < mu_hi, got [{mu_lo}, {mu_hi}]"
        )));
    }
    let rank_of = |x: &Mat| -> Result<usize> { crate::spectral::numerical_rank(x) };

    let (x_hi, _) = nuclear_solve(problem, mu_hi, config)?;
    if rank_of(&x_hi)? > r {
        return Err(Error::Bracket(format!(
            "nuclear solution at mu_hi = {mu_hi} has rank {} > {r}",
            rank_of(&x_hi)?
        )));
    }
    let (x_lo, _) = nuclear_solve(problem, mu_lo, config)?;
    if rank_of(&x_lo)? <= r {
        return Ok((mu_lo, x_lo));
    }

    let mut lo = mu_lo;
    let mut hi = mu_hi;
    let mut best = x_hi;
    let mut warm = x_lo;
    for _ in 0..max_bisect {
        let mid = 0.5 * (lo + hi);
        let (x_mid, _) = nuclear_solve_from(problem, mid, config, warm.clone())?;
        if rank_of(&x_mid)? <= r {
            hi = mid;
            best = x_mid.clone();
        } else {
            lo = mid;
        }
        warm = x_mid;
    }
    Ok((hi, best))
}

/// Stationarity test at a candidate of rank <= r: builds
/// `Z = X - A*(A X - b)` and checks that `X` is the best rank-`r`
/// approximation of `Z` to the given relative tolerance. Returns the
/// flag, `Z`, and the certificate when the problem's isometry constant
/// is known.
pub fn is_stationary(
    x: &Mat,
    problem: &ProblemInstance,
    tol: f64,
) -> Result<(bool, Mat, Option<Certificate>)> {
    let r = problem.target_rank;
    if crate::spectral::numerical_rank(x)? > r {
        return Err(Error::Unsupported(format!(
            "stationarity test needs rank(X) <= {r}"
        )));
    }
    let z = gradient_step(x, problem, 1.0)?;
    let residual = (x - truncate_rank(&z, r)?).norm();
    let flag = residual <= tol * z.norm().max(1.0);
    let certificate = match problem.delta {
        Some(delta) => Some(certify(&singular_values(&z)?, r, delta)?),
        None => None,
    };
    Ok((flag, z, certificate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::MeasurementOperator;
    use crate::spectral::{vectorize, Vec64};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    fn random_lowrank(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Mat {
        let u = random_matrix(n, r, rng);
        let v = random_matrix(n, r, rng);
        u * v.transpose()
    }

    /// Square operator with prescribed two-sided isometry defect.
    fn rip_operator(n: usize, delta: f64, rng: &mut ChaCha8Rng) -> MeasurementOperator {
        let g = random_matrix(n * n, n * n, rng);
        let f = svd(&g).unwrap();
        let count = n * n;
        let top = (1.0 + delta).sqrt();
        let bottom = (1.0 - delta).sqrt();
        let values: Vec<f64> = (0..count)
            .map(|i| top + (bottom - top) * i as f64 / (count - 1) as f64)
            .collect();
        MeasurementOperator::dense(f.recompose_with(&values), n, n).unwrap()
    }

    fn identity_problem(x: &Mat, r: usize) -> ProblemInstance {
        let n = x.nrows() * x.ncols();
        let op = MeasurementOperator::dense(Mat::identity(n, n), x.nrows(), x.ncols()).unwrap();
        ProblemInstance::new(op, vectorize(x), r).unwrap()
    }

    #[test]
    fn objective_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = random_lowrank(5, 2, &mut rng);
        let problem = identity_problem(&x, 2);
        assert!(objective_rr(&x, &problem).unwrap().abs() < 1e-9);

        let zero = Mat::zeros(5, 5);
        let b_norm_sq = problem.observations.norm_squared();
        assert_relative_eq!(
            objective_rr(&zero, &problem).unwrap(),
            b_norm_sq,
            max_relative = 1e-12
        );

        let higher = random_lowrank(5, 3, &mut rng);
        let fit = problem.fit(&higher).unwrap();
        assert!(objective_rr(&higher, &problem).unwrap() > fit * fit);
    }

    #[test]
    fn gradient_step_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(3, 3, &mut rng);
        let problem = identity_problem(&x, 1);
        // Zero gradient at the data.
        for tau in [1.0, 2.0, 7.5] {
            let m = gradient_step(&x, &problem, tau).unwrap();
            assert!((&m - &x).norm() < 1e-12);
        }
        // tau -> infinity leaves the iterate in place.
        let y = random_matrix(3, 3, &mut rng);
        let m = gradient_step(&y, &problem, 1e12).unwrap();
        assert!((&m - &y).norm() < 1e-10 * y.norm());
        // tau = 1 produces Z = (I - A*A)X + A*b.
        let z = gradient_step(&y, &problem, 1.0).unwrap();
        assert!((&z - &x).norm() < 1e-12); // identity operator: Z = data
    }

    #[test]
    fn gist_zero_data_returns_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let op = rip_operator(4, 0.2, &mut rng);
        let problem = ProblemInstance::new(op, Vec64::zeros(16), 2).unwrap();
        let (x, trace) = gist_solve(&problem, &SolverConfig::default()).unwrap();
        assert!(x.norm() < 1e-12);
        assert!(trace.objectives[trace.objectives.len() - 1] < 1e-20);
    }

    #[test]
    fn gist_recovers_noiseless_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = rip_operator(8, 0.2, &mut rng);
        let x_true = random_lowrank(8, 2, &mut rng);
        let b = op.apply(&x_true).unwrap();
        let problem = ProblemInstance::new(op, b, 2)
            .unwrap()
            .with_ground_truth(x_true.clone())
            .with_delta(0.2);
        let (x, trace) = gist_solve(&problem, &SolverConfig::default()).unwrap();
        assert!(problem.fit(&x).unwrap() < 1e-6, "fit too large");
        assert!((&x - &x_true).norm() / x_true.norm() < 1e-6);
        let cert = trace.certificate.expect("delta known");
        assert!(cert.certified);
        assert!(crate::spectral::numerical_rank(&x).unwrap() <= 2);
    }

    #[test]
    fn gist_trace_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let op = rip_operator(6, 0.3, &mut rng);
        let x_true = random_lowrank(6, 2, &mut rng);
        let mut b = op.apply(&x_true).unwrap();
        for v in b.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += 0.1 * e;
        }
        let problem = ProblemInstance::new(op, b, 2).unwrap();
        let (_, trace) = gist_solve(&problem, &SolverConfig::default()).unwrap();
        for w in trace.objectives.windows(2) {
            assert!(w[1] < w[0], "accepted objectives must strictly decrease");
        }
        for &t in &trace.taus {
            assert!(t >= 1.0);
        }
        assert_eq!(trace.iterations, trace.taus.len());
        assert_eq!(trace.accepted.len(), trace.taus.len());
        let per_iter = trace.objective_at_each_iteration();
        assert_eq!(per_iter.len(), trace.iterations);
    }

    #[test]
    fn gist_stationary_init_is_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let op = rip_operator(6, 0.2, &mut rng);
        let x_true = random_lowrank(6, 2, &mut rng);
        let b = op.apply(&x_true).unwrap();
        let problem = ProblemInstance::new(op, b, 2).unwrap();
        // Noiseless ground truth is stationary; start there with tau0 = 1.
        let config = SolverConfig {
            tau0: 1.0,
            ..SolverConfig::default()
        };
        let (x, trace) = gist_solve_from(&problem, &config, x_true.clone()).unwrap();
        assert_eq!(x, x_true, "rejected steps must keep the iterate bitwise");
        assert!(trace.final_stationarity < 1e-8);
    }

    #[test]
    fn nuclear_prox_examples() {
        let m = Mat::from_diagonal(&Vec64::from_vec(vec![3.0, 2.0, 1.0]));
        let p = nuclear_prox(&m, 2.0, 1.0).unwrap();
        let expected = Mat::from_diagonal(&Vec64::from_vec(vec![2.0, 1.0, 0.0]));
        assert!((p - expected).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m2 = random_matrix(4, 4, &mut rng);
        assert!((nuclear_prox(&m2, 0.0, 1.5).unwrap() - &m2).norm() < 1e-12);

        let top = singular_values(&m2).unwrap()[0];
        let all_gone = nuclear_prox(&m2, 2.0 * 1.5 * (top + 0.1), 1.5).unwrap();
        assert_eq!(all_gone.norm(), 0.0);
    }

    #[test]
    fn nuclear_solve_identity_and_large_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_matrix(3, 3, &mut rng);
        let problem = identity_problem(&x, 1);
        let (sol, _) = nuclear_solve(&problem, 0.0, &SolverConfig::default()).unwrap();
        assert!((&sol - &x).norm() < 1e-8, "mu = 0 must reproduce the data");

        let big_mu = 10.0 * x.norm();
        let (zero, _) = nuclear_solve(&problem, big_mu, &SolverConfig::default()).unwrap();
        assert!(zero.norm() < 1e-10);
    }

    #[test]
    fn nuclear_fixed_point_optimality_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let op = rip_operator(4, 0.2, &mut rng);
        let x_true = random_lowrank(4, 1, &mut rng);
        let b = op.apply(&x_true).unwrap();
        let problem = ProblemInstance::new(op, b, 1).unwrap();
        let (_, trace) = nuclear_solve(&problem, 0.3, &SolverConfig::default()).unwrap();
        assert!(
            trace.final_stationarity <= 1e-6,
            "optimality residual {} too large",
            trace.final_stationarity
        );
    }

    #[test]
    fn nuclear_matches_subgradient_descent_oracle() {
        // Strongly convex instance (square near-isometric operator), so
        // plain subgradient descent with the classic 2/(lambda k) step
        // converges to the optimum; both routes must agree.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let op = rip_operator(4, 0.1, &mut rng);
        let x_true = random_lowrank(4, 1, &mut rng);
        let b = op.apply(&x_true).unwrap();
        let problem = ProblemInstance::new(op.clone(), b.clone(), 1).unwrap();
        let mu = 0.1;

        let tight = SolverConfig {
            max_iters: 20_000,
            step_tol: 1e-14,
            ..SolverConfig::default()
        };
        let (x_impl, _) = nuclear_solve(&problem, mu, &tight).unwrap();
        let f_impl = objective_nuclear(&x_impl, &problem, mu).unwrap();

        // Oracle: projectionless subgradient descent on the composite.
        let lambda = 2.0 * (1.0 - 0.1);
        let mut x = nuclear_prox(&op.adjoint(&b).unwrap(), mu, 1.0).unwrap();
        let mut best = f64::INFINITY;
        for k in 0..600_000usize {
            let f = objective_nuclear(&x, &problem, mu).unwrap();
            best = best.min(f);
            let factors = svd(&x).unwrap();
            let ones: Vec<f64> = factors
                .spectrum
                .values()
                .iter()
                .map(|&s| if s > 1e-14 { 1.0 } else { 0.0 })
                .collect();
            let sub_nuclear = factors.recompose_with(&ones);
            let residual = op.apply(&x).unwrap() - &b;
            let grad = sub_nuclear * mu + op.adjoint(&residual).unwrap() * 2.0;
            let step = 2.0 / (lambda * (k + 1) as f64);
            x -= grad * step;
        }
        assert!(
            (f_impl - best).abs() < 1e-6,
            "solver objective {f_impl} vs oracle {best}"
        );
        assert!(f_impl <= best + 1e-9, "solver must not be beaten by the oracle");
    }

    #[test]
    fn bisect_mu_identity_diagonal() {
        let data = Mat::from_diagonal(&Vec64::from_vec(vec![3.0, 2.0, 1.0]));
        let problem = identity_problem(&data, 2);
        let max_bisect = 22;
        let (mu_star, sol) =
            bisect_mu(&problem, 2, 0.0, 4.0, max_bisect, &SolverConfig::default()).unwrap();
        let bracket = 4.0 / (1u64 << max_bisect) as f64;
        assert!(
            (mu_star - 2.0).abs() <= 2.0 * bracket,
            "mu* = {mu_star}, bracket = {bracket}"
        );
        assert!(crate::spectral::numerical_rank(&sol).unwrap() <= 2);
    }

    #[test]
    fn bisect_mu_degenerate_and_error_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_matrix(3, 3, &mut rng);
        // Full-rank budget: every mu gives rank <= 3, so the search
        // collapses to mu_lo.
        let problem = identity_problem(&x, 3);
        let (mu_star, _) =
            bisect_mu(&problem, 3, 0.0, 1.0, 16, &SolverConfig::default()).unwrap();
        assert_eq!(mu_star, 0.0);

        // mu_hi too small to reach the target rank.
        let problem2 = identity_problem(&x, 1);
        assert!(matches!(
            bisect_mu(&problem2, 1, 0.0, 1e-8, 8, &SolverConfig::default()),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn stationarity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let op = rip_operator(6, 0.2, &mut rng);
        let x_true = random_lowrank(6, 2, &mut rng);
        let b = op.apply(&x_true).unwrap();
        let problem = ProblemInstance::new(op, b, 2).unwrap().with_delta(0.2);

        let (flag, z, cert) = is_stationary(&x_true, &problem, 1e-8).unwrap();
        assert!(flag);
        assert!((&z - &x_true).norm() < 1e-9 * x_true.norm());
        let cert = cert.unwrap();
        assert!(cert.certified);
        assert!(cert.z_r1.abs() < 1e-9);

        let zero = Mat::zeros(6, 6);
        let (flag0, _, _) = is_stationary(&zero, &problem, 1e-8).unwrap();
        assert!(!flag0, "zero is not stationary for nonzero data");

        let full = random_matrix(6, 6, &mut rng);
        assert!(matches!(
            is_stationary(&full, &problem, 1e-8),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn stationarity_degenerate_operator() {
        // A = 0: Z = X, so any rank-feasible X is stationary.
        let op = MeasurementOperator::dense(Mat::zeros(9, 9), 3, 3).unwrap();
        let problem = ProblemInstance::new(op, Vec64::zeros(9), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_lowrank(3, 1, &mut rng);
        let (flag, z, _) = is_stationary(&x, &problem, 1e-10).unwrap();
        assert!(flag);
        assert_eq!(z, x);
    }
}
