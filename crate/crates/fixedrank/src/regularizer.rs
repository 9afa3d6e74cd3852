//! The rank-aware regularizer `R_r`, its convexified companion
//! `G = R_r + ||.||_F^2`, the proximal operator of `R_r`, subgradient
//! representatives of `G`, and the spectral-gap optimality certificate.
//!
//! `R_r(X)` vanishes exactly on matrices of rank at most `r` and, unlike
//! the nuclear norm, does not penalize the leading singular values. It is
//! evaluated through a one-dimensional concave maximization: the scalar
//! `s` solving
//!
//! ```text
//! sum_{i <= r} max(s - x_i, 0) = sum_{i > r} x_i
//! ```
//!
//! determines both the value of `G` and the structure of its
//! subdifferential. The same scalar, coupled with the prox stationarity
//! conditions, yields the proximal operator in closed form up to a
//! monotone scalar root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{svd, Mat, Spectrum};

fn check_rank_arg(r: usize, len: usize) -> Result<()> {
    if r < 1 || r >= len {
        return Err(Error::InvalidInput(format!(
            "rank parameter must satisfy 1 <= r < {len}, got {r}"
        )));
    }
    Ok(())
}

/// Smallest scalar `s >= x_r` with `sum_{i<=r} max(s - x_i, 0) =
/// sum_{i>r} x_i`, the maximizer of the inner concave objective behind
/// `G`. Solved exactly on the linear piece containing the root.
pub fn s_star(x: &Spectrum, r: usize) -> Result<f64> {
    check_rank_arg(r, x.len())?;
    let tail = x.tail_sum(r);
    if tail <= 0.0 {
        // Flat optimum over [0, x_r]; return the smallest maximizer
        // consistent with s >= x_r.
        return Ok(x[r - 1]);
    }
    // Breakpoints are the top-r values, ascending.
    let mut b: Vec<f64> = x.values()[..r].to_vec();
    b.sort_by(|p, q| p.partial_cmp(q).expect("finite spectrum"));
    let mut prefix = 0.0;
    for j in 1..=r {
        prefix += b[j - 1];
        let s = (tail + prefix) / j as f64;
        let upper = if j < r { b[j] } else { f64::INFINITY };
        if s <= upper {
            debug_assert!(s >= b[j - 1] - 1e-12 * (1.0 + b[r - 1].abs()));
            return Ok(s);
        }
    }
    unreachable!("the consistency equation always has a root past the last breakpoint")
}

/// Exact value of `G(x) = R_r + ||x||^2` on a singular spectrum.
pub fn eval_g(x: &Spectrum, r: usize) -> Result<f64> {
    let s = s_star(x, r)?;
    let mut g = 2.0 * s * x.tail_sum(r);
    for i in 0..r {
        let z = x[i].max(s);
        g += 2.0 * z * x[i] - z * z;
    }
    Ok(g)
}

/// The regularizer on a matrix: `R_r(X) = G(spectrum(X)) - ||X||_F^2`.
/// Nonnegative up to roundoff; zero exactly on matrices of rank <= r.
pub fn eval_rr(x: &Mat, r: usize) -> Result<f64> {
    check_rank_arg(r, x.nrows().min(x.ncols()))?;
    let spectrum = crate::spectral::singular_values(x)?;
    eval_rr_spectrum(&spectrum, r)
}

/// Spectrum-level form of [`eval_rr`].
pub fn eval_rr_spectrum(x: &Spectrum, r: usize) -> Result<f64> {
    Ok(eval_g(x, r)? - x.norm_sq())
}

/// Squared spectral k-support gauge: `||X||_{r*}^2 = G(spectrum(X))`.
/// For `r = 1` this is the squared nuclear norm.
pub fn ksupport_sq(x: &Mat, r: usize) -> Result<f64> {
    check_rank_arg(r, x.nrows().min(x.ncols()))?;
    let spectrum = crate::spectral::singular_values(x)?;
    eval_g(&spectrum, r)
}

/// Result of the proximal map `argmin_X R_r(X) + tau * ||X - M||_F^2`.
#[derive(Debug, Clone)]
pub struct ProxResult {
    /// The global minimizer; shares singular vectors with the input.
    pub minimizer: Mat,
    /// Spectrum of the minimizer, nonincreasing.
    pub spectrum: Spectrum,
    /// The inner maximization scalar at the solution.
    pub s_value: f64,
    /// Attained objective value.
    pub objective: f64,
    /// Set when a spectral tie made the minimizer non-unique (tau = 1) or
    /// forced the sorted/truncated fallback.
    pub degenerate: bool,
}

/// Componentwise prox spectrum for a candidate scalar `s` at `tau > 1`.
fn prox_spectrum_at(m: &Spectrum, r: usize, tau: f64, s: f64) -> Vec<f64> {
    let shrink = |mi: f64| ((tau * mi - s) / (tau - 1.0)).max(0.0);
    (0..m.len())
        .map(|i| {
            if i < r && m[i] >= s {
                m[i]
            } else {
                shrink(m[i])
            }
        })
        .collect()
}

/// Residual of the scalar consistency equation; monotone nondecreasing in `s`.
fn prox_consistency(m: &Spectrum, r: usize, tau: f64, s: f64) -> f64 {
    let x = prox_spectrum_at(m, r, tau, s);
    let lhs: f64 = x[..r].iter().map(|&xi| (s - xi).max(0.0)).sum();
    let rhs: f64 = x[r..].iter().sum();
    lhs - rhs
}

fn prox_objective_spectrum(x: &Spectrum, m: &Spectrum, r: usize, tau: f64) -> Result<f64> {
    let mut dist = 0.0;
    for i in 0..m.len() {
        let d = x[i] - m[i];
        dist += d * d;
    }
    Ok(eval_rr_spectrum(x, r)? + tau * dist)
}

/// Proximal operator of `R_r` with weight `tau >= 1`.
///
/// For `tau = 1` the minimizer is the best rank-`r` approximation of `M`
/// (unique when `m_r > m_{r+1}`; a tie sets the `degenerate` flag and the
/// sorted truncation is returned as the deterministic representative).
/// For `tau > 1` the objective is strictly convex along spectra and the
/// minimizer shares `M`'s singular vectors; its spectrum follows the
/// componentwise stationarity form with the scalar `s` found by bisection
/// of the monotone consistency residual on `[0, tau * m_1]`.
pub fn prox_rr(m: &Mat, r: usize, tau: f64) -> Result<ProxResult> {
    let min_dim = m.nrows().min(m.ncols());
    check_rank_arg(r, min_dim)?;
    if !(tau.is_finite() && tau >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "prox weight must satisfy tau >= 1, got {tau}"
        )));
    }
    let factors = svd(m)?;
    let ms = &factors.spectrum;
    let m1 = ms[0];
    let tie_tol = 1e-10 * (1.0 + m1);
    let tie = ms[r - 1] - ms[r] <= tie_tol;

    if m1 == 0.0 {
        // M = 0: the prox is 0 for every tau.
        return Ok(ProxResult {
            minimizer: Mat::zeros(m.nrows(), m.ncols()),
            spectrum: Spectrum::new(vec![0.0; min_dim])?,
            s_value: 0.0,
            objective: 0.0,
            degenerate: false,
        });
    }

    if tau == 1.0 {
        let mut values = ms.values().to_vec();
        for v in values.iter_mut().skip(r) {
            *v = 0.0;
        }
        let spectrum = Spectrum::new(values.clone())?;
        let objective = prox_objective_spectrum(&spectrum, ms, r, tau)?;
        return Ok(ProxResult {
            minimizer: factors.recompose_with(&values),
            spectrum,
            s_value: ms[r - 1],
            objective,
            degenerate: tie,
        });
    }

    // Bisection for the consistency scalar.
    let tol = 1e-12 * (1.0 + m1);
    let mut lo = 0.0;
    let mut hi = tau * m1;
    if prox_consistency(ms, r, tau, lo) >= 0.0 {
        // Tail already balanced at s = 0 (e.g. zero tail): the root is 0.
        hi = 0.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if prox_consistency(ms, r, tau, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Evaluate at the upper bracket end: on the nonnegative-residual side
    // the tail entries whose exact value is zero come out exactly zero.
    let s = hi;
    let mut values = prox_spectrum_at(ms, r, tau, s);

    // The componentwise form is nonincreasing in exact arithmetic; repair
    // roundoff-scale violations and fall back on the better of the sorted
    // candidate and plain truncation if anything larger shows up.
    let mut degenerate = false;
    let monotone = values.windows(2).all(|w| w[0] >= w[1] - tie_tol);
    for i in 1..values.len() {
        if values[i] > values[i - 1] {
            values[i] = values[i - 1];
        }
    }
    let spectrum = Spectrum::new(values.clone())?;
    if !monotone {
        degenerate = true;
        let mut trunc = ms.values().to_vec();
        for v in trunc.iter_mut().skip(r) {
            *v = 0.0;
        }
        let trunc_spectrum = Spectrum::new(trunc.clone())?;
        let obj_sorted = prox_objective_spectrum(&spectrum, ms, r, tau)?;
        let obj_trunc = prox_objective_spectrum(&trunc_spectrum, ms, r, tau)?;
        if obj_trunc < obj_sorted {
            return Ok(ProxResult {
                minimizer: factors.recompose_with(&trunc),
                spectrum: trunc_spectrum,
                s_value: ms[r - 1],
                objective: obj_trunc,
                degenerate,
            });
        }
    }
    let objective = prox_objective_spectrum(&spectrum, ms, r, tau)?;
    Ok(ProxResult {
        minimizer: factors.recompose_with(&values),
        spectrum,
        s_value: s,
        objective,
        degenerate,
    })
}

/// Builds the subgradient representative `Z = U D_z V^T` of `G` at a
/// matrix of rank <= r: `z_i = x_i` for `i <= r` and `z_{r+j} = tail_j`
/// with tail values in `[0, x_r]`, nonincreasing. `2Z` is then a
/// subgradient of `G` at `X`.
pub fn subgrad_representative(x: &Mat, r: usize, tail: &[f64]) -> Result<Mat> {
    let min_dim = x.nrows().min(x.ncols());
    check_rank_arg(r, min_dim)?;
    let factors = svd(x)?;
    let spectrum = &factors.spectrum;
    if spectrum.numerical_rank() > r {
        return Err(Error::Unsupported(format!(
            "subgradient representative needs rank(X) <= {r}, got {}",
            spectrum.numerical_rank()
        )));
    }
    if tail.len() != min_dim - r {
        return Err(Error::InvalidInput(format!(
            "tail must have {} entries, got {}",
            min_dim - r,
            tail.len()
        )));
    }
    let bound = spectrum[r - 1];
    let slack = 1e-12 * (1.0 + bound);
    for (j, t) in tail.iter().enumerate() {
        if !(*t >= -slack && *t <= bound + slack) {
            return Err(Error::InvalidInput(format!(
                "tail entry {j} = {t} outside [0, {bound}]"
            )));
        }
        if j > 0 && tail[j - 1] < *t - slack {
            return Err(Error::InvalidInput(
                "tail entries must be nonincreasing".into(),
            ));
        }
    }
    let mut values: Vec<f64> = spectrum.values()[..r].to_vec();
    values.extend(tail.iter().map(|t| t.clamp(0.0, bound)));
    Ok(factors.recompose_with(&values))
}

/// Optimality certificate from the spectral gap of the stationarity
/// matrix `Z`: when `z_{r+1} < (1 - 2 * delta_2r) * z_r` and
/// `delta_2r < 1/2`, the stationary point at hand is the only one of rank
/// at most `r` (and hence the only one overall).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub z_r: f64,
    pub z_r1: f64,
    pub delta_2r: f64,
    pub certified: bool,
    pub margin: f64,
}

/// Evaluates the certificate predicate on the spectrum of `Z`.
pub fn certify(z: &Spectrum, r: usize, delta_2r: f64) -> Result<Certificate> {
    if r < 1 || r > z.len() {
        return Err(Error::InvalidInput(format!(
            "certificate rank must satisfy 1 <= r <= {}, got {r}",
            z.len()
        )));
    }
    if !(delta_2r.is_finite() && delta_2r >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "isometry constant must be nonnegative, got {delta_2r}"
        )));
    }
    let z_r = z[r - 1];
    let z_r1 = if r < z.len() { z[r] } else { 0.0 };
    let margin = (1.0 - 2.0 * delta_2r) * z_r - z_r1;
    Ok(Certificate {
        z_r,
        z_r1,
        delta_2r,
        certified: margin > 0.0 && delta_2r < 0.5,
        margin,
    })
}
