//! Shared helpers and independent oracles for the integration suites.
//!
//! The oracles here deliberately avoid the code paths they are used to
//! check: the prox oracle searches the spectrum domain directly, and the
//! growth-bound constructions follow the subgradient structure by hand.

use fixedrank::regularizer::eval_rr_spectrum;
use fixedrank::spectral::{Mat, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random matrix with orthonormal columns via QR of a Gaussian.
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let g = gaussian_matrix(rows, rows.max(cols), rng);
    let qr = g.qr();
    let q = qr.q();
    q.columns(0, cols).into_owned()
}

/// Prox objective over spectra: `R_r(x) + tau * ||x - m||^2`.
pub fn prox_objective(x: &[f64], m: &[f64], r: usize, tau: f64) -> f64 {
    let spectrum = Spectrum::new(x.to_vec()).expect("sorted candidate");
    let mut dist = 0.0;
    for i in 0..m.len() {
        let d = x[i] - m[i];
        dist += d * d;
    }
    eval_rr_spectrum(&spectrum, r).expect("valid rank") + tau * dist
}

/// Brute-force prox oracle: multi-start nested-grid coordinate descent
/// over nonincreasing nonnegative spectra with the singular vectors held
/// at the input's. Extra starting points (for instance the candidate
/// produced by the implementation under test) can be supplied; local
/// refinement from such a start can only drive the oracle value lower.
pub fn prox_oracle(m: &[f64], r: usize, tau: f64, extra_starts: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let top = m[0] * tau + 1.0;
    let mut starts: Vec<Vec<f64>> = vec![
        m.to_vec(),
        {
            let mut t = m.to_vec();
            for v in t.iter_mut().skip(r) {
                *v = 0.0;
            }
            t
        },
        vec![0.0; n],
        m.iter().map(|v| v * 0.5).collect(),
    ];
    starts.extend(extra_starts.iter().cloned());

    let mut best_val = f64::INFINITY;
    for start in starts {
        let mut x = start;
        // Keep the candidate sorted by clamping each coordinate between
        // its neighbors during the sweep.
        let mut previous = f64::INFINITY;
        for _sweep in 0..200 {
            for i in 0..n {
                let hi = if i == 0 { top } else { x[i - 1] };
                let lo = if i + 1 == n { 0.0 } else { x[i + 1] };
                x[i] = line_min(&x, i, lo, hi, m, r, tau);
            }
            let val = prox_objective(&x, m, r, tau);
            if previous - val < 1e-13 * (1.0 + val.abs()) {
                break;
            }
            previous = val;
        }
        let val = prox_objective(&x, m, r, tau);
        if val < best_val {
            best_val = val;
        }
    }
    best_val
}

/// Nested grid search for the best value of coordinate `i` in `[lo, hi]`.
/// Trial points are clamped back into the bound so roundoff in the grid
/// arithmetic cannot break the sortedness of the candidate.
fn line_min(x: &[f64], i: usize, lo0: f64, hi0: f64, m: &[f64], r: usize, tau: f64) -> f64 {
    let hi0 = hi0.max(lo0);
    let mut lo = lo0;
    let mut hi = hi0;
    let mut candidate = x.to_vec();
    let mut best = (f64::INFINITY, x[i].clamp(lo0, hi0));
    for _level in 0..6 {
        let steps = 48;
        for k in 0..=steps {
            let v = (lo + (hi - lo) * k as f64 / steps as f64).clamp(lo0, hi0);
            candidate[i] = v;
            let val = prox_objective(&candidate, m, r, tau);
            if val < best.0 {
                best = (val, v);
            }
        }
        let width = (hi - lo) / steps as f64;
        lo = (best.1 - 2.0 * width).max(lo0);
        hi = (best.1 + 2.0 * width).min(hi0);
        if hi - lo < 1e-14 {
            break;
        }
    }
    best.1
}

/// One random instance of the scalar growth-bound construction: vectors
/// with `r` positive entries on random index sets, companions built from
/// the subgradient structure, and the separation hypothesis enforced by
/// construction. Entries are deliberately left unordered.
pub struct GrowthCase {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub z: Vec<f64>,
    pub z_prime: Vec<f64>,
    pub c: f64,
}

pub fn growth_case(n: usize, r: usize, rng: &mut ChaCha8Rng) -> GrowthCase {
    let c: f64 = rng.random_range(0.05..0.95);
    let pick = |rng: &mut ChaCha8Rng| {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            idx.swap(i, j);
        }
        idx.truncate(r);
        idx
    };

    let support = pick(rng);
    let mut x = vec![0.0; n];
    for &i in &support {
        x[i] = rng.random_range(0.05..2.0);
    }
    let s_bar = support.iter().map(|&i| x[i]).fold(f64::INFINITY, f64::min);
    let mut z = x.clone();
    for i in 0..n {
        if !support.contains(&i) {
            z[i] = rng.random_range(0.0..1.0) * c * s_bar * 0.999;
        }
    }

    let support_prime = pick(rng);
    let mut x_prime = vec![0.0; n];
    // Sometimes fewer than r nonzero entries; the index set keeps zeros.
    let keep = if rng.random_range(0..10) == 0 { r.saturating_sub(1) } else { r };
    for &i in support_prime.iter().take(keep) {
        x_prime[i] = rng.random_range(0.05..2.0);
    }
    let s_bar_prime = support_prime
        .iter()
        .map(|&i| x_prime[i])
        .fold(f64::INFINITY, f64::min);
    let mut z_prime = x_prime.clone();
    for i in 0..n {
        if !support_prime.contains(&i) {
            z_prime[i] = rng.random_range(0.0..1.0) * s_bar_prime;
        }
    }

    GrowthCase {
        x,
        x_prime,
        z,
        z_prime,
        c,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}
