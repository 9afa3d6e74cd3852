//! The nuclear-norm baseline and the bisection search for the smallest
//! regularization weight reaching a target rank.
//!
//! ```bash
//! cargo run --release -p fixedrank --example nuclear_bisection
//! ```

use fixedrank::operator::{MeasurementOperator, ProblemInstance};
use fixedrank::problems::SyntheticSpec;
use fixedrank::solvers::{bisect_mu, gist_solve, nuclear_solve, SolverConfig};
use fixedrank::spectral::{numerical_rank, vectorize, Mat, Vec64};

fn main() {
    let config = SolverConfig::default();

    // Closed-form sanity case: measuring diag(3,2,1) directly, the rank
    // drops to 2 exactly when mu/2 reaches the smallest singular value.
    let data = Mat::from_diagonal(&Vec64::from_vec(vec![3.0, 2.0, 1.0]));
    let op = MeasurementOperator::dense(Mat::identity(9, 9), 3, 3).unwrap();
    let problem = ProblemInstance::new(op, vectorize(&data), 2).unwrap();
    let (mu_star, solution) = bisect_mu(&problem, 2, 0.0, 4.0, 24, &config).unwrap();
    println!(
        "identity instance: mu* = {mu_star:.8} (analytic value 2), solution rank = {}",
        numerical_rank(&solution).unwrap()
    );

    // On a noisy instance the bias of the nuclear penalty shows up as a
    // worse data fit than the rank-aware relaxation at the same rank.
    let spec = SyntheticSpec {
        m: 12,
        n: 12,
        p: 144,
        rank: 3,
        delta: Some(0.2),
        sigma: 0.4,
        seed: 5,
    };
    let noisy = spec.realize().unwrap();
    let (x_rr, _) = gist_solve(&noisy, &config).unwrap();

    let mut mu_hi = 8.0;
    loop {
        let (x, _) = nuclear_solve(&noisy, mu_hi, &config).unwrap();
        if numerical_rank(&x).unwrap() <= 3 {
            break;
        }
        mu_hi *= 2.0;
    }
    let (mu_star, x_nuclear) = bisect_mu(&noisy, 3, 0.0, mu_hi, 20, &config).unwrap();
    println!(
        "noisy instance: rank-aware fit = {:.4}, nuclear fit at mu* = {mu_star:.4}: {:.4}",
        noisy.fit(&x_rr).unwrap(),
        noisy.fit(&x_nuclear).unwrap()
    );
    println!(
        "ranks: rank-aware = {}, nuclear = {}",
        numerical_rank(&x_rr).unwrap(),
        numerical_rank(&x_nuclear).unwrap()
    );
}
