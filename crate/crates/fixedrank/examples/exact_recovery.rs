//! Noiseless recovery with a near-isometric operator and the uniqueness
//! certificate.
//!
//! ```bash
//! cargo run --release -p fixedrank --example exact_recovery
//! ```

use fixedrank::problems::SyntheticSpec;
use fixedrank::solvers::{gist_solve, gist_solve_from, is_stationary, SolverConfig};
use fixedrank::spectral::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let spec = SyntheticSpec {
        m: 20,
        n: 20,
        p: 400,
        rank: 5,
        delta: Some(0.2),
        sigma: 0.0,
        seed: 42,
    };
    let problem = spec.realize().unwrap();
    let config = SolverConfig::default();

    let (x, trace) = gist_solve(&problem, &config).unwrap();
    let gt = problem.ground_truth.as_ref().unwrap();
    println!(
        "fit = {:.3e}, distance to truth = {:.3e}, iterations = {}",
        problem.fit(&x).unwrap(),
        (&x - gt).norm(),
        trace.iterations
    );
    let certificate = trace.certificate.as_ref().unwrap();
    println!(
        "certificate: z_r = {:.4}, z_r+1 = {:.3e}, margin = {:.4}, certified = {}",
        certificate.z_r, certificate.z_r1, certificate.margin, certificate.certified
    );

    // The certificate guarantees a unique stationary point, so random
    // restarts land on the same matrix.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for restart in 0..3 {
        let x0 = Mat::from_fn(20, 20, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            3.0 * g
        });
        let (x_restart, _) = gist_solve_from(&problem, &config, x0).unwrap();
        println!(
            "restart {restart}: relative distance to first solution = {:.3e}",
            (&x_restart - &x).norm() / x.norm()
        );
    }

    let (stationary, _, _) = is_stationary(&x, &problem, 1e-6).unwrap();
    println!("stationarity check at the solution: {stationary}");
}
